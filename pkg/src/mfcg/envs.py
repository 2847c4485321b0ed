"""Benchmark environments: controlled drift-diffusions on a state lattice.

Dynamics for both benchmarks are Euler steps of ``dX = a dt + sigma dW``
projected back to the state grid (nearest node, midpoints rounding down).
The environments never see distributions — the learners pass the sufficient
statistics of their current distribution estimates into ``running_cost`` as
plain floats, which keeps the envs model-free from the learner's viewpoint:

* stationary quadratic benchmark: global and local **state means**;
* trader benchmark: global **action mean** (price-impact channel) and local
  **state mean** (cooperative inventory channel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import Grid, _project_index, gaussian_on_grid, sample_from
from .errors import DimensionError

__all__ = [
    "LQCostParams",
    "TraderCostParams",
    "GridDiffusionEnv",
    "AsymptoticLQEnv",
    "TraderEnv",
    "quadratic_tracking_cost",
    "execution_cost",
    "inventory_terminal_cost",
]


@dataclass(frozen=True)
class LQCostParams:
    """Coefficients of the stationary quadratic running cost.

    ``f = a^2/2 + c1 (x - c2 m)^2 + c3 (x - c4)^2
        + c1_tilde (x - c2_tilde m_local)^2 + c5_tilde m_local^2``

    where ``m`` is the global state mean and ``m_local`` the local one.
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c1_tilde: float
    c2_tilde: float
    c5_tilde: float


@dataclass(frozen=True)
class TraderCostParams:
    """Coefficients of the execution running cost and terminal inventory cost.

    ``f = c_x m_local^2 / 2 + c_alpha a^2 / 2 - c_h x abar`` with ``abar`` the
    global action mean; terminal cost ``g = c_g x^2 / 2``.
    """

    c_alpha: float
    c_x: float
    c_h: float
    c_g: float


@njit(cache=True, nogil=True)
def quadratic_tracking_cost(x, a, global_mean, local_mean, c1, c2, c3, c4, ct1, ct2, ct5):
    d1 = x - c2 * global_mean
    d2 = x - c4
    d3 = x - ct2 * local_mean
    return 0.5 * (a * a) + c1 * (d1 * d1) + c3 * (d2 * d2) + ct1 * (d3 * d3) + ct5 * (local_mean * local_mean)


@njit(cache=True, nogil=True)
def execution_cost(x, a, global_action_mean, local_state_mean, c_x, c_alpha, c_h):
    return 0.5 * c_x * (local_state_mean * local_state_mean) + 0.5 * c_alpha * (a * a) - c_h * x * global_action_mean


@njit(cache=True, nogil=True)
def inventory_terminal_cost(x, c_g):
    return 0.5 * c_g * (x * x)


class GridDiffusionEnv:
    """Shared lattice dynamics; subclasses add costs and horizon semantics."""

    def __init__(self, state_grid: Grid, action_grid: Grid, dt: float, sigma: float):
        if state_grid.count < 2:
            raise DimensionError("state grid needs at least two points")
        if dt <= 0:
            raise DimensionError(f"dt must be positive, got {dt}")
        if sigma < 0:
            raise DimensionError(f"sigma must be >= 0, got {sigma}")
        self.state_grid = state_grid
        self.action_grid = action_grid
        self.dt = float(dt)
        self.sigma = float(sigma)
        self.state_values = state_grid.values
        self.action_values = action_grid.values
        # Precomputed once so both execution backends use the same float.
        self.sigma_sqrt_dt = float(sigma) * math.sqrt(float(dt))

    def step_index(self, state_index: int, action_index: int, noise: float) -> int:
        """Next state index after one Euler step with standard-normal ``noise``."""
        value = (
            self.state_values[state_index]
            + self.action_values[action_index] * self.dt
            + self.sigma_sqrt_dt * noise
        )
        return int(_project_index(value, self.state_grid.lo, self.state_grid.step, self.state_grid.count))

    def _resolve_steps(self, horizon: float) -> int:
        if horizon <= 0:
            raise DimensionError(f"horizon must be positive, got {horizon}")
        n = int(round(horizon / self.dt))
        if n < 1 or abs(n * self.dt - horizon) > 1e-9 * max(1.0, horizon):
            raise DimensionError(
                f"horizon {horizon} is not a whole number of dt={self.dt} steps"
            )
        return n


class AsymptoticLQEnv(GridDiffusionEnv):
    """Discounted stationary benchmark with quadratic group-tracking costs.

    The episode horizon truncates an infinite-horizon problem; the discrete
    discount per step is ``gamma = exp(-beta * dt)``.
    """

    def __init__(self, state_grid, action_grid, dt, sigma, horizon, beta, cost: LQCostParams):
        super().__init__(state_grid, action_grid, dt, sigma)
        if beta <= 0:
            raise DimensionError(f"discount rate beta must be positive, got {beta}")
        self.horizon = float(horizon)
        self.beta = float(beta)
        self.cost = cost
        self.n_steps = self._resolve_steps(horizon)
        self.gamma = math.exp(-self.beta * self.dt)

    def running_cost(self, x_value, a_value, global_state_mean, local_state_mean):
        c = self.cost
        return quadratic_tracking_cost(
            x_value, a_value, global_state_mean, local_state_mean,
            c.c1, c.c2, c.c3, c.c4, c.c1_tilde, c.c2_tilde, c.c5_tilde,
        )


class TraderEnv(GridDiffusionEnv):
    """Finite-horizon execution benchmark with terminal inventory penalty."""

    def __init__(self, state_grid, action_grid, dt, sigma, horizon,
                 cost: TraderCostParams, init_mean: float, init_std: float):
        super().__init__(state_grid, action_grid, dt, sigma)
        if init_std < 0:
            raise DimensionError(f"init_std must be >= 0, got {init_std}")
        self.horizon = float(horizon)
        self.cost = cost
        self.init_mean = float(init_mean)
        self.init_std = float(init_std)
        self.n_steps = self._resolve_steps(horizon)

    def running_cost(self, x_value, a_value, global_action_mean, local_state_mean):
        c = self.cost
        return execution_cost(
            x_value, a_value, global_action_mean, local_state_mean,
            c.c_x, c.c_alpha, c.c_h,
        )

    def terminal_cost(self, x_value):
        return inventory_terminal_cost(x_value, self.cost.c_g)

    def initial_state_dist(self) -> np.ndarray:
        """Initial inventory distribution discretized to the state grid."""
        return gaussian_on_grid(self.state_grid, self.init_mean, self.init_std)


def env_reset(env: GridDiffusionEnv, initial_dist: np.ndarray,
              rng: np.random.Generator) -> int:
    """Draw an initial state index from a distribution over the state grid."""
    if initial_dist.shape != (env.state_grid.count,):
        raise DimensionError(
            f"initial distribution has shape {initial_dist.shape}, "
            f"expected ({env.state_grid.count},)"
        )
    return sample_from(initial_dist, rng)


def env_step(env: GridDiffusionEnv, state_index: int, action_index: int,
             rng: np.random.Generator) -> int:
    """Advance one step with a fresh standard-normal shock from ``rng``."""
    return env.step_index(state_index, action_index, rng.standard_normal())


def mean_action_of(joint_dist: np.ndarray, action_grid: Grid) -> float:
    """Mean action under a joint state-action distribution."""
    if joint_dist.ndim != 2 or joint_dist.shape[1] != action_grid.count:
        raise DimensionError(
            f"joint distribution has shape {joint_dist.shape}, expected "
            f"(n_states, {action_grid.count})"
        )
    return float(joint_dist.sum(axis=0) @ action_grid.values)
