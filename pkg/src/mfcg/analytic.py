"""Closed-form and ODE benchmark solutions the learned results are scored against.

Three solvers live here:

``solve_asymptotic_lq``
    Stationary solution of the discounted quadratic benchmark.  The value
    function is the quadratic ``V(x) = G2 x^2 + G1 x + G0`` with

        G2 = (-beta + sqrt(beta^2 + 8 (c1 + c3 + c1_tilde))) / 4,
        G1 = (2 c5t m - 2 c1t c2t (2 - c2t) m - 2 c1 c2 m - 2 c3 c4) / (beta + 2 G2),
        G0 = (c1 c2^2 m^2 + (c1t c2t^2 + c5t) m^2 + sigma^2 G2 - G1^2 / 2 + c3 c4^2) / beta,

    evaluated at the self-consistent mean
    ``m = c3 c4 / (c1 (1 - c2) + c1t (1 - c2t)^2 + c3 + c5t)``.
    The optimal feedback is ``a(x) = -(2 G2 x + G1) = -2 G2 (x - m)`` and the
    stationary state law is Normal(m, sigma^2 / (4 G2)).

``solve_trader``
    Deterministic part of the execution benchmark's forward-backward system.
    With ``B = 1/c_alpha``, ``C = c_x``, ``D = -c_h / (2 c_alpha)`` and
    ``R = D^2 + B C > 0``, set ``delta_pm = -D +- sqrt(R)``.  The mean-field
    gain is

        eta_bar(t) = [-C (E - 1) - c_g (d+ E - d-)]
                     / [(d- E - d+) - c_g B (E - 1)],   E = exp((d+ - d-)(T - t)),

    the individual gain ``eta(t) = c_alpha c_g / (c_alpha + c_g (T - t))``,
    ``E[X_t] = x0 exp(-int_0^t eta_bar / c_alpha)``, the control intercept
    ``psi(t) = (eta_bar(t) - eta(t)) E[X_t]``, the feedback
    ``a_t(x) = -(eta(t) x + psi(t)) / c_alpha``, and

        Var(X_t) = sigma0^2 exp(-(2/c_alpha) int_0^t eta)
                 + sigma^2 int_0^t exp(-(2/c_alpha) int_s^t eta) ds.

    Time integrals use composite trapezoid on a uniform mesh of width
    ``quad_step`` (1e-4 by default).

``solve_finite_player_riccati``
    Backward Riccati system of the finite-player game with M groups
    (``group_count = inf`` gives the limit system):

        eta' - eta^2 = -c1,                    eta(T) = 0,
        phi' - phi^2 - 2 phi zeta = -c2 + c1/M, phi(T) = 0,
        zeta' - zeta^2 = -c1/M,                 zeta(T) = 0.

    Integrated with fixed-step fourth-order Runge-Kutta in time-to-go.
    In the limit, zeta vanishes and eta, phi have the explicit forms
    ``sqrt(c) tanh(sqrt(c) (T - t))`` with c = c1, c2 respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Grid, gaussian_on_grid
from .envs import LQCostParams, TraderCostParams
from .errors import (
    DegenerateParametersError,
    DimensionError,
    IntegrationError,
    UnsupportedParametersError,
)

_BLOWUP_LIMIT = 1e6


# --------------------------------------------------------------------------
# Stationary quadratic benchmark
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class StationaryQuadraticSolution:
    """Quadratic value coefficients at the self-consistent mean, and the
    resulting stationary Gaussian state law."""

    curvature: float   # G2
    slope: float       # G1 evaluated at the fixed-point mean
    offset: float      # G0 evaluated at the fixed-point mean
    mean: float        # fixed-point state mean
    variance: float    # stationary variance sigma^2 / (4 G2)
    beta: float
    sigma: float

    def control(self, x):
        """Optimal stationary feedback, vectorized over ``x``."""
        return -(2.0 * self.curvature * np.asarray(x, dtype=np.float64) + self.slope)


def solve_asymptotic_lq(cost: LQCostParams, beta: float, sigma: float) -> StationaryQuadraticSolution:
    if beta <= 0:
        raise DegenerateParametersError(f"beta must be positive, got {beta}")
    curvature_sum = cost.c1 + cost.c3 + cost.c1_tilde
    disc = beta * beta + 8.0 * curvature_sum
    if disc < 0:
        raise DegenerateParametersError(
            f"beta^2 + 8 (c1 + c3 + c1_tilde) = {disc} < 0; no real curvature"
        )
    curvature = (-beta + math.sqrt(disc)) / 4.0
    if curvature <= 0:
        raise DegenerateParametersError(
            "value curvature is not positive; stationary variance undefined "
            f"(c1 + c3 + c1_tilde = {curvature_sum})"
        )
    mean_denom = (
        cost.c1 * (1.0 - cost.c2)
        + cost.c1_tilde * (1.0 - cost.c2_tilde) ** 2
        + cost.c3
        + cost.c5_tilde
    )
    if mean_denom == 0.0:
        raise DegenerateParametersError(
            "fixed-point mean denominator c1 (1 - c2) + c1_tilde (1 - c2_tilde)^2 "
            "+ c3 + c5_tilde is zero"
        )
    mean = cost.c3 * cost.c4 / mean_denom
    slope = (
        2.0 * cost.c5_tilde * mean
        - 2.0 * cost.c1_tilde * cost.c2_tilde * (2.0 - cost.c2_tilde) * mean
        - 2.0 * cost.c1 * cost.c2 * mean
        - 2.0 * cost.c3 * cost.c4
    ) / (beta + 2.0 * curvature)
    offset = (
        cost.c1 * cost.c2 ** 2 * mean ** 2
        + (cost.c1_tilde * cost.c2_tilde ** 2 + cost.c5_tilde) * mean ** 2
        + sigma * sigma * curvature
        - 0.5 * slope * slope
        + cost.c3 * cost.c4 ** 2
    ) / beta
    return StationaryQuadraticSolution(
        curvature=curvature,
        slope=slope,
        offset=offset,
        mean=mean,
        variance=sigma * sigma / (4.0 * curvature),
        beta=beta,
        sigma=sigma,
    )


def asymptotic_theory_distribution(sol: StationaryQuadraticSolution, grid: Grid) -> np.ndarray:
    """Stationary Gaussian state law discretized to the grid nodes."""
    return gaussian_on_grid(grid, sol.mean, math.sqrt(sol.variance))


# --------------------------------------------------------------------------
# Execution (trader) benchmark
# --------------------------------------------------------------------------

def _cumulative_trapezoid(values: np.ndarray, step: float) -> np.ndarray:
    """Running trapezoid integral over a uniform mesh, starting at 0."""
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum((values[1:] + values[:-1]) * (0.5 * step), out=out[1:])
    return out


@dataclass(frozen=True)
class TraderSolution:
    """Time-dependent gains, state moments, and optimal feedback."""

    cost: TraderCostParams
    horizon: float
    sigma: float
    x0: float
    sigma0: float
    delta_plus: float
    delta_minus: float
    mesh: np.ndarray        # uniform time mesh on [0, horizon]
    mean_path: np.ndarray   # E[X_t] on the mesh
    var_path: np.ndarray    # Var(X_t) on the mesh

    def individual_gain(self, t):
        """eta(t) = c_alpha c_g / (c_alpha + c_g (T - t))."""
        c = self.cost
        t = np.asarray(t, dtype=np.float64)
        return c.c_alpha * c.c_g / (c.c_alpha + c.c_g * (self.horizon - t))

    def mean_field_gain(self, t):
        """eta_bar(t); equals c_g at t = T."""
        c = self.cost
        t = np.asarray(t, dtype=np.float64)
        spread = self.delta_plus - self.delta_minus
        growth = np.exp(spread * (self.horizon - t))
        num = -c.c_x * (growth - 1.0) - c.c_g * (self.delta_plus * growth - self.delta_minus)
        den = (self.delta_minus * growth - self.delta_plus) - c.c_g * (1.0 / c.c_alpha) * (growth - 1.0)
        return num / den

    def state_mean(self, t):
        return np.interp(np.asarray(t, dtype=np.float64), self.mesh, self.mean_path)

    def state_var(self, t):
        return np.interp(np.asarray(t, dtype=np.float64), self.mesh, self.var_path)

    def intercept(self, t):
        """psi(t) = (eta_bar(t) - eta(t)) E[X_t]."""
        return (self.mean_field_gain(t) - self.individual_gain(t)) * self.state_mean(t)

    def control(self, t, x):
        """Optimal feedback a_t(x) = -(eta(t) x + psi(t)) / c_alpha."""
        x = np.asarray(x, dtype=np.float64)
        return -(self.individual_gain(t) * x + self.intercept(t)) / self.cost.c_alpha


def solve_trader(cost: TraderCostParams, horizon: float, sigma: float,
                 x0: float, sigma0: float, quad_step: float = 1e-4) -> TraderSolution:
    if cost.c_alpha <= 0:
        raise UnsupportedParametersError(f"c_alpha must be positive, got {cost.c_alpha}")
    if cost.c_g < 0:
        raise UnsupportedParametersError(f"c_g must be >= 0, got {cost.c_g}")
    if horizon <= 0:
        raise DimensionError(f"horizon must be positive, got {horizon}")
    if quad_step <= 0:
        raise DimensionError(f"quad_step must be positive, got {quad_step}")
    b = 1.0 / cost.c_alpha
    d = -cost.c_h / (2.0 * cost.c_alpha)
    r = d * d + b * cost.c_x
    if r <= 0:
        raise UnsupportedParametersError(
            f"R = D^2 + B C = {r} <= 0; oscillatory regime not covered by the closed form"
        )
    delta_plus = -d + math.sqrt(r)
    delta_minus = -d - math.sqrt(r)

    n = max(1, int(math.ceil(horizon / quad_step)))
    mesh = np.linspace(0.0, horizon, n + 1)
    step = horizon / n

    spread = delta_plus - delta_minus
    growth = np.exp(spread * (horizon - mesh))
    num = -cost.c_x * (growth - 1.0) - cost.c_g * (delta_plus * growth - delta_minus)
    den = (delta_minus * growth - delta_plus) - cost.c_g * b * (growth - 1.0)
    if np.any(den == 0.0) or not np.all(np.isfinite(num / den)):
        raise UnsupportedParametersError(
            "mean-field gain denominator vanishes on [0, T]; parameters unsupported"
        )
    mean_gain = num / den
    individual_gain = cost.c_alpha * cost.c_g / (cost.c_alpha + cost.c_g * (horizon - mesh))

    # E[X_t] = x0 exp(-(1/c_alpha) int_0^t eta_bar)
    int_mean_gain = _cumulative_trapezoid(mean_gain, step)
    mean_path = x0 * np.exp(-int_mean_gain / cost.c_alpha)

    # Var(X_t) = sigma0^2 e^{-2 I(t)/c_a} + sigma^2 e^{-2 I(t)/c_a} int_0^t e^{2 I(s)/c_a} ds
    int_gain = _cumulative_trapezoid(individual_gain, step)
    decay = np.exp(-2.0 * int_gain / cost.c_alpha)
    var_path = sigma0 * sigma0 * decay + sigma * sigma * decay * _cumulative_trapezoid(
        np.exp(2.0 * int_gain / cost.c_alpha), step
    )

    return TraderSolution(
        cost=cost,
        horizon=float(horizon),
        sigma=float(sigma),
        x0=float(x0),
        sigma0=float(sigma0),
        delta_plus=delta_plus,
        delta_minus=delta_minus,
        mesh=mesh,
        mean_path=mean_path,
        var_path=var_path,
    )


def trader_theory_distribution(sol: TraderSolution, t: float, grid: Grid) -> np.ndarray:
    """Gaussian state law at time ``t`` discretized to the grid nodes."""
    if not 0.0 <= t <= sol.horizon:
        raise DimensionError(f"time {t} outside [0, {sol.horizon}]")
    return gaussian_on_grid(grid, float(sol.state_mean(t)), math.sqrt(float(sol.state_var(t))))


# --------------------------------------------------------------------------
# Finite-player Riccati system and its large-M limit
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiPath:
    """Solution triple on an ascending time mesh over [0, T]."""

    times: np.ndarray
    eta: np.ndarray
    phi: np.ndarray
    zeta: np.ndarray
    group_count: float  # math.inf for the limit system


def solve_finite_player_riccati(c1: float, c2: float, horizon: float,
                                group_count: float = math.inf,
                                mesh_step: float = 1e-4) -> RiccatiPath:
    if horizon <= 0:
        raise DimensionError(f"horizon must be positive, got {horizon}")
    if mesh_step <= 0:
        raise DimensionError(f"mesh_step must be positive, got {mesh_step}")
    if group_count != math.inf and group_count < 1:
        raise DimensionError(f"group_count must be >= 1 or inf, got {group_count}")
    coupling = 0.0 if group_count == math.inf else c1 / float(group_count)

    n = max(1, int(math.ceil(horizon / mesh_step)))
    h = horizon / n

    # Time-to-go form: d eta/ds = c1 - eta^2, d phi/ds = c2 - c1/M - phi^2 - 2 phi zeta,
    # d zeta/ds = c1/M - zeta^2, all starting from 0 at s = 0.
    def rhs(e, p, z):
        return (
            c1 - e * e,
            c2 - coupling - p * p - 2.0 * p * z,
            coupling - z * z,
        )

    eta = np.empty(n + 1)
    phi = np.empty(n + 1)
    zeta = np.empty(n + 1)
    eta[0] = phi[0] = zeta[0] = 0.0
    e, p, z = 0.0, 0.0, 0.0
    for i in range(n):
        k1 = rhs(e, p, z)
        k2 = rhs(e + 0.5 * h * k1[0], p + 0.5 * h * k1[1], z + 0.5 * h * k1[2])
        k3 = rhs(e + 0.5 * h * k2[0], p + 0.5 * h * k2[1], z + 0.5 * h * k2[2])
        k4 = rhs(e + h * k3[0], p + h * k3[1], z + h * k3[2])
        e += (h / 6.0) * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        p += (h / 6.0) * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        z += (h / 6.0) * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        if not (math.isfinite(e) and math.isfinite(p) and math.isfinite(z)) or (
            abs(e) > _BLOWUP_LIMIT or abs(p) > _BLOWUP_LIMIT or abs(z) > _BLOWUP_LIMIT
        ):
            raise IntegrationError(
                f"Riccati integration blew up at time-to-go {(i + 1) * h:.6g} "
                f"(|values| > {_BLOWUP_LIMIT:g})"
            )
        eta[i + 1], phi[i + 1], zeta[i + 1] = e, p, z

    # Stored in forward time: t = horizon - s, ascending.
    return RiccatiPath(
        times=horizon - np.flip(np.linspace(0.0, horizon, n + 1)),
        eta=np.flip(eta),
        phi=np.flip(phi),
        zeta=np.flip(zeta),
        group_count=float(group_count) if group_count != math.inf else math.inf,
    )


@dataclass(frozen=True)
class RiccatiGap:
    """Sup-norm distances between the M-group system and its limit."""

    group_count: float
    zeta_sup: float
    phi_gap_sup: float


def riccati_limit_gap(c1: float, c2: float, horizon: float,
                      group_counts, mesh_step: float = 1e-4) -> list[RiccatiGap]:
    """Gap table quantifying convergence of the finite-group Riccati solution.

    For each M, reports ``sup_t |zeta^M_t|`` and ``sup_t |phi^M_t - phi^inf_t|``;
    both shrink like O(1/M).
    """
    limit = solve_finite_player_riccati(c1, c2, horizon, math.inf, mesh_step)
    rows = []
    for m in group_counts:
        path = solve_finite_player_riccati(c1, c2, horizon, m, mesh_step)
        rows.append(
            RiccatiGap(
                group_count=float(m),
                zeta_sup=float(np.max(np.abs(path.zeta))),
                phi_gap_sup=float(np.max(np.abs(path.phi - limit.phi))),
            )
        )
    return rows
