"""Discrete-grid primitives shared by the learners, the envs, and the harness.

State and action spaces are uniform 1-D lattices (:class:`Grid`).  Probability
vectors over a grid are plain ``float64`` ndarrays on the simplex; Q tables and
visit counters are plain ndarrays as well.  The scalar helpers that sit inside
the episode hot loop (`_project_index`, `_sample_index`, `_argmin_index`,
`_choose_action`) are compiled with numba and are shared verbatim by the pure
Python reference engine and the fast per-benchmark kernels, so the two
backends stay bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError, InvalidDistributionError, InvalidRateError


@dataclass(frozen=True)
class Grid:
    """Uniform lattice ``lo, lo + step, ..., lo + (count - 1) * step``.

    ``count == 1`` is allowed (degenerate grids are useful as forced-action
    spaces in tests); envs impose stricter requirements on their state grids.
    """

    lo: float
    step: float
    count: int

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.step)):
            raise DimensionError("grid bounds must be finite")
        if self.step <= 0:
            raise DimensionError(f"grid step must be positive, got {self.step}")
        if self.count < 1:
            raise DimensionError(f"grid needs at least one point, got count={self.count}")

    @property
    def hi(self) -> float:
        return self.lo + (self.count - 1) * self.step

    @property
    def values(self) -> np.ndarray:
        """Node coordinates as a fresh float64 array."""
        return self.lo + self.step * np.arange(self.count, dtype=np.float64)

    @classmethod
    def from_bounds(cls, lo: float, hi: float, step: float) -> "Grid":
        """Build the lattice covering [lo, hi]; hi must sit on the lattice."""
        if step <= 0:
            raise DimensionError(f"grid step must be positive, got {step}")
        count = int(round((hi - lo) / step)) + 1
        if count < 1 or abs((lo + (count - 1) * step) - hi) > 1e-9 * max(1.0, abs(hi)):
            raise DimensionError(
                f"grid upper bound {hi} is not reachable from {lo} in steps of {step}"
            )
        return cls(float(lo), float(step), count)


# --------------------------------------------------------------------------
# Compiled scalar helpers (hot path; shared by both execution backends)
# --------------------------------------------------------------------------

@njit(cache=True, nogil=True)
def _project_index(value, lo, step, count):
    # Nearest node; exact midpoints round toward the lower index.
    pos = (value - lo) / step
    idx = int(math.ceil(pos - 0.5))
    if idx < 0:
        idx = 0
    elif idx > count - 1:
        idx = count - 1
    return idx


@njit(cache=True, nogil=True)
def _sample_index(dist, u):
    # Inverse-CDF by linear scan; u in [0, 1). Falls back to the last index
    # when accumulated float mass stays below u.
    acc = 0.0
    last = dist.shape[0] - 1
    for i in range(last):
        acc += dist[i]
        if u < acc:
            return i
    return last


@njit(cache=True, nogil=True)
def _argmin_index(row):
    # Ties break toward the lowest index, matching np.argmin.
    best = 0
    best_val = row[0]
    for j in range(1, row.shape[0]):
        if row[j] < best_val:
            best_val = row[j]
            best = j
    return best


@njit(cache=True, nogil=True)
def _choose_action(q_row, epsilon, u_explore, u_action):
    # epsilon-greedy; consumes both uniforms regardless of the branch so the
    # random stream layout does not depend on the realized policy.
    n = q_row.shape[0]
    if u_explore < epsilon:
        j = int(u_action * n)
        if j >= n:
            j = n - 1
        return j
    return _argmin_index(q_row)


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def make_rng(seed: int) -> np.random.Generator:
    """Deterministic PCG64 stream; same seed, same platform => same draws."""
    return np.random.Generator(np.random.PCG64(int(seed)))


def project_to_grid(value: float, grid: Grid) -> int:
    """Index of the grid node nearest to ``value`` (midpoints round down)."""
    if not math.isfinite(value):
        raise DimensionError(f"cannot project non-finite value {value}")
    return int(_project_index(float(value), grid.lo, grid.step, grid.count))


def dirac_mix(dist: np.ndarray, index: int, rate: float, out: np.ndarray | None = None):
    """Blend a point mass into a distribution: ``(1 - rate) * dist + rate * delta_index``.

    Pass ``out=dist`` for the in-place update used inside episodes.  The
    result stays on the simplex whenever ``dist`` does and ``0 <= rate <= 1``.
    """
    if not 0.0 <= rate <= 1.0:
        raise InvalidRateError(f"mixing rate must lie in [0, 1], got {rate}")
    n = dist.shape[0]
    if not 0 <= index < n:
        raise DimensionError(f"dirac index {index} outside distribution of length {n}")
    one_hot = np.zeros(n, dtype=np.float64)
    one_hot[index] = 1.0
    if out is None:
        out = dist.copy()
    elif out is not dist:
        out[...] = dist
    out += rate * (one_hot - out)
    return out


def argmin_row(q: np.ndarray, state: int) -> int:
    """Greedy action index for one state's Q row (ties -> lowest index)."""
    row = q[state]
    if row.ndim != 1:
        raise DimensionError(f"Q row for state {state} is not 1-D: shape {row.shape}")
    return int(_argmin_index(np.asarray(row, dtype=np.float64)))


def mean_of(dist: np.ndarray, grid: Grid) -> float:
    """First moment of a distribution over grid node values."""
    if dist.shape[0] != grid.count:
        raise DimensionError(
            f"distribution length {dist.shape[0]} != grid count {grid.count}"
        )
    return float(np.dot(dist, grid.values))


def marginal_means(joint: np.ndarray, state_grid: Grid, action_grid: Grid) -> tuple[float, float]:
    """(state mean, action mean) of a joint state-action distribution."""
    if joint.shape != (state_grid.count, action_grid.count):
        raise DimensionError(
            f"joint shape {joint.shape} != grids ({state_grid.count}, {action_grid.count})"
        )
    state_mean = float(np.dot(joint.sum(axis=1), state_grid.values))
    action_mean = float(np.dot(joint.sum(axis=0), action_grid.values))
    return state_mean, action_mean


def check_simplex(vec: np.ndarray, *, atol: float = 1e-9, name: str = "distribution") -> None:
    """Raise unless ``vec`` is a probability vector (within ``atol``)."""
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistributionError(f"{name} contains non-finite entries")
    if arr.min(initial=0.0) < -atol:
        raise InvalidDistributionError(f"{name} has negative mass {arr.min()}")
    total = float(arr.sum())
    if abs(total - 1.0) > atol:
        raise InvalidDistributionError(f"{name} mass {total} is not 1 within {atol}")


def sample_from(dist: np.ndarray, rng: np.random.Generator) -> int:
    """Draw one index from a distribution (one uniform consumed)."""
    return int(_sample_index(np.asarray(dist, dtype=np.float64), rng.random()))


def gaussian_on_grid(grid: Grid, mean: float, std: float) -> np.ndarray:
    """Normal density discretized to grid nodes and renormalized.

    ``std == 0`` degenerates to a point mass on the nearest node.
    """
    if std < 0:
        raise DimensionError(f"standard deviation must be >= 0, got {std}")
    if std == 0.0:
        out = np.zeros(grid.count, dtype=np.float64)
        out[project_to_grid(mean, grid)] = 1.0
        return out
    z = (grid.values - mean) / std
    weights = np.exp(-0.5 * z * z)
    total = weights.sum()
    if total <= 0.0 or not math.isfinite(total):
        # All mass collapsed numerically; fall back to the nearest node.
        out = np.zeros(grid.count, dtype=np.float64)
        out[project_to_grid(mean, grid)] = 1.0
        return out
    return weights / total
