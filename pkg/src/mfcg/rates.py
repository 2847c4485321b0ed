"""Learning-rate schedules and the three-timescale ordering check.

Three polynomially decaying rates drive the coupled updates: the global
distribution moves slowest (largest exponent), the Q table in the middle,
the local distribution fastest (smallest exponent).  Episode-indexed rates
use ``1 / (1 + k) ** omega`` with 0-based ``k``; visit-indexed Q rates use
the number of prior visits, so the very first update of any entry has rate
1.0 and the table init never matters.
"""

from __future__ import annotations

from dataclasses import dataclass

from numba import njit

from .errors import InvalidRateError


@dataclass(frozen=True)
class RateExponents:
    """Decay exponents (omega_global, omega_q, omega_local)."""

    omega_global: float
    omega_q: float
    omega_local: float


@njit(cache=True, nogil=True)
def rho_episode(k, omega):
    """Episode-indexed rate ``(1 + k) ** -omega`` for 0-based episode k."""
    return (1.0 + k) ** (-omega)


@njit(cache=True, nogil=True)
def rho_q_infinite(visits, omega):
    """Q rate after ``visits`` prior updates of a state-action entry."""
    return (1.0 + visits) ** (-omega)


@njit(cache=True, nogil=True)
def rho_q_finite(visits, steps_per_episode, omega):
    """Q rate for the finite-horizon table: visits scaled by episode length."""
    return (1.0 + steps_per_episode * visits) ** (-omega)


def validate_exponents(exponents: RateExponents) -> None:
    """Enforce 0 < omega_local < omega_q < omega_global <= 1 and omega_q in (1/2, 1).

    Raises :class:`InvalidRateError` naming the violated inequality.
    """
    g, q, l = exponents.omega_global, exponents.omega_q, exponents.omega_local
    for label, val in (("omega_global", g), ("omega_q", q), ("omega_local", l)):
        if not 0.0 < val <= 1.0:
            raise InvalidRateError(f"{label} = {val} violates 0 < {label} <= 1")
    if not 0.5 < q < 1.0:
        raise InvalidRateError(f"omega_q = {q} violates 1/2 < omega_q < 1")
    if not l < q:
        raise InvalidRateError(
            f"omega_local = {l} >= omega_q = {q}; local updates must be faster than Q"
        )
    if not q < g:
        raise InvalidRateError(
            f"omega_q = {q} >= omega_global = {g}; Q updates must be faster than global"
        )
