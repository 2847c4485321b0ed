"""Learning-rate schedules and the exponent-ordering gate."""

import numpy as np
import pytest

from mfcg import (
    InvalidRateError,
    RateExponents,
    rho_episode,
    rho_q_finite,
    rho_q_infinite,
    validate_exponents,
)


# -- schedules ---------------------------------------------------------------

def test_episode_schedule_values():
    assert rho_episode(0, 0.85) == 1.0
    assert rho_episode(1, 0.85) == pytest.approx(2.0**-0.85)
    assert rho_episode(9, 0.15) == pytest.approx(10.0**-0.15)


def test_visit_schedule_first_update_has_rate_one():
    # Visit counts enter before incrementing, so the table init never matters.
    assert rho_q_infinite(0, 0.55) == 1.0
    assert rho_q_finite(0, 16, 0.55) == 1.0


def test_visit_schedule_frozen_values():
    assert rho_q_infinite(3, 0.55) == pytest.approx(4.0**-0.55)
    assert rho_q_finite(1, 16, 0.55) == pytest.approx(17.0**-0.55)
    assert rho_q_finite(1, 16, 0.55) == pytest.approx(0.2105005, abs=1e-7)


def test_schedules_decrease_and_stay_in_range():
    ks = np.arange(200)
    for omega in (0.15, 0.55, 0.85, 1.0):
        vals = np.array([rho_episode(int(k), omega) for k in ks])
        assert np.all(np.diff(vals) < 0)
        assert np.all((0 < vals) & (vals <= 1.0))


def test_timescale_ordering_pointwise():
    # Slow global, middle Q, fast local: same episode index, ordered rates.
    for k in range(1, 50):
        slow = rho_episode(k, 0.85)
        mid = rho_episode(k, 0.55)
        fast = rho_episode(k, 0.15)
        assert slow < mid < fast


# -- exponent validation -------------------------------------------------------

def test_validate_exponents_accepts_reference_triple():
    validate_exponents(RateExponents(0.85, 0.55, 0.15))


@pytest.mark.parametrize(
    "triple",
    [
        (0.85, 0.55, 0.85),   # local not slower-ordered than Q
        (0.15, 0.55, 0.15),   # global faster than Q
        (0.85, 0.45, 0.15),   # Q exponent at or below 1/2
        (0.85, 1.0, 0.15),    # Q exponent at or above 1
        (1.5, 0.55, 0.15),    # global above 1
        (0.85, 0.55, 0.0),    # local not positive
    ],
)
def test_validate_exponents_rejects_bad_triples(triple):
    with pytest.raises(InvalidRateError):
        validate_exponents(RateExponents(*triple))
