"""Grid, projection, simplex, and sampling primitives."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfcg import (
    DimensionError,
    Grid,
    InvalidDistributionError,
    argmin_row,
    check_simplex,
    dirac_mix,
    gaussian_on_grid,
    make_rng,
    marginal_means,
    mean_of,
    project_to_grid,
    sample_from,
)


# -- Grid -------------------------------------------------------------------

def test_grid_from_bounds_layout():
    g = Grid.from_bounds(-1.75, 2.25, 0.1)
    assert g.count == 41
    assert g.lo == -1.75
    assert g.hi == pytest.approx(2.25)
    vals = g.values
    assert vals.shape == (41,)
    assert vals[0] == pytest.approx(-1.75)
    assert vals[-1] == pytest.approx(2.25)
    assert np.allclose(np.diff(vals), 0.1)


def test_grid_single_point_allowed():
    g = Grid(0.0, 1.0, 1)
    assert g.hi == 0.0
    assert g.values.tolist() == [0.0]


@pytest.mark.parametrize(
    "lo, hi, step",
    [(0.0, 1.05, 0.1), (0.0, 1.0, -0.1), (0.0, -1.0, 0.5)],
)
def test_grid_from_bounds_rejects_misfit(lo, hi, step):
    with pytest.raises(DimensionError):
        Grid.from_bounds(lo, hi, step)


def test_grid_rejects_bad_fields():
    with pytest.raises(DimensionError):
        Grid(0.0, 0.0, 3)
    with pytest.raises(DimensionError):
        Grid(0.0, 1.0, 0)
    with pytest.raises(DimensionError):
        Grid(float("nan"), 1.0, 3)


# -- Projection --------------------------------------------------------------

def test_projection_midpoints_round_down():
    g = Grid.from_bounds(0.0, 2.0, 1.0)
    assert project_to_grid(0.5, g) == 0
    assert project_to_grid(1.5, g) == 1
    assert project_to_grid(0.5 + 1e-9, g) == 1
    assert project_to_grid(0.49, g) == 0
    assert project_to_grid(0.51, g) == 1


def test_projection_clamps_to_ends():
    g = Grid.from_bounds(-1.0, 1.0, 0.5)
    assert project_to_grid(-50.0, g) == 0
    assert project_to_grid(50.0, g) == g.count - 1
    assert project_to_grid(-1.0, g) == 0
    assert project_to_grid(1.0, g) == g.count - 1


def test_projection_recovers_nodes_exactly():
    g = Grid.from_bounds(-2.0, 2.5, 0.25)
    for i, v in enumerate(g.values):
        assert project_to_grid(float(v), g) == i


# -- argmin_row ---------------------------------------------------------------

def test_argmin_row_ties_take_lowest_index():
    q = np.array([[2.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
    assert argmin_row(q, 0) == 1
    assert argmin_row(q, 1) == 0


def test_argmin_row_rejects_wrong_rank():
    q = np.zeros((2, 3, 4))
    with pytest.raises(DimensionError):
        argmin_row(q, 0)


# -- dirac_mix ----------------------------------------------------------------

def test_dirac_mix_formula_and_aliasing():
    p = np.array([0.25, 0.25, 0.5])
    out = dirac_mix(p, 2, 0.2)
    assert np.allclose(out, [0.2, 0.2, 0.6])
    # In-place form used in the hot loops.
    q = p.copy()
    dirac_mix(q, 2, 0.2, out=q)
    assert np.array_equal(q, out)


def test_dirac_mix_rate_edges():
    p = np.array([0.3, 0.7])
    assert np.array_equal(dirac_mix(p, 0, 0.0), p)
    assert np.array_equal(dirac_mix(p, 1, 1.0), [0.0, 1.0])


@settings(max_examples=300, deadline=None)
@given(
    weights=st.lists(st.floats(1e-3, 1.0), min_size=1, max_size=24),
    rate=st.floats(0.0, 1.0),
    data=st.data(),
)
def test_dirac_mix_preserves_simplex(weights, rate, data):
    p = np.asarray(weights, dtype=np.float64)
    p /= p.sum()
    idx = data.draw(st.integers(0, len(weights) - 1))
    out = dirac_mix(p, idx, rate)
    check_simplex(out)
    assert abs(out.sum() - 1.0) <= 1e-12
    assert out.min() >= 0.0


# -- means --------------------------------------------------------------------

def test_mean_of_matches_dot_product():
    g = Grid.from_bounds(0.0, 3.0, 1.0)
    p = np.array([0.1, 0.2, 0.3, 0.4])
    assert mean_of(p, g) == pytest.approx(float(p @ g.values))


def test_marginal_means_of_joint():
    sg = Grid.from_bounds(0.0, 1.0, 1.0)
    ag = Grid.from_bounds(-1.0, 1.0, 1.0)
    joint = np.array([[0.0, 0.5, 0.0], [0.0, 0.0, 0.5]])
    sm, am = marginal_means(joint, sg, ag)
    assert sm == pytest.approx(0.5)   # states 0, 1 with mass 0.5 each
    assert am == pytest.approx(0.5)   # actions 0, 1 with mass 0.5 each


# -- check_simplex --------------------------------------------------------------

def test_check_simplex_accepts_valid():
    check_simplex(np.array([0.5, 0.5]))
    check_simplex(np.array([1.0]))


def test_check_simplex_rejects_invalid():
    with pytest.raises(InvalidDistributionError):
        check_simplex(np.array([0.6, 0.6]))
    with pytest.raises(InvalidDistributionError):
        check_simplex(np.array([-0.1, 1.1]))


# -- sampling --------------------------------------------------------------------

def test_sample_from_respects_point_mass():
    rng = make_rng(1)
    dist = np.array([0.0, 0.0, 1.0, 0.0])
    assert all(sample_from(dist, rng) == 2 for _ in range(32))


def test_sample_from_frequencies():
    rng = make_rng(7)
    dist = np.array([0.2, 0.3, 0.5])
    n = 40_000
    draws = np.array([sample_from(dist, rng) for _ in range(n)])
    freq = np.bincount(draws, minlength=3) / n
    # 4-sigma binomial bands.
    for k in range(3):
        sigma = np.sqrt(dist[k] * (1 - dist[k]) / n)
        assert abs(freq[k] - dist[k]) <= 4 * sigma


def test_make_rng_is_deterministic():
    a, b = make_rng(123), make_rng(123)
    assert np.array_equal(a.random(16), b.random(16))
    assert not np.array_equal(make_rng(1).random(8), make_rng(2).random(8))


# -- gaussian_on_grid --------------------------------------------------------------

def test_gaussian_on_grid_is_simplex_with_right_moments():
    g = Grid.from_bounds(-4.0, 4.0, 0.1)
    p = gaussian_on_grid(g, 0.5, 0.8)
    check_simplex(p)
    # Tails truncate at the grid edge (4.4 sigma on the near side), which
    # shifts the discrete moments at the 1e-4 scale.
    assert mean_of(p, g) == pytest.approx(0.5, abs=1e-4)
    var = float(p @ (g.values - mean_of(p, g)) ** 2)
    assert var == pytest.approx(0.8**2, rel=2e-3)


def test_gaussian_on_grid_zero_std_is_point_mass():
    g = Grid.from_bounds(0.0, 2.0, 1.0)
    p = gaussian_on_grid(g, 1.2, 0.0)
    assert np.array_equal(p, [0.0, 1.0, 0.0])


def test_gaussian_on_grid_symmetry():
    g = Grid.from_bounds(-2.0, 2.0, 0.5)
    p = gaussian_on_grid(g, 0.0, 0.7)
    assert np.allclose(p, p[::-1])
