"""Shared fixtures: bundled-config access and the desk-scale experiment runs.

The desk-scale asymptotic experiment (20 000 episodes, 3 runs) backs two
acceptance criteria, so it runs once per session and is shared.
"""

from __future__ import annotations

from importlib import resources

import pytest

from mfcg import compare_to_theory, load_config, run_experiment


def bundled_config_path(name: str) -> str:
    """Filesystem path of a bundled config (editable install -> real files)."""
    return str(resources.files("mfcg") / "configs" / f"{name}.cfg")


@pytest.fixture(scope="session")
def desk_lq_config():
    cfg = load_config(bundled_config_path("asymptotic_lq"))
    return cfg.with_overrides(episodes=20_000, runs=3, tail_window=2_000)


@pytest.fixture(scope="session")
def desk_lq(desk_lq_config):
    """Aggregated desk-scale stationary-benchmark results plus their report."""
    results = run_experiment(desk_lq_config)
    return results, compare_to_theory(results)
