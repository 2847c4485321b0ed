"""Experiment orchestration: configs, multi-run execution, scoring, CSV output.

The pipeline is ``load_config`` -> ``run_experiment`` -> ``compare_to_theory``
-> ``emit_csv``.  A config fully determines the experiment; together with the
base seed it pins every emitted byte except the timestamp in ``meta.csv``.

Config files use INI syntax: ``[section]`` headers over flat ``key = value``
lines.  Sections and keys are fixed per benchmark (see the bundled files under
``mfcg/configs/``); unknown keys are rejected so typos cannot silently fall
back to defaults.  All validation failures raise :class:`~mfcg.errors.ConfigError`
naming the offending ``section.key`` path.

Aggregation convention: within each run the learned control per state (and
per time step for the finite-horizon benchmark) is the *modal* greedy action
over the last ``tail_window`` episodes, and the reported distributions are
means over that window; across runs, controls and distributions are averaged.
"""

from __future__ import annotations

import configparser
import datetime
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .analytic import (
    StationaryQuadraticSolution,
    TraderSolution,
    asymptotic_theory_distribution,
    solve_asymptotic_lq,
    solve_trader,
    trader_theory_distribution,
)
from .core import Grid, mean_of
from .envs import AsymptoticLQEnv, LQCostParams, TraderCostParams, TraderEnv
from .errors import ConfigError, DimensionError
from .learner import FiniteHorizonQLearner, InfiniteHorizonQLearner
from .rates import RateExponents, validate_exponents

__all__ = [
    "ExperimentConfig",
    "ExperimentResults",
    "ComparisonReport",
    "load_config",
    "build_env",
    "solve_benchmark",
    "run_experiment",
    "compare_to_theory",
    "emit_csv",
    "emit_theory_csv",
    "resolve_output_dir",
]

BENCHMARKS = ("asymptotic_lq", "trader")

#: Config schema: section -> key -> parser.  ``None`` markers are filled per
#: benchmark below.
_EXPERIMENT_KEYS = {
    "benchmark": str,
    "episodes": int,
    "runs": int,
    "tail_window": int,
    "base_seed": int,
    "output_dir": str,
}
_ENV_KEYS_COMMON = {
    "state_lo": float,
    "state_hi": float,
    "state_step": float,
    "action_lo": float,
    "action_hi": float,
    "action_step": float,
    "dt": float,
    "sigma": float,
    "horizon": float,
}
_ENV_KEYS_LQ = {**_ENV_KEYS_COMMON, "beta": float}
_ENV_KEYS_TRADER = {**_ENV_KEYS_COMMON, "init_mean": float, "init_std": float}
_COST_KEYS_LQ = {k: float for k in
                 ("c1", "c2", "c3", "c4", "c1_tilde", "c2_tilde", "c5_tilde")}
_COST_KEYS_TRADER = {k: float for k in ("c_alpha", "c_x", "c_h", "c_g")}
_RATE_KEYS = {
    "omega_global": float,
    "omega_q": float,
    "omega_local": float,
    "force_misspecified_rates": bool,
}
_POLICY_KEYS = {"epsilon": float}

_OPTIONAL_KEYS = {("experiment", "output_dir"), ("rates", "force_misspecified_rates")}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (one benchmark, one budget)."""

    benchmark: str
    state_grid: Grid
    action_grid: Grid
    dt: float
    sigma: float
    horizon: float
    beta: float | None            # asymptotic_lq only
    init_mean: float | None       # trader only
    init_std: float | None        # trader only
    cost: LQCostParams | TraderCostParams
    rates: RateExponents
    epsilon: float
    episodes: int
    runs: int
    tail_window: int
    base_seed: int
    output_dir: str | None = None
    force_misspecified_rates: bool = False

    def with_overrides(self, *, episodes=None, runs=None, base_seed=None,
                       tail_window=None, output_dir=None) -> "ExperimentConfig":
        """Copy with CLI-style overrides applied (None keeps the config value)."""
        kwargs = {}
        if episodes is not None:
            kwargs["episodes"] = int(episodes)
        if runs is not None:
            kwargs["runs"] = int(runs)
        if base_seed is not None:
            kwargs["base_seed"] = int(base_seed)
        if tail_window is not None:
            kwargs["tail_window"] = int(tail_window)
        if output_dir is not None:
            kwargs["output_dir"] = str(output_dir)
        out = replace(self, **kwargs) if kwargs else self
        _validate_config(out)
        return out


def _parse_bool(raw: str, path: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{path}: expected a boolean, got {raw!r}")


def _section_schema(benchmark: str) -> dict:
    if benchmark == "asymptotic_lq":
        return {
            "experiment": _EXPERIMENT_KEYS,
            "env": _ENV_KEYS_LQ,
            "cost": _COST_KEYS_LQ,
            "rates": _RATE_KEYS,
            "policy": _POLICY_KEYS,
        }
    return {
        "experiment": _EXPERIMENT_KEYS,
        "env": _ENV_KEYS_TRADER,
        "cost": _COST_KEYS_TRADER,
        "rates": _RATE_KEYS,
        "policy": _POLICY_KEYS,
    }


def _typed(values: dict, section: str, key: str, kind):
    path = f"{section}.{key}"
    if key not in values:
        raise ConfigError(f"{path}: missing required key")
    raw = values[key]
    try:
        if kind is bool:
            return _parse_bool(raw, path)
        return kind(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected {kind.__name__}, got {raw!r}") from exc


def _validate_config(cfg: ExperimentConfig) -> None:
    if cfg.benchmark not in BENCHMARKS:
        raise ConfigError(
            f"experiment.benchmark: must be one of {'|'.join(BENCHMARKS)}, got {cfg.benchmark!r}"
        )
    if cfg.episodes < 1:
        raise ConfigError(f"experiment.episodes: must be >= 1, got {cfg.episodes}")
    if cfg.runs < 1:
        raise ConfigError(f"experiment.runs: must be >= 1, got {cfg.runs}")
    if not 1 <= cfg.tail_window <= cfg.episodes:
        raise ConfigError(
            f"experiment.tail_window: must lie in [1, episodes={cfg.episodes}], "
            f"got {cfg.tail_window}"
        )
    if not 0.0 <= cfg.epsilon <= 1.0:
        raise ConfigError(f"policy.epsilon: must lie in [0, 1], got {cfg.epsilon}")
    if cfg.dt <= 0:
        raise ConfigError(f"env.dt: must be positive, got {cfg.dt}")
    if cfg.sigma < 0:
        raise ConfigError(f"env.sigma: must be >= 0, got {cfg.sigma}")
    if cfg.horizon <= 0:
        raise ConfigError(f"env.horizon: must be positive, got {cfg.horizon}")
    if cfg.benchmark == "asymptotic_lq" and (cfg.beta is None or cfg.beta <= 0):
        raise ConfigError(f"env.beta: must be positive, got {cfg.beta}")
    if cfg.benchmark == "trader" and (cfg.init_std is None or cfg.init_std < 0):
        raise ConfigError(f"env.init_std: must be >= 0, got {cfg.init_std}")
    if not cfg.force_misspecified_rates:
        try:
            validate_exponents(cfg.rates)
        except Exception as exc:
            raise ConfigError(
                f"rates: {exc} (set rates.force_misspecified_rates = true to run anyway)"
            ) from exc
    else:
        for name in ("omega_global", "omega_q", "omega_local"):
            val = getattr(cfg.rates, name)
            if not 0.0 < val <= 1.0:
                raise ConfigError(f"rates.{name}: must lie in (0, 1], got {val}")


def load_config(path) -> ExperimentConfig:
    """Parse and validate an experiment config file.

    Raises :class:`~mfcg.errors.ConfigError` with a ``section.key`` path for
    any missing key, unknown key, type mismatch, or invariant violation.
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise ConfigError(f"config file not found: {file_path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(file_path, encoding="utf-8") as handle:
            parser.read_file(handle)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error in {file_path}: {exc}") from exc

    sections = {name: dict(parser[name]) for name in parser.sections()}
    experiment = sections.get("experiment", {})
    benchmark = experiment.get("benchmark", "").strip()
    if benchmark not in BENCHMARKS:
        raise ConfigError(
            f"experiment.benchmark: must be one of {'|'.join(BENCHMARKS)}, got {benchmark!r}"
        )

    schema = _section_schema(benchmark)
    for section in sections:
        if section not in schema:
            raise ConfigError(f"{section}: unknown section")
    for section, keys in schema.items():
        if section not in sections:
            raise ConfigError(f"{section}: missing required section")
        for key in sections[section]:
            if key not in keys:
                raise ConfigError(f"{section}.{key}: unknown key")

    env = sections["env"]
    cost = sections["cost"]
    rates = sections["rates"]
    policy = sections["policy"]

    def get(section_name, values, key):
        return _typed(values, section_name, key, schema[section_name][key])

    try:
        state_grid = Grid.from_bounds(
            get("env", env, "state_lo"), get("env", env, "state_hi"),
            get("env", env, "state_step"),
        )
        action_grid = Grid.from_bounds(
            get("env", env, "action_lo"), get("env", env, "action_hi"),
            get("env", env, "action_step"),
        )
    except DimensionError as exc:
        raise ConfigError(f"env: {exc}") from exc

    if benchmark == "asymptotic_lq":
        cost_params = LQCostParams(*(get("cost", cost, k) for k in _COST_KEYS_LQ))
        beta = get("env", env, "beta")
        init_mean = init_std = None
    else:
        cost_params = TraderCostParams(*(get("cost", cost, k) for k in _COST_KEYS_TRADER))
        beta = None
        init_mean = get("env", env, "init_mean")
        init_std = get("env", env, "init_std")

    force = (_typed(rates, "rates", "force_misspecified_rates", bool)
             if "force_misspecified_rates" in rates else False)
    cfg = ExperimentConfig(
        benchmark=benchmark,
        state_grid=state_grid,
        action_grid=action_grid,
        dt=get("env", env, "dt"),
        sigma=get("env", env, "sigma"),
        horizon=get("env", env, "horizon"),
        beta=beta,
        init_mean=init_mean,
        init_std=init_std,
        cost=cost_params,
        rates=RateExponents(
            get("rates", rates, "omega_global"),
            get("rates", rates, "omega_q"),
            get("rates", rates, "omega_local"),
        ),
        epsilon=get("policy", policy, "epsilon"),
        episodes=get("experiment", experiment, "episodes"),
        runs=get("experiment", experiment, "runs"),
        tail_window=get("experiment", experiment, "tail_window"),
        base_seed=get("experiment", experiment, "base_seed"),
        output_dir=experiment.get("output_dir"),
        force_misspecified_rates=force,
    )
    _validate_config(cfg)
    return cfg


def build_env(cfg: ExperimentConfig):
    """Instantiate the benchmark environment described by the config."""
    if cfg.benchmark == "asymptotic_lq":
        return AsymptoticLQEnv(
            cfg.state_grid, cfg.action_grid, cfg.dt, cfg.sigma,
            cfg.horizon, cfg.beta, cfg.cost,
        )
    return TraderEnv(
        cfg.state_grid, cfg.action_grid, cfg.dt, cfg.sigma,
        cfg.horizon, cfg.cost, cfg.init_mean, cfg.init_std,
    )


def solve_benchmark(cfg: ExperimentConfig):
    """Analytic reference solution for the configured benchmark."""
    if cfg.benchmark == "asymptotic_lq":
        return solve_asymptotic_lq(cfg.cost, cfg.beta, cfg.sigma)
    return solve_trader(cfg.cost, cfg.horizon, cfg.sigma, cfg.init_mean, cfg.init_std)


@dataclass
class ExperimentResults:
    """Aggregated learner outputs plus the matching theory columns.

    For the stationary benchmark the arrays are over states; for the
    finite-horizon benchmark controls and distributions carry a leading time
    axis over the ``horizon_steps`` learned slices (the terminal slice has no
    control and its distributions are never updated, so it is not reported).
    """

    config: ExperimentConfig
    solution: StationaryQuadraticSolution | TraderSolution
    state_values: np.ndarray
    action_values: np.ndarray
    horizon_steps: int | None          # None for the stationary benchmark
    alpha_learned: np.ndarray
    alpha_theory: np.ndarray
    mu_global_learned: np.ndarray      # state marginals
    mu_local_learned: np.ndarray
    mu_theory: np.ndarray
    seeds: list[int] = field(default_factory=list)
    per_run: list[dict] = field(default_factory=list)


def _run_one(cfg: ExperimentConfig, env, seed: int):
    common = dict(
        episodes=cfg.episodes,
        epsilon=cfg.epsilon,
        omega_global=cfg.rates.omega_global,
        omega_q=cfg.rates.omega_q,
        omega_local=cfg.rates.omega_local,
        tail_window=cfg.tail_window,
        seed=seed,
        allow_misspecified_rates=cfg.force_misspecified_rates,
    )
    if cfg.benchmark == "asymptotic_lq":
        learner = InfiniteHorizonQLearner(**common).fit(env)
        return {
            "seed": seed,
            "control": learner.control_values_,
            "global": learner.terminal_global_dist_,
            "local": learner.terminal_local_dist_,
        }
    learner = FiniteHorizonQLearner(**common).fit(env)
    n_steps = env.n_steps
    return {
        "seed": seed,
        "control": learner.control_values_,
        # State marginals of the learned joint laws, reported slices only.
        "global": learner.global_joint_dist_[:n_steps].sum(axis=2),
        "local": learner.local_joint_dist_[:n_steps].sum(axis=2),
    }


def run_experiment(cfg: ExperimentConfig) -> ExperimentResults:
    """Execute ``cfg.runs`` independent runs and aggregate.

    Run ``r`` uses seed ``base_seed + r``.  Per-run controls are the modal
    greedy action over the tail window; per-run distributions are tail means.
    Across runs both are averaged.  A failed run aborts the experiment with
    the failing seed named.
    """
    env = build_env(cfg)
    sol = solve_benchmark(cfg)
    seeds = [cfg.base_seed + r for r in range(cfg.runs)]
    per_run = []
    for seed in seeds:
        try:
            per_run.append(_run_one(cfg, env, seed))
        except Exception as exc:
            raise RuntimeError(f"run with seed {seed} failed: {exc}") from exc

    alpha_learned = np.mean([rec["control"] for rec in per_run], axis=0)
    mu_global = np.mean([rec["global"] for rec in per_run], axis=0)
    mu_local = np.mean([rec["local"] for rec in per_run], axis=0)

    xs = env.state_values
    if cfg.benchmark == "asymptotic_lq":
        alpha_theory = np.asarray(sol.control(xs), dtype=np.float64)
        mu_theory = asymptotic_theory_distribution(sol, cfg.state_grid)
        horizon_steps = None
    else:
        n_steps = env.n_steps
        alpha_theory = np.stack(
            [np.asarray(sol.control(t * cfg.dt, xs), dtype=np.float64)
             for t in range(n_steps)]
        )
        mu_theory = np.stack(
            [trader_theory_distribution(sol, t * cfg.dt, cfg.state_grid)
             for t in range(n_steps)]
        )
        horizon_steps = n_steps

    return ExperimentResults(
        config=cfg,
        solution=sol,
        state_values=xs,
        action_values=env.action_values,
        horizon_steps=horizon_steps,
        alpha_learned=alpha_learned,
        alpha_theory=alpha_theory,
        mu_global_learned=mu_global,
        mu_local_learned=mu_local,
        mu_theory=mu_theory,
        seeds=seeds,
        per_run=per_run,
    )


@dataclass(frozen=True)
class ComparisonReport:
    """Distances between learned results and the analytic solution.

    Scalars summarize the whole experiment (for the finite-horizon benchmark
    they are maxima over reported time steps; ``per_time`` carries the full
    breakdown).  ``weighted_control_rmse`` weights squared control errors by
    the theoretical state law restricted to states carrying at least
    ``support_threshold`` theoretical mass, with the weights renormalized on
    that support.
    """

    weighted_control_rmse: float
    mean_gap: float
    tv_distance_global_theory: float
    tv_distance_local_theory: float
    tv_distance_global_local: float
    support_threshold: float
    per_time: dict | None = None   # finite horizon: metric name -> array over t

    def rows(self):
        """(name, value) pairs for report.csv, scalars first."""
        out = [
            ("weighted_control_rmse", self.weighted_control_rmse),
            ("mean_gap", self.mean_gap),
            ("tv_distance_global_theory", self.tv_distance_global_theory),
            ("tv_distance_local_theory", self.tv_distance_local_theory),
            ("tv_distance_global_local", self.tv_distance_global_local),
            ("support_threshold", self.support_threshold),
        ]
        if self.per_time is not None:
            for name, values in self.per_time.items():
                for t, value in enumerate(values):
                    out.append((f"{name}_t{t}", float(value)))
        return out


def _tv(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(p - q)))


def _weighted_rmse(alpha_learned, alpha_theory, mu_theory, support_threshold):
    mask = mu_theory >= support_threshold
    if not np.any(mask):
        raise DimensionError(
            f"no state carries theoretical mass >= {support_threshold}; "
            "support threshold too high for this grid"
        )
    weights = mu_theory[mask] / mu_theory[mask].sum()
    diff = alpha_learned[mask] - alpha_theory[mask]
    return math.sqrt(float(weights @ (diff * diff)))


def compare_to_theory(results: ExperimentResults, oracle=None,
                      support_threshold: float = 0.01) -> ComparisonReport:
    """Score aggregated results against the analytic solution.

    ``oracle`` defaults to the solution already attached to ``results``;
    passing one whose grid-evaluated arrays disagree in shape raises a
    dimension error.
    """
    sol = oracle if oracle is not None else results.solution
    xs = results.state_values
    grid = results.config.state_grid
    if xs.shape[0] != grid.count:
        raise DimensionError(
            f"results state axis {xs.shape[0]} != config grid count {grid.count}"
        )

    if results.horizon_steps is None:
        alpha_theory = np.asarray(sol.control(xs), dtype=np.float64)
        mu_theory = asymptotic_theory_distribution(sol, grid)
        if results.alpha_learned.shape != alpha_theory.shape:
            raise DimensionError(
                f"learned control shape {results.alpha_learned.shape} != "
                f"theory shape {alpha_theory.shape}"
            )
        rmse = _weighted_rmse(results.alpha_learned, alpha_theory,
                              mu_theory, support_threshold)
        learned_mean = float(results.mu_global_learned @ xs)
        return ComparisonReport(
            weighted_control_rmse=rmse,
            mean_gap=abs(learned_mean - float(sol.mean)),
            tv_distance_global_theory=_tv(results.mu_global_learned, mu_theory),
            tv_distance_local_theory=_tv(results.mu_local_learned, mu_theory),
            tv_distance_global_local=_tv(results.mu_global_learned,
                                         results.mu_local_learned),
            support_threshold=support_threshold,
        )

    n_steps = results.horizon_steps
    dt = results.config.dt
    if results.alpha_learned.shape != (n_steps, xs.shape[0]):
        raise DimensionError(
            f"learned control shape {results.alpha_learned.shape} != "
            f"({n_steps}, {xs.shape[0]})"
        )
    rmse_t = np.empty(n_steps)
    gap_t = np.empty(n_steps)
    tv_gt = np.empty(n_steps)
    tv_lt = np.empty(n_steps)
    tv_gl = np.empty(n_steps)
    for t in range(n_steps):
        time = t * dt
        alpha_theory = np.asarray(sol.control(time, xs), dtype=np.float64)
        mu_theory = trader_theory_distribution(sol, time, grid)
        rmse_t[t] = _weighted_rmse(results.alpha_learned[t], alpha_theory,
                                   mu_theory, support_threshold)
        gap_t[t] = abs(float(results.mu_global_learned[t] @ xs)
                       - float(sol.state_mean(time)))
        tv_gt[t] = _tv(results.mu_global_learned[t], mu_theory)
        tv_lt[t] = _tv(results.mu_local_learned[t], mu_theory)
        tv_gl[t] = _tv(results.mu_global_learned[t], results.mu_local_learned[t])
    return ComparisonReport(
        weighted_control_rmse=float(rmse_t.max()),
        mean_gap=float(gap_t.max()),
        tv_distance_global_theory=float(tv_gt.max()),
        tv_distance_local_theory=float(tv_lt.max()),
        tv_distance_global_local=float(tv_gl.max()),
        support_threshold=support_threshold,
        per_time={
            "weighted_control_rmse": rmse_t,
            "mean_gap": gap_t,
            "tv_distance_global_theory": tv_gt,
            "tv_distance_local_theory": tv_lt,
            "tv_distance_global_local": tv_gl,
        },
    )


# --------------------------------------------------------------------------
# CSV emission
# --------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _write_rows(path: Path, header: list[str], rows) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(_fmt(cell) for cell in row) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


def _config_rows(cfg: ExperimentConfig, seeds: list[int]):
    rows = [("benchmark", cfg.benchmark)]
    rows += [
        ("state_lo", cfg.state_grid.lo), ("state_hi", cfg.state_grid.hi),
        ("state_step", cfg.state_grid.step), ("state_count", cfg.state_grid.count),
        ("action_lo", cfg.action_grid.lo), ("action_hi", cfg.action_grid.hi),
        ("action_step", cfg.action_grid.step), ("action_count", cfg.action_grid.count),
        ("dt", cfg.dt), ("sigma", cfg.sigma), ("horizon", cfg.horizon),
    ]
    if cfg.benchmark == "asymptotic_lq":
        rows.append(("beta", cfg.beta))
    else:
        rows += [("init_mean", cfg.init_mean), ("init_std", cfg.init_std)]
    for name in type(cfg.cost).__dataclass_fields__:
        rows.append((name, getattr(cfg.cost, name)))
    rows += [
        ("omega_global", cfg.rates.omega_global),
        ("omega_q", cfg.rates.omega_q),
        ("omega_local", cfg.rates.omega_local),
        ("force_misspecified_rates", cfg.force_misspecified_rates),
        ("epsilon", cfg.epsilon),
        ("episodes", cfg.episodes),
        ("runs", cfg.runs),
        ("tail_window", cfg.tail_window),
        ("base_seed", cfg.base_seed),
        ("seeds", " ".join(str(s) for s in seeds)),
    ]
    return rows


def emit_csv(results: ExperimentResults, report: ComparisonReport | None,
             out_dir) -> dict[str, Path]:
    """Write control.csv, distributions.csv, report.csv, and meta.csv.

    Numbers use 9 significant digits, comma separators, LF line endings.
    Returns the mapping of logical name to written path.  ``report`` may be
    ``None`` (e.g. theory-only emission), in which case report.csv lists no
    metrics beyond the header.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    xs = results.state_values
    finite = results.horizon_steps is not None

    if finite:
        control_header = ["t", "x", "alpha_learned", "alpha_theory"]
        control_rows = [
            (t, xs[i], results.alpha_learned[t, i], results.alpha_theory[t, i])
            for t in range(results.horizon_steps)
            for i in range(xs.shape[0])
        ]
        dist_rows = [
            (t, xs[i], results.mu_global_learned[t, i],
             results.mu_local_learned[t, i], results.mu_theory[t, i])
            for t in range(results.horizon_steps)
            for i in range(xs.shape[0])
        ]
    else:
        control_header = ["x", "alpha_learned", "alpha_theory"]
        control_rows = [
            (xs[i], results.alpha_learned[i], results.alpha_theory[i])
            for i in range(xs.shape[0])
        ]
        # Single reported time: the terminal slice index of the episode loop.
        t_report = results.config.horizon / results.config.dt
        dist_rows = [
            (int(round(t_report)), xs[i], results.mu_global_learned[i],
             results.mu_local_learned[i], results.mu_theory[i])
            for i in range(xs.shape[0])
        ]

    paths = {
        "control": out / "control.csv",
        "distributions": out / "distributions.csv",
        "report": out / "report.csv",
        "meta": out / "meta.csv",
    }
    _write_rows(paths["control"], control_header, control_rows)
    _write_rows(
        paths["distributions"],
        ["t", "x", "mu_global_learned", "mu_local_learned", "mu_theory"],
        dist_rows,
    )
    _write_rows(paths["report"], ["metric", "value"],
                report.rows() if report is not None else [])
    meta_rows = _config_rows(results.config, results.seeds)
    meta_rows.append(
        ("timestamp", datetime.datetime.now(datetime.timezone.utc).isoformat())
    )
    _write_rows(paths["meta"], ["key", "value"], meta_rows)
    return paths


def emit_theory_csv(cfg: ExperimentConfig, out_dir) -> dict[str, Path]:
    """Write theory-only control.csv and distributions.csv (plus meta.csv).

    Used by the ``solve`` subcommand: same layout as :func:`emit_csv` minus
    the learned columns.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sol = solve_benchmark(cfg)
    xs = cfg.state_grid.values
    if cfg.benchmark == "asymptotic_lq":
        alpha = np.asarray(sol.control(xs), dtype=np.float64)
        mu = asymptotic_theory_distribution(sol, cfg.state_grid)
        control_header = ["x", "alpha_theory"]
        control_rows = [(xs[i], alpha[i]) for i in range(xs.shape[0])]
        t_report = int(round(cfg.horizon / cfg.dt))
        dist_rows = [(t_report, xs[i], mu[i]) for i in range(xs.shape[0])]
    else:
        n_steps = int(round(cfg.horizon / cfg.dt))
        control_header = ["t", "x", "alpha_theory"]
        control_rows = []
        dist_rows = []
        for t in range(n_steps):
            time = t * cfg.dt
            alpha = np.asarray(sol.control(time, xs), dtype=np.float64)
            mu = trader_theory_distribution(sol, time, cfg.state_grid)
            control_rows += [(t, xs[i], alpha[i]) for i in range(xs.shape[0])]
            dist_rows += [(t, xs[i], mu[i]) for i in range(xs.shape[0])]
    paths = {
        "control": out / "control.csv",
        "distributions": out / "distributions.csv",
        "meta": out / "meta.csv",
    }
    _write_rows(paths["control"], control_header, control_rows)
    _write_rows(paths["distributions"], ["t", "x", "mu_theory"], dist_rows)
    meta_rows = _config_rows(cfg, [])
    meta_rows.append(
        ("timestamp", datetime.datetime.now(datetime.timezone.utc).isoformat())
    )
    _write_rows(paths["meta"], ["key", "value"], meta_rows)
    return paths


def resolve_output_dir(cli_value, cfg: ExperimentConfig, env_value) -> Path:
    """--out flag > config output_dir > MFCG_OUT_DIR env var > ./mfcg-out."""
    for candidate in (cli_value, cfg.output_dir, env_value):
        if candidate:
            return Path(candidate)
    return Path("mfcg-out")
