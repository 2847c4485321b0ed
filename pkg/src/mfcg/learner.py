"""Three-timescale tabular Q-learners for mean-field control games.

Two estimators, one per problem class:

* :class:`InfiniteHorizonQLearner` — discounted stationary problems.  One Q
  table over states x actions.  The *global* (competitive) state distribution
  is kept per time step and each slice absorbs one point mass per episode on
  the slowest timescale, so within an episode it is effectively frozen.  The
  *local* (cooperative) state distribution is a single running estimate
  remixed at every step on the fastest timescale; because its memory
  (``~1/rho_local`` steps) is short relative to the state's decorrelation
  time, the cost is charged against a law that moves with the controller's
  own trajectory, which is what prices the cooperative (McKean-Vlasov) term.
  Episodes restart from the learned terminal-slice global distribution, so
  that slice converges to the stationary law.
* :class:`FiniteHorizonQLearner` — terminal-cost problems.  One Q table per
  time step; global and local *state-action* distributions per time step;
  fresh starts from the environment's initial distribution.

Per episode ``k`` (0-based) the distribution mixing rates are
``1/(1+k)**omega`` and the Q rate for an entry with ``n`` prior visits is
``1/(1+n)**omega_q`` (infinite horizon) or ``1/(1+T*n)**omega_q`` (finite
horizon, ``T`` steps per episode).  Within a step the order is: pick an
epsilon-greedy action, mix a point mass into both distributions, advance the
state, observe the running cost at the *updated* distribution statistics,
and apply the Q update.

Execution backends
------------------
``fit`` replays episodes in fixed-size chunks from pre-drawn random blocks
(layout per chunk of E episodes with L steps: ``uniform(E)`` initial-state
draws, ``uniform(E, L)`` exploration draws, ``uniform(E, L)`` action draws,
``normal(E, L)`` noise draws).  The ``python`` backend runs a generic engine
against any duck-typed env; the ``numba`` backend dispatches to a compiled
kernel for the two benchmark env families.  Both produce bit-identical
learner state for the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import _kernels
from .core import _choose_action, _sample_index, dirac_mix, make_rng
from .envs import AsymptoticLQEnv, TraderEnv
from .errors import DimensionError
from .rates import (
    RateExponents,
    rho_episode,
    rho_q_finite,
    rho_q_infinite,
    validate_exponents,
)

#: Episodes per pre-drawn random block.  Fixed so that (config, seed) pins the
#: random stream layout and therefore every learned number.
CHUNK_EPISODES = 256


@dataclass(frozen=True)
class StopRule:
    """Optional early-stopping tolerances on sup-norm deltas per episode.

    Stopping triggers only when *all three* tolerances are set and
    simultaneously satisfied; any ``None`` disables tolerance-based stopping
    (the episode budget always binds).  Checking requires per-episode
    snapshots, so it forces chunk size 1; leave disabled for long runs.
    For the stationary learner the local distribution tracks the current
    trajectory by design, so its per-episode delta stays of order
    ``rho_local``; pick ``tol_local`` accordingly.
    """

    tol_q: float | None = None
    tol_global: float | None = None
    tol_local: float | None = None

    @property
    def enabled(self) -> bool:
        return (
            self.tol_q is not None
            and self.tol_global is not None
            and self.tol_local is not None
        )

    def satisfied(self, dq: float, dg: float, dl: float) -> bool:
        return (
            self.enabled
            and dq <= self.tol_q
            and dg <= self.tol_global
            and dl <= self.tol_local
        )


def _episode_rate_array(n_episodes: int, omega: float) -> np.ndarray:
    out = np.empty(n_episodes, dtype=np.float64)
    for k in range(n_episodes):
        out[k] = rho_episode(k, omega)
    return out


def draw_episode_block(rng: np.random.Generator, n_episodes: int, n_steps: int):
    """Pre-draw one chunk's randomness in the documented stream order."""
    u_init = rng.random(n_episodes)
    u_explore = rng.random((n_episodes, n_steps))
    u_action = rng.random((n_episodes, n_steps))
    noise = rng.standard_normal((n_episodes, n_steps))
    return u_init, u_explore, u_action, noise


def epsilon_greedy(q_row: np.ndarray, epsilon: float,
                   rng: np.random.Generator) -> int:
    """Pick an action index: greedy w.p. 1-epsilon, uniform otherwise.

    Always consumes exactly two uniforms from ``rng`` so that callers can
    reproduce the stream regardless of which branch is taken.
    """
    row = np.asarray(q_row, dtype=np.float64)
    if row.ndim != 1:
        raise DimensionError(f"expected a 1-D Q row, got shape {row.shape}")
    u_explore = rng.random()
    u_action = rng.random()
    return int(_choose_action(row, epsilon, u_explore, u_action))


def q_update_infinite(q: np.ndarray, state: int, action: int, next_state: int,
                      cost: float, gamma: float, rate: float) -> np.ndarray:
    """One discounted temporal-difference update, in place.

    Target is ``cost + gamma * min_a q[next_state, a]``; the visited entry
    moves toward it by ``rate``.  Returns ``q`` for chaining.
    """
    target = cost + gamma * q[next_state].min()
    q[state, action] += rate * (target - q[state, action])
    return q


def q_update_finite(q_t: np.ndarray, q_next: np.ndarray | None, state: int,
                    action: int, next_state: int, cost: float,
                    terminal_value: float, rate: float) -> np.ndarray:
    """One backward-induction update for a single time slice, in place.

    Continuation is ``min_a q_next[next_state, a]`` when a next slice exists,
    else the supplied terminal value.  Returns ``q_t`` for chaining.
    """
    if q_next is None:
        cont = terminal_value
    else:
        cont = q_next[next_state].min()
    q_t[state, action] += rate * (cost + cont - q_t[state, action])
    return q_t


# --------------------------------------------------------------------------
# Generic single-episode engines (reference semantics; any duck-typed env)
# --------------------------------------------------------------------------

def _episode_infinite(env, q, visits, gdist, ldist, gmeans, lmean,
                      epsilon, omega_q, gamma, rho_g, rho_l, u0, ue, ua, xi):
    # Statements mirror _kernels.run_lq_chunk one-for-one; keep in sync.
    state_vals = env.state_values
    action_vals = env.action_values
    n_iters = ue.shape[0]
    last = n_iters - 1
    x = _sample_index(gdist[last], u0)
    for t in range(n_iters):
        a = _choose_action(q[x], epsilon, ue[t], ua[t])
        xv = state_vals[x]
        av = action_vals[a]
        grow = gdist[t]
        dirac_mix(grow, x, rho_g, out=grow)
        gmeans[t] = gmeans[t] + rho_g * (xv - gmeans[t])
        dirac_mix(ldist, x, rho_l, out=ldist)
        lmean[0] = lmean[0] + rho_l * (xv - lmean[0])
        x2 = env.step_index(x, a, xi[t])
        f = env.running_cost(xv, av, gmeans[t], lmean[0])
        cost_step = f * env.dt
        n = visits[x, a]
        rq = rho_q_infinite(n, omega_q)
        mn = q[x2].min()
        target = cost_step + gamma * mn
        q[x, a] = q[x, a] + rq * (target - q[x, a])
        visits[x, a] = n + 1
        x = x2
    return int(x)


def _episode_finite(env, q, visits, gdist, ldist, gmeans, lmeans,
                    epsilon, omega_q, rho_g, rho_l, u0, ue, ua, xi, init_dist):
    # Statements mirror _kernels.run_trader_chunk one-for-one; keep in sync.
    state_vals = env.state_values
    action_vals = env.action_values
    na = action_vals.shape[0]
    n_steps = ue.shape[0]
    x = _sample_index(init_dist, u0)
    for t in range(n_steps):
        a = _choose_action(q[t, x], epsilon, ue[t], ua[t])
        xv = state_vals[x]
        av = action_vals[a]
        gflat = gdist[t].reshape(-1)
        dirac_mix(gflat, x * na + a, rho_g, out=gflat)
        gmeans[t] = gmeans[t] + rho_g * (av - gmeans[t])
        lflat = ldist[t].reshape(-1)
        dirac_mix(lflat, x * na + a, rho_l, out=lflat)
        lmeans[t] = lmeans[t] + rho_l * (xv - lmeans[t])
        x2 = env.step_index(x, a, xi[t])
        f = env.running_cost(xv, av, gmeans[t], lmeans[t])
        cost_step = f * env.dt
        if t + 1 == n_steps:
            btarget = env.terminal_cost(state_vals[x2])
        else:
            btarget = q[t + 1, x2].min()
        n = visits[t, x, a]
        rq = rho_q_finite(n, n_steps, omega_q)
        target = cost_step + btarget
        q[t, x, a] = q[t, x, a] + rq * (target - q[t, x, a])
        visits[t, x, a] = n + 1
        x = x2
    return int(x)


def run_episode_infinite(env, q, visits, global_dist, local_dist,
                         global_means, local_mean, *, epsilon, omega_q,
                         rho_global, rho_local, rng, gamma=None):
    """Run one stationary-learning episode in place; returns the final state index.

    ``global_dist`` holds one distribution per time step (mixed once per
    episode at its slice); ``local_dist`` is a single running distribution
    remixed at every step, so it tracks the current trajectory with memory
    ``~1/rho_local`` steps.  ``local_mean`` is the matching one-element array.
    Consumes randomness in the documented order: one uniform (initial state
    from the terminal slice of ``global_dist``), then per-step exploration
    uniforms, action uniforms, and standard-normal noises.
    """
    n_iters = global_dist.shape[0]
    u0 = rng.random()
    ue = rng.random(n_iters)
    ua = rng.random(n_iters)
    xi = rng.standard_normal(n_iters)
    if gamma is None:
        gamma = env.gamma
    return _episode_infinite(env, q, visits, global_dist, local_dist,
                             global_means, local_mean, epsilon, omega_q,
                             gamma, rho_global, rho_local, u0, ue, ua, xi)


def run_episode_finite(env, q, visits, global_dist, local_dist,
                       global_means, local_means, *, epsilon, omega_q,
                       rho_global, rho_local, rng, initial_dist=None):
    """Run one finite-horizon episode in place; returns the final state index."""
    n_steps = q.shape[0]
    u0 = rng.random()
    ue = rng.random(n_steps)
    ua = rng.random(n_steps)
    xi = rng.standard_normal(n_steps)
    if initial_dist is None:
        initial_dist = env.initial_state_dist()
    return _episode_finite(env, q, visits, global_dist, local_dist,
                           global_means, local_means, epsilon, omega_q,
                           rho_global, rho_local, u0, ue, ua, xi, initial_dist)


# --------------------------------------------------------------------------
# Estimators
# --------------------------------------------------------------------------

class _QLearnerBase(BaseEstimator):
    """Shared parameter handling and fit plumbing for both learners."""

    def __init__(self, episodes=1000, epsilon=0.01, omega_global=0.85,
                 omega_q=0.55, omega_local=0.15, tail_window=None, seed=0,
                 allow_misspecified_rates=False, stop_rule=None, backend="auto"):
        self.episodes = episodes
        self.epsilon = epsilon
        self.omega_global = omega_global
        self.omega_q = omega_q
        self.omega_local = omega_local
        self.tail_window = tail_window
        self.seed = seed
        self.allow_misspecified_rates = allow_misspecified_rates
        self.stop_rule = stop_rule
        self.backend = backend

    # -- validation helpers -------------------------------------------------

    def _check_params(self):
        if not isinstance(self.episodes, (int, np.integer)) or self.episodes < 1:
            raise ValueError(f"episodes must be a positive integer, got {self.episodes}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.tail_window is not None:
            if not isinstance(self.tail_window, (int, np.integer)) or self.tail_window < 1:
                raise ValueError(f"tail_window must be a positive integer, got {self.tail_window}")
            if self.tail_window > self.episodes:
                raise ValueError(
                    f"tail_window = {self.tail_window} exceeds episodes = {self.episodes}"
                )
        if self.backend not in ("auto", "numba", "python"):
            raise ValueError(f"backend must be auto|numba|python, got {self.backend!r}")
        if not self.allow_misspecified_rates:
            validate_exponents(RateExponents(self.omega_global, self.omega_q, self.omega_local))
        else:
            for name in ("omega_global", "omega_q", "omega_local"):
                val = getattr(self, name)
                if not 0.0 < val <= 1.0:
                    raise ValueError(f"{name} must lie in (0, 1], got {val}")

    def _check_env(self, env, required):
        missing = [attr for attr in required if not hasattr(env, attr)]
        if missing:
            raise DimensionError(
                f"environment lacks required attributes: {', '.join(missing)}"
            )
        if env.n_steps < 1:
            raise DimensionError("environment must have at least one step per episode")

    def _resolve_backend(self, env, kernel_env_type):
        if self.backend == "auto":
            return "numba" if isinstance(env, kernel_env_type) else "python"
        if self.backend == "numba" and not isinstance(env, kernel_env_type):
            raise ValueError(
                "backend='numba' requires a benchmark environment "
                f"({kernel_env_type.__name__}); use backend='python'"
            )
        return self.backend

    def _stop_rule(self) -> StopRule:
        return self.stop_rule if self.stop_rule is not None else StopRule()

    def predict(self, X):
        raise NotImplementedError  # subclasses override


class InfiniteHorizonQLearner(_QLearnerBase):
    """Stationary mean-field control-game learner (discounted costs).

    Parameters follow scikit-learn conventions (set in ``__init__``, validated
    in ``fit``).  ``fit(env)`` expects an env with the
    :class:`~mfcg.envs.AsymptoticLQEnv` interface.  After fitting:

    ``q_`` (n_states, n_actions); ``visit_counts_``; ``global_dist_``
    (n_steps + 1, n_states) per-slice competitive state distributions;
    ``local_dist_`` (n_states,) the single running cooperative distribution
    (remixed at every step, so costs are charged against a law that follows
    the controller's own trajectory); ``control_values_`` (n_states,) greedy
    action values — the modal greedy action over the last ``tail_window``
    episodes when set, else the final argmin;
    ``terminal_global_dist_`` / ``terminal_local_dist_`` the reported
    distributions (tail-averaged when ``tail_window`` is set, else the final
    terminal slice / final running state); ``episodes_run_``.
    """

    def fit(self, env, y=None):
        self._check_params()
        self._check_env(env, ("n_steps", "gamma", "dt", "state_values",
                              "action_values", "running_cost", "step_index"))
        backend = self._resolve_backend(env, AsymptoticLQEnv)
        stop = self._stop_rule()

        nx = env.state_values.shape[0]
        na = env.action_values.shape[0]
        n_iters = env.n_steps + 1
        q = np.zeros((nx, na))
        visits = np.zeros((nx, na), dtype=np.int64)
        gdist = np.full((n_iters, nx), 1.0 / nx)
        ldist = np.full(nx, 1.0 / nx)
        gmeans = gdist @ env.state_values
        lmean = np.array([ldist @ env.state_values])

        episodes = int(self.episodes)
        window = int(self.tail_window) if self.tail_window is not None else 0
        tail_start = episodes - window if window else episodes
        tail_counts = np.zeros((nx, na))
        tail_g = np.zeros(nx)
        tail_l = np.zeros(nx)

        rho_g_all = _episode_rate_array(episodes, self.omega_global)
        rho_l_all = _episode_rate_array(episodes, self.omega_local)
        rng = make_rng(self.seed)
        chunk = 1 if stop.enabled else CHUNK_EPISODES
        gamma = env.gamma

        ep = 0
        tail_seen = 0
        stopped = False
        while ep < episodes and not stopped:
            n_ep = min(chunk, episodes - ep)
            u0, ue, ua, xi = draw_episode_block(rng, n_ep, n_iters)
            if stop.enabled:
                q_prev = q.copy()
                g_prev = gdist.copy()
                l_prev = ldist.copy()
            if backend == "numba":
                _kernels.run_lq_chunk(
                    q, visits, gdist, ldist, gmeans, lmean,
                    env.state_values, env.action_values,
                    env.state_grid.lo, env.state_grid.step, env.dt,
                    env.sigma_sqrt_dt, gamma,
                    env.cost.c1, env.cost.c2, env.cost.c3, env.cost.c4,
                    env.cost.c1_tilde, env.cost.c2_tilde, env.cost.c5_tilde,
                    self.epsilon, self.omega_q,
                    rho_g_all[ep:ep + n_ep], rho_l_all[ep:ep + n_ep],
                    u0, ue, ua, xi,
                    ep, tail_start, tail_counts, tail_g, tail_l,
                )
                tail_seen += max(0, ep + n_ep - max(tail_start, ep))
            else:
                for i in range(n_ep):
                    _episode_infinite(env, q, visits, gdist, ldist, gmeans, lmean,
                                      self.epsilon, self.omega_q, gamma,
                                      rho_g_all[ep + i], rho_l_all[ep + i],
                                      u0[i], ue[i], ua[i], xi[i])
                    if ep + i >= tail_start:
                        tail_counts[np.arange(nx), np.argmin(q, axis=1)] += 1.0
                        tail_g += gdist[n_iters - 1]
                        tail_l += ldist
                        tail_seen += 1
            ep += n_ep
            if stop.enabled:
                dq = float(np.max(np.abs(q - q_prev)))
                dg = float(np.max(np.abs(gdist - g_prev)))
                dl = float(np.max(np.abs(ldist - l_prev)))
                stopped = stop.satisfied(dq, dg, dl)

        self.q_ = q
        self.visit_counts_ = visits
        self.global_dist_ = gdist
        self.local_dist_ = ldist
        self.global_means_ = gmeans
        self.local_mean_ = float(lmean[0])
        self.episodes_run_ = ep
        if window and tail_seen > 0:
            # Modal greedy action over the window, not a mean of action values.
            self.control_values_ = env.action_values[np.argmax(tail_counts, axis=1)]
            self.terminal_global_dist_ = tail_g / tail_seen
            self.terminal_local_dist_ = tail_l / tail_seen
        else:
            self.control_values_ = env.action_values[np.argmin(q, axis=1)]
            self.terminal_global_dist_ = gdist[n_iters - 1].copy()
            self.terminal_local_dist_ = ldist.copy()
        return self

    def predict(self, X):
        """Learned feedback control values for an array of state indices."""
        check_is_fitted(self, "control_values_")
        idx = np.asarray(X, dtype=np.int64)
        return self.control_values_[idx]


class FiniteHorizonQLearner(_QLearnerBase):
    """Finite-horizon mean-field control-game learner (terminal cost, no discount).

    ``fit(env)`` expects an env with the :class:`~mfcg.envs.TraderEnv`
    interface.  After fitting:

    ``q_`` (n_steps, n_states, n_actions); ``visit_counts_``;
    ``global_dist_`` / ``local_dist_`` (n_steps + 1, n_states, n_actions)
    joint distributions (slice ``n_steps`` keeps its uniform init — the
    algorithm never updates it); ``control_values_`` (n_steps, n_states)
    greedy action values (modal greedy action over the window when
    ``tail_window`` is set, else the final argmin);
    ``global_joint_dist_`` / ``local_joint_dist_`` reported (tail-averaged)
    distributions; ``episodes_run_``.
    """

    def fit(self, env, y=None):
        self._check_params()
        self._check_env(env, ("n_steps", "dt", "state_values", "action_values",
                              "running_cost", "step_index", "terminal_cost",
                              "initial_state_dist"))
        backend = self._resolve_backend(env, TraderEnv)
        stop = self._stop_rule()

        nx = env.state_values.shape[0]
        na = env.action_values.shape[0]
        n_steps = env.n_steps
        n_slices = n_steps + 1
        q = np.zeros((n_steps, nx, na))
        visits = np.zeros((n_steps, nx, na), dtype=np.int64)
        gdist = np.full((n_slices, nx, na), 1.0 / (nx * na))
        ldist = np.full((n_slices, nx, na), 1.0 / (nx * na))
        gmeans = np.array([np.dot(gdist[t].sum(axis=0), env.action_values)
                           for t in range(n_slices)])
        lmeans = np.array([np.dot(ldist[t].sum(axis=1), env.state_values)
                           for t in range(n_slices)])
        init_dist = np.asarray(env.initial_state_dist(), dtype=np.float64)
        if init_dist.shape[0] != nx:
            raise DimensionError(
                f"initial distribution length {init_dist.shape[0]} != state count {nx}"
            )

        episodes = int(self.episodes)
        window = int(self.tail_window) if self.tail_window is not None else 0
        tail_start = episodes - window if window else episodes
        tail_counts = np.zeros((n_steps, nx, na))
        tail_g = np.zeros((n_slices, nx, na))
        tail_l = np.zeros((n_slices, nx, na))

        rho_g_all = _episode_rate_array(episodes, self.omega_global)
        rho_l_all = _episode_rate_array(episodes, self.omega_local)
        rng = make_rng(self.seed)
        chunk = 1 if stop.enabled else CHUNK_EPISODES

        ep = 0
        tail_seen = 0
        stopped = False
        while ep < episodes and not stopped:
            n_ep = min(chunk, episodes - ep)
            u0, ue, ua, xi = draw_episode_block(rng, n_ep, n_steps)
            if stop.enabled:
                q_prev = q.copy()
                g_prev = gdist.copy()
                l_prev = ldist.copy()
            if backend == "numba":
                _kernels.run_trader_chunk(
                    q, visits, gdist, ldist, gmeans, lmeans,
                    env.state_values, env.action_values,
                    env.state_grid.lo, env.state_grid.step, env.dt,
                    env.sigma_sqrt_dt,
                    env.cost.c_x, env.cost.c_alpha, env.cost.c_h, env.cost.c_g,
                    init_dist,
                    self.epsilon, self.omega_q,
                    rho_g_all[ep:ep + n_ep], rho_l_all[ep:ep + n_ep],
                    u0, ue, ua, xi,
                    ep, tail_start, tail_counts, tail_g, tail_l,
                )
                tail_seen += max(0, ep + n_ep - max(tail_start, ep))
            else:
                for i in range(n_ep):
                    _episode_finite(env, q, visits, gdist, ldist, gmeans, lmeans,
                                    self.epsilon, self.omega_q,
                                    rho_g_all[ep + i], rho_l_all[ep + i],
                                    u0[i], ue[i], ua[i], xi[i], init_dist)
                    if ep + i >= tail_start:
                        amin = np.argmin(q, axis=2)
                        for t in range(n_steps):
                            tail_counts[t, np.arange(nx), amin[t]] += 1.0
                        tail_g += gdist
                        tail_l += ldist
                        tail_seen += 1
            ep += n_ep
            if stop.enabled:
                dq = float(np.max(np.abs(q - q_prev)))
                dg = float(np.max(np.abs(gdist - g_prev)))
                dl = float(np.max(np.abs(ldist - l_prev)))
                stopped = stop.satisfied(dq, dg, dl)

        self.q_ = q
        self.visit_counts_ = visits
        self.global_dist_ = gdist
        self.local_dist_ = ldist
        self.global_means_ = gmeans
        self.local_means_ = lmeans
        self.episodes_run_ = ep
        if window and tail_seen > 0:
            # Modal greedy action over the window, not a mean of action values.
            self.control_values_ = env.action_values[np.argmax(tail_counts, axis=2)]
            self.global_joint_dist_ = tail_g / tail_seen
            self.local_joint_dist_ = tail_l / tail_seen
        else:
            self.control_values_ = env.action_values[np.argmin(q, axis=2)]
            self.global_joint_dist_ = gdist.copy()
            self.local_joint_dist_ = ldist.copy()
        return self

    def predict(self, X):
        """Control values for rows of ``(time_index, state_index)`` pairs."""
        check_is_fitted(self, "control_values_")
        idx = np.asarray(X, dtype=np.int64)
        if idx.ndim != 2 or idx.shape[1] != 2:
            raise DimensionError(
                f"expected an array of (time_index, state_index) pairs, got shape {idx.shape}"
            )
        return self.control_values_[idx[:, 0], idx[:, 1]]
