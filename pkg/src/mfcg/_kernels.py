"""Compiled per-chunk episode loops for the two benchmark families.

Each function replays a block of episodes from pre-drawn random arrays and
mutates the learner state in place.  The statements mirror the generic pure
Python engine in ``learner.py`` one-for-one; a test asserts the two backends
produce bit-identical results.  Keep the arithmetic in sync when editing.
"""

from __future__ import annotations

from numba import njit

from .core import _argmin_index, _choose_action, _project_index, _sample_index
from .envs import execution_cost, inventory_terminal_cost, quadratic_tracking_cost
from .rates import rho_q_finite, rho_q_infinite


@njit(cache=True, nogil=True)
def run_lq_chunk(q, visits, gdist, ldist, gmeans, lmean,
                 state_vals, action_vals, lo, step, dt, sig_sqdt, gamma,
                 c1, c2, c3, c4, ct1, ct2, ct5,
                 epsilon, omega_q, rho_g, rho_l,
                 u0, ue, ua, xi,
                 ep0, tail_start, tail_counts, tail_gdist, tail_ldist):
    nx = state_vals.shape[0]
    na = action_vals.shape[0]
    n_iters = ue.shape[1]
    last = n_iters - 1
    for e in range(u0.shape[0]):
        rg = rho_g[e]
        rl = rho_l[e]
        x = _sample_index(gdist[last], u0[e])
        for t in range(n_iters):
            a = _choose_action(q[x], epsilon, ue[e, t], ua[e, t])
            xv = state_vals[x]
            av = action_vals[a]
            grow = gdist[t]
            for i in range(nx):
                oh = 1.0 if i == x else 0.0
                grow[i] = grow[i] + rg * (oh - grow[i])
            gmeans[t] = gmeans[t] + rg * (xv - gmeans[t])
            for i in range(nx):
                oh = 1.0 if i == x else 0.0
                ldist[i] = ldist[i] + rl * (oh - ldist[i])
            lmean[0] = lmean[0] + rl * (xv - lmean[0])
            x2 = _project_index(xv + av * dt + sig_sqdt * xi[e, t], lo, step, nx)
            f = quadratic_tracking_cost(xv, av, gmeans[t], lmean[0],
                                        c1, c2, c3, c4, ct1, ct2, ct5)
            cost_step = f * dt
            n = visits[x, a]
            rq = rho_q_infinite(n, omega_q)
            mn = q[x2, 0]
            for j in range(1, na):
                if q[x2, j] < mn:
                    mn = q[x2, j]
            target = cost_step + gamma * mn
            q[x, a] = q[x, a] + rq * (target - q[x, a])
            visits[x, a] = n + 1
            x = x2
        if ep0 + e >= tail_start:
            for i in range(nx):
                tail_counts[i, _argmin_index(q[i])] += 1.0
                tail_gdist[i] += gdist[last, i]
                tail_ldist[i] += ldist[i]


@njit(cache=True, nogil=True)
def run_trader_chunk(q, visits, gdist, ldist, gmeans, lmeans,
                     state_vals, action_vals, lo, step, dt, sig_sqdt,
                     c_x, c_alpha, c_h, c_g, init_dist,
                     epsilon, omega_q, rho_g, rho_l,
                     u0, ue, ua, xi,
                     ep0, tail_start, tail_counts, tail_gdist, tail_ldist):
    nx = state_vals.shape[0]
    na = action_vals.shape[0]
    n_steps = ue.shape[1]
    for e in range(u0.shape[0]):
        rg = rho_g[e]
        rl = rho_l[e]
        x = _sample_index(init_dist, u0[e])
        for t in range(n_steps):
            a = _choose_action(q[t, x], epsilon, ue[e, t], ua[e, t])
            xv = state_vals[x]
            av = action_vals[a]
            g = gdist[t]
            for i in range(nx):
                for j in range(na):
                    oh = 1.0 if (i == x and j == a) else 0.0
                    g[i, j] = g[i, j] + rg * (oh - g[i, j])
            gmeans[t] = gmeans[t] + rg * (av - gmeans[t])
            l = ldist[t]
            for i in range(nx):
                for j in range(na):
                    oh = 1.0 if (i == x and j == a) else 0.0
                    l[i, j] = l[i, j] + rl * (oh - l[i, j])
            lmeans[t] = lmeans[t] + rl * (xv - lmeans[t])
            x2 = _project_index(xv + av * dt + sig_sqdt * xi[e, t], lo, step, nx)
            f = execution_cost(xv, av, gmeans[t], lmeans[t], c_x, c_alpha, c_h)
            cost_step = f * dt
            if t + 1 == n_steps:
                btarget = inventory_terminal_cost(state_vals[x2], c_g)
            else:
                btarget = q[t + 1, x2, 0]
                for j in range(1, na):
                    if q[t + 1, x2, j] < btarget:
                        btarget = q[t + 1, x2, j]
            n = visits[t, x, a]
            rq = rho_q_finite(n, n_steps, omega_q)
            target = cost_step + btarget
            q[t, x, a] = q[t, x, a] + rq * (target - q[t, x, a])
            visits[t, x, a] = n + 1
            x = x2
        if ep0 + e >= tail_start:
            for t in range(n_steps):
                for i in range(nx):
                    tail_counts[t, i, _argmin_index(q[t, i])] += 1.0
            for t in range(gdist.shape[0]):
                for i in range(nx):
                    for j in range(na):
                        tail_gdist[t, i, j] += gdist[t, i, j]
                        tail_ldist[t, i, j] += ldist[t, i, j]
