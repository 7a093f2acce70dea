"""Primal log-barrier Newton solver for monotone-chain programs.

The programs solved here all have the same shape: variables
0 = s_0 <= s_1 <= ... <= s_K <= s_{K+1} = 1 with optional per-variable
bounds l_k <= s_k <= u_k, maximizing

    sum_k  omega_k * log(s_k - s_{k-1})        (omega_k >= 0)

over the K+1 consecutive gaps.  Gaps with omega_k = 0 do not enter the
objective but must stay nonnegative; they receive plain barrier terms.
The Hessian of the barrier subproblem is symmetric tridiagonal, so a
Newton step is a single LDL^T sweep costing O(K); the whole iteration is
compiled with numba.

The duality gap of the returned point is bounded by (number of barrier
terms) / (final barrier parameter); the solver drives that bound below
``gap_target`` and reports it.  Intermediate stages are centered loosely
(they only seed the next stage); the final stage is centered tightly so
the bound applies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_T_FACTOR = 50.0
# Newton-decrement thresholds.  Final-stage centering: lambda^2 below
# _LAMBDA2_TIGHT (the induced objective error lambda*sqrt(m)/t is then
# negligible next to m/t).  Intermediate stages stop at _LAMBDA2_STAGE.
# A plateau below _LAMBDA2_LOOSE per barrier term is the floating-point
# noise floor reached when slacks shrink to ~1/t and is accepted as
# centered.  Below _LAMBDA2_PURE a full Newton step is taken without
# backtracking.
_LAMBDA2_TIGHT = 1e-8
_LAMBDA2_STAGE = 2.5e-3
_LAMBDA2_LOOSE = 1e-3
_LAMBDA2_PURE = 0.04


class ChainInfeasibleError(ValueError):
    """The chain program has no strictly feasible point."""


@dataclass
class ChainSolution:
    s: np.ndarray
    objective: float       # sum omega_k * log(gap_k), the maximized value
    gap_bound: float       # duality-gap bound on the reported objective
    stationarity: float    # residual of the optimality conditions
    newton_steps: int
    converged: bool


def ladder_start(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """A strictly feasible point: climb the running-max of the lower bounds
    with a uniform step small enough to stay clear of every upper bound."""
    K = lower.size
    lo = np.maximum.accumulate(np.where(np.isfinite(lower), lower, 0.0))
    hi = np.minimum.accumulate(np.where(np.isfinite(upper), upper, 1.0)[::-1])[::-1]
    wmin = float(np.min(hi - lo))
    if wmin <= 0.0:
        raise ChainInfeasibleError("empty corridor between lower and upper bounds")
    eps = wmin / (2.0 * (K + 2))
    s = np.empty(K)
    prev = 0.0
    for k in range(K):
        prev = max(lo[k], prev) + eps
        s[k] = prev
    return s


@njit(cache=True)
def _barrier_value(s, lower, upper, coef, free_gap):
    K = s.size
    val = 0.0
    prev = 0.0
    for k in range(K + 1):
        cur = s[k] if k < K else 1.0
        d = cur - prev
        if d <= 0.0:
            return np.inf
        c = coef[k]
        if free_gap[k]:
            c += 1.0
        val -= c * np.log(d)
        prev = cur
    for k in range(K):
        if np.isfinite(lower[k]):
            slo = s[k] - lower[k]
            if slo <= 0.0:
                return np.inf
            val -= np.log(slo)
        if np.isfinite(upper[k]):
            sup = upper[k] - s[k]
            if sup <= 0.0:
                return np.inf
            val -= np.log(sup)
    return val


@njit(cache=True)
def _core(omega, lower, upper, s, gap_target, t_factor, max_inner):
    """Barrier loop; returns (steps, converged, t_final, grad_inf_norm)."""
    K = s.size
    m_bar = 0
    for k in range(K):
        if np.isfinite(lower[k]):
            m_bar += 1
        if np.isfinite(upper[k]):
            m_bar += 1
    free_gap = np.empty(K + 1, dtype=np.bool_)
    for k in range(K + 1):
        free_gap[k] = omega[k] <= 0.0
        if free_gap[k]:
            m_bar += 1
    if m_bar == 0:
        m_bar = 1

    g = np.empty(K)
    diag = np.empty(K)
    off = np.empty(max(K - 1, 1))
    dhat = np.empty(K)
    lfac = np.empty(K)
    step = np.empty(K)
    gaps = np.empty(K + 1)
    coef = np.empty(K + 1)

    steps = 0
    all_centered = True
    gmax = 0.0
    t = max(1.0, float(m_bar))
    t_final = m_bar / (0.5 * gap_target)
    while True:
        for k in range(K + 1):
            coef[k] = t * omega[k]
        lam2_goal = _LAMBDA2_TIGHT if t >= t_final else _LAMBDA2_STAGE
        centered = False
        prev_lam2 = np.inf
        for _inner in range(max_inner):
            prev = 0.0
            for k in range(K + 1):
                cur = s[k] if k < K else 1.0
                gaps[k] = cur - prev
                prev = cur
            # gradient and tridiagonal Hessian of t*f0 + barrier
            for k in range(K):
                cl = coef[k] + (1.0 if free_gap[k] else 0.0)
                cr = coef[k + 1] + (1.0 if free_gap[k + 1] else 0.0)
                gl = cl / gaps[k]
                gr = cr / gaps[k + 1]
                gv = gr - gl
                dv = gl / gaps[k] + gr / gaps[k + 1]
                if np.isfinite(lower[k]):
                    inv = 1.0 / (s[k] - lower[k])
                    gv -= inv
                    dv += inv * inv
                if np.isfinite(upper[k]):
                    inv = 1.0 / (upper[k] - s[k])
                    gv += inv
                    dv += inv * inv
                g[k] = gv
                diag[k] = dv
            for k in range(K - 1):
                cr = coef[k + 1] + (1.0 if free_gap[k + 1] else 0.0)
                off[k] = -cr / (gaps[k + 1] * gaps[k + 1])
            # LDL^T factorization and solve of H step = -g
            ok = True
            dhat[0] = diag[0]
            if dhat[0] <= 0.0:
                ok = False
            if ok:
                for k in range(1, K):
                    lfac[k] = off[k - 1] / dhat[k - 1]
                    dhat[k] = diag[k] - lfac[k] * off[k - 1]
                    if dhat[k] <= 0.0 or not np.isfinite(dhat[k]):
                        ok = False
                        break
            if not ok:
                all_centered = False
                break
            step[0] = -g[0]
            for k in range(1, K):
                step[k] = -g[k] - lfac[k] * step[k - 1]
            for k in range(K):
                step[k] /= dhat[k]
            for k in range(K - 2, -1, -1):
                step[k] -= lfac[k + 1] * step[k + 1]
            lam2 = 0.0
            for k in range(K):
                lam2 += -g[k] * step[k]
            if not np.isfinite(lam2):
                all_centered = False
                break
            if lam2 <= lam2_goal:
                centered = True
                break
            if lam2 <= _LAMBDA2_LOOSE * m_bar and lam2 >= 0.25 * prev_lam2:
                centered = True
                break
            prev_lam2 = lam2
            # largest multiple of the step keeping every slack positive
            alpha = 1.0
            prev_step = 0.0
            for k in range(K + 1):
                cur_step = step[k] if k < K else 0.0
                dd = cur_step - prev_step
                if dd < 0.0:
                    r = 0.995 * gaps[k] / -dd
                    if r < alpha:
                        alpha = r
                prev_step = cur_step
            for k in range(K):
                if np.isfinite(lower[k]) and step[k] < 0.0:
                    r = 0.995 * (s[k] - lower[k]) / -step[k]
                    if r < alpha:
                        alpha = r
                if np.isfinite(upper[k]) and step[k] > 0.0:
                    r = 0.995 * (upper[k] - s[k]) / step[k]
                    if r < alpha:
                        alpha = r
            if lam2 > _LAMBDA2_PURE or alpha < 1.0:
                f_cur = _barrier_value(s, lower, upper, coef, free_gap)
                noise = 1e-13 * (abs(f_cur) + t)
                while alpha > 1e-14:
                    f_new = _barrier_value(s + alpha * step, lower, upper, coef, free_gap)
                    if f_new <= f_cur - 0.25 * alpha * lam2 + noise:
                        break
                    alpha *= 0.5
                if alpha <= 1e-14:
                    # stalled at the floating-point floor; accept if already
                    # essentially centered
                    centered = lam2 <= _LAMBDA2_LOOSE * m_bar
                    break
            for k in range(K):
                s[k] += alpha * step[k]
            steps += 1
        else:
            all_centered = False
        if not centered:
            all_centered = False
        if t >= t_final:
            gmax = 0.0
            for k in range(K):
                a = abs(g[k])
                if a > gmax:
                    gmax = a
            break
        t = min(t * t_factor, t_final)
    return steps, all_centered, t, gmax, m_bar


def solve_chain(omega, lower, upper, gap_target=1e-10, start=None) -> ChainSolution:
    omega = np.ascontiguousarray(omega, dtype=float)
    lower = np.ascontiguousarray(lower, dtype=float)
    upper = np.ascontiguousarray(upper, dtype=float)
    K = lower.size
    if omega.size != K + 1:
        raise ValueError("need one gap weight per gap (K+1)")
    if np.any(omega < 0):
        raise ValueError("gap weights must be nonnegative")
    if K == 0:
        return ChainSolution(np.empty(0), 0.0, 0.0, 0.0, 0, True)

    def strictly_feasible(s):
        gaps = np.diff(np.concatenate(([0.0], s, [1.0])))
        lo_ok = np.all(s[np.isfinite(lower)] > lower[np.isfinite(lower)])
        up_ok = np.all(s[np.isfinite(upper)] < upper[np.isfinite(upper)])
        return bool(np.all(gaps > 0.0) and lo_ok and up_ok)

    s = np.ascontiguousarray(start, dtype=float) if start is not None else None
    if s is None or not strictly_feasible(s):
        s = ladder_start(lower, upper)
    else:
        s = s.copy()

    steps, converged, t_last, gmax, m_bar = _core(
        omega, lower, upper, s, float(gap_target), _T_FACTOR, 120)
    gaps = np.diff(np.concatenate(([0.0], s, [1.0])))
    objective = float(np.dot(omega, np.log(gaps)))
    return ChainSolution(
        s=s,
        objective=objective,
        gap_bound=m_bar / t_last,
        stationarity=gmax / t_last,
        newton_steps=int(steps),
        converged=bool(converged),
    )
