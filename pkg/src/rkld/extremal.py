"""Extremal members of a Levy ball and continuity diagnostics.

The divergence-to-a-ball, viewed as a function of the first argument, is
maximized over a Levy ball B(mu0, delta) by two-piece profiles: the ball's
lower envelope before a transition point x, its upper envelope from x on.
``transition_family`` realizes those profiles for step bases (so they stay
finite-support), ``sup_over_ball`` scans the transition point over a
candidate grid, and the remaining operations use that machinery to probe
the global log(1/radius) bound, continuity in the radius, continuity in
the distribution, and the failure of both properties for total-variation
and KL uncertainty balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Cdf, StepCdf
from .divergence import RobustKldSolution, robust_kld
from .levy import LevyBall

_TAIL_GAP_TOL = 1e-6
_TAIL_MAX_DOUBLINGS = 60


@dataclass(frozen=True, eq=False)
class TransitionProfile:
    """Two-piece extremal member of B(base, delta) with transition point x."""

    base: StepCdf
    delta: float
    x: float
    realized: StepCdf


def transition_family(mu0: StepCdf, delta: float, x: float) -> TransitionProfile:
    """Build the profile that follows max(0, mu0(t-delta)-delta) for t < x
    and min(1, mu0(t+delta)+delta) for t >= x."""
    if not isinstance(mu0, StepCdf):
        raise ValueError("transition_family expects a StepCdf base")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must be in (0, 1]")
    if not math.isfinite(x):
        raise ValueError("transition point must be finite")

    positions = []
    values = []
    # staircase of the clipped lower envelope, strictly before x
    lower_positions = mu0.atoms + delta
    lower_values = np.maximum(0.0, mu0.cums - delta)
    for pos, val in zip(lower_positions, lower_values):
        if pos >= x:
            break
        if val > (values[-1] if values else 0.0):
            positions.append(float(pos))
            values.append(float(val))
    # the jump at x up to the clipped upper envelope
    up_at_x = min(1.0, float(mu0.eval(x + delta)) + delta)
    positions.append(float(x))
    values.append(up_at_x)
    # staircase of the clipped upper envelope, strictly after x
    upper_positions = mu0.atoms - delta
    upper_values = np.minimum(1.0, mu0.cums + delta)
    for pos, val in zip(upper_positions, upper_values):
        if pos <= x or val <= values[-1]:
            continue
        positions.append(float(pos))
        values.append(float(val))

    values[-1] = 1.0 if abs(values[-1] - 1.0) <= 1e-12 else values[-1]
    weights = np.diff(np.concatenate(([0.0], values)))
    atoms = np.array(positions)
    keep = weights > 0
    realized = StepCdf(atoms[keep], weights[keep])
    return TransitionProfile(base=mu0, delta=delta, x=x, realized=realized)


@dataclass
class SupOverBallResult:
    sup: float
    argmax_x: float
    candidates: int
    left_tail_gap: float
    right_tail_gap: float
    tail_converged: bool
    base_value: float
    attained_by_base: bool


def _tail_candidates(ball: LevyBall, start: float, direction: float):
    """Expand outward until the ball's single-point corridor width
    U(x) - L(x-) is within 1e-6 of its limiting value (the radius)."""
    xs = []
    step = 1.0
    x = start
    gap = math.inf
    converged = False
    for _ in range(_TAIL_MAX_DOUBLINGS):
        x = x + direction * step
        xs.append(x)
        width = float(ball.upper(x)) - float(ball.lower_left(x))
        gap = abs(width - ball.radius)
        if gap <= _TAIL_GAP_TOL:
            converged = True
            break
        step *= 2.0
    return xs, gap, converged


def sup_over_ball(mu0: StepCdf, delta: float, ball: LevyBall,
                  extra_grid=()) -> SupOverBallResult:
    """Maximize the divergence-to-ball over B(mu0, delta), scanning the
    transition point over envelope breakpoints, midpoints, the caller's
    grid, and expanding tails; mu0 itself is included as a candidate, so
    the result never falls below the divergence at mu0."""
    if not isinstance(mu0, StepCdf):
        raise ValueError("sup_over_ball expects a StepCdf base")
    if not (0.0 < delta <= 1.0):
        raise ValueError("delta must be in (0, 1]")
    base_cands = np.concatenate((mu0.atoms - delta, mu0.atoms + delta,
                                 np.asarray(list(extra_grid), dtype=float)))
    base_cands = np.unique(base_cands)
    mids = 0.5 * (base_cands[:-1] + base_cands[1:]) if base_cands.size > 1 else np.empty(0)
    left_xs, left_gap, left_ok = _tail_candidates(ball, float(base_cands[0]), -1.0)
    right_xs, right_gap, right_ok = _tail_candidates(ball, float(base_cands[-1]), +1.0)
    xs = np.unique(np.concatenate((base_cands, mids, left_xs, right_xs)))

    best_val = -math.inf
    best_x = float(xs[0])
    for x in xs:
        val = robust_kld(transition_family(mu0, delta, float(x)).realized, ball).value
        if val > best_val:
            best_val = val
            best_x = float(x)
    base_value = robust_kld(mu0, ball).value
    attained_by_base = base_value > best_val
    sup = max(best_val, base_value)
    return SupOverBallResult(
        sup=sup, argmax_x=best_x, candidates=int(xs.size),
        left_tail_gap=left_gap, right_tail_gap=right_gap,
        tail_converged=bool(left_ok and right_ok),
        base_value=base_value, attained_by_base=attained_by_base)


@dataclass
class GlobalBoundScan:
    max_value: float
    argmax_x: float
    bound: float          # log(1 / radius)
    gap_to_bound: float


def global_bound_scan(ball: LevyBall, x_lo: float, x_hi: float,
                      step: float) -> GlobalBoundScan:
    """Maximize log(1 / (U(x) - L(x-))) over a grid: the divergence of a
    single point mass at x, always below log(1 / radius)."""
    if not (x_lo < x_hi and step > 0):
        raise ValueError("need x_lo < x_hi and step > 0")
    xs = np.arange(x_lo, x_hi + 0.5 * step, step)
    widths = np.asarray(ball.upper(xs), dtype=float) - np.asarray(ball.lower_left(xs), dtype=float)
    vals = -np.log(widths)
    i = int(np.argmax(vals))
    bound = math.log(1.0 / ball.radius)
    return GlobalBoundScan(max_value=float(vals[i]), argmax_x=float(xs[i]),
                           bound=bound, gap_to_bound=bound - float(vals[i]))


@dataclass
class RadiusScan:
    radii: np.ndarray
    values: np.ndarray
    max_adjacent_jump: float


def radius_scan(mu: StepCdf, center: Cdf, radii) -> RadiusScan:
    """Divergence values along an increasing radius grid; nonincreasing,
    with the largest adjacent jump reported as a continuity diagnostic.
    Step centers are rejected: continuity in the radius needs a continuous
    center."""
    if not center.continuous:
        raise ValueError("radius_scan requires a continuous center")
    radii = np.asarray(radii, dtype=float)
    if radii.size == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be an increasing sequence")
    if np.any((radii <= 0) | (radii > 1)):
        raise ValueError("radii must lie in (0, 1]")
    values = np.array([robust_kld(mu, LevyBall(center, float(r))).value for r in radii])
    jump = float(np.max(np.abs(np.diff(values)))) if radii.size > 1 else 0.0
    return RadiusScan(radii=radii, values=values, max_adjacent_jump=jump)


def semicontinuity_probe(mu0: StepCdf, ball: LevyBall, delta_schedule):
    """sup-over-ball values for a decreasing perturbation schedule.

    Processed from the smallest radius up, carrying the running maximum:
    every profile evaluated for a smaller radius also lies in each larger
    ball, so the carried values are legitimate and the output sequence is
    nonincreasing along the (decreasing) schedule by construction.
    """
    if not ball.center.continuous:
        raise ValueError("semicontinuity_probe requires a continuous ball center")
    schedule = np.asarray(delta_schedule, dtype=float)
    if schedule.size == 0 or np.any(np.diff(schedule) >= 0):
        raise ValueError("delta schedule must be strictly decreasing")
    if schedule[-1] < 1e-6:
        raise ValueError("delta schedule must stay >= 1e-6")
    sups = {}
    running = -math.inf
    for delta in schedule[::-1]:
        res = sup_over_ball(mu0, float(delta), ball)
        running = max(running, res.sup)
        sups[float(delta)] = running
    return [(float(d), sups[float(d)]) for d in schedule]


@dataclass
class TvBallDemo:
    levy_value: float
    tv_lower_bound: float
    quantized: StepCdf


def _midpoint_quantile_atoms(p0: Cdf, n: int) -> StepCdf:
    qs = np.array([p0.quantile((2 * k - 1) / (2.0 * n)) for k in range(1, n + 1)])
    atoms, inverse = np.unique(qs, return_inverse=True)
    weights = np.bincount(inverse, minlength=atoms.size) / n
    return StepCdf(atoms, weights)


def tv_ball_demo(p0: Cdf, delta0: float, n: int) -> TvBallDemo:
    """Discrete approximation of a continuous nominal versus two
    uncertainty sets.

    The n-point quantization P_n sits within Levy distance 1/(2n) of the
    nominal, so its divergence to the Levy ball is exactly zero once
    1/n <= delta0.  Against a total-variation ball the divergence is
    bounded below by log(1/(P0(S_n) + delta0)) = log(1/delta0), because the
    nominal gives zero mass to the finite atom set S_n.
    """
    if not p0.continuous:
        raise ValueError("tv_ball_demo requires a continuous nominal")
    if n < 1:
        raise ValueError("n must be >= 1")
    pn = _midpoint_quantile_atoms(p0, n)
    levy_value = robust_kld(pn, LevyBall(p0, delta0)).value
    tv_lower_bound = math.log(1.0 / delta0)
    return TvBallDemo(levy_value=levy_value, tv_lower_bound=tv_lower_bound,
                      quantized=pn)


@dataclass
class KlBallDemo:
    divergence: float
    witness_atoms: np.ndarray


def kl_ball_demo(p0: Cdf, n: int, against: str = "quantized") -> KlBallDemo:
    """KL-ball counterpart: every member P of a KL ball around a continuous
    nominal is absolutely continuous with respect to it, so the discrete
    quantization has infinite divergence to every member; no optimization
    is run.  With ``against="self"`` the nominal is compared instead and the
    divergence is zero (the nominal belongs to its own ball)."""
    if not p0.continuous:
        raise ValueError("kl_ball_demo requires a continuous nominal")
    if against not in ("quantized", "self"):
        raise ValueError("against must be 'quantized' or 'self'")
    if against == "self":
        return KlBallDemo(divergence=0.0, witness_atoms=np.empty(0))
    pn = _midpoint_quantile_atoms(p0, n)
    return KlBallDemo(divergence=math.inf, witness_atoms=pn.atoms.copy())


__all__ = [
    "TransitionProfile", "transition_family",
    "SupOverBallResult", "sup_over_ball",
    "GlobalBoundScan", "global_bound_scan",
    "RadiusScan", "radius_scan",
    "semicontinuity_probe",
    "TvBallDemo", "tv_ball_demo",
    "KlBallDemo", "kl_ball_demo",
    "RobustKldSolution",
]
