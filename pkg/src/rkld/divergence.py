"""Classical KL divergence and the robust KL divergence to a Levy ball.

For a step distribution mu with atoms x_1 < ... < x_n and weights w_j, the
divergence from mu to the ball is attained by a ball member P that places
mass p_j = b_j - a_j on each atom, where a_j = P(x_j-) and b_j = P(x_j).
Feasibility of the pair sequence reduces to the linear chain

    a_j >= lower_left(x_j),  b_j <= upper(x_j),  b_{j-1} <= a_j <= b_j,

and the divergence equals sum_j w_j log(w_j / p_j), minimized by maximizing
sum_j w_j log(b_j - a_j).  That concave chain program is solved by the
log-barrier Newton method in :mod:`rkld.chain_solver`.

The quantized variant restricts attention to a finite partition: it
minimizes the quantized divergence over probability vectors whose partial
sums at the cut points stay inside the ball's corridor.  Refining the
partition can only increase the quantized value, and for step inputs the
refinement limit is the direct (atom-level) value; ``refine_until`` runs
that refinement loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chain_solver import solve_chain
from .distributions import Cdf, Partition, StepCdf, quantize
from .levy import LevyBall

SIMPLEX_TOL = 1e-12
DEFAULT_GAP = 1e-10
REFINE_GAP = 5e-13
REFINE_MAX_CELLS = 2 ** 14
_REFINE_MAX_ROUNDS = 64


def kld_discrete(p, q) -> float:
    """KL divergence sum p_i log(p_i / q_i) in nats, +inf when the support
    of p is not contained in the support of q."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise ValueError("p and q must be 1-D vectors of equal length")
    for name, v in (("p", p), ("q", q)):
        if np.any(v < 0) or abs(float(np.sum(v)) - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"{name} is not a probability vector (within {SIMPLEX_TOL})")
    mask = p > 0
    if np.any(q[mask] == 0.0):
        return math.inf
    return float(np.sum(p[mask] * np.log(p[mask] / q[mask])))


@dataclass
class RobustKldSolution:
    """Optimal value plus the optimizing ball member's trace at the atoms."""

    value: float
    masses: np.ndarray
    partial_sums: list           # (a_j, b_j) pairs with p_j = b_j - a_j
    kkt_residual: float
    iterations: int
    converged: bool
    gap_bound: float = field(default=0.0, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "masses": [float(m) for m in self.masses],
            "partial_sums": [[float(a), float(b)] for a, b in self.partial_sums],
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _atom_bounds(mu: StepCdf, ball: LevyBall):
    lower_left = np.asarray(ball.lower_left(mu.atoms), dtype=float)
    upper = np.asarray(ball.upper(mu.atoms), dtype=float)
    return lower_left, upper


def _member_short_circuit(mu: StepCdf, lower_left, upper):
    """mu itself is a ball member iff its own trace is feasible."""
    prev = np.concatenate(([0.0], mu.cums[:-1]))
    return bool(np.all(prev >= lower_left) and np.all(mu.cums <= upper))


def _midpoint_start(lower_left, upper, n):
    # a_j slightly above its binding constraint, b_j midway to its cap;
    # the corridor width upper - lower_left >= radius keeps this strictly
    # feasible (see the envelope-gap invariant of the Levy ball)
    slack = float(np.min(upper - lower_left)) / 100.0
    s = np.empty(2 * n)
    prev_b = 0.0
    for j in range(n):
        a = max(lower_left[j], prev_b) + slack
        b = 0.5 * (a + upper[j])
        s[2 * j] = a
        s[2 * j + 1] = b
        prev_b = b
    return s


def robust_kld(mu: StepCdf, ball: LevyBall, gap_target: float = DEFAULT_GAP) -> RobustKldSolution:
    """Divergence from a step distribution to a Levy ball, in nats.

    Returns the exact zero solution when mu already lies in the ball;
    otherwise runs the chain program.  The reported value is the divergence
    of the returned feasible trace, so it upper-bounds the true optimum by
    at most the duality-gap bound.
    """
    if not isinstance(mu, StepCdf):
        raise ValueError("robust_kld expects a StepCdf")
    n = mu.n_atoms
    w = mu.weights
    lower_left, upper = _atom_bounds(mu, ball)

    if _member_short_circuit(mu, lower_left, upper):
        a = np.concatenate(([0.0], mu.cums[:-1]))
        return RobustKldSolution(
            value=0.0, masses=w.copy(),
            partial_sums=list(zip(a.tolist(), mu.cums.tolist())),
            kkt_residual=0.0, iterations=0, converged=True, gap_bound=0.0)

    omega = np.zeros(2 * n + 1)
    omega[1::2] = w
    lo = np.full(2 * n, -np.inf)
    up = np.full(2 * n, np.inf)
    lo[0::2] = lower_left
    up[1::2] = upper
    sol = solve_chain(omega, lo, up, gap_target=gap_target,
                      start=_midpoint_start(lower_left, upper, n))
    a = sol.s[0::2]
    b = sol.s[1::2]
    p = b - a
    value = float(np.sum(w * np.log(w / p)))
    return RobustKldSolution(
        value=value, masses=p,
        partial_sums=list(zip(a.tolist(), b.tolist())),
        kkt_residual=sol.stationarity, iterations=sol.newton_steps,
        converged=sol.converged, gap_bound=sol.gap_bound)


def robust_kld_quantized(mu: Cdf, ball: LevyBall, partition: Partition,
                         gap_target: float = DEFAULT_GAP) -> RobustKldSolution:
    """Quantized divergence: minimize over probability vectors whose partial
    sums at the cut points lie inside the ball's corridor."""
    masses = quantize(mu, partition)
    cuts = partition.cuts
    lo = np.asarray(ball.lower(cuts), dtype=float)
    up = np.asarray(ball.upper(cuts), dtype=float)
    base = float(np.sum(masses[masses > 0] * np.log(masses[masses > 0])))

    partial = np.cumsum(masses)[:-1]
    if np.all(partial >= lo) and np.all(partial <= up):
        sums = np.concatenate(([0.0], partial, [1.0]))
        return RobustKldSolution(
            value=0.0, masses=masses,
            partial_sums=list(zip(sums[:-1].tolist(), sums[1:].tolist())),
            kkt_residual=0.0, iterations=0, converged=True, gap_bound=0.0)

    sol = solve_chain(masses, lo, up, gap_target=gap_target)
    sums = np.concatenate(([0.0], sol.s, [1.0]))
    x = np.diff(sums)
    pos = masses > 0
    value = base - float(np.sum(masses[pos] * np.log(x[pos])))
    return RobustKldSolution(
        value=value, masses=x,
        partial_sums=list(zip(sums[:-1].tolist(), sums[1:].tolist())),
        kkt_residual=sol.stationarity, iterations=sol.newton_steps,
        converged=sol.converged, gap_bound=sol.gap_bound)


@dataclass
class RefineResult:
    value: float
    values: list
    partitions: list
    converged: bool

    @property
    def trail(self):
        return self.values


def _initial_cuts(center: Cdf) -> np.ndarray:
    qs = np.array([center.quantile(k / 8.0) for k in range(1, 8)])
    cuts = np.unique(qs)
    keep = np.concatenate(([True], np.diff(cuts) > 1e-9))
    return cuts[keep]


def _refine_cuts(cuts: np.ndarray, mu: Cdf) -> np.ndarray:
    """Split every cell carrying mu-mass; infinite end cells are extended
    outward by a doubling span so distant mass is eventually bracketed."""
    new = [cuts]
    ends = np.concatenate((mu.eval(cuts), [1.0]))
    starts = np.concatenate(([0.0], ends[:-1]))
    cell_mass = ends - starts
    span = max(1.0, float(cuts[-1] - cuts[0]))
    if cell_mass[0] > 0.0:
        new.append(np.array([cuts[0] - span]))
    if cell_mass[-1] > 0.0:
        new.append(np.array([cuts[-1] + span]))
    inner = 0.5 * (cuts[:-1] + cuts[1:])
    new.append(inner[cell_mass[1:-1] > 0.0])
    merged = np.unique(np.concatenate(new))
    keep = np.concatenate(([True], np.diff(merged) > 1e-13))
    return merged[keep]


def refine_until(mu: Cdf, ball: LevyBall, tol: float) -> RefineResult:
    """Run the quantized program on a partition-refinement sequence until
    two successive values differ by less than tol.

    Values along the trail are nondecreasing (each partition refines the
    previous one) up to the solver's duality-gap bound.  The refinement is
    capped at 2**14 cells; hitting the cap flags the result not converged.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cuts = _initial_cuts(ball.center)
    values, partitions = [], []
    converged = False
    for _ in range(_REFINE_MAX_ROUNDS):
        part = Partition(cuts)
        partitions.append(part)
        values.append(robust_kld_quantized(mu, ball, part, gap_target=REFINE_GAP).value)
        if len(values) >= 2 and abs(values[-1] - values[-2]) < tol:
            converged = True
            break
        if cuts.size + 1 > REFINE_MAX_CELLS:
            break
        cuts = _refine_cuts(cuts, mu)
    return RefineResult(value=values[-1], values=values,
                        partitions=partitions, converged=converged)


def brute_force_robust_kld(mu: StepCdf, ball: LevyBall, grid_step: float) -> float:
    """Independent grid-search oracle for instances with at most 3 atoms.

    Searches b = (b_1..b_n) on a uniform grid with a_j eliminated as
    max(lower_left(x_j), b_{j-1}), then refines once around the best grid
    point at grid_step / 100 resolution.  The search enumerates exactly the
    same discrete maximum a nested loop would, evaluated stage by stage.
    """
    if not isinstance(mu, StepCdf) or mu.n_atoms > 3:
        raise ValueError("brute force oracle accepts step inputs with at most 3 atoms")
    if not 1e-5 <= grid_step <= 1e-2:
        raise ValueError("grid_step must be in [1e-5, 1e-2]")
    w = mu.weights
    lower_left, upper = _atom_bounds(mu, ball)
    n = mu.n_atoms

    def grids_around(centers, half_width, step):
        grids = []
        for j in range(n):
            lo = lower_left[j] if centers is None else max(lower_left[j], centers[j] - half_width)
            hi = upper[j] if centers is None else min(upper[j], centers[j] + half_width)
            count = max(2, int(math.ceil((hi - lo) / step)) + 1)
            grids.append(np.linspace(lo, hi, count))
        return grids

    def dp_best(grids):
        # backward pass: best_next[i] = max over b_{j+1} grid given b_j = grids[j][i]
        best_next = np.zeros(grids[-1].size)
        choice = [None] * n
        for j in range(n - 1, 0, -1):
            bj = grids[j]
            prev = grids[j - 1]
            a = np.maximum(lower_left[j], prev)[:, None]
            gap = bj[None, :] - a
            with np.errstate(divide="ignore", invalid="ignore"):
                val = np.where(gap > 0, w[j] * np.log(np.where(gap > 0, gap, 1.0)), -np.inf)
            val = val + best_next[None, :]
            choice[j] = np.argmax(val, axis=1)
            best_next = val[np.arange(prev.size), choice[j]]
        b1 = grids[0]
        gap1 = b1 - max(lower_left[0], 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            v1 = np.where(gap1 > 0, w[0] * np.log(np.where(gap1 > 0, gap1, 1.0)), -np.inf)
        total = v1 + best_next
        i = int(np.argmax(total))
        bs = [float(b1[i])]
        for j in range(1, n):
            i = int(choice[j][i])
            bs.append(float(grids[j][i]))
        return float(total[np.argmax(total)]), np.array(bs)

    best_obj, best_b = dp_best(grids_around(None, None, grid_step))
    fine = grid_step / 100.0
    best_obj, best_b = dp_best(grids_around(best_b, grid_step, fine))
    return float(np.sum(w * np.log(w))) - best_obj
