"""Robust universal hypothesis test and its Monte-Carlo error-exponent harness.

The detector declares the alternative when the divergence from the
empirical distribution to the Levy ball around the nominal exceeds the
threshold (strictly; ties go to the null).  ``estimate_exponents`` measures
finite-sample error rates of that detector under a chosen truth by seeded
simulation: every trial draws its samples through the quantile transform of
a counter-based uniform stream whose per-trial seed is derived from
(master seed, sample size, trial index) by a splittable 64-bit mixer, so
reports are byte-identical for any worker count or scheduling order.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .distributions import Cdf, cdf_from_spec, empirical_from_samples
from .divergence import kld_discrete, robust_kld
from .levy import LevyBall, ball_contains

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, *keys: int) -> int:
    """Fold integer keys into the master seed with the splittable mixer."""
    state = _mix64(master + _GOLDEN)
    for k in keys:
        state = _mix64(state ^ ((k + 1) * _GOLDEN))
    return state


def uniform_stream(seed: int, count: int) -> np.ndarray:
    """Deterministic open-interval uniforms: output i depends only on
    (seed, i), never on how many values other consumers drew."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    z = (np.uint64(seed & _MASK64) + idx * np.uint64(_GOLDEN))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53 + 2.0 ** -54


class Hypothesis(enum.Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class DetectorConfig:
    """Nominal distribution, Levy radius of the null set, and threshold (nats)."""

    nominal: Cdf
    radius: float
    threshold: float

    def __post_init__(self):
        if not isinstance(self.nominal, Cdf) or not self.nominal.continuous:
            raise ValueError("the detector requires a continuous nominal distribution")
        if not (0.0 < self.radius <= 1.0):
            raise ValueError("radius must be in (0, 1]")
        if not (self.threshold > 0.0 and math.isfinite(self.threshold)):
            raise ValueError("threshold must be positive and finite")

    def ball(self) -> LevyBall:
        return LevyBall(self.nominal, self.radius)

    def to_json_dict(self) -> dict:
        return {"nominal": self.nominal.to_spec(), "radius": self.radius,
                "threshold": self.threshold}


@dataclass(frozen=True)
class Decision:
    verdict: Hypothesis
    statistic: float
    threshold: float

    def to_json_dict(self) -> dict:
        return {"verdict": self.verdict.value, "statistic": self.statistic,
                "threshold": self.threshold}


def decide(statistic: float, threshold: float) -> Decision:
    """Declare H1 exactly when the statistic strictly exceeds the threshold."""
    if statistic < 0:
        raise ValueError("statistic must be nonnegative")
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    verdict = Hypothesis.H1 if statistic > threshold else Hypothesis.H0
    return Decision(verdict=verdict, statistic=float(statistic), threshold=float(threshold))


def robust_statistic(samples, config: DetectorConfig) -> float:
    """Divergence from the empirical distribution of the samples to the
    Levy ball around the nominal."""
    return robust_kld(empirical_from_samples(samples), config.ball()).value


def hoeffding_statistic(samples, nominal_pmf: dict) -> float:
    """Empirical divergence over a finite alphabet: the classical
    goodness-of-fit statistic for discrete nominals."""
    symbols = list(nominal_pmf.keys())
    probs = np.array([float(nominal_pmf[s]) for s in symbols])
    if np.any(probs <= 0) or abs(float(np.sum(probs)) - 1.0) > 1e-12:
        raise ValueError("nominal pmf must be positive and sum to 1 within 1e-12")
    index = {s: i for i, s in enumerate(symbols)}
    counts = np.zeros(len(symbols))
    total = 0
    for s in samples:
        if s not in index:
            raise ValueError(f"sample symbol {s!r} outside the nominal support")
        counts[index[s]] += 1
        total += 1
    if total == 0:
        raise ValueError("no samples")
    return kld_discrete(counts / total, probs)


@dataclass
class ExponentReport:
    """Per-sample-size Monte-Carlo error rates and exponent estimates.

    ``exponents[i]`` is -log(rate)/n when the rate is positive, else None
    with ``exponent_lower_bounds[i] = log(trials)/n`` recording the
    certified bound from observing zero errors.  ``slope`` is the
    least-squares slope of -log(rate) against n over the sizes with a
    positive rate (None when fewer than two such sizes exist).
    """

    hypothesis: Hypothesis
    n_list: list
    trials: int
    seed: int
    errors: list
    rates: list
    exponents: list
    exponent_lower_bounds: list
    slope: float | None
    config: DetectorConfig

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "hypothesis": self.hypothesis.value,
            "n": list(self.n_list),
            "trials": self.trials,
            "seed": self.seed,
            "errors": list(self.errors),
            "rates": list(self.rates),
            "exponents": self.exponents,
            "exponent_lower_bounds": self.exponent_lower_bounds,
            "slope": self.slope,
        }


def _trial_is_error(config: DetectorConfig, truth: Cdf, hypothesis: Hypothesis,
                    n: int, trial: int, seed: int) -> bool:
    u = uniform_stream(derive_seed(seed, n, trial), n)
    samples = truth.inverse_sample(u)
    stat = robust_statistic(samples, config)
    verdict = decide(stat, config.threshold).verdict
    if hypothesis is Hypothesis.H0:
        return verdict is Hypothesis.H1
    return verdict is Hypothesis.H0


def _trial_block(args) -> int:
    config_spec, radius, threshold, truth_spec, hyp_value, n, trials, seed = args
    config = DetectorConfig(cdf_from_spec(config_spec), radius, threshold)
    truth = cdf_from_spec(truth_spec)
    hyp = Hypothesis(hyp_value)
    return sum(_trial_is_error(config, truth, hyp, n, t, seed) for t in trials)


def estimate_exponents(config: DetectorConfig, truth: Cdf,
                       hypothesis_under_test: Hypothesis, n_list, trials: int,
                       seed: int, workers: int = 1) -> ExponentReport:
    """Simulate the detector under ``truth`` and estimate error exponents.

    Counts type-I errors (H1 verdicts) when testing H0 and type-II errors
    (H0 verdicts) when testing H1.  The result depends only on the
    arguments, not on ``workers`` or scheduling.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n_list = [int(n) for n in n_list]
    if not n_list or any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
        raise ValueError("n_list must be increasing positive sample sizes")
    if not isinstance(truth, Cdf):
        raise ValueError("truth must be a Cdf")
    hypothesis = Hypothesis(hypothesis_under_test)

    errors = []
    for n in n_list:
        if workers > 1:
            chunks = np.array_split(np.arange(trials), workers * 4)
            jobs = [(config.nominal.to_spec(), config.radius, config.threshold,
                     truth.to_spec(), hypothesis.value, n, [int(t) for t in chunk], seed)
                    for chunk in chunks if chunk.size]
            with ProcessPoolExecutor(max_workers=workers) as pool:
                errors.append(int(sum(pool.map(_trial_block, jobs))))
        else:
            errors.append(sum(_trial_is_error(config, truth, hypothesis, n, t, seed)
                              for t in range(trials)))

    rates = [e / trials for e in errors]
    exponents = [(-math.log(r) / n if r > 0 else None) for r, n in zip(rates, n_list)]
    bounds = [(math.log(trials) / n if r == 0 else None) for r, n in zip(rates, n_list)]
    points = [(n, -math.log(r)) for n, r in zip(n_list, rates) if r > 0]
    slope = None
    if len(points) >= 2:
        ns = np.array([p[0] for p in points], dtype=float)
        ys = np.array([p[1] for p in points], dtype=float)
        slope = float(np.polyfit(ns, ys, 1)[0])
    return ExponentReport(
        hypothesis=hypothesis, n_list=n_list, trials=trials, seed=seed,
        errors=errors, rates=rates, exponents=exponents,
        exponent_lower_bounds=bounds, slope=slope, config=config)


def worst_case_typeI(config: DetectorConfig, ball_member: Cdf, n_list,
                     trials: int, seed: int, workers: int = 1) -> ExponentReport:
    """False-alarm report with the samples drawn from a chosen member of the
    null set; the membership is verified before any simulation."""
    if not ball_contains(config.ball(), ball_member):
        raise ValueError("ball_member lies outside the null set")
    return estimate_exponents(config, ball_member, Hypothesis.H0, n_list,
                              trials, seed, workers=workers)
