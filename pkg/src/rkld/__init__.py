"""Robust KL divergence to Levy balls and universal hypothesis testing."""

__version__ = "0.1.0"

from .distributions import (Cdf, ExponentialCdf, MixtureCdf, NormalCdf,
                            Partition, StepCdf, TabulatedCdf, UniformCdf,
                            cdf_from_spec, empirical_from_samples,
                            load_samples, quantize)
from .levy import LevyBall, ball_contains, envelope, levy_distance, uniform_distance
from .divergence import (RefineResult, RobustKldSolution, brute_force_robust_kld,
                         kld_discrete, refine_until, robust_kld,
                         robust_kld_quantized)
from .extremal import (GlobalBoundScan, KlBallDemo, RadiusScan, SupOverBallResult,
                       TransitionProfile, TvBallDemo, global_bound_scan,
                       kl_ball_demo, radius_scan, semicontinuity_probe,
                       sup_over_ball, transition_family, tv_ball_demo)
from .uht import (Decision, DetectorConfig, ExponentReport, Hypothesis, decide,
                  derive_seed, estimate_exponents, hoeffding_statistic,
                  robust_statistic, uniform_stream, worst_case_typeI)

__all__ = [
    "__version__",
    "Cdf", "NormalCdf", "UniformCdf", "ExponentialCdf", "MixtureCdf",
    "TabulatedCdf", "StepCdf", "Partition",
    "cdf_from_spec", "empirical_from_samples", "load_samples", "quantize",
    "LevyBall", "levy_distance", "ball_contains", "envelope", "uniform_distance",
    "kld_discrete", "RobustKldSolution", "robust_kld", "robust_kld_quantized",
    "refine_until", "RefineResult", "brute_force_robust_kld",
    "TransitionProfile", "transition_family", "SupOverBallResult", "sup_over_ball",
    "GlobalBoundScan", "global_bound_scan", "RadiusScan", "radius_scan",
    "semicontinuity_probe", "TvBallDemo", "tv_ball_demo", "KlBallDemo",
    "kl_ball_demo",
    "DetectorConfig", "Decision", "Hypothesis", "decide", "robust_statistic",
    "hoeffding_statistic", "ExponentReport", "estimate_exponents",
    "worst_case_typeI", "derive_seed", "uniform_stream",
]
