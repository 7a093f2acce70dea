"""Command-line interface.

Subcommands wrap the library operations one-to-one and emit JSON (or CSV
for grid exports) on stdout or to ``--out``.  Every JSON report embeds a
run manifest (subcommand, canonicalized flags, content digests of the
input files, tool version), so reruns with identical inputs produce
byte-identical output.  Diagnostics, including timing, go to stderr.

Exit codes: 0 success (and H0 verdicts), 1 H1 verdict from ``test``,
2 usage or input errors, 3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .distributions import cdf_from_spec, empirical_from_samples, load_samples
from .divergence import robust_kld
from .extremal import kl_ball_demo, sup_over_ball, tv_ball_demo
from .levy import LevyBall, envelope, levy_distance
from .uht import (DetectorConfig, Hypothesis, decide, estimate_exponents,
                  robust_statistic)


class CliError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


def _load_spec_arg(text: str, manifest_inputs: dict):
    """Inline JSON when the argument starts with '{', else a file path."""
    text = text.strip()
    if text.startswith("{"):
        try:
            return cdf_from_spec(json.loads(text))
        except (ValueError, json.JSONDecodeError) as exc:
            raise CliError(f"bad distribution spec: {exc}")
    try:
        with open(text, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read spec file {text}: {exc}")
    manifest_inputs[text] = hashlib.sha256(raw).hexdigest()
    try:
        return cdf_from_spec(json.loads(raw.decode("utf-8")))
    except (ValueError, json.JSONDecodeError) as exc:
        raise CliError(f"bad distribution spec in {text}: {exc}")


def _load_samples_arg(path: str, manifest_inputs: dict) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            manifest_inputs[path] = hashlib.sha256(fh.read()).hexdigest()
        return load_samples(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load samples: {exc}")


def _manifest(subcommand: str, args: argparse.Namespace, inputs: dict,
              outputs: list) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items())
             if k not in ("func",) and v is not None}
    return {
        "tool": "rkld",
        "version": __version__,
        "subcommand": subcommand,
        "flags": flags,
        "inputs": dict(sorted(inputs.items())),
        "outputs": list(outputs),
    }


def _emit_json(payload: dict, out_path):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _check_radius(value: float) -> float:
    if not (0.0 < value <= 1.0):
        raise CliError("radius must be positive and at most 1")
    return value


def cmd_levy(args) -> int:
    inputs = {}
    f = _load_spec_arg(args.f, inputs)
    g = _load_spec_arg(args.g, inputs)
    payload = {"distance": levy_distance(f, g),
               "manifest": _manifest("levy", args, inputs, [args.out] if args.out else [])}
    _emit_json(payload, args.out)
    return 0


def cmd_rkld(args) -> int:
    inputs = {}
    nominal = _load_spec_arg(args.nominal, inputs)
    _check_radius(args.radius)
    samples = _load_samples_arg(args.samples, inputs)
    mu = empirical_from_samples(samples)
    solution = robust_kld(mu, LevyBall(nominal, args.radius))
    outputs = [p for p in (args.out, args.csv) if p]
    payload = solution.to_json_dict()
    payload["manifest"] = _manifest("rkld", args, inputs, outputs)
    _emit_json(payload, args.out)
    if args.csv:
        lines = ["atom,a,b,p"]
        for atom, (a, b), p in zip(mu.atoms, solution.partial_sums, solution.masses):
            lines.append(f"{float(atom)!r},{float(a)!r},{float(b)!r},{float(p)!r}")
        _emit_text("\n".join(lines) + "\n", args.csv)
    if not solution.converged:
        print("solver did not converge; report written with converged=false",
              file=sys.stderr)
        return 3
    return 0


def cmd_test(args) -> int:
    inputs = {}
    nominal = _load_spec_arg(args.nominal, inputs)
    _check_radius(args.radius)
    if args.threshold <= 0:
        raise CliError("threshold must be positive")
    samples = _load_samples_arg(args.samples, inputs)
    config = DetectorConfig(nominal, args.radius, args.threshold)
    stat = robust_statistic(samples, config)
    decision = decide(stat, args.threshold)
    payload = decision.to_json_dict()
    payload["manifest"] = _manifest("test", args, inputs, [args.out] if args.out else [])
    _emit_json(payload, args.out)
    return 1 if decision.verdict is Hypothesis.H1 else 0


def cmd_simulate(args) -> int:
    inputs = {}
    nominal = _load_spec_arg(args.nominal, inputs)
    alt = _load_spec_arg(args.alt, inputs)
    _check_radius(args.radius)
    if args.threshold <= 0:
        raise CliError("threshold must be positive")
    if args.trials < 1:
        raise CliError("trials must be >= 1")
    try:
        n_list = [int(part) for part in args.n.split(",") if part]
    except ValueError:
        raise CliError(f"bad sample-size list {args.n!r}")
    seed = args.seed
    if "RKLD_SEED" in os.environ:
        try:
            seed = int(os.environ["RKLD_SEED"])
        except ValueError:
            raise CliError("RKLD_SEED must be an integer")
    config = DetectorConfig(nominal, args.radius, args.threshold)
    started = time.monotonic()
    try:
        h0 = estimate_exponents(config, nominal, Hypothesis.H0, n_list,
                                args.trials, seed, workers=args.workers)
        h1 = estimate_exponents(config, alt, Hypothesis.H1, n_list,
                                args.trials, seed, workers=args.workers)
    except ValueError as exc:
        raise CliError(str(exc))
    elapsed_ms = 1000.0 * (time.monotonic() - started)
    payload = {
        "config": config.to_json_dict(),
        "seed": seed,
        "trials": args.trials,
        "n": n_list,
        "h0": h0.to_json_dict(),
        "h1": h1.to_json_dict(),
        "manifest": _manifest("simulate", args, inputs, [args.out] if args.out else []),
    }
    _emit_json(payload, args.out)
    print(f"simulate: {elapsed_ms:.1f} ms", file=sys.stderr)
    return 0


def cmd_envelope(args) -> int:
    inputs = {}
    nominal = _load_spec_arg(args.nominal, inputs)
    _check_radius(args.radius)
    if not (args.t_lo < args.t_hi) or args.points < 2:
        raise CliError("need t_lo < t_hi and at least two grid points")
    ball = LevyBall(nominal, args.radius)
    manifest = _manifest("envelope", args, inputs, [args.out] if args.out else [])
    lines = ["# manifest " + json.dumps(manifest, sort_keys=True), "t,lower,upper,center"]
    for t in np.linspace(args.t_lo, args.t_hi, args.points):
        lo, up, _ = envelope(ball, float(t))
        lines.append(f"{float(t)!r},{lo!r},{up!r},{nominal.eval(float(t))!r}")
    _emit_text("\n".join(lines) + "\n", args.out)
    return 0


def cmd_supball(args) -> int:
    inputs = {}
    mu0 = _load_spec_arg(args.mu0, inputs)
    nominal = _load_spec_arg(args.nominal, inputs)
    _check_radius(args.radius)
    if not (0.0 < args.delta <= 1.0):
        raise CliError("delta must be in (0, 1]")
    extra = [float(x) for x in args.grid.split(",")] if args.grid else []
    try:
        res = sup_over_ball(mu0, args.delta, LevyBall(nominal, args.radius),
                            extra_grid=extra)
    except ValueError as exc:
        raise CliError(str(exc))
    payload = {
        "sup": res.sup,
        "argmax_x": res.argmax_x,
        "candidates": res.candidates,
        "tail_converged": res.tail_converged,
        "left_tail_gap": res.left_tail_gap,
        "right_tail_gap": res.right_tail_gap,
        "base_value": res.base_value,
        "manifest": _manifest("supball", args, inputs, [args.out] if args.out else []),
    }
    _emit_json(payload, args.out)
    return 0


def cmd_demo(args) -> int:
    inputs = {}
    nominal = _load_spec_arg(args.nominal, inputs)
    manifest = _manifest(f"demo-{args.kind}", args, inputs,
                         [args.out] if args.out else [])
    try:
        if args.kind == "tv":
            _check_radius(args.radius)
            res = tv_ball_demo(nominal, args.radius, args.n)
            payload = {
                "levy_value": res.levy_value,
                "tv_lower_bound": res.tv_lower_bound,
                "atoms": res.quantized.atoms.tolist(),
                "manifest": manifest,
            }
        else:
            res = kl_ball_demo(nominal, args.n)
            payload = {
                "divergence": "infinity" if math.isinf(res.divergence) else res.divergence,
                "witness_atoms": res.witness_atoms.tolist(),
                "manifest": manifest,
            }
    except ValueError as exc:
        raise CliError(str(exc))
    _emit_json(payload, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rkld",
        description="Robust KL divergence to Levy balls and the universal "
                    "hypothesis test built on it.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("levy", help="Levy distance between two distributions")
    p.add_argument("--f", required=True, help="distribution spec (inline JSON or file)")
    p.add_argument("--g", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_levy)

    p = sub.add_parser("rkld", help="robust KL divergence of a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--nominal", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--csv", help="also write per-atom rows (atom,a,b,p)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rkld)

    p = sub.add_parser("test", help="run the robust detector on a sample file")
    p.add_argument("--samples", required=True)
    p.add_argument("--nominal", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("simulate", help="Monte-Carlo error-exponent report")
    p.add_argument("--nominal", required=True)
    p.add_argument("--alt", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--n", required=True, help="comma-separated sample sizes")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("envelope", help="CSV of the ball envelopes on a grid")
    p.add_argument("--nominal", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--t-lo", dest="t_lo", type=float, required=True)
    p.add_argument("--t-hi", dest="t_hi", type=float, required=True)
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out")
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("supball", help="supremum of the divergence over a ball")
    p.add_argument("--mu0", required=True, help="discrete base distribution spec")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--nominal", required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--grid", help="comma-separated extra transition points")
    p.add_argument("--out")
    p.set_defaults(func=cmd_supball)

    p = sub.add_parser("demo", help="discontinuity demos for TV and KL balls")
    p.add_argument("kind", choices=["tv", "kl"])
    p.add_argument("--nominal", required=True)
    p.add_argument("--radius", type=float, default=0.1)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"rkld: error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"rkld: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
