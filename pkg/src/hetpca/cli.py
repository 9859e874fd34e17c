"""Command line entry point: ``predict``, ``simulate`` and ``sweep``.

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from hetpca.asymptotics import homoscedastic_bounds, predict_component
from hetpca.datagen import DatasetSpec, export_dataset, generate, prediction_profile
from hetpca.errors import DomainError, HypothesisViolation, InvariantError
from hetpca.harness import Axis, SweepConfig, format_csv, predictions_for, run_sweep
from hetpca.pca_metrics import evaluate
from hetpca.spectrum import NoiseProfile, SpectrumParams

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    # registered on the root and on every subcommand so they work in either position
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--out", type=Path, default=d, help="write output here instead of stdout")
    p.add_argument("--json", action="store_true", default=d if suppress else False, help="JSON output")
    p.add_argument("--threads", type=int, default=d, help="worker threads for sweeps")
    p.add_argument("--seed", type=int, default=d, help="dataset seed (simulate) or master seed (sweep)")
    p.add_argument("--config", type=Path, default=d, help="JSON sweep config")


def _noise_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--theta", type=float, action="append", help="subspace amplitude (repeatable)")
    p.add_argument("--sigma2", type=float, action="append", help="noise variance (repeatable)")
    p.add_argument("--p", type=float, action="append", help="proportion of each variance (repeatable)")


def _data_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--field", choices=("real", "complex"))
    p.add_argument("--coeff-dist", choices=("gaussian", "rademacher"))
    p.add_argument("--assignment", choices=("deterministic", "random-iid", "johnstone-spiked", "mixture-homoscedastic"))


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="hetpca", description="Asymptotic and simulated PCA performance under heteroscedastic noise.")
    _global_flags(root, suppress=False)
    sub = root.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("predict", help="asymptotic limits for each component")
    _global_flags(pr, suppress=True)
    pr.add_argument("--c", type=float, required=True, help="sample-to-dimension ratio")
    _noise_flags(pr)

    sm = sub.add_parser("simulate", help="one synthetic trial with its predictions")
    _global_flags(sm, suppress=True)
    sm.add_argument("--n", type=int, required=True)
    sm.add_argument("--d", type=int, required=True)
    _noise_flags(sm)
    _data_flags(sm)
    sm.add_argument("--debug-retain", action="store_true", help="keep the raw noise matrix in memory")
    sm.add_argument("--export", type=Path, help="write the dataset (binary + JSON sidecar)")

    sw = sub.add_parser("sweep", help="Monte Carlo sweep written as CSV")
    _global_flags(sw, suppress=True)
    sw.add_argument("--kind", dest="sweep_kind", choices=("p2-sweep", "c-theta-grid", "sigma-grid", "added-data"))
    sw.add_argument("--n", type=int)
    sw.add_argument("--d", type=int)
    sw.add_argument("--c", type=float, help="base ratio (added-data)")
    _noise_flags(sw)
    _data_flags(sw)
    sw.add_argument("--trials", type=int)
    sw.add_argument("--axis1", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    sw.add_argument("--axis2", type=float, nargs=3, metavar=("START", "STOP", "COUNT"))
    return root


def _profile(sigma2, p) -> NoiseProfile:
    if not sigma2:
        raise DomainError("at least one --sigma2 is required")
    if p is None:
        if len(sigma2) > 1:
            raise DomainError("--p is required for each --sigma2 when more than one variance is given")
        p = [1.0]
    return NoiseProfile(sigma2, p)


def _thetas(theta) -> list[float]:
    if not theta:
        raise DomainError("at least one --theta is required")
    return list(theta)


def _finite(x: float):
    return x if math.isfinite(x) else None


def prediction_report(c: float, thetas: Sequence[float], noise: NoiseProfile) -> dict:
    """Everything ``predict`` prints, as a plain dict."""
    comps = []
    for th in thetas:
        pr = predict_component(SpectrumParams(c, th**2, noise))
        b = homoscedastic_bounds(c, th**2, noise)
        comps.append({
            "theta": th,
            "theta_sq": th**2,
            "alpha": pr.alpha,
            "beta": pr.beta,
            "a_at_beta": pr.a_at_beta,
            "above_transition": pr.above_transition,
            "conjectured": pr.conjectured,
            "amplitude_sq_limit": pr.amplitude_sq_limit,
            "amplitude_sq_ratio": pr.amplitude_sq_ratio,
            "subspace_recovery": pr.subspace_recovery,
            "coefficient_recovery": pr.coefficient_recovery,
            "mixed_recovery": pr.mixed_recovery,
            "bounds": {
                "amplitude_sq_ratio_lower": b.amplitude_sq_ratio_lower,
                "subspace_upper": b.subspace_upper,
                "coefficient_upper": b.coefficient_upper,
            },
        })
    preds = predictions_for(c, thetas, noise)
    try:
        inv = noise.mean_inverse_variance
    except DomainError:
        inv = None
    return {
        "c": c,
        "variances": list(noise.variances),
        "proportions": list(noise.proportions),
        "mean_variance": noise.mean_variance,
        "mean_inverse_variance": inv,
        "components": comps,
        "overall": {
            "mean_subspace_recovery": preds[(0, "overall_subspace")],
            "mse": _finite(preds[(0, "mse")]),
        },
    }


def _fmt_table(rep: dict) -> str:
    lines = [
        f"c = {rep['c']:.6g}",
        "variances = " + ", ".join(f"{v:.6g}" for v in rep["variances"]),
        "proportions = " + ", ".join(f"{p:.6g}" for p in rep["proportions"]),
        f"mean variance = {rep['mean_variance']:.6g}",
        "mean inverse variance = " + ("undefined" if rep["mean_inverse_variance"] is None else f"{rep['mean_inverse_variance']:.6g}"),
        "",
    ]
    keys = [
        ("alpha", "alpha"), ("beta", "beta"), ("a_at_beta", "A(beta)"),
        ("amplitude_sq_ratio", "amplitude ratio"), ("subspace_recovery", "subspace"),
        ("coefficient_recovery", "coefficient"), ("mixed_recovery", "mixed"),
    ]
    for i, comp in enumerate(rep["components"], start=1):
        flag = "above transition" if comp["above_transition"] else "below transition (conjectured zero)"
        lines.append(f"component {i}: theta = {comp['theta']:.6g}, {flag}")
        for k, label in keys:
            lines.append(f"  {label:<16} {comp[k]:.6f}")
        b = comp["bounds"]
        lines.append(f"  {'bounds':<16} amplitude >= {b['amplitude_sq_ratio_lower']:.6f}, "
                     f"subspace <= {b['subspace_upper']:.6f}, coefficient <= {b['coefficient_upper']:.6f}")
    ov = rep["overall"]
    lines.append("")
    lines.append(f"overall subspace recovery = {ov['mean_subspace_recovery']:.6f}")
    lines.append("mse = " + ("undefined (a component is below the transition)" if ov["mse"] is None else f"{ov['mse']:.6f}"))
    return "\n".join(lines) + "\n"


def _check_writable(out: Path) -> None:
    # fail before a long sweep rather than after it
    parent = out.resolve().parent
    if out.is_dir() or not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write to {out}")


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def cmd_predict(args) -> int:
    rep = prediction_report(args.c, _thetas(args.theta), _profile(args.sigma2, args.p))
    _emit(json.dumps(rep, indent=2) + "\n" if args.json else _fmt_table(rep), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = DatasetSpec(
        n=args.n, d=args.d, amplitudes=_thetas(args.theta), noise=_profile(args.sigma2, args.p),
        field=args.field or "real", coeff_dist=args.coeff_dist or "gaussian",
        assignment=args.assignment or "deterministic", seed=args.seed or 0,
    )
    ds = generate(spec, retain_noise=args.debug_retain)
    if args.export is not None:
        export_dataset(ds, args.export)
    metrics = evaluate(ds)
    rep = {
        "spec": spec.to_dict(),
        "prediction": prediction_report(spec.c, spec.amplitudes, prediction_profile(spec, realized=True)),
        "metrics": metrics.as_dict(),
    }
    if args.json:
        text = json.dumps(rep, indent=2) + "\n"
    else:
        lines = [f"n = {spec.n}, d = {spec.d}, c = {spec.c:.6g}, seed = {spec.seed}", ""]
        m = rep["metrics"]
        for i, comp in enumerate(rep["prediction"]["components"]):
            lines.append(f"component {i + 1}: theta = {comp['theta']:.6g}")
            lines.append(f"  {'':<16} {'empirical':>10} {'asymptotic':>10}")
            for emp, lim in (("subspace_sq_cos", "subspace_recovery"), ("coeff_sq_cos", "coefficient_recovery"),
                             ("mixed_real", "mixed_recovery"), ("amplitude_ratio", "amplitude_sq_ratio")):
                lines.append(f"  {emp:<16} {m[emp][i]:>10.6f} {comp[lim]:>10.6f}")
        ov = rep["prediction"]["overall"]
        lines.append("")
        lines.append(f"overall subspace {m['overall_subspace']:.6f} (asymptotic {ov['mean_subspace_recovery']:.6f})")
        mse = "undefined" if ov["mse"] is None else f"{ov['mse']:.6f}"
        lines.append(f"mse {m['mse']:.6f} (asymptotic {mse})")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def sweep_config_from_args(args) -> SweepConfig:
    base = {}
    if getattr(args, "config", None) is not None:
        base = json.loads(Path(args.config).read_text())
    over = {
        "sweep_kind": args.sweep_kind, "n": args.n, "d": args.d, "c": args.c,
        "amplitudes": args.theta, "variances": args.sigma2, "proportions": args.p,
        "field": args.field, "coeff_dist": args.coeff_dist, "assignment": args.assignment,
        "trials": args.trials, "master_seed": args.seed,
    }
    for name in ("axis1", "axis2"):
        ax = getattr(args, name)
        if ax is not None:
            if ax[2] != int(ax[2]):
                raise DomainError(f"--{name} COUNT must be an integer")
            over[name] = Axis(ax[0], ax[1], int(ax[2]))
    base.update({k: v for k, v in over.items() if v is not None})
    return SweepConfig.from_dict(base)


def cmd_sweep(args) -> int:
    cfg = sweep_config_from_args(args)
    rows = run_sweep(cfg, threads=args.threads or 1)
    if args.json:
        text = json.dumps([r.__dict__ for r in rows], indent=1, allow_nan=True) + "\n"
    else:
        text = format_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


_COMMANDS = {"predict": cmd_predict, "simulate": cmd_simulate, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.threads is not None and args.threads < 1:
            raise DomainError("--threads must be >= 1")
        if args.out is not None:
            _check_writable(args.out)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"hetpca: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, HypothesisViolation, json.JSONDecodeError, TypeError) as e:
        print(f"hetpca: invalid input: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, InvariantError, MemoryError) as e:
        print(f"hetpca: error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
