"""Command-line front end.

Subcommands: ``test``, ``factor``, ``cascade``, ``fourier``, ``limits``
and ``replay``.  Reports go to standard output; ``--out PATH`` also
writes the report to PATH plus a ``PATH.manifest.json`` that ``replay``
re-executes.  Relative ``--out`` paths resolve under ``$MZCALC_OUTPUT_DIR``
when it is set.

Exit codes: 0 success, 2 usage, 3 validation, 4 I/O.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from pathlib import Path

from . import __version__, kernels
from .cascade import accumulate, build_fig2, spec_from_json, table1_report
from .errors import MZError
from .factor import run_factor_test, run_perturbed_test, tolerance_bound, trial_scan
from .feasibility import SourceSpec, feasibility_report, total_steps
from .fourier import (
    DEFAULT_POINTS,
    RampSpec,
    builtin_signal,
    check_adiabaticity,
    detector_difference_trace,
    fourier_coefficient,
    read_signal_csv,
    stochastic_fourier,
    write_trace_csv,
)
from .stochastic import GENERATOR_ID, TrialConfig, records_to_csv, simulate_cascade, simulate_single_loop

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_IO = 0, 2, 3, 4
OUTPUT_DIR_ENV = "MZCALC_OUTPUT_DIR"


class _IOFailure(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.9g}"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer: {text!r}")
    return value


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _horizon(text: str):
    if text in ("max", "lcm"):
        return text
    return _positive_int(text)


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _add_output_options(p: argparse.ArgumentParser, csv: bool = False) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--json", action="store_true", help="emit JSON")
    if csv:
        g.add_argument("--csv", action="store_true", help="emit CSV")
    p.add_argument("--out", metavar="PATH", help="also write the report (and a run manifest) to PATH")


def _add_stochastic_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--stochastic", action="store_true", help="Monte Carlo particle counting")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--reps", type=_positive_int, default=1, help="particles per observation")
    p.add_argument("--clicks-out", metavar="PATH", help="write click records as CSV")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mzcalc", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test whether n divides N")
    p.add_argument("N", type=_positive_int)
    p.add_argument("n", type=_positive_int)
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--deviation", type=float, default=0.0, help="increment error d in 2 pi/(n+d)")
    _add_stochastic_options(p)
    _add_output_options(p)

    p = sub.add_parser("factor", help="scan candidates 2..isqrt(N)")
    p.add_argument("N", type=_positive_int)
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--prime-factors", action="store_true", help="recurse on cofactors")
    _add_output_options(p, csv=True)

    p = sub.add_parser("cascade", help="evaluate a cascade of loops")
    p.add_argument("N", type=_positive_int, nargs="?")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fig2", type=_positive_int, nargs=7, metavar="n")
    src.add_argument("--config", metavar="FILE", help="cascade tree JSON")
    src.add_argument("--table1", type=_positive_int, nargs=3, metavar=("n1", "n2", "n4"))
    src.add_argument("--print-template", action="store_true", help="print the seven-loop template and exit")
    p.add_argument("--horizon", type=_horizon, default=None, help="max, lcm or an observation count")
    _add_stochastic_options(p)
    _add_output_options(p)

    p = sub.add_parser("fourier", help="Fourier coefficient by phase ramp")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", metavar="NAME")
    src.add_argument("--signal-csv", metavar="FILE", help="CSV with columns t,f")
    p.add_argument("--tau", type=float, default=None, help="period of a CSV signal")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--mode", choices=("cos", "sin"), default="cos")
    p.add_argument("--c", type=float, default=1.0, help="intensity proportionality constant")
    p.add_argument("--points", type=_positive_int, default=DEFAULT_POINTS)
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--trace-out", metavar="PATH", help="write the difference-rate trace as CSV")
    p.add_argument("--energy", type=float, help="particle energy in J, for the adiabaticity check")
    p.add_argument("--stochastic", action="store_true")
    p.add_argument("--particles", type=_positive_int, default=10**6)
    p.add_argument("--seed", type=_seed, default=0)
    _add_output_options(p)

    p = sub.add_parser("limits", help="coherence and cost limits")
    p.add_argument("--lambda", dest="wavelength", type=float, required=True, help="wavelength in m")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--dlambda", type=float, help="wavelength standard deviation in m")
    g.add_argument("--coherence", type=float, help="coherence length in m")
    p.add_argument("--dwell", type=float, help="seconds per phase setting")
    _add_output_options(p)

    p = sub.add_parser("replay", help="re-run a manifest written by --out")
    p.add_argument("manifest")
    return parser


# -- commands -----------------------------------------------------------------

def cmd_test(args) -> dict:
    d = {"command": "test", "N": args.N, "n": args.n, "visibility": args.visibility}
    if args.stochastic:
        if args.deviation:
            raise MZError("--deviation is not available with --stochastic")
        cfg = TrialConfig(args.reps, args.seed)
        run = simulate_single_loop(args.N, args.n, cfg, v=args.visibility)
        if args.clicks_out:
            _write_text(args.clicks_out, records_to_csv(run.records, cfg))
        d.update(
            mode="stochastic", intensity=run.empirical_I, stderr=run.stderr,
            expected_intensity=run.expected_I, classification=str(run.classification),
            remainder_L=args.N % args.n, steps_used=args.n, seed=args.seed,
            repetitions=args.reps, generator_id=GENERATOR_ID,
        )
        return d
    if args.deviation:
        r = run_perturbed_test(args.N, args.n, args.deviation, v=args.visibility)
    else:
        r = run_factor_test(args.N, args.n, v=args.visibility)
    d.update(
        mode="deterministic", deviation=args.deviation, intensity=r.intensity,
        classification=str(r.classification), remainder_L=r.remainder_L,
        steps_used=r.steps_used, phase_settings=r.phase_settings,
        tolerance_bound=tolerance_bound(args.N),
    )
    return d


def _render_test(d) -> str:
    lines = [
        f"N = {d['N']}, n = {d['n']} ({d['mode']})",
        f"intensity      {fmt(d['intensity'])} of {d['steps_used']} observations",
        f"classification {d['classification']}",
        f"remainder L    {d['remainder_L']}",
    ]
    if d["mode"] == "stochastic":
        lines.append(f"stderr         {fmt(d['stderr'])}  (expected {fmt(d['expected_intensity'])})")
        lines.append(f"seed {d['seed']}, {d['repetitions']} particles/step, {d['generator_id']}")
    else:
        lines.append(f"phase settings {d['phase_settings']}")
        if d["deviation"]:
            lines.append(f"deviation d    {fmt(d['deviation'])}  (|d/n| = {fmt(abs(d['deviation']) / d['n'])}, "
                         f"bound {fmt(d['tolerance_bound'])})")
    return "\n".join(lines) + "\n"


def _prime_factors(N: int, v: float, threads: int) -> list[int]:
    out = []
    while N > 1:
        hits = [r for r in trial_scan(N, v, threads) if r.is_factor] if N >= 4 else []
        if not hits:
            out.append(N)
            break
        p = hits[0].n
        out.append(p)
        N //= p
    return out


def cmd_factor(args) -> dict:
    if args.N < 2:
        raise MZError(f"N must be >= 2, got {args.N}")
    results = trial_scan(args.N, args.visibility, args.threads)
    d = {
        "command": "factor",
        "N": args.N,
        "visibility": args.visibility,
        "candidates": [
            {"n": r.n, "intensity": r.intensity, "classification": str(r.classification),
             "remainder_L": r.remainder_L, "phase_settings": r.phase_settings}
            for r in results
        ],
        "factors": [{"n": r.n, "cofactor": r.cofactor} for r in results if r.is_factor],
        "total_phase_settings": sum(r.phase_settings for r in results),
    }
    d["prime"] = not d["factors"]
    if args.prime_factors:
        d["prime_factors"] = _prime_factors(args.N, args.visibility, args.threads)
    return d


def _render_factor(d) -> str:
    lines = [f"N = {d['N']}: candidates 2..{math.isqrt(d['N'])}", f"{'n':>8} {'intensity':>16}  class       L"]
    for c in d["candidates"]:
        lines.append(f"{c['n']:>8} {fmt(c['intensity']):>16}  {c['classification']:<10} {c['remainder_L']}")
    if d["factors"]:
        lines.append("divisors: " + ", ".join(f"{f['n']} x {f['cofactor']}" for f in d["factors"]))
    else:
        lines.append("no divisors found: N is prime")
    if "prime_factors" in d:
        lines.append("prime factors: " + " * ".join(str(p) for p in d["prime_factors"]))
    lines.append(f"total phase settings {d['total_phase_settings']}")
    return "\n".join(lines) + "\n"


def _factor_csv(d) -> str:
    buf = io.StringIO()
    buf.write("n,intensity,classification,remainder_L,phase_settings\n")
    for c in d["candidates"]:
        buf.write(f"{c['n']},{c['intensity']!r},{c['classification']},{c['remainder_L']},{c['phase_settings']}\n")
    return buf.getvalue()


def _table1_dict(rep) -> dict:
    return {
        "ns": list(rep.ns),
        "horizon": rep.horizon,
        "unit": rep.unit,
        "predicted_row": ["F" if f else "-" for f in rep.predicted_row],
        "table": rep.table_values,
        "measured": rep.in_units,
        "deviation": rep.deviation,
    }


def cmd_cascade(args) -> dict:
    if args.print_template:
        return {"command": "cascade", "template": _template_text()}
    if args.table1:
        if args.N is None:
            raise MZError("N is required")
        rep = table1_report(args.N, *args.table1, K=args.horizon or "max")
        return {"command": "cascade", "N": args.N, "table1": _table1_dict(rep)}
    if args.fig2:
        if args.N is None:
            raise MZError("N is required with --fig2")
        spec = build_fig2(args.N, args.fig2, args.horizon or "max")
    else:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise _IOFailure(f"cannot read {args.config}: {exc.strerror}") from None
        spec = spec_from_json(text, N=args.N, sum_horizon=args.horizon)
    dets = []
    for det in spec.detectors:
        t = accumulate(spec, det)
        dets.append({
            "detector": det, "expected_intensity": t.expected_intensity, "units_of": t.units_of,
            "in_units": t.in_units, "horizon": t.horizon, "offset": t.offset,
            "depth": spec.path(det).depth,
        })
    d = {"command": "cascade", "N": spec.N, "horizon": spec.sum_horizon, "detectors": dets}
    if args.fig2:
        n1, n2, _, n4 = args.fig2[:4]
        d["table1"] = _table1_dict(table1_report(args.N, n1, n2, n4, K=args.horizon or "max"))
    if args.stochastic:
        cfg = TrialConfig(args.reps, args.seed)
        run = simulate_cascade(spec, cfg)
        if args.clicks_out:
            _write_text(args.clicks_out, records_to_csv(run.records, cfg))
        d["stochastic"] = {
            "seed": args.seed, "repetitions": args.reps, "generator_id": GENERATOR_ID,
            "tallies": {det: {"intensity": m, "stderr": s} for det, (m, s) in run.tallies.items()},
        }
    return d


def _render_cascade(d) -> str:
    if "template" in d:
        return d["template"]
    lines = [f"N = {d['N']}"]
    if "detectors" in d:
        lines.append(f"{'detector':>8} {'intensity':>16} {'units':>12} {'K':>6} {'offset':>6}")
        for t in d["detectors"]:
            lines.append(f"{t['detector']:>8} {fmt(t['expected_intensity']):>16} {fmt(t['in_units']):>12} "
                         f"{t['horizon']:>6} {t['offset']:>6}")
    if "table1" in d:
        t1 = d["table1"]
        lines.append(f"front section n1,n2,n4 = {t1['ns']}, K = {t1['horizon']}, unit K/8 = {fmt(t1['unit'])}")
        lines.append("predicted row " + " ".join(t1["predicted_row"]))
        for key in ("A", "B", "C+D"):
            lines.append(f"  I_{key:<4} {fmt(t1['measured'][key]):>14} units  (table {t1['table'][key]}, "
                         f"deviation {fmt(t1['deviation'][key])})")
    if "stochastic" in d:
        st = d["stochastic"]
        lines.append(f"stochastic: seed {st['seed']}, {st['repetitions']} particles/instant")
        for det, t in st["tallies"].items():
            lines.append(f"  {det:>6} {fmt(t['intensity']):>14} +- {fmt(t['stderr'])}")
    return "\n".join(lines) + "\n"


def _template_text() -> str:
    from importlib.resources import files

    return files("mzcalc").joinpath("data/fig2_template.json").read_text()


def cmd_fourier(args) -> dict:
    if args.builtin:
        signal = builtin_signal(args.builtin)
        source = {"builtin": args.builtin}
    else:
        try:
            signal = read_signal_csv(args.signal_csv, args.tau)
        except OSError as exc:
            raise _IOFailure(f"cannot read {args.signal_csv}: {exc.strerror}") from None
        source = {"csv": args.signal_csv}
    ramp = RampSpec.cosine(args.m) if args.mode == "cos" else RampSpec.sine(args.m)
    coeff = fourier_coefficient(signal, ramp, args.c, args.points, args.visibility)
    d = {
        "command": "fourier", "signal": source, "tau": signal.period_tau, "m": args.m,
        "mode": args.mode, "c": args.c, "points": args.points, "visibility": args.visibility,
        "coefficient": coeff,
    }
    if args.trace_out:
        t, rate = detector_difference_trace(signal, ramp, args.c, args.points, args.visibility)
        buf = io.StringIO()
        write_trace_csv(buf, t, rate)
        _write_text(args.trace_out, buf.getvalue())
    if args.stochastic:
        est, err = stochastic_fourier(signal, ramp, args.particles, args.seed, v=args.visibility, points=args.points)
        d["stochastic"] = {"estimate": args.c * est, "stderr": abs(args.c) * err, "particles": args.particles,
                           "seed": args.seed, "generator_id": GENERATOR_ID}
    if args.energy is not None:
        chk = check_adiabaticity(args.energy, args.m, signal.period_tau)
        d["adiabaticity"] = {"margin": chk.margin, "threshold": chk.threshold, "valid": chk.valid}
    return d


def _render_fourier(d) -> str:
    lines = [f"{d['mode']} coefficient m={d['m']}: {fmt(d['coefficient'])}"]
    if "stochastic" in d:
        st = d["stochastic"]
        lines.append(f"stochastic estimate {fmt(st['estimate'])} +- {fmt(st['stderr'])} "
                     f"({st['particles']} particles, seed {st['seed']})")
    if "adiabaticity" in d:
        a = d["adiabaticity"]
        lines.append(f"adiabaticity margin {fmt(a['margin'])} ({'ok' if a['valid'] else 'VIOLATED'})")
    return "\n".join(lines) + "\n"


def cmd_limits(args) -> dict:
    if args.coherence is not None:
        src = SourceSpec.from_coherence(args.wavelength, args.coherence)
    else:
        src = SourceSpec(args.wavelength, args.dlambda)
    rep = feasibility_report(src, args.dwell)
    d = {
        "command": "limits",
        "lambda": src.wavelength_lambda,
        "dlambda": src.bandwidth_delta_lambda,
        "coherence_length": rep.coherence_length_C,
        "max_N": rep.max_N,
        "worst_case_steps": rep.worst_case_steps,
        "total_scan_steps": total_steps(rep.max_N),
        "tolerance_bound": tolerance_bound(rep.max_N) if rep.max_N >= 1 else None,
        "warnings": list(rep.warnings),
    }
    if rep.worst_case_seconds is not None:
        d["worst_case_seconds"] = rep.worst_case_seconds
    return d


def _render_limits(d) -> str:
    lines = [
        f"coherence length C    {fmt(d['coherence_length'])} m",
        f"max factorable N      {d['max_N']}",
        f"worst candidate steps {d['worst_case_steps']}  (isqrt(N) * N, ~ N^1.5)",
        f"full scan steps       {d['total_scan_steps']}",
    ]
    if d["tolerance_bound"] is not None:
        lines.append(f"tolerance |d/n| <=    {fmt(d['tolerance_bound'])}")
    if "worst_case_seconds" in d:
        lines.append(f"worst candidate time  {fmt(d['worst_case_seconds'])} s")
    lines.extend(f"warning: {w}" for w in d["warnings"])
    return "\n".join(lines) + "\n"


COMMANDS = {
    "test": (cmd_test, _render_test),
    "factor": (cmd_factor, _render_factor),
    "cascade": (cmd_cascade, _render_cascade),
    "fourier": (cmd_fourier, _render_fourier),
    "limits": (cmd_limits, _render_limits),
}


# -- plumbing -------------------------------------------------------------------

def _write_text(path, text: str) -> Path:
    p = _resolve_out(path)
    try:
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise _IOFailure(f"cannot write {p}: {exc.strerror}") from None
    return p


def _format(args, d) -> str:
    if getattr(args, "json", False):
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    if getattr(args, "csv", False):
        return _factor_csv(d)
    return COMMANDS[args.command][1](d)


def _manifest(args, argv, outputs) -> dict:
    params = {k: v for k, v in vars(args).items() if k not in ("command",)}
    return {
        "command": args.command,
        "argv": list(argv),
        "parameters": params,
        "seed": params.get("seed") if params.get("stochastic") else None,
        "outputs": [str(p) for p in outputs],
        "tool_version": __version__,
        "backend": kernels.BACKEND,
    }


def _replay(path: str, stdout) -> int:
    try:
        manifest = json.loads(Path(path).read_text())
    except OSError as exc:
        print(f"mzcalc: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"mzcalc: {path}: line {exc.lineno}: {exc.msg}", file=sys.stderr)
        return EXIT_VALIDATION
    argv = manifest.get("argv") if isinstance(manifest, dict) else None
    if not isinstance(argv, list) or not argv or argv[0] == "replay" or not all(isinstance(a, str) for a in argv):
        print(f"mzcalc: {path}: not a run manifest", file=sys.stderr)
        return EXIT_VALIDATION
    return main(argv, stdout=stdout)


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "replay":
        return _replay(args.manifest, stdout)
    func, _ = COMMANDS[args.command]
    try:
        d = func(args)
        text = _format(args, d)
        outputs = []
        if args.out:
            outputs.append(_write_text(args.out, text))
            for extra in ("clicks_out", "trace_out"):
                if getattr(args, extra, None):
                    outputs.append(_resolve_out(getattr(args, extra)))
            manifest = _manifest(args, argv, outputs)
            _write_text(args.out + ".manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except _IOFailure as exc:
        print(f"mzcalc: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MZError, ValueError) as exc:
        print(f"mzcalc: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
