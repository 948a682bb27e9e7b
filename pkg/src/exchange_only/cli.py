"""Command-line front end: ``exchange-only {synthesize,verify,sweep,nogo}``.

Exit codes: 0 pass, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .geometry import TWO_PI
from .nogo import ALL_PAIRS, four_spin_nogo_demo
from .pulses import ScheduleError, compose, dump_schedule, durations, load_schedule
from .synthesis import (
    UnachievableThetaError,
    VariantProfile,
    _phase_of_t,
    _theta_peak,
    synthesize,
    theta_of_t,
    theta_range,
)
from .verification import (
    CNOT_INVARIANTS,
    cphase,
    g_independence_check,
    gate_report,
    locally_equivalent,
    phase_distance,
    sector_ms,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

_NUM = r"(\d+(?:\.\d*)?|\.\d+)"


def parse_angle(text: str) -> float:
    """Radians as a number, ``[k]pi[/m]`` or ``acos(p/q)[/m]``."""
    s = text.strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    m = re.fullmatch(rf"(-?){_NUM}?\*?pi(?:/{_NUM})?", s)
    if m:
        sign = -1.0 if m.group(1) else 1.0
        k = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * k * math.pi / den
    m = re.fullmatch(rf"acos\(([-+0-9./]+)\)(?:/{_NUM})?", s)
    if m:
        den = float(m.group(2)) if m.group(2) else 1.0
        try:
            return math.acos(float(Fraction(m.group(1)))) / den
        except (ValueError, ZeroDivisionError):
            pass
    raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}")


def _phase_arg(text: str) -> float:
    phi = parse_angle(text)
    if not 0.0 < phi < TWO_PI:
        raise argparse.ArgumentTypeError(f"phi={phi!r} must lie strictly inside (0, 2pi)")
    return phi


def _profile_arg(text: str) -> VariantProfile:
    try:
        return VariantProfile.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _log(msg: str = "") -> None:
    print(msg, file=sys.stderr)


def _reporter(machine_to_stdout: bool):
    """Human-readable lines go to stderr whenever stdout carries JSON/CSV."""
    if machine_to_stdout:
        return _log
    return lambda msg="": print(msg)


# -- verification shared by synthesize and verify ---------------------------------


def check_schedule(seq, tol: float, phi: float | None = None) -> tuple:
    """Run every sector check on a six-site sequence; returns (ok, summary)."""
    U = compose(seq)
    ok = True
    sectors = []
    for g in (0, 1):
        for M in sector_ms(g):
            rep = gate_report(U, g, M)
            good = rep.leakage_norm < tol and rep.is_diagonal
            if phi is not None and good:
                good = phase_distance(rep.gate, cphase(phi)) < 1e-9
            ok &= good
            sectors.append({"ok": good, **rep.to_dict()})
    summary = {"sectors": sectors}
    if 0 in seq.sites:
        summary["g_independence"] = "skipped: sequence pulses site 0"
    else:
        same, dev = g_independence_check(seq)
        summary["g_independence"] = {"ok": same, "max_deviation": dev}
        ok &= same
    rep = gate_report(U, 1)
    if rep.makhlin is not None:
        summary["locally_equivalent_to_cnot"] = locally_equivalent(rep.makhlin, CNOT_INVARIANTS)
    serial, parallel = durations(seq)
    summary["durations"] = {"serial": serial, "parallel": parallel}
    summary["ok"] = bool(ok)
    return bool(ok), summary


def _print_sectors(summary: dict, emit=_log) -> None:
    for sec in summary["sectors"]:
        phases = sec["diagonal_phases"]
        if phases is None:
            ph = "not diagonal"
        else:
            ref = phases["00"]
            rel = {k: math.remainder(v - ref, TWO_PI) for k, v in phases.items()}
            ph = "rel. " + " ".join(f"{k}:{v:+.6f}" for k, v in rel.items())
        flag = "ok  " if sec["ok"] else "FAIL"
        emit(
            f"  [{flag}] g={sec['g']} M={sec['M']:+.0f} leakage={sec['leakage_norm']:.2e}"
            f" offdiag={sec['offdiag_max']:.2e} phases {ph}"
        )
    gi = summary["g_independence"]
    if isinstance(gi, str):
        emit(f"  warning: g-independence check {gi}")
    else:
        emit(f"  g-independence: {gi['ok']} (max deviation {gi['max_deviation']:.2e})")


# -- subcommands ----------------------------------------------------------------------


def cmd_synthesize(args) -> int:
    try:
        res = synthesize(args.phi, args.profile, alt_theta1=args.alt_theta1)
    except (UnachievableThetaError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    full = res.full
    emit = _reporter(args.out in (None, "-"))
    ok, summary = check_schedule(full, args.tol, phi=args.phi)
    serial, parallel = durations(full)
    emit(
        f"phi={args.phi:.10f} profile={res.profile.name} core pulses={len(res.core)}"
        f" corrections={len(res.corrections)} total={len(full)}"
    )
    for p in res.corrections:
        emit(f"  correction on {p.pair}: t={p.t:.6f}")
    emit(f"duration serial={serial:.6f} parallel={parallel:.6f} (units of 1/J)")
    _print_sectors(summary, emit)
    if "locally_equivalent_to_cnot" in summary:
        emit(f"locally equivalent to CNOT: {str(summary['locally_equivalent_to_cnot']).lower()}")
    if not ok:
        emit("verification FAILED: schedule not written")
        return EXIT_FAIL
    _write(dump_schedule(full, res.meta()), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        seq, meta = load_schedule(args.schedule)
    except ScheduleError as exc:
        _log(f"schema error at {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _log(f"error: {exc}")
        return EXIT_USAGE
    if seq.n_sites != 6:
        _log(f"schema error at $.n_sites: verification needs 6 sites, got {seq.n_sites}")
        return EXIT_USAGE
    emit = _reporter(args.format == "json" and args.out in (None, "-"))
    phi = meta.get("phi") if args.check_phi else None
    ok, summary = check_schedule(seq, args.tol, phi=phi)
    if args.g is not None:
        summary["sectors"] = [s for s in summary["sectors"] if s["g"] == args.g]
        ok = all(s["ok"] for s in summary["sectors"]) and (
            isinstance(summary["g_independence"], str) or summary["g_independence"]["ok"]
        )
    emit(f"{args.schedule}: {len(seq)} pulses")
    _print_sectors(summary, emit)
    if args.format == "json":
        summary["ok"] = ok
        _write(json.dumps(summary, indent=2, sort_keys=True) + "\n", args.out)
    emit("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def sweep_rows(curve: str, n_points: int) -> list:
    if curve == "u3-phi":
        ts = np.linspace(0.0, math.pi, n_points + 2)[1:-1]
        return [(float(t), float(_phase_of_t(t))) for t in ts]
    ts = np.linspace(0.0, TWO_PI, n_points + 2)[1:-1]
    rows = []
    for t in ts:
        t = float(t)
        if t < math.pi:
            th = theta_of_t(t)
        elif t > math.pi:
            th = TWO_PI - theta_of_t(TWO_PI - t)
        else:
            th = 0.0
        rows.append((t, float(th)))
    return rows


def cmd_sweep(args) -> int:
    if args.n_points < 2:
        _log("error: --n-points must be at least 2")
        return EXIT_USAGE
    rows = sweep_rows(args.curve, args.n_points)
    if args.format == "json":
        doc = {"curve": args.curve, "rows": [{"t": t, "phase": p} for t, p in rows]}
        if args.curve == "u4tilde-theta":
            doc["theta_max"] = theta_range()
            doc["theta_max_t"] = _theta_peak()
        _write(json.dumps(doc, indent=2, sort_keys=True) + "\n", args.out)
        return EXIT_OK
    buf = io.StringIO()
    if args.curve == "u4tilde-theta":
        buf.write(
            f"# theta_max={theta_range()!r} at t={_theta_peak()!r} (first branch);"
            f" achievable theta: (0, theta_max] and [2pi - theta_max, 2pi)\n"
        )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "phase"])
    for t, p in rows:
        writer.writerow([repr(t), repr(p)])
    _write(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_nogo(args) -> int:
    if args.trials <= 0:
        _log("error: --trials must be positive")
        return EXIT_USAGE
    emit = _reporter(args.format == "json" and args.out in (None, "-"))
    rep = four_spin_nogo_demo(n_trials=args.trials, rng_seed=args.seed, n_random=args.random)
    emit(f"seed={rep.seed}")
    emit("pair   tr(d=0)  tr(d=1)  tr(d=2)  tr0-tr1+tr2")
    for (i, j) in ALL_PAIRS:
        t0, t1, t2, alt = rep.traces[(i, j)]
        emit(f"{i}-{j}    {t0:7.4f}  {t1:7.4f}  {t2:7.4f}  {alt:+.2e}")
    emit(f"max |tr0-tr1+tr2| incl. {len(rep.combo_traces)} random positive sums: {rep.max_trace_sum:.2e}")
    emit(f"determinant ratio, {len(rep.det_ratio_errors)} random sequences: max |r-1| = {rep.max_det_error:.2e}")
    emit(
        f"entangling phase, {len(rep.diagonal_phases)} diagonal sequences: max = {rep.max_entangling:.2e}"
    )
    emit(f"U4(pi) entangling phase: {rep.u4_entangling_phase:+.2e}")
    emit("PASS" if rep.passed else "FAIL")
    if args.format == "json":
        _write(json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="exchange-only",
        description="Compile and verify exchange-only CPhase pulse sequences.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="build, verify and emit a 39-pulse CPhase schedule")
    p.add_argument("--phi", type=_phase_arg, required=True, help="radians, pi, 2pi/3, acos(1/4), ...")
    p.add_argument("--profile", type=_profile_arg, default=VariantProfile.preset("fig9a"),
                   help="fig9a, fig9b or custom:<11 letters s/l>")
    p.add_argument("--alt-theta1", type=parse_angle, default=None,
                   help="use the alternate outer blocks with this first split of t5")
    p.add_argument("--out", default=None, help="schedule path (default: stdout)")
    p.add_argument("--tol", type=float, default=1e-10, help="leakage tolerance")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="verify a schedule JSON file")
    p.add_argument("schedule")
    p.add_argument("--g", type=int, choices=(0, 1), default=None)
    p.add_argument("--tol", type=float, default=1e-10, help="leakage tolerance")
    p.add_argument("--check-phi", action="store_true", help="also require CPhase(meta.phi) form")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="sample the phase-vs-pulse-time curves")
    p.add_argument("--curve", choices=("u3-phi", "u4tilde-theta"), required=True)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("nogo", help="four-spin no-go checks")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--random", type=int, default=200, help="fully random sequences for the determinant check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_nogo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
