"""``qcorr`` command line: reports, sweeps, plans, identity checks and trajectories.

All numeric output is CSV with a header row and 15 significant digits.
Exit codes: 0 ok, 1 failed verification, 2 unreadable input or bad flags,
3 input that parses but is not a valid state.
"""
import argparse
import csv
import os
import sys
from pathlib import Path

import numpy as np

from qcorr import _accel, dqc1, dynamics, schemes
from qcorr.measures import batch_reports, correlation_report
from qcorr.states import InvalidStateError, StateFormatError, random_mixed_batch, read_state, werner

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_INVALID_STATE = 3


class UsageError(Exception):
    pass


def _fmt(v):
    return f"{float(v):.15g}"


def parse_grid(text, lo=None, hi=None, name="grid"):
    """``start:end:points`` -> evenly spaced array including both ends."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{name} must look like start:end:points, got {text!r}")
    try:
        start, end, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None
    if n < 1:
        raise UsageError(f"{name}: need at least one point")
    if n > 1 and end <= start:
        raise UsageError(f"{name}: end must exceed start")
    if (lo is not None and start < lo) or (hi is not None and end > hi):
        raise UsageError(f"{name} must lie within [{lo}, {hi}]")
    return np.linspace(start, end, n)


def parse_triple(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--c expects three comma-separated numbers, got {text!r}") from None
    if len(vals) != 3:
        raise UsageError(f"--c expects three numbers, got {len(vals)}")
    return vals


def _positive(name, v):
    if not v > 0:
        raise UsageError(f"{name} must be positive")
    return v


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", newline="", encoding="utf-8"), True


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


# --- commands -------------------------------------------------------------------

def cmd_measure(args):
    try:
        rho = read_state(args.state_file)
    except StateFormatError as exc:
        print(f"error: {args.state_file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InvalidStateError as exc:
        print(f"error: {args.state_file}: invalid state: {exc}", file=sys.stderr)
        return EXIT_INVALID_STATE
    rep = correlation_report(rho)
    fh, close = _open_out(args.output)
    try:
        w = _writer(fh)
        w.writerow(["d_g", "q", "theta", "negativity", "neg_sq", "tr_s", "tr_s2"])
        w.writerow([_fmt(getattr(rep, k)) for k in ("d_g", "q", "theta", "negativity", "neg_sq", "tr_s", "tr_s2")])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_scatter(args):
    if args.samples < 1:
        raise UsageError("--samples must be >= 1")
    if args.d < 2:
        raise UsageError("--d must be >= 2")
    rng = np.random.default_rng(args.seed)
    fh, close = _open_out(args.output)
    try:
        w = _writer(fh)
        w.writerow(["index", "d_g", "q", "neg_sq"])
        chunk = 5000
        done = 0
        while done < args.samples:
            n = min(chunk, args.samples - done)
            for i, rep in enumerate(batch_reports(random_mixed_batch(n, args.d, rng), args.d)):
                w.writerow([done + i, _fmt(rep.d_g), _fmt(min(rep.q, rep.d_g)), _fmt(rep.neg_sq)])
            done += n
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_dqc1(args):
    grid = parse_grid(args.mu_grid, 0.0, 1.0, "--mu-grid")
    rows = dqc1.dqc1_sweep(grid)
    fh, close = _open_out(args.output)
    try:
        dqc1.write_sweep_csv(rows, fh)
    finally:
        if close:
            fh.close()
    if args.fit:
        coef = dqc1.quadratic_coefficients(rows)
        print(f"# fit d_g/mu^2={_fmt(coef['d_g'])} q/mu^2={_fmt(coef['q'])}", file=sys.stderr)
    return EXIT_OK


def _read_expectations(path):
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() == "label":
                continue
            if len(row) != 2:
                raise StateFormatError("expected 'label,value'", lineno)
            try:
                out[row[0].strip()] = float(row[1])
            except ValueError:
                raise StateFormatError(f"value {row[1]!r} is not a number", lineno) from None
    return out


def cmd_plan(args):
    setting = schemes.Setting(args.setting)
    if setting is schemes.Setting.NMR:
        plan = schemes.nmr_plan(args.d, args.basis)
    else:
        if args.d != 2:
            raise UsageError("optical plans are generated for two qubits (--d 2)")
        plan = schemes.optical_plan(setting)
    if args.expectations:
        if setting is not schemes.Setting.NMR:
            raise UsageError("--expectations is supported for the NMR plan")
        try:
            exp = _read_expectations(args.expectations)
        except (OSError, StateFormatError) as exc:
            print(f"error: {args.expectations}: {exc}", file=sys.stderr)
            return EXIT_INPUT
        try:
            d_g, q = schemes.reconstruct_from_nmr(exp, args.d, args.basis)
        except KeyError as exc:
            print(f"error: {exc.args[0]}", file=sys.stderr)
            return EXIT_INPUT
        w = _writer(sys.stdout)
        w.writerow(["d_g", "q"])
        w.writerow([_fmt(d_g), _fmt(q)])
        return EXIT_OK
    fh, close = _open_out(args.output)
    try:
        print(f"# setting={setting.value} count={plan.count} tomography_count={plan.tomography_count}", file=fh)
        w = _writer(fh)
        w.writerow(["label", "copies", "operator_hash"])
        for o in plan.observables:
            w.writerow([o.label, o.copies, o.digest()])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def cmd_verify(args):
    checks = schemes.identity_suite(n_states=args.states, seed=args.seed, circuit=not args.no_circuit)
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: max error {c.max_error:.3e} (tol {c.tol:.0e})")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_VERIFY_FAILED


def _channel_from_args(args):
    if args.channel == "lorentzian":
        if not 0.0 <= args.r <= 1.0:
            raise UsageError("--r must lie in [0, 1]")
        params = dynamics.LorentzianParams(_positive("--gamma0", args.gamma0), _positive("--lambda", args.lam))
        return dynamics.Channel("lorentzian", params), werner(args.r), {"r": args.r}
    params = dynamics.PhaseFlipParams(_positive("--gamma", args.gamma))
    c0 = parse_triple(args.c)
    try:
        dynamics.evolve_phase_flip(c0, 0.0, params)
    except InvalidStateError as exc:
        raise UsageError(f"--c: {exc}") from None
    return dynamics.Channel("phaseflip", params), c0, {"c1": c0[0], "c2": c0[1], "c3": c0[2]}


def cmd_dynamics(args):
    times = parse_grid(args.t, 0.0, None, "--t")
    channel, initial, label = _channel_from_args(args)
    traj = dynamics.trajectory(initial, channel, times, label)
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / traj.filename()
        with open(path, "w", newline="", encoding="utf-8") as fh:
            traj.write_csv(fh)
        print(path)
    else:
        fh, close = _open_out(args.output)
        try:
            traj.write_csv(fh)
        finally:
            if close:
                fh.close()
    if len(traj.times) < len(times):
        print(f"# stopped at t={_fmt(times[len(traj.times)])}: channel undefined", file=sys.stderr)
    return EXIT_OK


def cmd_gap(args):
    times = parse_grid(args.t, 0.0, None, "--t")
    if args.channel == "lorentzian":
        grid = parse_grid(args.param_grid, 0.0, 1.0, "--param-grid")
        params = dynamics.LorentzianParams(_positive("--gamma0", args.gamma0), _positive("--lambda", args.lam))
        channel = dynamics.Channel("lorentzian", params)
        family = dynamics.werner_family(grid)
        name = "r"
    else:
        grid = parse_grid(args.param_grid, 0.0, 1.0, "--param-grid")
        channel = dynamics.Channel("phaseflip", dynamics.PhaseFlipParams(_positive("--gamma", args.gamma)))
        family = dynamics.phase_flip_family(grid)
        name = "s"
    rows = dynamics.max_gap(family, channel, times)
    fh, close = _open_out(args.output)
    try:
        w = _writer(fh)
        w.writerow([name, "t_max", "max_gap"])
        for p, t, g in rows:
            w.writerow([_fmt(p), _fmt(t), _fmt(g)])
    finally:
        if close:
            fh.close()
    return EXIT_OK


# --- parser ---------------------------------------------------------------------

def _add_channel_args(p, default_t):
    p.add_argument("channel", choices=["lorentzian", "phaseflip"])
    p.add_argument("--r", type=float, default=0.75, help="Werner parameter (lorentzian)")
    p.add_argument("--gamma0", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.0, help="flip rate (phaseflip)")
    p.add_argument("--c", default="1,-0.6,0.6", help="initial c1,c2,c3 (phaseflip)")
    p.add_argument("--t", default=default_t, help="time grid start:end:points")


def build_parser():
    ap = argparse.ArgumentParser(prog="qcorr", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="thread cap (overrides QCORR_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="correlation report for a state file")
    p.add_argument("state_file")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("scatter", help="(D_G, Q) for random two-qubit states")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_scatter)

    p = sub.add_parser("dqc1", help="correlations of the DQC1 output versus mu")
    p.add_argument("--mu-grid", default="0:1:21")
    p.add_argument("--fit", action="store_true", help="print mu^2 coefficients to stderr")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_dqc1)

    p = sub.add_parser("plan", help="observable plan, or reconstruction from NMR expectations")
    p.add_argument("--setting", choices=[s.value for s in schemes.Setting], default="nmr")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--basis", choices=["gell-mann", "pauli"], default="gell-mann")
    p.add_argument("--expectations", help="CSV of label,value rows")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("verify", help="check every multicopy and localization identity")
    p.add_argument("--states", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-circuit", action="store_true", help="skip the interferometer simulation")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dynamics", help="correlation trajectory under a channel")
    _add_channel_args(p, "0:20:401")
    p.add_argument("-o", "--output")
    p.add_argument("--output-dir", help="write <channel>_<params>.csv here")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("gap", help="max_t (D_G - Q) across a family of initial states")
    _add_channel_args(p, "0:20:401")
    p.add_argument("--param-grid", default="0:1:11", help="Werner r, or s in c(0) = (1, -s, s)")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gap)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.threads is not None:
            _accel.set_threads(args.threads)
        elif os.environ.get("QCORR_THREADS"):
            _accel.set_threads()
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
