"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 failure while computing.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checks import CHECKS, COLUMNS
from .config import PRESET_NAMES, ConfigError, RunConfig, ScanJob, parse_config, preset
from .experiments import (
    Metric,
    ScanSpec,
    avg_fidelity,
    avg_magnetization,
    scan_2d,
    simulate,
    thermalization_time,
    write_scan_csv,
    write_trajectory_csv,
)
from .hilbert import BasisSizeError, enumerate_basis
from .protocols import ProtocolKind
from .seqstats import (
    avg_reduced_length_bruteforce,
    avg_reduced_length_closed,
    protocol_reduced_lengths,
)

log = logging.getLogger("pxpdrive")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
SEQ_KINDS = {"tm": "dp-tm", "fib": "dp-fib", "periodic": "dp-periodic", "random": "dp-random"}


class UsageError(ValueError):
    pass


def thread_count(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get("PXP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"PXP_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def output_paths(out: str) -> tuple[Path, Path]:
    base = Path(out)
    if base.suffix == ".csv":
        base = base.with_suffix("")
    base.parent.mkdir(parents=True, exist_ok=True)
    return base.with_name(base.name + ".csv"), base.with_name(base.name + ".meta.json")


def write_meta(path: Path, payload: dict) -> None:
    payload = {"library": "pxpdrive", "version": __version__, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def warn_odd_L(L: int) -> None:
    if L % 2:
        log.warning("L=%d is odd; the drive studies use even chain lengths", L)


# --- subcommands -----------------------------------------------------------------


def cmd_basis(args) -> int:
    basis = enumerate_basis(args.L, args.bc)
    warn_odd_L(args.L)
    if args.list:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["index", "mask", "bits"])
        for i, (mask, bits) in enumerate(zip(basis.states, basis.as_strings())):
            w.writerow([i, int(mask), bits])
    else:
        print(f"L={basis.L} bc={basis.bc.value} dim={basis.dim}")
    return EXIT_OK


RUN_FLAGS = ("protocol", "L", "bc", "w", "lam", "delta_w", "delta_lambda", "T", "dT", "eta",
             "cycles", "seed", "realizations", "eps", "out")


def _load_run_config(args) -> RunConfig:
    text = None
    if args.from_meta:
        meta = json.loads(Path(args.from_meta).read_text())
        text = "\n".join(f"{k} = {v}" for k, v in meta["config"].items() if v is not None)
    elif args.config:
        text = Path(args.config).read_text()
    return parse_config(text, {k: getattr(args, k) for k in RUN_FLAGS})


def run_trajectory(cfg: RunConfig) -> tuple[dict, object]:
    warn_odd_L(cfg.L)
    traj = simulate(cfg.protocol, cfg.L, cfg.drive_params(), cfg.cycles, cfg.bc, cfg.realizations)
    m0, censored = thermalization_time(traj, cfg.threshold)
    summary = {"m0": m0, "censored": censored}
    if cfg.cycles >= 1050:
        summary["mbar"] = avg_magnetization(traj)
    if cfg.cycles >= 2500:
        summary["fav"] = avg_fidelity(traj)
    return summary, traj


def cmd_run(args) -> int:
    cfg = _load_run_config(args)
    if cfg.out is None:
        raise UsageError("--out is required (or set out in the config file)")
    summary, traj = run_trajectory(cfg)
    csv_path, meta_path = output_paths(cfg.out)
    write_trajectory_csv(traj, csv_path)
    write_meta(meta_path, {"kind": "trajectory", "config": cfg.to_dict(), "seed": cfg.seed, "summary": summary})
    print(json.dumps(summary))
    return EXIT_OK


def parse_axis(text: str) -> tuple[str, list[float]]:
    """``name=lo:hi:n`` (inclusive linspace) or ``name=v1,v2,...``."""
    if "=" not in text:
        raise UsageError(f"axis {text!r} must look like name=lo:hi:n or name=v1,v2")
    name, spec = text.split("=", 1)
    try:
        if ":" in spec:
            lo, hi, n = spec.split(":")
            values = list(np.linspace(float(lo), float(hi), int(n)))
        else:
            values = [float(v) for v in spec.split(",") if v]
    except ValueError:
        raise UsageError(f"cannot parse axis values {spec!r}") from None
    if not values:
        raise UsageError(f"axis {name} has no values")
    return name.strip(), values


def parse_fixed(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--fixed expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"--fixed {k}: not a number: {v!r}") from None
    return out


def run_scan_job(spec: ScanSpec, axis1, axis2, out: str, workers: int, label: str | None = None) -> dict:
    warn_odd_L(spec.L)
    result = scan_2d(axis1, axis2, spec, workers=workers)
    csv_path, meta_path = output_paths(out)
    write_scan_csv(result, csv_path)
    meta = {
        "kind": "scan",
        "label": label,
        "protocol": spec.kind.value,
        "L": spec.L,
        "bc": spec.bc.value,
        "m_max": spec.m_max,
        "metric": spec.metric.value,
        "eps": spec.threshold,
        "fixed": spec.fixed,
        "eta": spec.eta_mode.value,
        "seed": spec.master_seed,
        "realizations": spec.realizations,
        "axis1": {"name": axis1[0], "values": [float(v) for v in axis1[1]]},
        "axis2": {"name": axis2[0], "values": [float(v) for v in axis2[1]]},
        "failed_cells": {f"{i},{j}": msg for (i, j), msg in result.errors.items()},
    }
    write_meta(meta_path, meta)
    return {"cells": int(result.values.size), "failed": len(result.errors), "csv": str(csv_path)}


def cmd_scan(args) -> int:
    spec = ScanSpec(
        ProtocolKind(args.protocol), args.L, args.cycles, Metric(args.metric), parse_fixed(args.fixed),
        bc=args.bc, eta_mode=args.eta, master_seed=args.seed, realizations=args.realizations, eps=args.eps,
    )
    summary = run_scan_job(spec, parse_axis(args.axis1), parse_axis(args.axis2), args.out, thread_count(args.threads))
    print(json.dumps(summary))
    return EXIT_OK if summary["failed"] == 0 else EXIT_RUNTIME


def cmd_effective(args) -> int:
    rows = CHECKS[args.check]()
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r.check, r.case, format(r.value, ".17g"), format(r.expected, ".17g"),
                        format(r.residual, ".17g"), format(r.tol, ".17g"), int(r.passed)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    failed = sum(not r.passed for r in rows)
    print(f"{len(rows) - failed}/{len(rows)} rows within tolerance", file=sys.stderr)
    return EXIT_OK


def cmd_seqstats(args) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    if args.bruteforce_N is not None:
        a = avg_reduced_length_bruteforce(args.bruteforce_N)
        w.writerow(["N", "A_N", "A_N_float"])
        w.writerow([args.bruteforce_N, str(a), format(float(a), ".17g")])
    elif args.closed_N is not None:
        a = avg_reduced_length_closed(args.closed_N)
        w.writerow(["N", "A_N", "A_N_float"])
        w.writerow([args.closed_N, str(a), format(float(a), ".17g")])
    else:
        kind = SEQ_KINDS[args.protocol]
        if args.protocol in ("tm", "fib"):
            if args.level is None:
                raise UsageError("--level is required for tm and fib")
            rep = protocol_reduced_lengths(kind, K=args.level)
        else:
            if args.N is None:
                raise UsageError("--N is required for periodic and random")
            rep = protocol_reduced_lengths(kind, N=args.N, seed=args.seed)
        w.writerow(["protocol", "input_length", "reduced_length", "reduced"])
        w.writerow([args.protocol, rep.input_length, rep.reduced_length, "".join(map(str, rep.reduced))])
    return EXIT_OK


def cmd_preset(args) -> int:
    p = preset(args.name, L=args.L, m_max=args.cycles, points=args.points, seed=args.seed, wdT_fig2=args.wdT_fig2)
    outdir = Path(args.outdir)
    if args.dry_run:
        print(f"{p.name}: {p.description}")
        for job in p.jobs:
            if isinstance(job, ScanJob):
                n = len(job.axis1[1]) * len(job.axis2[1])
                print(f"  scan {job.label}: {job.spec.kind.value} {job.spec.metric.value} "
                      f"{job.axis1[0]} x {job.axis2[0]} ({n} cells, m_max={job.spec.m_max})")
            else:
                print(f"  run  {job.label}: {job.config.protocol.value} m_max={job.config.cycles}")
        return EXIT_OK
    outdir.mkdir(parents=True, exist_ok=True)
    workers = thread_count(args.threads)
    status = EXIT_OK
    for job in p.jobs:
        out = str(outdir / f"{p.name}-{job.label}")
        if isinstance(job, ScanJob):
            summary = run_scan_job(job.spec, job.axis1, job.axis2, out, workers, label=job.label)
            if summary["failed"]:
                status = EXIT_RUNTIME
        else:
            cfg = job.config
            summary, traj = run_trajectory(cfg)
            csv_path, meta_path = output_paths(out)
            write_trajectory_csv(traj, csv_path)
            write_meta(meta_path, {"kind": "trajectory", "preset": p.name, "label": job.label,
                                   "config": cfg.to_dict(), "seed": cfg.seed, "summary": summary})
        print(f"{p.name}-{job.label}: {json.dumps(summary)}")
    return status


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pxpdrive", description="Driven PXP chain simulator")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("basis", help="constrained basis size or listing")
    b.add_argument("--L", type=int, default=12)
    b.add_argument("--bc", default="pbc", choices=["pbc", "obc"])
    b.add_argument("--list", action="store_true", help="print every state as CSV")
    b.set_defaults(func=cmd_basis)

    r = sub.add_parser("run", help="one trajectory; writes <out>.csv and <out>.meta.json")
    r.add_argument("--config", help="flat key = value file; flags override it")
    r.add_argument("--from-meta", help="rerun the configuration stored in a .meta.json sidecar")
    r.add_argument("--protocol", choices=[k.value for k in ProtocolKind])
    r.add_argument("--L", type=int)
    r.add_argument("--bc", choices=["pbc", "obc"])
    r.add_argument("--w", type=float)
    r.add_argument("--lambda", dest="lam", type=float)
    r.add_argument("--dw", dest="delta_w", type=float)
    r.add_argument("--dlambda", dest="delta_lambda", type=float)
    r.add_argument("--T", type=float)
    r.add_argument("--dT", type=float)
    r.add_argument("--cycles", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--eta", choices=["binary", "uniform"])
    r.add_argument("--realizations", type=int)
    r.add_argument("--eps", type=float)
    r.add_argument("--out")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("scan", help="2D parameter scan; writes <out>.csv and <out>.meta.json")
    s.add_argument("--protocol", required=True, choices=[k.value for k in ProtocolKind])
    s.add_argument("--axis1", required=True, help="name=lo:hi:n or name=v1,v2,...")
    s.add_argument("--axis2", required=True)
    s.add_argument("--fixed", action="append", metavar="KEY=VALUE", help="fixed parameter (repeatable)")
    s.add_argument("--metric", default="m0", choices=[m.value for m in Metric])
    s.add_argument("--L", type=int, default=12)
    s.add_argument("--bc", default="pbc", choices=["pbc", "obc"])
    s.add_argument("--eta", default="binary", choices=["binary", "uniform"])
    s.add_argument("--cycles", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--realizations", type=int, default=1)
    s.add_argument("--eps", type=float)
    s.add_argument("--threads", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    e = sub.add_parser("effective", help="closed-form checks against numerical oracles (CSV)")
    e.add_argument("--check", required=True, choices=list(CHECKS))
    e.add_argument("--out")
    e.set_defaults(func=cmd_effective)

    q = sub.add_parser("seqstats", help="pair-elimination statistics of dipole sequences (CSV)")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--bruteforce-N", type=int)
    g.add_argument("--closed-N", type=int)
    g.add_argument("--protocol", choices=list(SEQ_KINDS))
    q.add_argument("--level", type=int, help="level K for tm and fib")
    q.add_argument("--N", type=int, help="length for periodic and random")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_seqstats)

    p = sub.add_parser("preset", help="run the jobs behind one figure")
    p.add_argument("name", choices=PRESET_NAMES)
    p.add_argument("--L", type=int, default=10)
    p.add_argument("--cycles", type=int, help="override the preset's m_max")
    p.add_argument("--points", type=int, help="cap samples per scan axis")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wdT-fig2", type=float, default=0.5, help="fixed w dT for fig2 (0.5 or 0.25)")
    p.add_argument("--threads", type=int)
    p.add_argument("--outdir", default="results")
    p.add_argument("--dry-run", action="store_true", help="list jobs without running")
    p.set_defaults(func=cmd_preset)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return args.func(args)
    except (UsageError, ConfigError, BasisSizeError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
