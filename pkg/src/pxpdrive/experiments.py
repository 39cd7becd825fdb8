"""Trajectories, realization averages, 2D parameter scans and their CSV output."""

from __future__ import annotations

import csv
import enum
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .hilbert import BoundaryCondition, enumerate_basis
from .observables import (
    ShortTrajectoryError,
    Trajectory,
    avg_fidelity,
    avg_magnetization,
    fidelity,
    magnetization,
    thermalization_time,
)
from .propagator import PropagatorCache
from .protocols import DriveParams, EtaMode, ProtocolKind, run_protocol

__all__ = [
    "Metric",
    "ScanResult",
    "ScanSpec",
    "ShortTrajectoryError",
    "Trajectory",
    "avg_fidelity",
    "avg_magnetization",
    "average_trajectories",
    "fidelity",
    "magnetization",
    "realization_seeds",
    "resolve_params",
    "scan_2d",
    "simulate",
    "thermalization_time",
    "write_scan_csv",
    "write_trajectory_csv",
]

log = logging.getLogger(__name__)

FLOAT_FMT = ".17g"


class Metric(enum.Enum):
    M0 = "m0"  # thermalization time in cycles
    MBAR = "mbar"  # magnetization averaged around m = 1000
    FAV = "fav"  # fidelity averaged over the first 2500 cycles

    @property
    def min_cycles(self) -> int:
        return {Metric.M0: 1, Metric.MBAR: 1050, Metric.FAV: 2500}[self]


# --- parameter resolution ----------------------------------------------------

# Each physical parameter can be given directly or through one dimensionless
# alias. Aliases that need lam are resolved after lam is known.
_ALIASES = {
    "lam": (("lam_over_w", lambda v, w, lam: v * w),),
    "T": (("wT", lambda v, w, lam: v / w), ("lamT_over_4pi", lambda v, w, lam: 4 * math.pi * v / lam)),
    "dT": (("wdT", lambda v, w, lam: v / w), ("lam_dT", lambda v, w, lam: v / lam)),
    "delta_w": (("dw_over_w", lambda v, w, lam: v * w),),
    "delta_lambda": (("dlambda_over_w", lambda v, w, lam: v * w),),
}
PARAM_KEYS = ("w", "lam", "delta_w", "delta_lambda", "T", "dT")
ALIAS_KEYS = tuple(a for opts in _ALIASES.values() for a, _ in opts)


def resolve_params(values: dict, eta_mode: EtaMode | str = EtaMode.BINARY, seed: int = 0) -> DriveParams:
    """Build :class:`DriveParams` from direct keys and dimensionless aliases.

    >>> resolve_params({"lam_over_w": 10, "wT": 6.0, "lam_dT": 1.5}).dT
    0.15
    """
    unknown = set(values) - set(PARAM_KEYS) - set(ALIAS_KEYS)
    if unknown:
        raise KeyError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    out = {"w": float(values.get("w", 1.0))}
    for key in ("lam", "delta_w", "delta_lambda", "T", "dT"):
        given = [k for k in (key, *(a for a, _ in _ALIASES.get(key, ()))) if k in values]
        if len(given) > 1:
            raise ValueError(f"{key} is over-determined by {given}")
        if not given:
            continue
        if given[0] == key:
            out[key] = float(values[key])
        else:
            fn = dict(_ALIASES[key])[given[0]]
            out[key] = float(fn(float(values[given[0]]), out["w"], out.get("lam", 1.0)))
    return DriveParams(**out, eta_mode=EtaMode(eta_mode), seed=int(seed))


# --- trajectories ---------------------------------------------------------------


def realization_seeds(master_seed: int, realizations: int, cell: int | None = None) -> list[int]:
    """Seeds of independent disorder realizations.

    A single realization of a plain run uses ``master_seed`` itself, so
    ``--seed s`` reproduces ``DriveParams(seed=s)``. Otherwise seeds come from
    ``SeedSequence([master_seed, cell, r])``.
    """
    if realizations < 1:
        raise ValueError("realizations >= 1")
    if cell is None and realizations == 1:
        return [int(master_seed)]
    key = [int(master_seed)] if cell is None else [int(master_seed), int(cell)]
    return [int(np.random.SeedSequence(key + [r]).generate_state(1, dtype=np.uint32)[0]) for r in range(realizations)]


def average_trajectories(trajs: list[Trajectory]) -> Trajectory:
    if not trajs:
        raise ValueError("no trajectories to average")
    if len(trajs) == 1:
        return trajs[0]
    M = np.mean([t.M for t in trajs], axis=0)
    F = np.mean([t.F for t in trajs], axis=0)
    params = dict(trajs[0].params, realizations=len(trajs))
    return Trajectory(trajs[0].m.copy(), M, F, params, trajs[0].seed)


def simulate(kind: ProtocolKind | str, L: int, params: DriveParams, m_max: int, bc="pbc",
             realizations: int = 1, cell: int | None = None, cache: PropagatorCache | None = None) -> Trajectory:
    """Run ``realizations`` trajectories (seeds from :func:`realization_seeds`) and average M and F."""
    basis = cache.basis if cache is not None else enumerate_basis(L, bc)
    cache = cache or PropagatorCache(basis)
    seeds = realization_seeds(params.seed, realizations, cell)
    with warnings.catch_warnings():  # params were validated (and warned about) once already
        warnings.simplefilter("ignore")
        variants = [replace(params, seed=s) for s in seeds]
    trajs = [run_protocol(basis, p, kind, m_max, cache=cache) for p in variants]
    out = average_trajectories(trajs)
    out.seed = seeds[0]
    return out


def metric_value(traj: Trajectory, metric: Metric, eps: float) -> tuple[float, bool]:
    metric = Metric(metric)
    if metric is Metric.M0:
        m0, censored = thermalization_time(traj, eps)
        return float(m0), censored
    if metric is Metric.MBAR:
        return avg_magnetization(traj), False
    return avg_fidelity(traj), False


# --- scans --------------------------------------------------------------------


@dataclass(frozen=True)
class ScanSpec:
    """Everything a scan cell needs apart from its two axis values."""

    kind: ProtocolKind
    L: int
    m_max: int
    metric: Metric
    fixed: dict = field(default_factory=dict)
    bc: BoundaryCondition = BoundaryCondition.PERIODIC
    eta_mode: EtaMode = EtaMode.BINARY
    master_seed: int = 0
    realizations: int = 1
    eps: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ProtocolKind(self.kind))
        object.__setattr__(self, "metric", Metric(self.metric))
        object.__setattr__(self, "bc", BoundaryCondition.parse(self.bc))
        object.__setattr__(self, "eta_mode", EtaMode(self.eta_mode))
        if self.m_max < self.metric.min_cycles:
            raise ValueError(f"metric {self.metric.value} needs m_max >= {self.metric.min_cycles}")

    @property
    def threshold(self) -> float:
        return self.kind.default_eps if self.eps is None else self.eps


@dataclass
class ScanResult:
    axis_names: tuple[str, str]
    axis_values: tuple[np.ndarray, np.ndarray]
    metric: Metric
    values: np.ndarray
    censored: np.ndarray
    seeds: np.ndarray
    errors: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def rows(self):
        """``(axis1, axis2, metric, censored, seed)`` in cell-index order."""
        a1, a2 = self.axis_values
        for i in range(a1.size):
            for j in range(a2.size):
                yield a1[i], a2[j], self.values[i, j], bool(self.censored[i, j]), int(self.seeds[i, j])


def _cell_task(args):
    spec, name1, v1, name2, v2, index = args
    seed = realization_seeds(spec.master_seed, spec.realizations, cell=index)[0]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = resolve_params({**spec.fixed, name1: v1, name2: v2}, spec.eta_mode, spec.master_seed)
            traj = simulate(spec.kind, spec.L, params, spec.m_max, spec.bc, spec.realizations, cell=index)
        value, censored = metric_value(traj, spec.metric, spec.threshold)
        return index, value, censored, seed, None
    except Exception as exc:  # recorded per cell, the scan carries on
        return index, math.nan, False, seed, f"{type(exc).__name__}: {exc}"


def scan_2d(axis1: tuple[str, list], axis2: tuple[str, list], spec: ScanSpec, workers: int = 1) -> ScanResult:
    """Evaluate ``spec.metric`` on the product grid ``axis1 x axis2``.

    Axis names are parameter keys or aliases understood by
    :func:`resolve_params`. Cell ``(i, j)`` has index ``i * len(axis2) + j`` and
    draws its disorder from ``(master_seed, index)``, so results do not depend on
    ``workers``.
    """
    (n1, vals1), (n2, vals2) = axis1, axis2
    vals1 = np.asarray(vals1, dtype=float)
    vals2 = np.asarray(vals2, dtype=float)
    if vals1.size == 0 or vals2.size == 0:
        raise ValueError("scan axes must be nonempty")
    if n1 == n2:
        raise ValueError("the two axes must differ")
    tasks = [(spec, n1, float(a), n2, float(b), i * vals2.size + j)
             for i, a in enumerate(vals1) for j, b in enumerate(vals2)]
    shape = (vals1.size, vals2.size)
    values = np.full(shape, np.nan)
    censored = np.zeros(shape, dtype=bool)
    seeds = np.zeros(shape, dtype=np.int64)
    errors = {}

    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_cell_task(t) for t in tasks]

    for index, value, cens, seed, err in results:
        i, j = divmod(index, vals2.size)
        values[i, j], censored[i, j], seeds[i, j] = value, cens, seed
        if err is not None:
            errors[(i, j)] = err
            log.warning("scan cell (%s=%g, %s=%g) failed: %s", n1, vals1[i], n2, vals2[j], err)
    return ScanResult((n1, n2), (vals1, vals2), spec.metric, values, censored, seeds, errors)


def default_workers() -> int:
    env = os.environ.get("PXP_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --- CSV ----------------------------------------------------------------------


def _f(x: float) -> str:
    return format(float(x), FLOAT_FMT)


def write_trajectory_csv(traj: Trajectory, path: str | os.PathLike) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "M", "F"])
        for m, M, F in zip(traj.m, traj.M, traj.F):
            w.writerow([int(m), _f(M), _f(F)])
    return path


def write_scan_csv(result: ScanResult, path: str | os.PathLike) -> Path:
    """Columns ``axis1, axis2, metric, censored, seed``; axis names go in the sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["axis1", "axis2", "metric", "censored", "seed"])
        for a, b, v, c, s in result.rows():
            w.writerow([_f(a), _f(b), _f(v), int(c), s])
    return path


def read_trajectory_csv(path: str | os.PathLike) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return Trajectory(data[:, 0].astype(int), data[:, 1], data[:, 2])
