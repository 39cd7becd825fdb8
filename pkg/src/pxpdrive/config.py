"""Run configuration, its flat ``key = value`` file format, and figure presets."""

from __future__ import annotations

import configparser
import dataclasses
import math
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .experiments import Metric, ScanSpec
from .hilbert import BoundaryCondition
from .protocols import DriveParams, EtaMode, ProtocolKind

_SECTION = "run"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    protocol: ProtocolKind = ProtocolKind.U3
    L: int = 12
    bc: BoundaryCondition = BoundaryCondition.PERIODIC
    w: float = 1.0
    lam: float = 1.0
    delta_w: float = 0.0
    delta_lambda: float = 0.0
    T: float = 1.0
    dT: float = 0.0
    eta: EtaMode = EtaMode.BINARY
    cycles: int = 2000
    seed: int = 0
    realizations: int = 1
    eps: float | None = None  # None: 0.1 random-period, 0.05 dipolar
    out: str | None = None
    format: str = "csv"

    @property
    def threshold(self) -> float:
        return self.protocol.default_eps if self.eps is None else self.eps

    def drive_params(self) -> DriveParams:
        return DriveParams(self.w, self.lam, self.delta_w, self.delta_lambda, self.T, self.dT, self.eta, self.seed)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if hasattr(v, "value"):
                d[k] = v.value
        return d

    def to_text(self) -> str:
        lines = [f"[{_SECTION}]"]
        for k, v in self.to_dict().items():
            if v is not None:
                lines.append(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
        return "\n".join(lines) + "\n"


# CLI and file spellings that differ from field names
KEY_ALIASES = {"lambda": "lam", "dw": "delta_w", "dlambda": "delta_lambda", "eta_mode": "eta", "kind": "protocol"}

_CONVERTERS = {
    "protocol": ProtocolKind,
    "bc": BoundaryCondition.parse,
    "eta": EtaMode,
    "L": int,
    "cycles": int,
    "seed": int,
    "realizations": int,
    "eps": lambda s: None if s in (None, "", "None", "none") else float(s),
    "out": lambda s: None if s in (None, "", "None") else str(s),
    "format": str,
}
FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _convert(key: str, raw):
    conv = _CONVERTERS.get(key, float)
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{key}: cannot interpret {raw!r} ({exc})") from None


def parse_config(text: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge file text (flat ``key = value`` lines) and flag overrides; flags win.

    ``None`` override values are ignored so that unset CLI flags do not clobber
    file values.
    """
    values: dict = {}
    if text:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str  # keep L and T upper case
        body = text if text.lstrip().startswith("[") else f"[{_SECTION}]\n{text}"
        try:
            cp.read_string(body)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        for section in cp.sections():
            for k, v in cp[section].items():
                values[KEY_ALIASES.get(k, k)] = v
    for k, v in (overrides or {}).items():
        if v is not None:
            values[KEY_ALIASES.get(k, k)] = v

    unknown = sorted(set(values) - set(FIELD_NAMES))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")
    cfg = RunConfig(**{k: _convert(k, v) for k, v in values.items()})
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    checks = (
        ("L", 2 <= cfg.L <= 24, "must be in 2..24"),
        ("cycles", cfg.cycles >= 1, "must be >= 1"),
        ("realizations", cfg.realizations >= 1, "must be >= 1"),
        ("eps", cfg.eps is None or cfg.eps > 0, "must be positive"),
        ("format", cfg.format == "csv", "only csv is supported"),
    )
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"{key}: {msg}")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            cfg.drive_params()
    except ValueError as exc:
        key = "dT" if "dT" in str(exc) else "T"
        raise ConfigError(f"{key}: {exc}") from None


# --- presets --------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryJob:
    label: str
    config: RunConfig


@dataclass(frozen=True)
class ScanJob:
    label: str
    spec: ScanSpec
    axis1: tuple[str, tuple[float, ...]]
    axis2: tuple[str, tuple[float, ...]]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    jobs: tuple = field(default_factory=tuple)


PRESET_NAMES = ("fig1", "fig2", "fig3a", "fig3b", "fig4", "fig5", "fig6", "fig7")
DIPOLAR_KINDS = (ProtocolKind.DIPOLAR_PERIODIC, ProtocolKind.DIPOLAR_RANDOM,
                 ProtocolKind.DIPOLAR_FIBONACCI, ProtocolKind.DIPOLAR_THUE_MORSE)
# Scaled default cycle counts; each preset finishes at L=10 in minutes on one core.
DEFAULT_M_MAX = {"fig1": 1050, "fig2": 1000, "fig3a": 2000, "fig3b": 2000,
                 "fig4": 2000, "fig5": 2000, "fig6": 2000, "fig7": 2500}


def _grid(lo: float, hi: float, n: int, points: int | None) -> tuple[float, ...]:
    n = n if points is None else max(2, min(n, points))
    return tuple(float(x) for x in np.linspace(lo, hi, n))


def preset(name: str, L: int = 10, m_max: int | None = None, points: int | None = None,
           seed: int = 0, wdT_fig2: float = 0.5) -> Preset:
    """Job list reproducing one figure's data.

    ``points`` caps the number of samples per scan axis; ``wdT_fig2`` picks the
    fixed ``w dT`` of the fig2 scans (0.5 by default, 0.25 as the alternative).
    """
    if name not in PRESET_NAMES:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    m = DEFAULT_M_MAX[name] if m_max is None else int(m_max)
    pi = math.pi

    def traj(label, **kw):
        return TrajectoryJob(label, RunConfig(L=L, cycles=m, seed=seed, **kw))

    def scan(label, kind, metric, fixed, axis1, axis2):
        spec = ScanSpec(kind, L, m, metric, fixed, master_seed=seed)
        return ScanJob(label, spec, axis1, axis2)

    if name == "fig1":
        common = dict(protocol=ProtocolKind.U3, w=1.0, lam=10.0, T=2 * pi)
        jobs = (
            traj("a", dT=pi / 2 / 10, **common),
            traj("b", dT=pi / 8 / 10, **common),
            scan("c", ProtocolKind.U3, Metric.MBAR, {"w": 1.0, "T": 2 * pi},
                 ("wdT", _grid(0.02, 0.5, 25, points)), ("lam_over_w", _grid(2.0, 20.0, 19, points))),
        )
        desc = "U3 magnetization at lam/w=10 for lam dT = pi/2 and pi/8; Mbar over (w dT, lam/w)"
    elif name == "fig2":
        jobs = tuple(
            scan(f"dw{dw:g}", ProtocolKind.U4, Metric.M0,
                 {"w": 1.0, "delta_lambda": 0.0, "wdT": wdT_fig2, "dw_over_w": dw},
                 ("lam_over_w", _grid(1.0, 20.0, 20, points)), ("wT", _grid(4 * wdT_fig2, 20.0, 20, points)))
            for dw in (0.0, 0.05, 0.1, 0.2)
        )
        desc = f"U4 thermalization time over (lam/w, wT), w dT = {wdT_fig2:g}, four dw/w values"
    elif name in ("fig3a", "fig3b"):
        kind = ProtocolKind.U5 if name == "fig3a" else ProtocolKind.U4
        lam = 4 * pi
        jobs = (
            scan("m0", kind, Metric.M0, {"w": 1.0, "lam": lam, "lam_dT": pi / 2},
                 ("lamT_over_4pi", _grid(0.5, 6.0, 23, points)), ("dw_over_w", _grid(0.0, 0.1, 11, points))),
        )
        desc = f"{kind.value} thermalization time over (lam T/(4 pi), dw/w) at lam/w = 4 pi, lam dT = pi/2"
    elif name == "fig4":
        dls = _grid(0.005, 0.1, 20, points)
        wTs = tuple(2 * pi / wd for wd in (1, 2, 3))
        jobs = tuple(traj(f"a-{k.value}", protocol=k, w=1.0, lam=1.0, delta_lambda=0.01, T=pi / 2)
                     for k in DIPOLAR_KINDS)
        jobs += tuple(scan(f"bcd-{k.value}", k, Metric.M0, {"w": 1.0, "lam": 1.0}, ("wT", wTs), ("delta_lambda", dls))
                      for k in DIPOLAR_KINDS)
        desc = "dipolar M(m) at wT = pi/2; thermalization time vs dlambda at omega_D/w = 1, 2, 3"
    elif name in ("fig5", "fig6"):
        T = pi if name == "fig5" else pi / 4
        jobs = tuple(traj(k.value, protocol=k, w=1.0, lam=1.0, delta_lambda=0.01, T=T) for k in DIPOLAR_KINDS)
        desc = f"dipolar fidelity vs m at wT = {'pi' if name == 'fig5' else 'pi/4'}, dlambda/w = 0.01"
    else:
        jobs = tuple(scan(k.value, k, Metric.FAV, {"w": 1.0, "lam": 1.0, "delta_w": 0.0},
                          ("dlambda_over_w", _grid(0.0, 0.1, 11, points)), ("wT", _grid(0.2, 2 * pi, 16, points)))
                     for k in DIPOLAR_KINDS)
        desc = "dipolar time-averaged fidelity over (dlambda/w, wT)"
    return Preset(name, desc, jobs)
