"""Line-oriented run configuration.

A config document is UTF-8 text with one ``section.key = value`` per line.
Blank lines and lines starting with ``#`` are ignored; ``#`` after a value
starts a comment.  Unknown keys are rejected, missing keys take defaults,
and :func:`emit` writes back a fully resolved copy that re-parses to the
same :class:`RunConfig`.

Lists are comma separated.  A ramp is ``none`` or ``;``-separated
``t_start:t_stop:accel`` segments.  ``auto`` leaves a value to be derived
from the rest of the config (trap depth, box half-width).
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
import hashlib
import math
from typing import Mapping

import numpy as np

from .errors import ParseError, ValidationError

FRAMES = ("lab", "midpoint", "midpoint-ramp")
METHODS = ("split-operator", "crank-nicolson")
SPACINGS = ("linear", "log")


@dataclass(frozen=True)
class TrapSection:
    sigma: float = 1.0
    depth: float | None = None


@dataclass(frozen=True)
class GridSection:
    z_max: float | None = None
    n: int = 1000


@dataclass(frozen=True)
class ProtocolSection:
    d_start: float = -12.0
    d_end: float = 12.0
    v: float = 0.15
    frame: str = "lab"
    ramp: tuple[tuple[float, float, float], ...] = ()
    mirror: bool = False
    tail_tol: float = 1e-4


@dataclass(frozen=True)
class PropagationSection:
    dt: float = 1e-3
    method: str = "split-operator"
    observe_every: int = 100
    snapshot_every: int = 0
    edge_tol: float = 1e-4


@dataclass(frozen=True)
class SweepSection:
    v_list: tuple[float, ...] = ()
    v_min: float = 0.05
    v_max: float = 0.3
    count: int = 6
    spacing: str = "linear"
    grid_n: tuple[int, ...] = ()
    workers: int = 1


@dataclass(frozen=True)
class SpectrumSection:
    d_list: tuple[float, ...] = ()
    d_min: float = -12.0
    d_max: float = 12.0
    count: int = 241
    k: int = 4


@dataclass(frozen=True)
class PhaseSection:
    n_quad: int = 512


@dataclass(frozen=True)
class DiagnoseSection:
    count: int = 241
    k: int = 6
    ratio_notice: float = 0.05
    ratio_warn: float = 0.1


@dataclass(frozen=True)
class OutputSection:
    directory: str = "."
    precision: int = 12


@dataclass(frozen=True)
class RunConfig:
    trap: TrapSection = field(default_factory=TrapSection)
    grid: GridSection = field(default_factory=GridSection)
    protocol: ProtocolSection = field(default_factory=ProtocolSection)
    propagation: PropagationSection = field(default_factory=PropagationSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    spectrum: SpectrumSection = field(default_factory=SpectrumSection)
    phase: PhaseSection = field(default_factory=PhaseSection)
    diagnose: DiagnoseSection = field(default_factory=DiagnoseSection)
    output: OutputSection = field(default_factory=OutputSection)

    def velocities(self) -> tuple[float, ...]:
        return self.sweep.v_list

    def hash(self) -> str:
        return config_hash(self)


SECTIONS = {f.name: f.default_factory for f in fields(RunConfig)}


# value codecs ---------------------------------------------------------------

def _parse_float(text: str) -> float:
    x = float(text)
    if not math.isfinite(x):
        raise ValueError(f"non-finite number {text!r}")
    return x


def _parse_int(text: str) -> int:
    return int(text)


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _parse_list(item):
    def parse(text: str):
        if text.lower() in ("", "none"):
            return ()
        return tuple(item(part.strip()) for part in text.split(","))
    return parse


def _parse_optional(item):
    def parse(text: str):
        return None if text.lower() == "auto" else item(text)
    return parse


def _parse_ramp(text: str):
    if text.lower() in ("", "none"):
        return ()
    segs = []
    for part in text.split(";"):
        bits = part.split(":")
        if len(bits) != 3:
            raise ValueError(f"ramp segment {part.strip()!r} is not t_start:t_stop:accel")
        segs.append(tuple(_parse_float(b.strip()) for b in bits))
    return tuple(segs)


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt_float(value)
    if isinstance(value, tuple):
        if not value:
            return "none"
        if isinstance(value[0], tuple):
            return "; ".join(":".join(_fmt_float(x) for x in seg) for seg in value)
        return ", ".join(_fmt(x) for x in value)
    return str(value)


_PARSERS = {
    float: _parse_float,
    int: _parse_int,
    bool: _parse_bool,
    str: str,
}
_SPECIAL = {
    ("trap", "depth"): _parse_optional(_parse_float),
    ("grid", "z_max"): _parse_optional(_parse_float),
    ("protocol", "ramp"): _parse_ramp,
    ("sweep", "v_list"): _parse_list(_parse_float),
    ("sweep", "grid_n"): _parse_list(_parse_int),
    ("spectrum", "d_list"): _parse_list(_parse_float),
}


def _parser_for(section: str, key: str):
    if (section, key) in _SPECIAL:
        return _SPECIAL[(section, key)]
    default = getattr(SECTIONS[section](), key)
    return _PARSERS[type(default)]


def _known_keys(section: str) -> set[str]:
    return {f.name for f in fields(SECTIONS[section]())}


# parsing --------------------------------------------------------------------

def _split_line(raw: str, lineno: int | None) -> tuple[str, str, str] | None:
    line = raw.split("#", 1)[0].strip()
    if not line:
        return None
    if "=" not in line:
        raise ParseError("expected 'section.key = value'", lineno)
    lhs, rhs = (s.strip() for s in line.split("=", 1))
    if lhs.count(".") != 1:
        raise ParseError(f"key {lhs!r} must look like section.key", lineno)
    section, key = lhs.split(".")
    if section not in SECTIONS:
        raise ParseError(f"unknown section {section!r}", lineno)
    if key not in _known_keys(section):
        raise ParseError(f"unknown key {lhs!r}", lineno)
    return section, key, rhs


def parse_config(text: str, overrides: Mapping[str, str] | None = None) -> RunConfig:
    """Parse, apply ``overrides`` (``{"section.key": value}``), validate and resolve."""
    values: dict[tuple[str, str], object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = _split_line(raw, lineno)
        if parts is None:
            continue
        section, key, rhs = parts
        if (section, key) in values:
            raise ParseError(f"duplicate key {section}.{key}", lineno)
        try:
            values[(section, key)] = _parser_for(section, key)(rhs)
        except ValueError as exc:
            raise ParseError(f"bad value for {section}.{key}: {exc}", lineno) from None
    for name, rhs in (overrides or {}).items():
        parts = _split_line(f"{name} = {rhs}", None)
        section, key, rhs = parts
        try:
            values[(section, key)] = _parser_for(section, key)(rhs)
        except ValueError as exc:
            raise ParseError(f"bad override for {name}: {exc}") from None

    sections = {}
    for name, factory in SECTIONS.items():
        given = {k: v for (s, k), v in values.items() if s == name}
        sections[name] = replace(factory(), **given)
    cfg = RunConfig(**sections)
    validate(cfg)
    return resolve(cfg)


def load_config(path, overrides: Mapping[str, str] | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), overrides)


# validation and resolution --------------------------------------------------

def _require(ok: bool, message: str):
    if not ok:
        raise ValidationError(message)


def validate(cfg: RunConfig):
    t, g, p, pr = cfg.trap, cfg.grid, cfg.protocol, cfg.propagation
    sw, sp, ph, dg, out = cfg.sweep, cfg.spectrum, cfg.phase, cfg.diagnose, cfg.output
    _require(t.sigma > 0, "trap.sigma must be > 0")
    _require(t.depth is None or t.depth > 0, "trap.depth must be > 0")
    _require(g.z_max is None or g.z_max > 0, "grid.z_max must be > 0")
    _require(g.n >= 64 and g.n % 2 == 0, "grid.n must be even and >= 64")
    _require(p.v > 0, "protocol.v must be > 0")
    _require(p.d_start < -10 * t.sigma, "protocol.d_start must be < -10 sigma")
    _require(p.d_end > 10 * t.sigma, "protocol.d_end must be > 10 sigma")
    _require(p.frame in FRAMES, f"protocol.frame must be one of {', '.join(FRAMES)}")
    _require(p.frame != "midpoint-ramp" or bool(p.ramp),
             "protocol.ramp is required for the midpoint-ramp frame")
    _require(all(e > s for s, e, _ in p.ramp), "protocol.ramp segments need t_stop > t_start")
    _require(p.tail_tol > 0, "protocol.tail_tol must be > 0")
    _require(pr.dt > 0, "propagation.dt must be > 0")
    _require(pr.method in METHODS, f"propagation.method must be one of {', '.join(METHODS)}")
    _require(pr.observe_every >= 1, "propagation.observe_every must be >= 1")
    _require(pr.snapshot_every >= 0, "propagation.snapshot_every must be >= 0")
    _require(pr.edge_tol > 0, "propagation.edge_tol must be > 0")
    _require(all(v > 0 for v in sw.v_list), "sweep.v_list entries must be > 0")
    _require(sw.v_min > 0 and sw.v_max >= sw.v_min, "sweep needs 0 < v_min <= v_max")
    _require(sw.count >= 1, "sweep.count must be >= 1")
    _require(sw.spacing in SPACINGS, "sweep.spacing must be linear or log")
    _require(all(n >= 64 and n % 2 == 0 for n in sw.grid_n), "sweep.grid_n entries must be even and >= 64")
    _require(sw.workers >= 1, "sweep.workers must be >= 1")
    _require(sp.count >= 1 and sp.d_max >= sp.d_min, "spectrum needs count >= 1 and d_min <= d_max")
    _require(sp.k >= 1, "spectrum.k must be >= 1")
    _require(ph.n_quad >= 64 and ph.n_quad % 4 == 0, "phase.n_quad must be a multiple of 4 and >= 64")
    _require(dg.count >= 1 and dg.k >= 4, "diagnose needs count >= 1 and k >= 4")
    _require(0 < dg.ratio_notice <= dg.ratio_warn, "diagnose needs 0 < ratio_notice <= ratio_warn")
    _require(1 <= out.precision <= 17, "output.precision must lie in [1, 17]")


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill derived defaults so that the echoed config is explicit."""
    from .core import DEFAULT_PADDING

    trap = cfg.trap
    if trap.depth is None:
        trap = replace(trap, depth=trap.sigma ** 2)
    grid = cfg.grid
    if grid.z_max is None:
        # same rule as SplitProtocol.grid: the lab frame needs twice the reach
        reach = max(abs(cfg.protocol.d_start), abs(cfg.protocol.d_end))
        if cfg.protocol.frame == "lab":
            reach *= 2
        grid = replace(grid, z_max=float(reach / 2 + DEFAULT_PADDING * trap.sigma))
    sweep = cfg.sweep
    if not sweep.v_list:
        if sweep.spacing == "log":
            vs = np.geomspace(sweep.v_min, sweep.v_max, sweep.count)
        else:
            vs = np.linspace(sweep.v_min, sweep.v_max, sweep.count)
        sweep = replace(sweep, v_list=tuple(float(v) for v in vs))
    if not sweep.grid_n:
        sweep = replace(sweep, grid_n=(grid.n,))
    return replace(cfg, trap=trap, grid=grid, sweep=sweep)


# emission -------------------------------------------------------------------

def emit(cfg: RunConfig) -> str:
    lines = []
    for name in SECTIONS:
        section = getattr(cfg, name)
        for f in fields(section):
            lines.append(f"{name}.{f.name} = {_fmt(getattr(section, f.name))}")
        lines.append("")
    return "\n".join(lines)


def config_hash(cfg: RunConfig) -> str:
    """SHA-256 of the resolved config; the output directory is not part of it."""
    neutral = replace(cfg, output=replace(cfg.output, directory="."))
    return hashlib.sha256(emit(neutral).encode("utf-8")).hexdigest()
