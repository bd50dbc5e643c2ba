"""Splitting experiments: trap schedules, initial states, runs and sweeps.

Conventions used throughout:

* ``d`` is the position of the initially occupied trap minus that of the
  empty trap.  It runs from ``d_start < 0`` to ``d_end > 0``, so the traps
  cross once.
* "stay" is the population left in the trap that started with the atom,
  "transfer" the population picked up by the initially empty trap.
* ``mirror=True`` reflects the whole set-up through z = 0.

Frames
------
``lab``            the occupied trap sits still at z = 0 and the empty one
                   moves at velocity -v (the physical picture).
``midpoint``       both traps move at +-v/2 about z = 0; the initial state
                   carries the Galilean factor exp(i (v/2) z).
``midpoint-ramp``  as ``midpoint`` but with a time-dependent relative
                   velocity; the frame acceleration a(t) adds M a z.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
import math
import warnings

import numpy as np
from scipy.optimize import brentq

from .core import DEFAULT_PADDING, Grid, TrapParams, Wavefunction, sample_single_trap
from .diagnostics import RATIO_WARN, parity_leakage, worst_ratio
from .eigensolver import build_hamiltonian, lowest_eigenpairs, tunnel_splitting
from .errors import AdiabaticityWarning, TailsNotDegenerate, TrapsUnresolved
from .phase import (DEFAULT_N_QUAD, TAIL_TOL, phase_grid, predicted_populations,
                    schedule_phase, splitting_phase)
from .propagator import PropagationConfig, TrajectoryRecord, propagate


class Frame(str, Enum):
    LAB = "lab"
    MIDPOINT = "midpoint"
    MIDPOINT_RAMP = "midpoint-ramp"


@dataclass(frozen=True)
class RampSchedule:
    """Piecewise-constant frame acceleration.

    ``segments`` holds ``(t_start, t_stop, a)`` triples, non-overlapping.  The
    midpoint frame accelerates at ``a`` while the separation accelerates at
    ``-2a`` (only the initially empty trap is driven).
    """

    segments: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        segs = tuple(sorted((float(a), float(b), float(c)) for a, b, c in self.segments))
        for (s0, e0, _), (s1, _, _) in zip(segs, segs[1:]):
            if s1 < e0:
                raise ValueError("ramp segments overlap")
        if any(e <= s for s, e, _ in segs):
            raise ValueError("ramp segments need t_stop > t_start")
        object.__setattr__(self, "segments", segs)

    @classmethod
    def pulse(cls, t_center: float, half_width: float, accel: float) -> "RampSchedule":
        """+accel then -accel around ``t_center``: no net velocity change."""
        return cls(((t_center - half_width, t_center, accel),
                    (t_center, t_center + half_width, -accel)))

    @property
    def breakpoints(self) -> list[float]:
        return sorted({t for s, e, _ in self.segments for t in (s, e)})

    def velocity_change(self) -> float:
        """Integral of a(t) over the ramp."""
        return sum(a * (e - s) for s, e, a in self.segments)

    def accel(self, t: float) -> float:
        for s, e, a in self.segments:
            if s <= t < e:
                return a
        return 0.0

    def _integrals(self, t: float) -> tuple[float, float]:
        # (int_0^t a, int_0^t int_0^t' a)
        first = second = 0.0
        for s, e, a in self.segments:
            if t <= s:
                continue
            span = e - s
            if t < e:
                first += a * (t - s)
                second += 0.5 * a * (t - s) ** 2
            else:
                first += a * span
                second += a * (0.5 * span ** 2 + span * (t - e))
        return first, second


@dataclass(frozen=True)
class Schedule:
    """Separation d(t) for constant velocity plus an optional ramp."""

    d_start: float
    d_end: float
    v: float
    ramp: RampSchedule | None = None

    def rate(self, t: float) -> float:
        if self.ramp is None:
            return self.v
        return self.v - 2.0 * self.ramp._integrals(t)[0]

    def d(self, t: float) -> float:
        if self.ramp is None:
            return self.d_start + self.v * t
        return self.d_start + self.v * t - 2.0 * self.ramp._integrals(t)[1]

    def frame_accel(self, t: float) -> float:
        return 0.0 if self.ramp is None else self.ramp.accel(t)

    def duration(self) -> float:
        span = self.d_end - self.d_start
        if self.ramp is None:
            return span / self.v
        knots = [0.0] + [t for t in self.ramp.breakpoints if t > 0]
        if any(self.rate(t) <= 0 for t in knots):
            raise ValueError("ramp reverses the trap motion")
        t_hi = span / self.v
        while self.d(t_hi) < self.d_end:
            t_hi *= 2.0
        return brentq(lambda t: self.d(t) - self.d_end, 0.0, t_hi, xtol=1e-14, rtol=1e-15)


@dataclass(frozen=True)
class SplitProtocol:
    trap: TrapParams = field(default_factory=TrapParams)
    d_start: float = -12.0
    d_end: float = 12.0
    v: float = 0.15
    frame: Frame = Frame.LAB
    ramp: RampSchedule | None = None
    cfg: PropagationConfig = field(default_factory=PropagationConfig)
    n_grid: int = 1000
    z_max: float | None = None
    mirror: bool = False
    tail_tol: float = TAIL_TOL

    def __post_init__(self):
        object.__setattr__(self, "frame", Frame(self.frame))
        s = self.trap.sigma
        if not self.v > 0:
            raise ValueError("v must be positive")
        if not (self.d_start < -10 * s and self.d_end > 10 * s):
            raise ValueError("need d_start < -10 sigma and d_end > 10 sigma")
        if self.frame is Frame.MIDPOINT_RAMP and self.ramp is None:
            raise ValueError("midpoint-ramp frame needs a ramp schedule")

    @property
    def schedule(self) -> Schedule:
        ramp = self.ramp if self.frame is Frame.MIDPOINT_RAMP else None
        return Schedule(self.d_start, self.d_end, self.v, ramp)

    def grid(self) -> Grid:
        reach = max(abs(self.d_start), abs(self.d_end))
        if self.frame is Frame.LAB:
            reach *= 2
        z_max = self.z_max or max(DEFAULT_PADDING, reach / 2 / self.trap.sigma + DEFAULT_PADDING) * self.trap.sigma
        return Grid(z_max, self.n_grid)

    def positions(self, t: float) -> tuple[float, float, float, float]:
        """(atom trap centre, empty trap centre, atom trap velocity, empty trap velocity)."""
        sch = self.schedule
        d, rate = sch.d(t), sch.rate(t)
        if self.frame is Frame.LAB:
            out = (0.0, -d, 0.0, -rate)
        else:
            out = (d / 2, -d / 2, rate / 2, -rate / 2)
        return tuple(-x for x in out) if self.mirror else out


@dataclass
class Populations:
    p1: float
    p2: float
    p_lost: float
    halfspace: tuple[float, float]

    def __iter__(self):
        return iter((self.p1, self.p2, self.p_lost))


@dataclass
class SplitResult:
    p_stay: float
    p_transfer: float
    p_lost: float
    theta_tdse: float
    theta_tdse_raw: float
    theta_predicted: float
    trajectory: list[TrajectoryRecord]
    max_adiabaticity_ratio: float
    adiabaticity_flag: bool
    halfspace: tuple[float, float]
    max_parity_leak: float
    final_state: Wavefunction = field(repr=False)
    protocol: SplitProtocol = field(repr=False)

    @property
    def p_stay_predicted(self) -> float:
        return predicted_populations(self.theta_predicted)[1]


def prepare_initial_state(p: TrapParams, center: float, grid: Grid) -> Wavefunction:
    """Ground state of a single trap centred at ``center``."""
    h = build_hamiltonian(grid, sample_single_trap(grid, p, center))
    return lowest_eigenpairs(h, 1)[0].state


def boost(psi: Wavefunction, velocity: float) -> Wavefunction:
    """Galilean boost exp(i M v z / hbar)."""
    return Wavefunction(psi.amplitudes * np.exp(1j * velocity * psi.grid.z), psi.grid)


def measure_populations(psi: Wavefunction, p: TrapParams, centers: tuple[float, float],
                        boosts: tuple[float, float] = (0.0, 0.0)) -> Populations:
    """Populations of the ground states of two resolved traps.

    Overlap with each trap's (boosted) ground state is the primary number;
    the probability on either side of the midpoint is kept as a cross-check.
    """
    c1, c2 = centers
    if abs(c1 - c2) <= 10 * p.sigma:
        raise TrapsUnresolved(f"traps {abs(c1 - c2):g} apart; need more than 10 sigma")
    grid = psi.grid
    pops = []
    for c, u in zip(centers, boosts):
        phi = boost(prepare_initial_state(p, c, grid), u)
        pops.append(abs(grid.dz * np.vdot(phi.amplitudes, psi.amplitudes)) ** 2)
    mid = 0.5 * (c1 + c2)
    dens = grid.dz * psi.density()
    on1 = (grid.z < mid) if c1 < mid else (grid.z > mid)
    half = (float(dens[on1].sum()), float(dens[~on1].sum()))
    return Populations(float(pops[0]), float(pops[1]), float(1.0 - pops[0] - pops[1]), half)


def unwrap_theta(p_stay: float, theta_hint: float) -> tuple[float, float]:
    """(raw, unwrapped): arcsin(sqrt(p_stay)) moved to the branch nearest the hint.

    sin^2 is symmetric about multiples of pi/2, so the candidates are
    m*pi +- raw.
    """
    raw = math.asin(math.sqrt(min(max(p_stay, 0.0), 1.0)))
    m = round(theta_hint / math.pi)
    cands = [k * math.pi + s * raw for k in (m - 1, m, m + 1) for s in (1, -1)]
    return raw, min(cands, key=lambda c: abs(c - theta_hint))


def _check_tails(sp: SplitProtocol, grid: Grid):
    for d in (sp.d_start, sp.d_end):
        gap = tunnel_splitting(sp.trap, d, grid)
        if gap > sp.tail_tol:
            raise TailsNotDegenerate(f"splitting {gap:.3e} at d={d:g} exceeds {sp.tail_tol:g}")


def predicted_theta(sp: SplitProtocol) -> float:
    pg = phase_grid(sp.trap, sp.d_start, sp.d_end)
    if sp.frame is Frame.MIDPOINT_RAMP:
        sch = sp.schedule
        return schedule_phase(sp.trap, sch.d, sch.duration(), pg, DEFAULT_N_QUAD)
    return splitting_phase(sp.trap, sp.v, sp.d_start, sp.d_end, pg, tail_tol=sp.tail_tol).theta_c


def _potential_path(sp: SplitProtocol, grid: Grid):
    trap, z = sp.trap, grid.z
    sch = sp.schedule
    if sp.frame is Frame.LAB:
        fixed = trap(z - sp.positions(0.0)[0])
        return lambda t: fixed + trap(z - sp.positions(t)[1])
    sign = -1.0 if sp.mirror else 1.0

    def v_mid(t):
        c1, c2, _, _ = sp.positions(t)
        v = trap(z - c1) + trap(z - c2)
        v = 0.5 * (v + v[::-1])
        a = sch.frame_accel(t)
        return v + (sign * a) * z if a else v
    return v_mid


def run_split(sp: SplitProtocol, warn: bool = True) -> SplitResult:
    """Propagate one splitting run and measure where the atom ended up."""
    grid = sp.grid()
    _check_tails(sp, Grid.for_separation(sp.trap, max(abs(sp.d_start), abs(sp.d_end))))
    duration = sp.schedule.duration()
    c1, _, u1, _ = sp.positions(0.0)
    psi0 = boost(prepare_initial_state(sp.trap, c1, grid), u1)

    psi, records = propagate(psi0, _potential_path(sp, grid), (0.0, duration), sp.cfg)

    e1, e2, w1, w2 = sp.positions(duration)
    pops = measure_populations(psi, sp.trap, (e1, e2), (w1, w2))
    theta_pred = predicted_theta(sp)
    raw, theta = unwrap_theta(pops.p1, theta_pred)

    v_peak = max(sp.schedule.rate(t) for t in [0.0, duration] + (sp.ramp.breakpoints if sp.ramp and sp.frame is Frame.MIDPOINT_RAMP else []))
    ratio = worst_ratio(sp.trap, v_peak, sp.d_start, sp.d_end)
    flagged = ratio > RATIO_WARN
    if flagged and warn:
        warnings.warn(f"adiabaticity ratio {ratio:.3f} exceeds {RATIO_WARN}", AdiabaticityWarning, stacklevel=2)
    leak = parity_leakage(records)[0] if sp.frame is not Frame.LAB else float("nan")
    return SplitResult(pops.p1, pops.p2, pops.p_lost, theta, raw, theta_pred, records,
                       ratio, flagged, pops.halfspace, leak, psi, sp)


def run_noninertial(sp: SplitProtocol, warn: bool = True) -> SplitResult:
    """Run in the accelerating midpoint frame, where M a(t) z breaks parity."""
    if sp.frame is not Frame.MIDPOINT_RAMP:
        raise ValueError("run_noninertial needs the midpoint-ramp frame")
    return run_split(sp, warn)


@dataclass
class Trajectory:
    t: np.ndarray
    mean_z: np.ndarray
    d: np.ndarray
    midpoint: np.ndarray
    atom_trap: np.ndarray
    empty_trap: np.ndarray
    norm: np.ndarray
    parity_even: np.ndarray
    result: SplitResult = field(repr=False)

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.mean_z.tolist(), self.d.tolist()))

    def central_extrema(self, sigma: float = 1.0) -> int:
        """Turning points of <z> - midpoint while the traps overlap (|d| < 2 sigma)."""
        inside = np.abs(self.d) < 2 * sigma
        x = (self.mean_z - self.midpoint)[inside]
        return count_extrema(x)


def count_extrema(x: np.ndarray) -> int:
    dx = np.diff(x)
    dx = dx[dx != 0]
    return int(np.count_nonzero(np.sign(dx[1:]) != np.sign(dx[:-1])))


def com_trajectory(sp: SplitProtocol, observe_every: int | None = None) -> Trajectory:
    """Centre-of-mass track of the atom with the trap-centre reference lines."""
    if observe_every is not None:
        sp = replace(sp, cfg=replace(sp.cfg, observe_every=observe_every))
    res = run_split(sp, warn=False)
    t = np.array([r.t for r in res.trajectory])
    pos = np.array([sp.positions(ti) for ti in t])
    return Trajectory(t, np.array([r.mean_z for r in res.trajectory]),
                      np.array([sp.schedule.d(ti) for ti in t]),
                      0.5 * (pos[:, 0] + pos[:, 1]), pos[:, 0], pos[:, 1],
                      np.array([r.norm for r in res.trajectory]),
                      np.array([r.parity_even_weight for r in res.trajectory]), res)


@dataclass(frozen=True)
class SweepRow:
    v: float
    inv_v: float
    p_stay: float
    p_stay_pred: float
    theta_tdse: float
    theta_predicted: float
    max_ratio: float
    grid_n: int
    p_lost: float


def _sweep_one(sp: SplitProtocol) -> SweepRow:
    r = run_split(sp, warn=False)
    return SweepRow(sp.v, 1.0 / sp.v, r.p_stay, r.p_stay_predicted, r.theta_tdse,
                    r.theta_predicted, r.max_adiabaticity_ratio, sp.n_grid, r.p_lost)


def sweep_velocity(template: SplitProtocol, v_list, workers: int = 1) -> list[SweepRow]:
    """Independent runs for each velocity; rows come back ordered by v."""
    v_list = sorted(float(v) for v in v_list)
    if any(v <= 0 for v in v_list):
        raise ValueError("velocities must be positive")
    runs = [replace(template, v=v) for v in v_list]
    if workers > 1 and len(runs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, runs))
    return [_sweep_one(sp) for sp in runs]
