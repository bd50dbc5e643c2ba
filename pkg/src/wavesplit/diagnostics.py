"""Adiabaticity and parity diagnostics.

The non-adiabatic coupling between instantaneous eigenstates i and j is
evaluated through the Hamiltonian derivative,

    <i| d/dt |j> = <i| dH/dt |j> / (E_j - E_i),   dH/dt = (dd/dt) dV2/dd,

so the adiabaticity ratio |<i|d/dt|j> / (E_i - E_j)| becomes
hbar |v <i|dV2/dd|j>| / (E_i - E_j)^2.  dV2/dd is even in z, so only
same-parity pairs couple.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core import Grid, TrapParams, Wavefunction, inner_product
from .eigensolver import EigenLevel, Parity, _doublet_levels
from .errors import DegenerateGap
from .propagator import TrajectoryRecord

GAP_CUTOFF = 1e-12
#: Ratios above these levels mark a run as marginal / non-adiabatic.
RATIO_NOTICE = 0.05
RATIO_WARN = 0.1


@dataclass(frozen=True)
class AdiabaticityReport:
    worst_ratio: float
    worst_d: float
    worst_pair: tuple[str, str]
    per_d_curve: list[tuple[float, float, str, str]]  # (d, ratio, level i, level j)


def level_name(level: EigenLevel) -> str:
    return f"{level.index}{level.parity.value}"


def dpotential_dd(grid: Grid, p: TrapParams, d: float) -> np.ndarray:
    """dV2/dd = (V'(z + d/2) - V'(z - d/2)) / 2, symmetrised to be exactly even."""
    z = grid.z
    g = 0.5 * (p.derivative(z + d / 2) - p.derivative(z - d / 2))
    return 0.5 * (g + g[::-1])


def coupling_element(a: Wavefunction, b: Wavefunction, dv: np.ndarray) -> float:
    return float((a.grid.dz * np.vdot(a.amplitudes, dv * b.amplitudes)).real)


def adiabaticity_ratio(i: EigenLevel, j: EigenLevel, d: float, v: float,
                       p: TrapParams, grid: Grid, dv: np.ndarray | None = None) -> float:
    """hbar |<i| v dV2/dd |j>| / (E_i - E_j)^2, exactly 0 for opposite parities."""
    if i is j or (i.parity is j.parity and i.index == j.index):
        # diagonal term of a real eigenfunction
        return 0.0
    if {i.parity, j.parity} == {Parity.EVEN, Parity.ODD}:
        return 0.0
    gap = i.energy - j.energy
    if abs(gap) < GAP_CUTOFF:
        raise DegenerateGap(f"levels {level_name(i)} and {level_name(j)} are degenerate at d={d:g}")
    if dv is None:
        dv = dpotential_dd(grid, p, d)
    return abs(v * coupling_element(i.state, j.state, dv)) / gap ** 2


def scan_adiabaticity(p: TrapParams, v: float, d_values, k: int = 6,
                      grid: Grid | None = None) -> AdiabaticityReport:
    """Worst coupling out of the ground doublet into same-parity levels.

    At every d the lowest k levels are computed; the ratio is evaluated for
    each ground-doublet state against every other level of its parity.
    """
    if k < 4:
        raise ValueError("k must be at least 4")
    d_values = np.asarray(d_values, dtype=float)
    grid = grid or Grid.for_separation(p, float(np.max(np.abs(d_values))))
    curve = []
    worst = (-1.0, float("nan"), ("", ""))
    for d in d_values:
        levels = _doublet_levels(p, float(d), grid, k)
        dv = dpotential_dd(grid, p, float(d))
        best = (0.0, "", "")
        for i in levels:
            if i.index != 0:
                continue
            for j in levels:
                if j.parity is not i.parity or j.index == 0:
                    continue
                r = adiabaticity_ratio(i, j, d, v, p, grid, dv)
                if r > best[0]:
                    best = (r, level_name(i), level_name(j))
                if r > worst[0]:
                    worst = (r, float(d), (level_name(i), level_name(j)))
        curve.append((float(d),) + best)
    return AdiabaticityReport(worst[0], worst[1], worst[2], curve)


@lru_cache(maxsize=64)
def _unit_velocity_scan(p: TrapParams, d_min: float, d_max: float, n_d: int, k: int, grid: Grid):
    return scan_adiabaticity(p, 1.0, np.linspace(d_min, d_max, n_d), k, grid)


def worst_ratio(p: TrapParams, v: float, d_min: float, d_max: float, n_d: int = 241,
                k: int = 6, grid: Grid | None = None) -> float:
    """Worst adiabaticity ratio at velocity v; the scan is done once at v = 1."""
    grid = grid or Grid.for_separation(p, max(abs(d_min), abs(d_max)))
    return v * _unit_velocity_scan(p, float(d_min), float(d_max), int(n_d), int(k), grid).worst_ratio


def parity_leakage(trajectory: list[TrajectoryRecord]) -> tuple[float, np.ndarray]:
    """Largest drift of the even-parity weight away from its initial value."""
    w = np.array([r.parity_even_weight for r in trajectory])
    curve = np.abs(w - w[0])
    return float(curve.max()), curve


def null_diagonal(p: TrapParams, d: float, grid: Grid, n: int = 0,
                  parity: Parity = Parity.EVEN, h: float = 1e-3, k: int = 6) -> float:
    """<psi|d psi/dd> by finite differences of sign-continuous real eigenvectors.

    Uses the midpoint of the two displaced states as the bra, which makes the
    estimate second order in ``h``.
    """
    plus, minus = (_tracked(p, d + s, grid, n, parity, k, ref=_tracked(p, d, grid, n, parity, k))
                   for s in (h, -h))
    mid = 0.5 * (plus.amplitudes + minus.amplitudes)
    diff = (plus.amplitudes - minus.amplitudes) / (2 * h)
    return float((grid.dz * np.vdot(mid, diff)).real)


def derivative_coupling(p: TrapParams, d: float, grid: Grid, i: tuple[int, Parity],
                        j: tuple[int, Parity], h: float = 1e-4, k: int = 6) -> float:
    """<i| d j/dd> from a central difference of the eigenvector j."""
    bra = _tracked(p, d, grid, *i, k)
    ref = _tracked(p, d, grid, *j, k)
    plus = _tracked(p, d + h, grid, *j, k, ref=ref)
    minus = _tracked(p, d - h, grid, *j, k, ref=ref)
    return float((grid.dz * np.vdot(bra.amplitudes, (plus.amplitudes - minus.amplitudes) / (2 * h))).real)


def _tracked(p, d, grid, n, parity, k, ref: Wavefunction | None = None) -> Wavefunction:
    parity = Parity(parity)
    for lvl in _doublet_levels(p, float(d), grid, k):
        if lvl.index == n and lvl.parity is parity:
            psi = lvl.state
            if ref is not None and inner_product(ref, psi).real < 0:
                psi = Wavefunction(-psi.amplitudes, grid)
            return psi
    raise ValueError(f"level {n}{parity.value} not among the lowest {k}")


def level_at(p: TrapParams, d: float, grid: Grid, n: int, parity: Parity, k: int = 6) -> EigenLevel:
    for lvl in _doublet_levels(p, float(d), grid, k):
        if lvl.index == n and lvl.parity is Parity(parity):
            return lvl
    raise ValueError(f"level {n}{Parity(parity).value} not among the lowest {k}")
