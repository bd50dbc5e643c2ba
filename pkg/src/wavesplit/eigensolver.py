"""Finite-difference Hamiltonians and their low-lying eigenpairs.

The kinetic term is the second-order central difference with hard walls,
so every Hamiltonian is a real symmetric tridiagonal matrix with constant
off-diagonal ``-1/(2 dz^2)``.  Eigenvalues come from Sturm-sequence
bisection and eigenvectors from inverse iteration (see ``_tridiag``).

For reflection-symmetric potentials the matrix splits exactly into an even
and an odd block on the half grid ``z > 0``; :func:`symmetric_eigenpairs`
diagonalises the two blocks separately, which keeps parity exact even when
the ground doublet is degenerate to machine precision.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _tridiag
from .core import (Grid, PotentialSamples, TrapParams, Wavefunction, reflect,
                   inner_product, sample_double_trap, sample_single_trap)
from .errors import ConvergenceFailure, GridMismatch, GridTooNarrow

_RESIDUAL_TOL = 64 * np.finfo(float).eps
_MAXIT = 12


class Parity(str, Enum):
    EVEN = "e"
    ODD = "o"
    MIXED = "mixed"


@dataclass(frozen=True, eq=False)
class DiscreteHamiltonian:
    diag: np.ndarray
    offdiag: float
    grid: Grid

    @property
    def n(self) -> int:
        return self.diag.size

    def apply(self, psi: np.ndarray) -> np.ndarray:
        out = self.diag * psi
        out[1:] += self.offdiag * psi[:-1]
        out[:-1] += self.offdiag * psi[1:]
        return out

    def dense(self) -> np.ndarray:
        h = np.diag(self.diag)
        i = np.arange(self.n - 1)
        h[i, i + 1] = h[i + 1, i] = self.offdiag
        return h

    def is_reflection_symmetric(self) -> bool:
        return bool(np.array_equal(self.diag, self.diag[::-1]))

    def parity_blocks(self) -> tuple[np.ndarray, np.ndarray]:
        """Diagonals of the even and odd blocks on the z > 0 half grid."""
        half = self.diag[self.n // 2:]
        even = half.copy()
        odd = half.copy()
        even[0] += self.offdiag
        odd[0] -= self.offdiag
        return even, odd


@dataclass(frozen=True, eq=False)
class EigenLevel:
    """One eigenpair.

    ``index`` is the position in ascending order among the levels that were
    requested; in a :class:`SpectrumTable` it is the quantum number n of
    E_n^(p) within its parity.
    """

    index: int
    energy: float
    parity: Parity
    state: Wavefunction


def build_hamiltonian(grid: Grid, v: PotentialSamples) -> DiscreteHamiltonian:
    if v.grid != grid:
        raise GridMismatch("potential samples were taken on a different grid")
    dz = grid.dz
    return DiscreteHamiltonian(1.0 / dz ** 2 + v.values, -0.5 / dz ** 2, grid)


def _start_vectors(n: int, k: int) -> np.ndarray:
    return np.random.default_rng(12345).uniform(0.5, 1.5, size=(n, k))


def _tridiagonal_eigh(diag: np.ndarray, off: float, k: int):
    diag = np.ascontiguousarray(diag, dtype=float)
    evals = _tridiag.bisect_lowest(diag, float(off), k)
    vecs, its = _tridiag.inverse_iteration(diag, float(off), evals,
                                           _start_vectors(diag.size, k), _MAXIT, _RESIDUAL_TOL)
    if np.any(its < 0):
        bad = np.flatnonzero(its < 0).tolist()
        raise ConvergenceFailure(f"inverse iteration did not converge for levels {bad}")
    return evals, vecs


def _fix_sign(v: np.ndarray) -> np.ndarray:
    # largest component on the z > 0 half made positive; deterministic and
    # well defined for both parities
    half = v[v.size // 2:]
    return v if half[np.argmax(np.abs(half))] >= 0 else -v


def classify_parity(level: EigenLevel | Wavefunction, tol: float = 1e-8) -> Parity:
    psi = level.state if isinstance(level, EigenLevel) else level
    c = inner_product(reflect(psi), psi).real / psi.norm() ** 2
    if c > 1 - tol:
        return Parity.EVEN
    if c < -(1 - tol):
        return Parity.ODD
    return Parity.MIXED


def lowest_eigenpairs(h: DiscreteHamiltonian, k: int) -> list[EigenLevel]:
    """k lowest eigenpairs of ``h`` in ascending order of energy."""
    if not 1 <= k <= h.n // 4:
        raise ValueError(f"k must lie in [1, n/4]; got {k}")
    evals, vecs = _tridiagonal_eigh(h.diag, h.offdiag, k)
    scale = 1.0 / np.sqrt(h.grid.dz)
    levels = []
    for i in range(k):
        psi = Wavefunction(_fix_sign(vecs[:, i]) * scale, h.grid)
        lvl = EigenLevel(i, float(evals[i]), Parity.MIXED, psi)
        levels.append(EigenLevel(i, lvl.energy, classify_parity(lvl), psi))
    return levels


def symmetric_eigenpairs(h: DiscreteHamiltonian, k_even: int, k_odd: int
                         ) -> tuple[list[EigenLevel], list[EigenLevel]]:
    """Lowest even and odd eigenpairs of a reflection-symmetric Hamiltonian."""
    if not h.is_reflection_symmetric():
        raise ValueError("Hamiltonian is not reflection symmetric")
    scale = 1.0 / np.sqrt(2.0 * h.grid.dz)
    out = []
    for diag, parity, k in zip(h.parity_blocks(), (Parity.EVEN, Parity.ODD), (k_even, k_odd)):
        levels = []
        if k:
            evals, vecs = _tridiagonal_eigh(diag, h.offdiag, k)
            for i in range(k):
                u = vecs[:, i]
                if u[np.argmax(np.abs(u))] < 0:
                    u = -u
                sign = 1.0 if parity is Parity.EVEN else -1.0
                full = np.concatenate((sign * u[::-1], u)) * scale
                levels.append(EigenLevel(i, float(evals[i]), parity, Wavefunction(full, h.grid)))
        out.append(levels)
    return out[0], out[1]


def dense_eigenpairs(h: DiscreteHamiltonian, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Full dense diagonalisation; the small-n reference for the bisection path.

    Returns energies and dz-normalised eigenvectors as columns.
    """
    w, u = np.linalg.eigh(h.dense())
    return w[:k], u[:, :k] / np.sqrt(h.grid.dz)


def single_trap_levels(p: TrapParams, k: int, grid: Grid, center: float = 0.0) -> list[EigenLevel]:
    """eps_n and phi_n of one trap."""
    h = build_hamiltonian(grid, sample_single_trap(grid, p, center))
    return lowest_eigenpairs(h, k)


def _doublet_levels(p: TrapParams, d: float, grid: Grid, k: int) -> list[EigenLevel]:
    h = build_hamiltonian(grid, sample_double_trap(grid, p, d))
    per = k // 2 + 1
    even, odd = symmetric_eigenpairs(h, per, per)
    return sorted(even + odd, key=lambda lvl: lvl.energy)[:k]


@dataclass(frozen=True, eq=False)
class SpectrumTable:
    d_values: np.ndarray
    levels: list[list[EigenLevel]]
    continuity_sign_fixed: bool = True

    def energy(self, n: int, parity: Parity | str) -> np.ndarray:
        """E_n^(p) across the scan (NaN where that level was not among the k lowest)."""
        parity = Parity(parity)
        out = np.full(len(self.d_values), np.nan)
        for i, row in enumerate(self.levels):
            for lvl in row:
                if lvl.parity is parity and lvl.index == n:
                    out[i] = lvl.energy
        return out

    def labels(self) -> list[tuple[int, Parity]]:
        """(n, parity) pairs present at every scanned separation, in E_n^(p) order."""
        common = None
        for row in self.levels:
            s = {(lvl.index, lvl.parity) for lvl in row}
            common = s if common is None else common & s
        order = {Parity.EVEN: 0, Parity.ODD: 1}
        return sorted(common or (), key=lambda t: (t[0], order[t[1]]))


def adiabatic_spectrum(p: TrapParams, d_values, k: int, grid: Grid) -> SpectrumTable:
    """Parity-labelled adiabatic levels E_n^(p)(d) with continuous eigenvector signs."""
    d_values = np.asarray(d_values, dtype=float)
    if d_values.size > 1 and np.any(np.diff(d_values) < 0):
        raise ValueError("d_values must be sorted")
    if np.max(np.abs(d_values)) / 2 + 4 * p.sigma > grid.z_max:
        raise GridTooNarrow("grid does not contain both traps with 4 sigma padding")
    rows = []
    previous = {}
    for d in d_values:
        row = []
        for lvl in _doublet_levels(p, float(d), grid, k):
            key = (lvl.index, lvl.parity)
            prev = previous.get(key)
            if prev is not None and np.dot(prev.state.amplitudes.real, lvl.state.amplitudes.real) < 0:
                lvl = EigenLevel(lvl.index, lvl.energy, lvl.parity,
                                 Wavefunction(-lvl.state.amplitudes, grid))
            previous[key] = lvl
            row.append(lvl)
        rows.append(row)
    return SpectrumTable(d_values, rows, True)


def ground_doublet(p: TrapParams, d: float, grid: Grid) -> tuple[EigenLevel, EigenLevel]:
    h = build_hamiltonian(grid, sample_double_trap(grid, p, d))
    even, odd = symmetric_eigenpairs(h, 1, 1)
    return even[0], odd[0]


def tunnel_splitting(p: TrapParams, d: float, grid: Grid) -> float:
    """E_0^(o) - E_0^(e) at separation d."""
    h = build_hamiltonian(grid, sample_double_trap(grid, p, d))
    ed, od = h.parity_blocks()
    e = _tridiag.bisect_lowest(np.ascontiguousarray(ed), float(h.offdiag), 1)[0]
    o = _tridiag.bisect_lowest(np.ascontiguousarray(od), float(h.offdiag), 1)[0]
    return float(o - e)
