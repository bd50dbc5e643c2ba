"""Units, grids, Gaussian trap potentials and wavefunction algebra.

Everything is expressed in natural units of a harmonic trap with
hbar = M = omega = 1: lengths in sqrt(hbar / (M omega)), times in 1/omega,
energies in hbar omega.  SI numbers only appear through :func:`to_si`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np
from scipy import constants

from .errors import GridMismatch, GridTooCoarse, MissingSiParams

#: Wall padding (in trap widths) added around the outermost trap centre.
#: The ground state of a depth-1 Gaussian trap decays like exp(-1.09 |z|),
#: so 16 widths keep the amplitude at the wall near 5e-8.
DEFAULT_PADDING = 16.0

RB87_MASS = 86.909180527 * constants.atomic_mass


@dataclass(frozen=True)
class UnitsConvention:
    """Natural units (hbar = M = omega = 1) plus optional SI anchors.

    Internal arithmetic never looks at the SI fields; they are only used
    by :func:`to_si` and :func:`from_si` when reporting.
    """

    si_mass: float | None = None
    si_omega: float | None = None

    hbar = 1.0
    mass = 1.0
    omega = 1.0

    @classmethod
    def rubidium87(cls, omega: float = 2 * np.pi * 1e4) -> "UnitsConvention":
        return cls(si_mass=RB87_MASS, si_omega=omega)

    def scale(self, kind: str) -> float:
        if self.si_mass is None or self.si_omega is None:
            raise MissingSiParams("si_mass and si_omega are required for SI conversion")
        length = math.sqrt(constants.hbar / (self.si_mass * self.si_omega))
        scales = {
            "length": length,
            "time": 1.0 / self.si_omega,
            "velocity": length * self.si_omega,
            "energy": constants.hbar * self.si_omega,
        }
        try:
            return scales[kind]
        except KeyError:
            raise ValueError(f"unknown quantity kind {kind!r}") from None


def to_si(value, kind: str, units: UnitsConvention):
    """Convert a natural-unit ``value`` of the given kind to SI."""
    return value * units.scale(kind)


def from_si(value, kind: str, units: UnitsConvention):
    return value / units.scale(kind)


@dataclass(frozen=True)
class Grid:
    """Cell-centred symmetric grid on (-z_max, z_max).

    Points sit at ``-z_max + (j + 1/2) dz`` so that the index reversal
    ``j -> n-1-j`` is exactly the reflection ``z -> -z``; there is no
    point at the origin.
    """

    z_max: float
    n: int

    def __post_init__(self):
        if not self.z_max > 0:
            raise ValueError("z_max must be positive")
        if self.n < 64 or self.n % 2:
            raise ValueError("n must be even and at least 64")

    @classmethod
    def for_separation(cls, trap: "TrapParams", d_max: float, dz: float | None = None,
                       n: int | None = None, padding: float = DEFAULT_PADDING) -> "Grid":
        """Grid wide enough for two traps up to ``|d| = d_max`` apart.

        Give either a target spacing ``dz`` or an explicit point count ``n``.
        """
        z_max = max(padding * trap.sigma, abs(d_max) / 2 + padding * trap.sigma)
        if n is None:
            dz = 0.05 * trap.sigma if dz is None else dz
            n = int(math.ceil(2 * z_max / dz))
            n += n % 2
        return cls(z_max, max(int(n), 64))

    @property
    def dz(self) -> float:
        return 2.0 * self.z_max / self.n

    @cached_property
    def z(self) -> np.ndarray:
        # built from the positive half so that z[::-1] == -z bit for bit
        pos = (np.arange(self.n // 2) + 0.5) * self.dz
        z = np.concatenate((-pos[::-1], pos))
        z.flags.writeable = False
        return z

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        k = 2 * np.pi * np.fft.fftfreq(self.n, d=self.dz)
        k.flags.writeable = False
        return k


@dataclass(frozen=True)
class TrapParams:
    """Inverted Gaussian trap ``-depth * exp(-z^2 / (2 sigma^2))``.

    ``depth`` defaults to ``M omega^2 sigma^2 = sigma**2`` so that the trap
    curvature at the bottom is omega = 1.
    """

    sigma: float = 1.0
    depth: float | None = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.depth is None:
            object.__setattr__(self, "depth", self.sigma ** 2)
        if not self.depth > 0:
            raise ValueError("depth must be positive")

    def __call__(self, z):
        return -self.depth * np.exp(-np.square(z) / (2 * self.sigma ** 2))

    def derivative(self, z):
        """dV/dz of the single trap."""
        return self.depth * z / self.sigma ** 2 * np.exp(-np.square(z) / (2 * self.sigma ** 2))


@dataclass(frozen=True, eq=False)
class PotentialSamples:
    values: np.ndarray
    grid: Grid
    d: float | None = None

    def __post_init__(self):
        if self.values.shape != (self.grid.n,):
            raise GridMismatch("potential samples do not match the grid")

    def __add__(self, other):
        if isinstance(other, PotentialSamples):
            if other.grid != self.grid:
                raise GridMismatch("cannot add potentials on different grids")
            other = other.values
        return PotentialSamples(self.values + other, self.grid, self.d)


@dataclass(frozen=True, eq=False)
class Wavefunction:
    amplitudes: np.ndarray
    grid: Grid

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.n,):
            raise GridMismatch("amplitudes do not match the grid")
        object.__setattr__(self, "amplitudes", a)

    def norm(self) -> float:
        return math.sqrt(self.grid.dz * float(np.vdot(self.amplitudes, self.amplitudes).real))

    def normalized(self) -> "Wavefunction":
        return Wavefunction(self.amplitudes / self.norm(), self.grid)

    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def sample_single_trap(grid: Grid, p: TrapParams, center: float = 0.0) -> PotentialSamples:
    return PotentialSamples(p(grid.z - center), grid)


def sample_double_trap(grid: Grid, p: TrapParams, d: float) -> PotentialSamples:
    """V(z - d/2) + V(z + d/2), symmetrised so reflection is bit-exact."""
    z = grid.z
    v = p(z - d / 2) + p(z + d / 2)
    v = 0.5 * (v + v[::-1])
    return PotentialSamples(v, grid, d)


def critical_separation(p: TrapParams) -> float:
    """Separation at which the two minima of the double trap merge."""
    return 2.0 * p.sigma


def count_minima(samples: PotentialSamples, sigma: float | None = None) -> int:
    """Count strict interior local minima; a flat run of equal values counts once.

    ``sigma`` (the trap width) enables the resolution check ``dz < sigma/10``.
    """
    grid = samples.grid
    if sigma is not None and grid.dz >= sigma / 10:
        raise GridTooCoarse(f"dz={grid.dz:g} must be below sigma/10={sigma / 10:g}")
    v = samples.values
    # collapse plateaus so that ties form a single candidate
    change = np.flatnonzero(np.diff(v)) + 1
    starts = np.concatenate(([0], change))
    vals = v[starts]
    if vals.size < 3:
        return 0
    inner = vals[1:-1]
    return int(np.count_nonzero((inner < vals[:-2]) & (inner < vals[2:])))


def _check_same_grid(a: Wavefunction, b: Wavefunction):
    if a.grid != b.grid:
        raise GridMismatch("wavefunctions live on different grids")


def inner_product(a: Wavefunction, b: Wavefunction) -> complex:
    _check_same_grid(a, b)
    return complex(a.grid.dz * np.vdot(a.amplitudes, b.amplitudes))


def reflect(psi: Wavefunction) -> Wavefunction:
    """psi(z) -> psi(-z), an exact index reversal on the cell-centred grid."""
    return Wavefunction(psi.amplitudes[::-1].copy(), psi.grid)


def parity_weights(psi: Wavefunction) -> tuple[float, float]:
    a = psi.amplitudes
    r = a[::-1]
    dz = psi.grid.dz
    w_even = dz * float(np.sum(np.abs(a + r) ** 2)) / 4
    w_odd = dz * float(np.sum(np.abs(a - r) ** 2)) / 4
    return w_even, w_odd


def expectation_z(psi: Wavefunction) -> float:
    return psi.grid.dz * float(np.dot(psi.grid.z, np.abs(psi.amplitudes) ** 2))
