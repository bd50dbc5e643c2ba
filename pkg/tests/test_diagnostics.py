import numpy as np
import pytest

from wavesplit.core import Grid, sample_double_trap
from wavesplit.diagnostics import (adiabaticity_ratio, coupling_element, derivative_coupling,
                                   dpotential_dd, level_at, null_diagonal, parity_leakage,
                                   scan_adiabaticity, worst_ratio)
from wavesplit.eigensolver import EigenLevel, Parity, build_hamiltonian
from wavesplit.errors import DegenerateGap
from wavesplit.propagator import TrajectoryRecord


@pytest.fixture(scope="module")
def grid(trap):
    return Grid.for_separation(trap, 12.0)


def test_dpotential_matches_finite_difference(trap, grid):
    d, h = 3.0, 1e-5
    fd = (sample_double_trap(grid, trap, d + h).values - sample_double_trap(grid, trap, d - h).values) / (2 * h)
    assert np.allclose(dpotential_dd(grid, trap, d), fd, atol=1e-8)
    g = dpotential_dd(grid, trap, d)
    assert np.array_equal(g, g[::-1])


def test_ratio_against_dense_oracle(trap, grid):
    # independent route: dense diagonalisation, parity by inspection, same formula
    d, v = 4.0, 0.15
    h = build_hamiltonian(grid, sample_double_trap(grid, trap, d))
    w, u = np.linalg.eigh(h.dense())
    u = u / np.sqrt(grid.dz)
    even = [k for k in range(6) if np.allclose(u[:, k], u[::-1, k], atol=1e-6)]
    e0, e1 = even[0], even[1]
    dv = dpotential_dd(grid, trap, d)
    ref = abs(v * grid.dz * np.dot(u[:, e0], dv * u[:, e1])) / (w[e1] - w[e0]) ** 2
    got = adiabaticity_ratio(level_at(trap, d, grid, 0, "e"), level_at(trap, d, grid, 1, "e"),
                             d, v, trap, grid)
    assert got == pytest.approx(ref, rel=1e-8)


def test_opposite_parity_and_diagonal_vanish(trap, grid):
    for d in (0.5, 4.0, 9.0):
        e0 = level_at(trap, d, grid, 0, "e")
        o0 = level_at(trap, d, grid, 0, "o")
        assert adiabaticity_ratio(e0, o0, d, 0.2, trap, grid) == 0.0
        assert adiabaticity_ratio(e0, e0, d, 0.2, trap, grid) == 0.0
        assert abs(coupling_element(e0.state, o0.state, dpotential_dd(grid, trap, d))) < 1e-15


def test_degenerate_gap_is_an_error(trap, grid):
    e0 = level_at(trap, 2.0, grid, 0, "e")
    twin = EigenLevel(1, e0.energy, Parity.EVEN, e0.state)
    with pytest.raises(DegenerateGap):
        adiabaticity_ratio(e0, twin, 2.0, 0.1, trap, grid)


@pytest.mark.parametrize("d", [1.0, 4.0, 8.0])
def test_two_forms_of_the_coupling_agree(trap, grid, d):
    i, j = level_at(trap, d, grid, 0, "e"), level_at(trap, d, grid, 1, "e")
    hellmann = coupling_element(i.state, j.state, dpotential_dd(grid, trap, d)) / (j.energy - i.energy)
    direct = derivative_coupling(trap, d, grid, (0, "e"), (1, "e"))
    assert direct == pytest.approx(hellmann, rel=1e-6)


@pytest.mark.parametrize("d", [0.5, 3.0, 7.0])
def test_real_eigenfunctions_have_null_diagonal(trap, grid, d):
    assert abs(null_diagonal(trap, d, grid)) < 1e-10
    assert abs(null_diagonal(trap, d, grid, 0, Parity.ODD)) < 1e-10


def test_scan_locates_worst_pair(trap, grid):
    rep = scan_adiabaticity(trap, 0.15, np.linspace(-12, 12, 241), 6, grid)
    # worst coupling sits on the flanks of the crossing, not at the merge point
    assert abs(rep.worst_d) == pytest.approx(4.0, abs=0.2)
    assert set(rep.worst_pair) == {"0e", "1e"}
    assert rep.worst_ratio == pytest.approx(max(r for _, r, _, _ in rep.per_d_curve))
    assert len(rep.per_d_curve) == 241
    with pytest.raises(ValueError):
        scan_adiabaticity(trap, 0.15, [0.0], 3, grid)


def test_worst_ratio_is_linear_in_velocity(trap):
    a = worst_ratio(trap, 0.1, -12, 12)
    b = worst_ratio(trap, 0.3, -12, 12)
    assert b == pytest.approx(3 * a, rel=1e-12)
    # the slow end of the velocity range is comfortably adiabatic
    assert worst_ratio(trap, 0.05, -12, 12) < 0.05


def test_parity_leakage_from_records():
    recs = [TrajectoryRecord(t, 1.0, 0.0, w) for t, w in [(0, 0.5), (1, 0.52), (2, 0.47), (3, 0.5)]]
    leak, curve = parity_leakage(recs)
    assert leak == pytest.approx(0.03)
    assert np.allclose(curve, [0, 0.02, 0.03, 0.0])


def test_level_at_reports_missing_level(trap, grid):
    with pytest.raises(ValueError):
        level_at(trap, 12.0, grid, 5, "e", k=4)
