import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavesplit.core import Grid, Wavefunction, expectation_z
from wavesplit.errors import TrapsUnresolved
from wavesplit.propagator import PropagationConfig
from wavesplit.protocol import (Frame, RampSchedule, Schedule, SplitProtocol, boost, count_extrema,
                                measure_populations, prepare_initial_state, run_noninertial,
                                sweep_velocity, unwrap_theta)


def test_constant_velocity_schedule():
    s = Schedule(-12.0, 12.0, 0.15)
    assert s.duration() == pytest.approx(160.0)
    assert s.d(80.0) == pytest.approx(0.0)
    assert s.rate(3.0) == 0.15 and s.frame_accel(3.0) == 0.0


def test_ramp_integral_equals_velocity_change():
    r = RampSchedule(((10.0, 20.0, 0.003), (50.0, 55.0, -0.002)))
    assert r.velocity_change() == pytest.approx(0.03 - 0.01)
    s = Schedule(-12.0, 12.0, 0.15, r)
    # relative velocity drops by twice the frame's velocity change
    assert s.rate(100.0) == pytest.approx(0.15 - 2 * 0.02)
    assert s.d(s.duration()) == pytest.approx(12.0, abs=1e-10)
    ts = np.linspace(0, 100, 100001)
    d = np.array([s.d(t) for t in ts])
    assert np.allclose(np.gradient(d, ts)[1:-1], [s.rate(t) for t in ts[1:-1]], atol=1e-6)


def test_pulse_has_no_net_velocity_change():
    r = RampSchedule.pulse(80.0, 4.0, 0.01)
    assert r.velocity_change() == pytest.approx(0.0, abs=1e-15)
    assert r.accel(78.0) == 0.01 and r.accel(81.0) == -0.01 and r.accel(90.0) == 0.0


def test_ramp_validation():
    with pytest.raises(ValueError):
        RampSchedule(((0.0, 10.0, 0.1), (5.0, 12.0, 0.1)))
    with pytest.raises(ValueError):
        RampSchedule(((3.0, 3.0, 0.1),))
    with pytest.raises(ValueError):
        Schedule(-12.0, 12.0, 0.15, RampSchedule(((0.0, 10.0, 0.05),))).duration()


def test_protocol_validation():
    with pytest.raises(ValueError):
        SplitProtocol(v=-0.1)
    with pytest.raises(ValueError):
        SplitProtocol(d_start=-8.0)
    with pytest.raises(ValueError):
        SplitProtocol(frame="midpoint-ramp")
    with pytest.raises(ValueError):
        SplitProtocol(frame="rotating")


def test_positions_by_frame():
    lab = SplitProtocol(v=0.2)
    mid = SplitProtocol(v=0.2, frame="midpoint")
    t = 17.0
    d = -12.0 + 0.2 * t
    assert lab.positions(t) == pytest.approx((0.0, -d, 0.0, -0.2))
    assert mid.positions(t) == pytest.approx((d / 2, -d / 2, 0.1, -0.1))
    assert replace(mid, mirror=True).positions(t) == pytest.approx((-d / 2, d / 2, -0.1, 0.1))
    # the lab box reaches twice as far
    assert lab.grid().z_max == pytest.approx(12.0 + 16.0)
    assert mid.grid().z_max == pytest.approx(6.0 + 16.0)


def test_initial_state_is_centred(trap):
    g = Grid(30.0, 1200)
    for c in (0.0, 6.0, -6.0):
        psi = prepare_initial_state(trap, c, g)
        assert expectation_z(psi) == pytest.approx(c, abs=1e-6)
        assert psi.norm() == pytest.approx(1.0, abs=1e-12)


def test_boost_sets_mean_momentum(trap):
    g = Grid(30.0, 1200)
    psi = boost(prepare_initial_state(trap, 0.0, g), 0.075)
    a = psi.amplitudes
    p_mean = g.dz * np.vdot(a, np.fft.ifft(g.k * np.fft.fft(a))).real
    assert p_mean == pytest.approx(0.075, abs=1e-10)


def test_measure_populations_on_known_states(trap):
    g = Grid(30.0, 1200)
    a = prepare_initial_state(trap, -6.0, g)
    b = prepare_initial_state(trap, 6.0, g)
    mix = Wavefunction(np.sqrt(0.3) * a.amplitudes + 1j * np.sqrt(0.7) * b.amplitudes, g)
    pops = measure_populations(mix, trap, (-6.0, 6.0))
    # the two trap states overlap at the 1e-9 level when 12 apart
    assert pops.p1 == pytest.approx(0.3, abs=1e-7)
    assert pops.p2 == pytest.approx(0.7, abs=1e-7)
    assert sum(pops) == pytest.approx(1.0, abs=1e-15)
    assert pops.halfspace == pytest.approx((0.3, 0.7), abs=1e-5)
    with pytest.raises(TrapsUnresolved):
        measure_populations(mix, trap, (-4.0, 4.0))


@settings(max_examples=200)
@given(st.floats(0, 1), st.floats(-30, 30))
def test_unwrap_theta_branch(p, hint):
    raw, theta = unwrap_theta(p, hint)
    assert 0 <= raw <= math.pi / 2
    assert math.sin(theta) ** 2 == pytest.approx(p, abs=1e-12)
    assert abs(theta - hint) <= math.pi / 2 + 1e-12


def test_count_extrema():
    t = np.linspace(0, 4 * np.pi, 400)
    assert count_extrema(np.sin(t)) == 4
    assert count_extrema(t) == 0


def test_run_noninertial_needs_ramp_frame():
    with pytest.raises(ValueError):
        run_noninertial(SplitProtocol(frame="midpoint"))


@pytest.mark.slow
def test_lab_and_midpoint_frames_agree(split_runs):
    lab = split_runs(SplitProtocol(v=0.3, n_grid=1000))
    mid = split_runs(SplitProtocol(v=0.3, n_grid=800, frame="midpoint"))
    assert mid.p_stay == pytest.approx(lab.p_stay, abs=1e-5)
    assert mid.p_transfer == pytest.approx(lab.p_transfer, abs=1e-5)
    assert mid.max_parity_leak < 1e-8
    assert math.isnan(lab.max_parity_leak)


@pytest.mark.slow
def test_mirror_symmetry(split_runs):
    sp = SplitProtocol(v=0.3, n_grid=1000)
    a = split_runs(sp)
    b = split_runs(replace(sp, mirror=True))
    assert b.p_stay == pytest.approx(a.p_stay, abs=1e-6)
    assert b.p_transfer == pytest.approx(a.p_transfer, abs=1e-6)


@pytest.mark.slow
def test_result_bookkeeping(split_runs):
    r = split_runs(SplitProtocol(v=0.3, n_grid=1000))
    assert r.p_stay + r.p_transfer + r.p_lost == pytest.approx(1.0, abs=1e-12)
    assert r.halfspace[0] == pytest.approx(r.p_stay, abs=1e-3)
    assert math.sin(r.theta_tdse) ** 2 == pytest.approx(r.p_stay, abs=1e-12)
    assert abs(r.theta_tdse - r.theta_predicted) < math.pi / 2
    assert r.adiabaticity_flag and r.max_adiabaticity_ratio > 0.1
    assert all(abs(rec.norm - 1) < 1e-9 for rec in r.trajectory)


@pytest.mark.slow
def test_adiabaticity_warning_is_emitted():
    from wavesplit.errors import AdiabaticityWarning
    from wavesplit.protocol import run_split
    with pytest.warns(AdiabaticityWarning):
        run_split(SplitProtocol(v=0.4, n_grid=500))


@pytest.mark.slow
def test_slow_ramp_far_from_crossing_changes_little(split_runs):
    base = SplitProtocol(v=0.15, n_grid=800, frame="midpoint")
    # speed up by 0.02 and back again while |d| > 7, well away from the crossing
    ramp = RampSchedule.pulse(20.0, 5.0, -0.002)
    ramped = replace(base, frame=Frame.MIDPOINT_RAMP, ramp=ramp)
    assert abs(ramped.schedule.d(25.0)) > 7
    a = split_runs(base)
    b = split_runs(ramped)
    assert abs(b.p_stay - a.p_stay) < 0.01


@pytest.mark.slow
def test_sweep_is_ordered_and_worker_independent():
    template = SplitProtocol(n_grid=500, cfg=PropagationConfig(observe_every=1000))
    one = sweep_velocity(template, [0.3, 0.25], workers=1)
    two = sweep_velocity(template, [0.25, 0.3], workers=2)
    assert [r.v for r in one] == [0.25, 0.3]
    assert one == two
    with pytest.raises(ValueError):
        sweep_velocity(template, [0.1, -0.2])
