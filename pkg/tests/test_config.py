import pytest
from hypothesis import given, settings, strategies as st

from wavesplit.config import RunConfig, config_hash, emit, parse_config
from wavesplit.errors import ParseError, ValidationError


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg.protocol.v == 0.15
    assert cfg.protocol.frame == "lab"
    assert cfg.grid.n == 1000
    # derived defaults are filled in
    assert cfg.trap.depth == 1.0
    assert cfg.grid.z_max == pytest.approx(28.0)
    assert cfg.sweep.v_list == pytest.approx((0.05, 0.1, 0.15, 0.2, 0.25, 0.3))
    assert cfg.sweep.grid_n == (1000,)


def test_negative_velocity_is_rejected():
    with pytest.raises(ValidationError, match="v must be > 0"):
        parse_config("protocol.v = -0.1")


def test_round_trip_is_identical():
    text = """
# a comment
trap.sigma = 1.5
protocol.frame = midpoint-ramp
protocol.ramp = 10:20:0.001; 20:30:-0.001   # pulse
protocol.d_start = -20
protocol.d_end = 20
sweep.spacing = log
sweep.count = 4
spectrum.d_list = -24, 0, 24
"""
    cfg = parse_config(text)
    again = parse_config(emit(cfg))
    assert again == cfg
    assert emit(again) == emit(cfg)
    assert cfg.protocol.ramp == ((10.0, 20.0, 0.001), (20.0, 30.0, -0.001))
    assert cfg.grid.z_max == pytest.approx(10.0 + 16 * 1.5)
    assert cfg.sweep.v_list[0] == pytest.approx(0.05) and cfg.sweep.v_list[-1] == pytest.approx(0.3)


@settings(max_examples=50, deadline=None)
@given(v=st.floats(1e-3, 5.0), n=st.integers(32, 2000).map(lambda k: 2 * k),
       dt=st.floats(1e-5, 1e-2), frame=st.sampled_from(["lab", "midpoint"]))
def test_round_trip_property(v, n, dt, frame):
    cfg = parse_config(f"protocol.v = {v!r}\ngrid.n = {n}\npropagation.dt = {dt!r}\nprotocol.frame = {frame}")
    assert parse_config(emit(cfg)) == cfg


@pytest.mark.parametrize("text,line", [
    ("protocol.speed = 1", 1),
    ("\n\nnosuch.key = 1", 3),
    ("protocol.v 0.1", 1),
    ("protocol.v = fast", 1),
    ("grid.n = 100\ngrid.n = 200", 2),
    ("protocol = 3", 1),
    ("protocol.v = nan", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


@pytest.mark.parametrize("text,needle", [
    ("grid.n = 101", "grid.n"),
    ("protocol.d_start = -5", "d_start"),
    ("protocol.frame = midpoint-ramp", "ramp"),
    ("propagation.method = euler", "method"),
    ("sweep.v_min = 0.3\nsweep.v_max = 0.1", "v_min"),
    ("phase.n_quad = 30", "n_quad"),
    ("output.precision = 40", "precision"),
    ("trap.sigma = 0", "sigma"),
])
def test_validation_names_the_invariant(text, needle):
    with pytest.raises(ValidationError, match=needle):
        parse_config(text)


def test_overrides_replace_values():
    cfg = parse_config("protocol.v = 0.1", {"protocol.v": "0.2", "grid.n": "500"})
    assert cfg.protocol.v == 0.2 and cfg.grid.n == 500
    with pytest.raises(ParseError):
        parse_config("", {"grid.bogus": "1"})


def test_hash_ignores_output_directory():
    a = parse_config("output.directory = /tmp/a")
    b = parse_config("output.directory = /tmp/b")
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(parse_config("protocol.v = 0.2"))
    assert isinstance(RunConfig().hash(), str)
