import textwrap

import numpy as np
import pytest

from nhlab import entanglement as ent
from nhlab.config import (
    ConfigError,
    ExperimentConfig,
    SweepSpec,
    format_complex_list,
    load_config,
    parse_matrix,
)


def write(tmp_path, text):
    path = tmp_path / "exp.ini"
    path.write_text(textwrap.dedent(text).lstrip())
    return path


def test_defaults_without_file():
    cfg = load_config(None)
    assert cfg == ExperimentConfig()
    assert cfg.mode == "real" and cfg.noise is None
    grid = cfg.sweep.grid()
    assert grid[0] == -45 and grid[-1] == 45 and grid.size == 91


def test_sweep_grid_includes_stop():
    assert list(SweepSpec(0, 1, 0.25).grid()) == [0, 0.25, 0.5, 0.75, 1]
    assert list(SweepSpec(0, 1, 0.3).grid()) == [0, 0.3, 0.6, 0.9]


def test_full_file(tmp_path):
    path = write(tmp_path, """
        [experiment]
        mode = complex
        theta0_start = -10
        theta0_stop = 10
        theta0_step = 5
        theta7 = 70

        [noise]
        enabled = yes
        rate_scale = 5e4
        visibility_factor = 0.9828
        seed = 11
        extraction = fit

        [fringe]
        arm_reflect = a
        arm_transmit = B
        theta0 = 0

        [entangle]
        channel_a = custom
        channel_b = xy
        state = singlet

        [channel.custom]
        kraus0 = 0.7071067811865476,0 0,0 0,0 0.7071067811865476,0
        kraus1 = 0.7071067811865476,0 0,0 0,0 -0.7071067811865476,0

        [outputs]
        dir = results
    """)
    cfg = load_config(path)
    assert cfg.mode == "complex"
    assert cfg.angles["theta7"] == 70 and cfg.angles["theta5"] == 0
    assert list(cfg.sweep.grid()) == [-10, -5, 0, 5, 10]
    assert cfg.noise.rate_scale == 5e4 and cfg.noise.seed == 11
    assert cfg.noise.visibility_factor == 0.9828
    assert cfg.extraction == "fit"
    assert cfg.fringe_arms == ("A", "B") and cfg.fringe_theta0 == 0
    assert len(cfg.channel_a.kraus) == 2
    assert np.allclose(cfg.bipartite_state, ent.singlet())
    assert cfg.out_dir == "results"


@pytest.mark.parametrize(
    "body, line, fragment",
    [
        ("[experiment]\nmode = imaginary\n", 2, "expected real or complex"),
        ("[experiment]\ntheta1 = 22.5\ntheta_a = 0\n", 3, "not allowed in real mode"),
        ("[experiment]\nmode = complex\ntheta_b = 10\n", 3, "only 0 deg"),
        ("[experiment]\ntheta0_step = 0\n", 2, "must be > 0"),
        ("[experiment]\ntheta0_start = 10\ntheta0_stop = -10\n", 2, "must not exceed"),
        ("[experiment]\n\ntheta3 = sixty\n", 3, "expected a number"),
        ("[noise]\nenabled = true\nvisibility_factor = 1.5\n", 1, "visibility_factor"),
        ("[noise]\nextraction = median\n", 2, "expected one of"),
        ("[fringe]\narm_reflect = C\n", 2, "expected one of"),
        ("[entangle]\nchannel_a = nope\n", 2, "unknown channel"),
        ("[entangle]\nchannel_a = c\n[channel.c]\nk0 = 1,0 0,0 0,0 0.5,0\n", 3, "not complete"),
        ("[entangle]\nchannel_a = c\n[channel.c]\nk0 = 1,0 0,0 0,0\n", 4, "square"),
    ],
)
def test_errors_carry_line_numbers(tmp_path, body, line, fragment):
    path = tmp_path / "bad.ini"
    path.write_text(body)
    with pytest.raises(ConfigError) as info:
        load_config(path)
    msg = str(info.value)
    assert msg.startswith(f"{path}:{line}:"), msg
    assert fragment in msg


def test_malformed_file(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("theta1 = 3\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_matrix_round_trip():
    m = np.array([[1 + 2j, -0.5], [0.25j, 3]])
    assert np.array_equal(parse_matrix(format_complex_list(m)), m)
    with pytest.raises(ValueError):
        parse_matrix("1,0 2")


def test_with_mode_resets_angles():
    cfg = ExperimentConfig().with_mode("complex")
    assert cfg.angles["theta5"] == 0 and cfg.angles["theta_a"] == 0
    assert cfg.operator_pair().mode == "complex"
