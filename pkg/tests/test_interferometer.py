import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhlab import interferometer as ifm
from nhlab import optics, qmath
from nhlab.sampling import random_operator, random_state, rng_for

SQ3 = np.sqrt(3)
I2 = np.eye(2)
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def bench(theta0=0.0, mode="real"):
    pair = optics.real_pair() if mode == "real" else optics.complex_pair()
    return pair.a, pair.b, optics.polarization_state(theta0)


def random_contraction(rng, dim=2):
    op = random_operator(dim, rng)
    return op / np.linalg.norm(op, 2)


def test_identity_arms_ports():
    cfg = ifm.SagnacConfig(I2, I2, [1, 0])
    assert ifm.detector_intensity(cfg, 0.0) == pytest.approx(1, abs=1e-15)
    assert ifm.detector_intensity(cfg, np.pi) == pytest.approx(0, abs=1e-15)


def test_real_config_peak_intensity():
    a, b, phi = bench()
    t23 = qmath.gram_matrix(a, b, phi)[1, 2]
    cfg = ifm.SagnacConfig(a, b, phi)
    want = (5 / 8 + 7 / 8 + 2 * (4 + SQ3) / 8) / 4
    assert ifm.detector_intensity(cfg, np.angle(t23)) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.733253, abs=1e-6)


def test_scan_identity_arms():
    scan = ifm.scan_fringe(ifm.SagnacConfig(I2, I2, optics.polarization_state(-45)))
    assert scan.n_max == pytest.approx(1, abs=1e-12)
    assert scan.n_min == pytest.approx(0, abs=1e-12)
    assert scan.visibility == pytest.approx(1, abs=1e-12)


def test_scan_real_config_amplitude():
    a, b, phi = bench()
    scan = ifm.scan_fringe(ifm.SagnacConfig(a, b, phi))
    assert scan.amplitude == pytest.approx((4 + SQ3) / 8, abs=1e-12)


def test_identity_vs_lossy_arm():
    b = optics.operator_real_B(0, 75)
    # at theta0 = -45 deg the input is V, which this B passes unattenuated
    v_in = ifm.scan_fringe(ifm.SagnacConfig(I2, b, optics.polarization_state(-45)))
    assert v_in.visibility == pytest.approx(1, abs=1e-12)
    # at theta0 = 0 the input is H, attenuated by sqrt3/2: reduced contrast, nonzero floor
    h_in = ifm.scan_fringe(ifm.SagnacConfig(I2, b, optics.polarization_state(0)))
    assert h_in.visibility == pytest.approx(SQ3 / (1 + 3 / 4), abs=1e-12)
    assert h_in.visibility < 1
    assert h_in.n_min == pytest.approx((1 - SQ3 / 2) ** 2 / 4, abs=1e-12)


def test_raw_and_fit_modes_agree_noiselessly():
    a, b, phi = bench(12)
    cfg = ifm.SagnacConfig(a, b, phi)
    fit = ifm.scan_fringe(cfg)
    raw = ifm.scan_fringe(cfg, mode="raw")
    # a 256-point grid samples the true extremum to within 1 - cos(pi/256)
    assert raw.n_max == pytest.approx(fit.n_max, abs=1e-4)
    assert raw.n_min == pytest.approx(fit.n_min, abs=1e-4)


def test_grid_checks():
    a, b, phi = bench()
    with pytest.raises(ifm.GridError):
        ifm.scan_fringe(ifm.SagnacConfig(a, b, phi, np.linspace(0, np.pi, 64)))
    with pytest.raises(ifm.GridError):
        ifm.scan_fringe(ifm.SagnacConfig(a, b, phi, ifm.default_phase_grid(6)))
    with pytest.raises(ifm.GridError):
        ifm.SagnacConfig(a, b, phi, [0.0, 0.0, 1.0])
    with pytest.raises(qmath.DimensionError):
        ifm.SagnacConfig(np.eye(3), b, phi)


def test_t_from_fringes_examples():
    ii = ifm.scan_fringe(ifm.SagnacConfig(I2, I2, [1, 0]))
    assert ifm.t_from_fringes(ii, ii) == pytest.approx(1)
    a, b, phi = bench()
    norm = ifm.scan_fringe(ifm.SagnacConfig(I2, I2, phi))
    ab = ifm.scan_fringe(ifm.SagnacConfig(a, b, phi))
    aa = ifm.scan_fringe(ifm.SagnacConfig(a, a, phi))
    assert ifm.t_from_fringes(ab, norm) == pytest.approx((4 + SQ3) / 8, abs=1e-12)
    assert ifm.t_from_fringes(aa, norm) == pytest.approx(5 / 8, abs=1e-12)
    dark = ifm.FringeScan(ii.phases, 0 * ii.intensities, 0.0, 0.0, 0.0)
    with pytest.raises(ZeroDivisionError):
        ifm.t_from_fringes(ab, dark)


def test_full_extraction_examples():
    got = ifm.full_t_extraction(I2, I2, [0.6, 0.8])
    assert all(v == pytest.approx(1, abs=1e-12) for v in got.values())
    a, b, phi = bench()
    got = ifm.full_t_extraction(a, b, phi)
    want = {"T22": 0.625, "T33": 0.875, "T23": 0.716506, "T12": 0.353553, "T13": 0.612372}
    for key, value in want.items():
        assert got[key] == pytest.approx(value, abs=1e-6), key
    assert ifm.full_t_extraction(*bench(0, "complex"))["T22"] == pytest.approx(5 / 8, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(min_value=2, max_value=4))
def test_propagation_matches_closed_form(seed, dim):
    rng = rng_for(seed)
    a, b, psi = random_operator(dim, rng), random_operator(dim, rng), random_state(dim, rng)
    cfg = ifm.SagnacConfig(a, b, psi, ifm.default_phase_grid(64))
    pointwise = np.array([ifm.detector_intensity(cfg, th) for th in cfg.phase_grid])
    oracle = ifm.closed_form_intensity(a, b, psi, cfg.phase_grid)
    assert np.max(np.abs(pointwise - oracle)) <= 1e-12 * max(1, oracle.max())
    assert np.max(np.abs(ifm.scan_intensities(cfg) - pointwise)) <= 1e-12 * max(1, oracle.max())


@settings(max_examples=40, deadline=None)
@given(seeds)
def test_fringe_scan_invariants(seed):
    rng = rng_for(seed)
    a, b, psi = random_contraction(rng), random_contraction(rng), random_state(2, rng)
    scan = ifm.scan_fringe(ifm.SagnacConfig(a, b, psi))
    t = qmath.gram_matrix(a, b, psi).t
    assert np.all(scan.intensities >= -1e-15) and np.all(scan.intensities <= 1 + 1e-12)
    assert scan.n_max >= scan.n_min >= -1e-12
    assert scan.n_max + scan.n_min == pytest.approx((t[1, 1].real + t[2, 2].real) / 2, abs=1e-10)
    gamma = 2 * abs(t[1, 2]) / (t[1, 1].real + t[2, 2].real)
    assert scan.visibility == pytest.approx(gamma, abs=1e-10)
    assert scan.psi == pytest.approx(np.angle(t[1, 2]), abs=1e-9) or abs(t[1, 2]) < 1e-9


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(min_value=0, max_value=2 * np.pi))
def test_energy_balance_with_arm_losses(seed, theta):
    rng = rng_for(seed)
    a, b, psi = random_contraction(rng), random_contraction(rng), random_state(2, rng)
    out = ifm.propagate(ifm.SagnacConfig(a, b, psi), theta)
    ports = qmath.squared_norm(out["g"]) + qmath.squared_norm(out["h"])
    # each arm receives half the input, and the arm operator removes part of it
    lost = (1 - qmath.squared_norm(a @ psi)) / 2 + (1 - qmath.squared_norm(b @ psi)) / 2
    assert ports + lost == pytest.approx(1, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(seeds, st.floats(min_value=-np.pi, max_value=np.pi))
def test_extraction_invariant_under_global_phase(seed, phase):
    rng = rng_for(seed)
    a, b, psi = random_operator(2, rng), random_operator(2, rng), random_state(2, rng)
    base = ifm.full_t_extraction(a, b, psi)
    rotated = ifm.full_t_extraction(a, b, np.exp(1j * phase) * psi)
    for key in base:
        assert rotated[key] == pytest.approx(base[key], abs=1e-12)


def test_full_extraction_matches_gram_in_higher_dims():
    rng = rng_for(8)
    for dim in (3, 4):
        a, b, psi = random_operator(dim, rng), random_operator(dim, rng), random_state(dim, rng)
        got = ifm.full_t_extraction(a, b, psi)
        want = qmath.gram_matrix(a, b, psi).magnitudes()
        assert max(abs(got[k] - want[k]) for k in got) <= 1e-9


def test_csv_layout():
    scan = ifm.scan_fringe(ifm.SagnacConfig(I2, I2, [1, 0], ifm.default_phase_grid(16)))
    lines = scan.to_csv().splitlines()
    assert lines[0] == "phase_rad,intensity"
    assert len(lines) == 17
    assert lines[1] == "0,1"
