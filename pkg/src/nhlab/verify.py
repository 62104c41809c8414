"""Seeded property checks behind ``nhlab verify``."""

from __future__ import annotations

import numpy as np

from . import entanglement as ent
from . import interferometer as ifm
from . import optics, qmath
from . import uncertainty as unc
from .sampling import (
    random_kraus,
    random_operator,
    random_product_state,
    random_state,
    rng_for,
)


def _result(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def qubit_product_equality(seed: int, n: int = 10_000) -> dict:
    rng = rng_for(seed, 1)
    worst = 0.0
    for _ in range(n):
        rep = unc.check_product_relation(random_operator(2, rng), random_operator(2, rng), random_state(2, rng))
        worst = max(worst, abs(rep.lhs - rep.rhs) / max(1.0, rep.rhs))
    return _result("qubit_product_equality", worst <= 1e-10, worst_scaled_gap=worst, instances=n)


def general_product_inequality(seed: int, n: int = 10_000) -> dict:
    rng = rng_for(seed, 2)
    worst = np.inf
    for i in range(n):
        d = 3 + i % 3
        rep = unc.check_product_relation(random_operator(d, rng), random_operator(d, rng), random_state(d, rng))
        worst = min(worst, rep.slack)
    return _result("general_product_inequality", worst >= -1e-10, min_slack=worst, instances=n)


def gram_psd(seed: int, n: int = 10_000) -> dict:
    rng = rng_for(seed, 3)
    worst = np.inf
    for i in range(n):
        d = 2 + i % 4
        t = qmath.gram_matrix(random_operator(d, rng), random_operator(d, rng), random_state(d, rng))
        worst = min(worst, t.min_eigenvalue())
    return _result("gram_psd", worst >= -1e-10, min_eigenvalue=worst, instances=n)


def real_equality_sweep() -> dict:
    pair = optics.real_pair()
    worst_eq, worst_signed, flagged = 0.0, 0.0, []
    for th in np.arange(-45, 46):
        t = qmath.gram_matrix(pair.a, pair.b, optics.polarization_state(th))
        rep = unc.check_real_equality(t)
        worst_signed = max(worst_signed, abs(unc.signed_equality_gap(t)))
        if rep.equality_expected:
            worst_eq = max(worst_eq, abs(rep.lhs - rep.rhs))
        else:
            flagged.append(int(th))
    return _result(
        "real_equality_sweep",
        worst_eq <= 1e-10 and worst_signed <= 1e-10,
        max_gap_phase_zero=worst_eq,
        max_signed_gap=worst_signed,
        phase_pi_theta0_deg=flagged,
    )


def complex_bound_sweep() -> dict:
    pair = optics.complex_pair()
    lhs = []
    for th in np.arange(-45, 46):
        t = qmath.gram_matrix(pair.a, pair.b, optics.polarization_state(th))
        lhs.append(unc.check_qubit_relation(t).lhs)
    return _result("complex_bound_sweep", max(lhs) <= 1 + 1e-10, max_lhs=max(lhs))


def optics_tables(seed: int, n: int = 100) -> dict:
    rng = rng_for(seed, 4)
    worst_op, worst_loss = 0.0, 0.0
    for _ in range(n):
        t1, t3, t5, t7, t0 = rng.uniform(-90, 90, 5)
        phi = optics.polarization_state(t0)
        trains = [
            (optics.real_train_a(t1, t3), optics.operator_real(t1, t3)),
            (optics.real_train_b(t5, t7), optics.operator_real_B(t5, t7)),
            (optics.complex_train_a(t1, t3), optics.operator_complex(t1, t3)),
            (optics.complex_train_b(t5, t7), optics.operator_complex_B(t5, t7)),
        ]
        for train, op in trains:
            worst_op = max(worst_op, np.max(np.abs(optics.compile_train(train, phi) - op @ phi)))
            acc = optics.loss_account(train, phi)
            worst_loss = max(worst_loss, abs(acc.input_norm2 - acc.surviving_norm2 - acc.lost_norm2))
    return _result("optics_tables", worst_op <= 1e-12 and worst_loss <= 1e-12,
                   max_operator_gap=worst_op, max_loss_gap=worst_loss)


def interferometer_oracle(seed: int, n: int = 50) -> dict:
    rng = rng_for(seed, 5)
    grid = ifm.default_phase_grid()
    worst_i, worst_t = 0.0, 0.0
    for _ in range(n):
        a, b, psi = random_operator(2, rng), random_operator(2, rng), random_state(2, rng)
        cfg = ifm.SagnacConfig(a, b, psi, grid)
        prop = np.array([ifm.detector_intensity(cfg, th) for th in grid])
        worst_i = max(worst_i, np.max(np.abs(prop - ifm.closed_form_intensity(a, b, psi, grid))))
        got = ifm.full_t_extraction(a, b, psi, phase_grid=grid)
        want = qmath.gram_matrix(a, b, psi).magnitudes()
        worst_t = max(worst_t, max(abs(got[k] - want[k]) for k in got))
    return _result("interferometer_oracle", worst_i <= 1e-12 and worst_t <= 1e-9,
                   max_intensity_gap=worst_i, max_extraction_gap=worst_t)


def entanglement_checks(seed: int, n_product: int = 1000, n_identity: int = 10_000) -> dict:
    rng = rng_for(seed, 6)
    xy = ent.xy_channel()
    fm = ent.f_max(xy)
    singlet = ent.DensityMatrix.from_pure(ent.singlet(), (2, 2))
    rep = ent.separability_test(xy, xy, singlet, f_max_a=fm, f_max_b=fm)
    min_slack = np.inf
    for _ in range(n_product):
        rho = ent.DensityMatrix.from_pure(random_product_state((2, 2), rng), (2, 2))
        r = ent.separability_test(xy, xy, rho, f_max_a=fm, f_max_b=fm)
        min_slack = min(min_slack, r.lhs - r.rhs)
    worst_id = 0.0
    for i in range(n_identity):
        d = 2 + i % 3
        ch = ent.KrausChannel(tuple(random_kraus(d, 1 + i % 4, rng)))
        cf = ent.channel_fidelity(ch, random_state(d, rng))
        worst_id = max(worst_id, abs(cf.variance_sum + cf.fidelity - 1))
    passed = (
        abs(fm - 0.5) <= 1e-6
        and abs(rep.lhs) <= 1e-9
        and abs(rep.margin - 1.0) <= 1e-9
        and min_slack >= -1e-9
        and worst_id <= 1e-12
    )
    return _result("entanglement_criterion", passed, f_max_xy=fm, singlet_lhs=rep.lhs,
                   singlet_margin=rep.margin, product_min_slack=min_slack, fidelity_identity_gap=worst_id)


def run_all(seed: int = 0) -> list[dict]:
    return [
        qubit_product_equality(seed),
        general_product_inequality(seed),
        gram_psd(seed),
        real_equality_sweep(),
        complex_bound_sweep(),
        optics_tables(seed),
        interferometer_oracle(seed),
        entanglement_checks(seed),
    ]
