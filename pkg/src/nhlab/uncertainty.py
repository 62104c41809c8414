"""Uncertainty relations for pairs of non-Hermitian operators.

Covers the product relation
    Var(A) Var(B) >= |<A^dag B> - <A^dag><B>|^2,
its single-qubit rewriting in terms of the Gram matrix T (a "<= 1" form), and
the equality that holds for real operators acting on real qubit states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmath
from .qmath import TMatrix

SATISFIED_ATOL = 1e-10
DEGENERATE_ATOL = 1e-14
REAL_INPUT_ATOL = 1e-12


class RelationUndefinedError(ValueError):
    """The relation's denominator or phase is not defined for this input."""


class PreconditionError(ValueError):
    """Inputs do not satisfy the hypotheses of the requested relation."""


@dataclass(frozen=True)
class RelationReport:
    lhs: float
    rhs: float
    slack: float
    satisfied: bool
    phase_Phi: float
    equality_expected: bool

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "satisfied": self.satisfied,
            "phase_Phi": self.phase_Phi,
            "equality_expected": self.equality_expected,
        }


def _wrap_phase(phi: float) -> float:
    # np.angle lives in [-pi, pi]; fold -pi onto pi
    return float(np.pi) if phi <= -np.pi else float(phi)


def triple_product(t: TMatrix) -> complex:
    """T_23 T_12 T_31."""
    return complex(t[1, 2] * t[0, 1] * t[2, 0])


def _report(lhs: float, rhs: float, slack: float, t: TMatrix, equality: bool) -> RelationReport:
    return RelationReport(
        lhs=float(lhs),
        rhs=float(rhs),
        slack=float(slack),
        satisfied=bool(slack >= -SATISFIED_ATOL),
        phase_Phi=_wrap_phase(float(np.angle(triple_product(t)))),
        equality_expected=equality,
    )


def check_product_relation(a, b, state) -> RelationReport:
    """Evaluate both sides of Var(A) Var(B) >= |Cov(A, B)|^2 on a pure state.

    For a qubit the inequality is always saturated, so ``equality_expected``
    is set exactly when ``dim == 2``.
    """
    t = qmath.gram_matrix(a, b, state)
    psi = t.source_state
    a, b = t.source_ops
    mean_a = np.vdot(psi, a @ psi)
    mean_b = np.vdot(psi, b @ psi)
    cov = t[1, 2] - np.conj(mean_a) * mean_b
    lhs = abs(cov) ** 2
    rhs = qmath.variance(a, psi) * qmath.variance(b, psi)
    return _report(lhs, rhs, rhs - lhs, t, equality=psi.size == 2)


def _abs_terms(t: TMatrix):
    m = np.abs(t.t)
    return m[0, 1], m[0, 2], m[1, 1], m[2, 2], m[1, 2], abs(triple_product(t))


def check_qubit_relation(t: TMatrix) -> RelationReport:
    """Normalized form: |T12|^2/|T22| + |T31|^2/|T33| + (|T23|^2 - 2|T23 T12 T31|)/|T22 T33| <= 1."""
    t12, t13, t22, t33, t23, trip = _abs_terms(t)
    denom = t22 * t33
    if denom <= DEGENERATE_ATOL:
        raise RelationUndefinedError(f"relation undefined: |T22 T33| = {denom:.3e}")
    lhs = t12**2 / t22 + t13**2 / t33 + t23**2 / denom - 2 * trip / denom
    # saturated only for qubits whose triple product has zero phase
    equality = t.source_state.size == 2 and _phase_is_zero(t)
    return _report(lhs, 1.0, 1.0 - lhs, t, equality=equality)


def _is_real_instance(t: TMatrix) -> bool:
    a, b = t.source_ops
    return all(
        np.max(np.abs(np.imag(x))) <= REAL_INPUT_ATOL for x in (a, b, t.source_state)
    )


def _phase_is_zero(t: TMatrix) -> bool:
    p = triple_product(t)
    return abs(p) <= DEGENERATE_ATOL or (p.real > 0 and abs(p.imag) <= SATISFIED_ATOL)


def check_real_equality(t: TMatrix) -> RelationReport:
    """Unnormalized real-case form, expected to hold with equality.

    lhs = |T12|^2|T33| + |T13|^2|T22| + |T23|^2 - 2|T23 T12 T31|,  rhs = |T22 T33|.

    Equality needs the triple product to be real and nonnegative.  Real
    qubit inputs make it real but not necessarily positive; when it is
    negative (phase pi) the absolute-value form undershoots the signed
    identity by 4|T23 T12 T31| and ``equality_expected`` is False.
    """
    if t.source_state.size != 2:
        raise PreconditionError("real-case equality is stated for qubit states only")
    if not _is_real_instance(t):
        raise PreconditionError(
            "real-case equality needs real operators and a real state "
            f"(imaginary parts above {REAL_INPUT_ATOL})"
        )
    t12, t13, t22, t33, t23, trip = _abs_terms(t)
    lhs = t12**2 * t33 + t13**2 * t22 + t23**2 - 2 * trip
    rhs = t22 * t33
    return _report(lhs, rhs, rhs - lhs, t, equality=_phase_is_zero(t))


def signed_equality_gap(t: TMatrix) -> float:
    """rhs minus the signed form |T12|^2|T33| + |T13|^2|T22| + |T23|^2 - 2 Re(T23 T12 T31).

    Zero for every pure qubit instance (the product relation is saturated).
    """
    t12, t13, t22, t33, t23, _ = _abs_terms(t)
    signed = t12**2 * t33 + t13**2 * t22 + t23**2 - 2 * triple_product(t).real
    return float(t22 * t33 - signed)


def equality_phase(t: TMatrix) -> float:
    """Phase Phi of T_23 T_12 T_31 in (-pi, pi]."""
    p = triple_product(t)
    if abs(p) <= DEGENERATE_ATOL:
        raise RelationUndefinedError("phase undefined: T23 T12 T31 vanishes")
    return _wrap_phase(float(np.angle(p)))


def phase_chain(t: TMatrix) -> tuple[float, float, float]:
    """The chain  lhs0 <= 2|P| cos(Phi) <= 2|P|  with P = T23 T12 T31.

    lhs0 = |T12|^2|T33| + |T13|^2|T22| + |T23|^2 - |T22 T33|.
    """
    t12, t13, t22, t33, t23, trip = _abs_terms(t)
    lhs0 = t12**2 * t33 + t13**2 * t22 + t23**2 - t22 * t33
    p = triple_product(t)
    return float(lhs0), 2 * p.real, 2 * trip


MAGNITUDE_KEYS = ("T12", "T13", "T22", "T33", "T23")


def _unpack(mags: dict[str, float]):
    return tuple(float(mags[k]) for k in MAGNITUDE_KEYS)


def real_form_from_magnitudes(mags: dict[str, float]) -> tuple[float, float]:
    """(lhs, rhs) of the real-case form evaluated on measured magnitudes."""
    t12, t13, t22, t33, t23 = _unpack(mags)
    lhs = t12**2 * t33 + t13**2 * t22 + t23**2 - 2 * t23 * t12 * t13
    return lhs, t22 * t33


def real_form_partials(mags: dict[str, float]) -> tuple[dict[str, float], dict[str, float]]:
    """Gradients of (lhs, rhs) of the real-case form with respect to the magnitudes."""
    t12, t13, t22, t33, t23 = _unpack(mags)
    d_lhs = {
        "T12": 2 * t12 * t33 - 2 * t23 * t13,
        "T13": 2 * t13 * t22 - 2 * t23 * t12,
        "T22": t13**2,
        "T33": t12**2,
        "T23": 2 * t23 - 2 * t12 * t13,
    }
    d_rhs = {"T12": 0.0, "T13": 0.0, "T22": t33, "T33": t22, "T23": 0.0}
    return d_lhs, d_rhs


def qubit_form_from_magnitudes(mags: dict[str, float]) -> float:
    t12, t13, t22, t33, t23 = _unpack(mags)
    denom = t22 * t33
    if denom <= DEGENERATE_ATOL:
        raise RelationUndefinedError(f"relation undefined: |T22 T33| = {denom:.3e}")
    return t12**2 / t22 + t13**2 / t33 + (t23**2 - 2 * t23 * t12 * t13) / denom


def qubit_form_partials(mags: dict[str, float]) -> dict[str, float]:
    t12, t13, t22, t33, t23 = _unpack(mags)
    denom = t22 * t33
    cross = t23**2 - 2 * t23 * t12 * t13
    return {
        "T12": 2 * t12 / t22 - 2 * t23 * t13 / denom,
        "T13": 2 * t13 / t33 - 2 * t23 * t12 / denom,
        "T22": -(t12**2) / t22**2 - cross / (t22 * denom),
        "T33": -(t13**2) / t33**2 - cross / (t33 * denom),
        "T23": (2 * t23 - 2 * t12 * t13) / denom,
    }
