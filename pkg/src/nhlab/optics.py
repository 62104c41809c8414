"""Jones-calculus elements and the waveplate/beam-displacer operator trains.

A path-polarization state is a dict mapping a path label to a length-2
complex polarization vector (H = |0>, V = |1>).  Angles are degrees at the
public interface.

The lossy operator for one arm is built from

    HWP(t1) -> BD -> HWP(45) -> HWP(t3) on b -> BD -> HWP(45) on b

entering on path ``a``.  A beam displacer moves horizontal polarization one
lane forward (a -> b -> c) and leaves vertical polarization in place; light
ending on ``c`` is discarded.  The net action on the surviving path ``b`` is
``diag(-cos 2 t3, 1) @ HWP(t1)``; the complex variant prepends ``QWP(tA)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from . import qmath

HWP, QWP, BD, PBS, PS, BS = "HWP", "QWP", "BD", "PBS", "PhaseShifter", "BS"
KINDS = (HWP, QWP, BD, PBS, PS, BS)
DEFAULT_LANES = ("a", "b", "c")

PathPolState = dict


class UnknownPathError(KeyError):
    pass


class UnsupportedAngleError(ValueError):
    pass


def hwp_matrix(alpha: float) -> np.ndarray:
    """Half-wave plate with fast axis at ``alpha`` degrees from horizontal."""
    t = np.deg2rad(2 * alpha)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def qwp_matrix(beta: float) -> np.ndarray:
    """Quarter-wave plate with fast axis at ``beta`` degrees from horizontal."""
    b = np.deg2rad(beta)
    c, s = np.cos(b), np.sin(b)
    off = (1 - 1j) * c * s
    return np.array([[c * c + 1j * s * s, off], [off, s * s + 1j * c * c]], dtype=complex)


def polarization_state(theta0: float) -> np.ndarray:
    """cos(2 theta0)|H> + sin(2 theta0)|V>, the state prepared by HWP H0."""
    t = np.deg2rad(2 * theta0)
    return np.array([np.cos(t), np.sin(t)], dtype=complex)


@dataclass(frozen=True)
class JonesElement:
    """One optical element.

    ``path`` selects the path a waveplate or phase shifter acts on (None means
    every path).  ``ports`` lists the lanes of a BD, the (in, transmit,
    reflect) paths of a PBS, or the (in1, in2, out1, out2) paths of a BS.
    """

    kind: str
    angle: float = 0.0
    path: str | None = None
    ports: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}; expected one of {KINDS}")
        if self.kind == PBS and len(self.ports) != 3:
            raise ValueError("PBS needs ports (in, transmit, reflect)")
        if self.kind == BS and len(self.ports) != 4:
            raise ValueError("BS needs ports (in1, in2, out1, out2)")


def hwp(angle: float, path: str | None = None) -> JonesElement:
    return JonesElement(HWP, angle, path)


def qwp(angle: float, path: str | None = None) -> JonesElement:
    return JonesElement(QWP, angle, path)


def bd(lanes: tuple[str, ...] = DEFAULT_LANES) -> JonesElement:
    return JonesElement(BD, ports=tuple(lanes))


def _zero(state: PathPolState | None = None) -> np.ndarray:
    # empty paths take the internal dimension of whatever is already occupied
    dim = next((v.size for v in state.values()), 2) if state else 2
    return np.zeros(dim, dtype=complex)


def _get(state: PathPolState, path: str, known: set[str]) -> np.ndarray:
    if path not in known:
        raise UnknownPathError(f"unknown path label {path!r}")
    return state.get(path, _zero(state))


def apply_on_path(state: PathPolState, path: str, matrix, known: Iterable[str]) -> PathPolState:
    known = set(known)
    out = dict(state)
    out[path] = np.asarray(matrix, dtype=complex) @ _get(state, path, known)
    return out


def beam_splitter(state: PathPolState, ports, known: Iterable[str]) -> PathPolState:
    """50:50 BS, reflection picks up a factor i: out1 = (i in1 + in2)/sqrt2, out2 = (in1 + i in2)/sqrt2."""
    known = set(known)
    p_in, q_in, r_out, s_out = ports
    p = _get(state, p_in, known)
    q = _get(state, q_in, known)
    for lab in (r_out, s_out):
        _get(state, lab, known)
    out = {k: v for k, v in state.items() if k not in (p_in, q_in)}
    r = (1j * p + q) / np.sqrt(2)
    s = (p + 1j * q) / np.sqrt(2)
    out[r_out] = out.get(r_out, 0) + r
    out[s_out] = out.get(s_out, 0) + s
    return out


def apply_element(state: PathPolState, el: JonesElement, known: Iterable[str]) -> PathPolState:
    known = set(known)
    if el.kind in (HWP, QWP, PS):
        if el.kind == HWP:
            m = hwp_matrix(el.angle)
        elif el.kind == QWP:
            m = qwp_matrix(el.angle)
        else:
            m = np.exp(1j * np.deg2rad(el.angle)) * np.eye(2)
        targets = [el.path] if el.path is not None else list(state)
        out = dict(state)
        for p in targets:
            out[p] = m @ _get(state, p, known)
        return out
    if el.kind == BD:
        lanes = el.ports or DEFAULT_LANES
        for lab in lanes:
            _get(state, lab, known)
        out = {k: v for k, v in state.items() if k not in lanes}
        new = {lab: _zero() for lab in lanes}
        for i, lab in enumerate(lanes):
            vec = state.get(lab)
            if vec is None:
                continue
            new[lab] = new[lab] + np.array([0, vec[1]])
            if abs(vec[0]) > 0:
                if i + 1 >= len(lanes):
                    raise UnknownPathError(f"BD displaces light beyond the last lane {lab!r}")
                nxt = lanes[i + 1]
                new[nxt] = new[nxt] + np.array([vec[0], 0])
        out.update(new)
        return out
    if el.kind == PBS:
        p_in, t_out, r_out = el.ports
        vec = _get(state, p_in, known)
        for lab in (t_out, r_out):
            _get(state, lab, known)
        out = {k: v for k, v in state.items() if k != p_in}
        out[t_out] = out.get(t_out, _zero()) + np.array([vec[0], 0])
        out[r_out] = out.get(r_out, _zero()) + np.array([0, vec[1]])
        return out
    return beam_splitter(state, el.ports, known)


def path_norm2(state: PathPolState) -> float:
    return float(sum(np.vdot(v, v).real for v in state.values()))


@dataclass(frozen=True)
class OpticalTrain:
    elements: tuple[JonesElement, ...]
    entry_path: str = "a"
    surviving_path: str = "b"
    lost_paths: frozenset[str] = frozenset({"c"})
    paths: tuple[str, ...] = DEFAULT_LANES
    name: str = ""

    def __post_init__(self):
        known = set(self.paths)
        for lab in (self.entry_path, self.surviving_path, *self.lost_paths):
            if lab not in known:
                raise UnknownPathError(f"path {lab!r} not declared in {self.paths}")


def propagate_train(train: OpticalTrain, state) -> PathPolState:
    psi = qmath.as_state(state)
    if psi.size != 2:
        raise qmath.DimensionError("optical trains act on 2-component polarization states")
    current: PathPolState = {train.entry_path: psi}
    for el in train.elements:
        current = apply_element(current, el, train.paths)
    return current


def compile_train(train: OpticalTrain, state) -> np.ndarray:
    """Polarization amplitude left on the surviving path (sub-normalized)."""
    out = propagate_train(train, state)
    return out.get(train.surviving_path, _zero())


class LossAccount(NamedTuple):
    input_norm2: float
    surviving_norm2: float
    lost_norm2: float


def loss_account(train: OpticalTrain, state) -> LossAccount:
    psi = qmath.as_state(state)
    out = propagate_train(train, psi)
    surv = out.get(train.surviving_path, _zero())
    lost = 0.0
    for lab, vec in out.items():
        if lab == train.surviving_path:
            continue
        w = float(np.vdot(vec, vec).real)
        if lab not in train.lost_paths and w > qmath.IDENTITY_ATOL:
            raise UnknownPathError(f"amplitude left on undeclared exit path {lab!r}")
        lost += w
    return LossAccount(qmath.squared_norm(psi), float(np.vdot(surv, surv).real), lost)


def train_matrix(train: OpticalTrain) -> np.ndarray:
    """2x2 operator realized by the train, read off from the basis states."""
    cols = [compile_train(train, e) for e in np.eye(2, dtype=complex)]
    return np.stack(cols, axis=1)


def arm_train(theta_u: float, theta_s: float, qwp_angle: float | None = None, name: str = "") -> OpticalTrain:
    """Element sequence for one lossy arm (H1..H4 for A, or H5..H8 for B)."""
    elements = [] if qwp_angle is None else [qwp(qwp_angle)]
    elements += [
        hwp(theta_u),
        bd(),
        hwp(45.0),
        hwp(theta_s, path="b"),
        bd(),
        hwp(45.0, path="b"),
    ]
    return OpticalTrain(tuple(elements), name=name)


def real_train_a(theta1: float, theta3: float) -> OpticalTrain:
    return arm_train(theta1, theta3, name="A_real")


def real_train_b(theta5: float, theta7: float) -> OpticalTrain:
    return arm_train(theta5, theta7, name="B_real")


def complex_train_a(theta1: float, theta3: float, theta_a: float = 0.0) -> OpticalTrain:
    return arm_train(theta1, theta3, qwp_angle=theta_a, name="A_complex")


def complex_train_b(theta5: float, theta7: float, theta_b: float = 0.0) -> OpticalTrain:
    return arm_train(theta5, theta7, qwp_angle=theta_b, name="B_complex")


def attenuator(theta_s: float) -> np.ndarray:
    """diag(-cos 2 theta_s, 1): the loss stage between the two displacers."""
    return np.diag([-np.cos(np.deg2rad(2 * theta_s)), 1.0]).astype(complex)


def operator_real(theta1: float, theta3: float) -> np.ndarray:
    return attenuator(theta3) @ hwp_matrix(theta1)


def operator_real_B(theta5: float, theta7: float) -> np.ndarray:
    return operator_real(theta5, theta7)


def _check_qwp_angle(angle: float) -> None:
    if angle != 0.0:
        raise UnsupportedAngleError(f"QWP angle {angle} deg not in v1 (only 0 deg is supported)")


def operator_complex(theta1: float, theta3: float, theta_a: float = 0.0) -> np.ndarray:
    _check_qwp_angle(theta_a)
    return attenuator(theta3) @ hwp_matrix(theta1) @ qwp_matrix(theta_a)


def operator_complex_B(theta5: float, theta7: float, theta_b: float = 0.0) -> np.ndarray:
    return operator_complex(theta5, theta7, theta_b)


class StageFactors(NamedTuple):
    """Attenuator and unitary stage as built on the bench (op = s @ u)."""

    s: np.ndarray
    u: np.ndarray
    s_is_psd: bool


def stage_factors(theta_u: float, theta_s: float, qwp_angle: float | None = None) -> StageFactors:
    """Bench factorization; ``s_is_psd`` is False when -cos 2 theta_s < 0.

    Use :func:`nhlab.qmath.polar_decompose` for the canonical polar factors.
    """
    u = hwp_matrix(theta_u)
    if qwp_angle is not None:
        _check_qwp_angle(qwp_angle)
        u = u @ qwp_matrix(qwp_angle)
    s = attenuator(theta_s)
    return StageFactors(s, u, bool(s[0, 0].real >= -qmath.CLASSIFY_ATOL))


@dataclass(frozen=True)
class OperatorPair:
    """Fixed operators A and B of one experimental configuration."""

    a: np.ndarray
    b: np.ndarray
    mode: str
    angles: dict = field(default_factory=dict)


def real_pair(theta1=22.5, theta3=60.0, theta5=22.5, theta7=75.0) -> OperatorPair:
    return OperatorPair(
        operator_real(theta1, theta3),
        operator_real_B(theta5, theta7),
        "real",
        {"theta1": theta1, "theta3": theta3, "theta5": theta5, "theta7": theta7},
    )


def complex_pair(theta1=22.5, theta3=60.0, theta5=0.0, theta7=75.0, theta_a=0.0, theta_b=0.0) -> OperatorPair:
    return OperatorPair(
        operator_complex(theta1, theta3, theta_a),
        operator_complex_B(theta5, theta7, theta_b),
        "complex",
        {
            "theta1": theta1, "theta3": theta3, "theta5": theta5, "theta7": theta7,
            "theta_A": theta_a, "theta_B": theta_b,
        },
    )
