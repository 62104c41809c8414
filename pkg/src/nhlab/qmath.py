"""Dense complex linear algebra for states and non-Hermitian operators.

States are 1-D complex numpy arrays, operators are square 2-D complex arrays.
Everything here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CLASSIFY_ATOL = 1e-10
IDENTITY_ATOL = 1e-12
NORM_ATOL = 1e-10


class DimensionError(ValueError):
    """Operator/state dimensions do not agree."""


class NormalizationError(ValueError):
    """A state that must be normalized is not."""


def as_state(amplitudes, *, pure: bool = False) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    if psi.ndim != 1 or psi.size < 1:
        raise DimensionError(f"state must be a non-empty vector, got shape {psi.shape}")
    if not np.all(np.isfinite(psi)):
        raise ValueError("state has non-finite amplitudes")
    n2 = float(np.vdot(psi, psi).real)
    if n2 > 1 + IDENTITY_ATOL:
        raise NormalizationError(f"squared norm {n2!r} exceeds 1")
    if pure and abs(n2 - 1) > NORM_ATOL:
        raise NormalizationError(f"pure state expected, squared norm is {n2!r}")
    return psi


def as_operator(entries) -> np.ndarray:
    op = np.asarray(entries, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] < 1:
        raise DimensionError(f"operator must be square, got shape {op.shape}")
    if not np.all(np.isfinite(op)):
        raise ValueError("operator has non-finite entries")
    return op


def _check_dims(op: np.ndarray, psi: np.ndarray) -> None:
    if op.shape[0] != psi.shape[0]:
        raise DimensionError(f"operator dim {op.shape[0]} != state dim {psi.shape[0]}")


def normalize(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    return psi / np.linalg.norm(psi)


def dagger(op) -> np.ndarray:
    return np.asarray(op).conj().T


def squared_norm(state) -> float:
    psi = np.asarray(state, dtype=complex)
    return float(np.vdot(psi, psi).real)


# classification, all at CLASSIFY_ATOL

def is_hermitian(op, atol: float = CLASSIFY_ATOL) -> bool:
    op = as_operator(op)
    return bool(np.max(np.abs(op - op.conj().T)) <= atol)


def is_unitary(op, atol: float = CLASSIFY_ATOL) -> bool:
    op = as_operator(op)
    return bool(np.max(np.abs(op.conj().T @ op - np.eye(op.shape[0]))) <= atol)


def is_psd(op, atol: float = CLASSIFY_ATOL) -> bool:
    op = as_operator(op)
    if not is_hermitian(op, atol):
        return False
    return bool(np.linalg.eigvalsh((op + op.conj().T) / 2)[0] >= -atol)


def is_real(x, atol: float = CLASSIFY_ATOL) -> bool:
    return bool(np.max(np.abs(np.imag(np.asarray(x, dtype=complex)))) <= atol)


def expectation(op, state) -> complex:
    """Return <state|op|state>."""
    op = as_operator(op)
    psi = as_state(state)
    _check_dims(op, psi)
    return complex(np.vdot(psi, op @ psi))


def variance(op, state, *, clamp: bool = False) -> float:
    """Non-Hermitian variance <O^dag O> - <O^dag><O> for a normalized pure state.

    The raw value may dip below zero by rounding error; pass ``clamp=True``
    to report ``max(0, value)`` instead.
    """
    op = as_operator(op)
    psi = as_state(state, pure=True)
    _check_dims(op, psi)
    o_psi = op @ psi
    mean = np.vdot(psi, o_psi)
    # <O^dag> = conj(<O>) for any operator
    value = float(np.vdot(o_psi, o_psi).real - abs(mean) ** 2)
    return max(value, 0.0) if clamp else value


def projected_variance(op, state) -> float:
    """Same quantity written as <psi| O^dag P O |psi>, P = 1 - |psi><psi|."""
    op = as_operator(op)
    psi = as_state(state, pure=True)
    _check_dims(op, psi)
    proj = np.eye(psi.size) - np.outer(psi, psi.conj())
    return float(np.vdot(psi, op.conj().T @ proj @ op @ psi).real)


@dataclass(frozen=True)
class PolarFactors:
    """Left polar form ``op = s @ u``."""

    s: np.ndarray
    u: np.ndarray

    def product(self) -> np.ndarray:
        return self.s @ self.u


def polar_decompose(op) -> PolarFactors:
    """Left polar decomposition op = S U with S = sqrt(op op^dag) PSD and U unitary.

    From the SVD op = W diag(sigma) V^dag we take S = W diag(sigma) W^dag and
    U = W V^dag; the latter is unitary even when op is singular.
    """
    op = as_operator(op)
    w, sigma, vh = np.linalg.svd(op)
    s = (w * sigma) @ w.conj().T
    s = (s + s.conj().T) / 2
    return PolarFactors(s=s, u=w @ vh)


@dataclass(frozen=True)
class TMatrix:
    """Gram matrix T_ij = <phi_i|phi_j> of (|phi>, A|phi>, B|phi>).

    Indices are zero-based in ``t``; ``t[1, 2]`` is T_23.
    """

    t: np.ndarray
    source_state: np.ndarray
    source_ops: tuple[np.ndarray, np.ndarray]

    def __getitem__(self, key):
        return self.t[key]

    def magnitudes(self) -> dict[str, float]:
        t = np.abs(self.t)
        return {
            "T12": float(t[0, 1]),
            "T13": float(t[0, 2]),
            "T22": float(t[1, 1]),
            "T33": float(t[2, 2]),
            "T23": float(t[1, 2]),
        }

    def min_eigenvalue(self) -> float:
        h = (self.t + self.t.conj().T) / 2
        return float(np.linalg.eigvalsh(h)[0])


def gram_matrix(a, b, state) -> TMatrix:
    a = as_operator(a)
    b = as_operator(b)
    psi = as_state(state, pure=True)
    _check_dims(a, psi)
    _check_dims(b, psi)
    vecs = np.stack([psi, a @ psi, b @ psi])
    t = vecs.conj() @ vecs.T
    return TMatrix(t=t, source_state=psi, source_ops=(a, b))
