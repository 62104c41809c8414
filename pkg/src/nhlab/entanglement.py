"""Kraus channels, channel fidelity and a variance-based separability test.

For a complete Kraus set {E_k} and pure |psi>,

    sum_k Var(E_k) = 1 - F(psi),   F(psi) = sum_k |<psi|E_k|psi>|^2,

so sum_k Var(E_k) >= 1 - F_max.  Every separable rho_AB then obeys

    sum_k Var(E_k^A (x) I + I (x) E_k^B)_rho >= 2 - F_max(A) - F_max(B),

and a violation certifies entanglement.  The left side depends on the Kraus
representation chosen; the right side does not.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize

from . import qmath
from .sampling import random_state, rng_for

COMPLETENESS_ATOL = 1e-10
DENSITY_HERM_ATOL = 1e-12
DENSITY_ATOL = 1e-10
VIOLATION_ATOL = 1e-9
FMAX_MAX_DIM = 4
FMAX_TOL = 1e-8
BLOCH_GRID = (64, 128)
REFINE_ITERATIONS = 50
# coarse search for d > 2: seeded Haar samples
HAAR_SAMPLES = 4096
REFINE_STARTS = 8
FMAX_SEED = 20240611


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class KrausChannel:
    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(qmath.as_operator(k) for k in self.kraus)
        if not ops:
            raise ChannelError("a channel needs at least one Kraus operator")
        d = ops[0].shape[0]
        if any(k.shape != (d, d) for k in ops):
            raise ChannelError("Kraus operators must share one dimension")
        object.__setattr__(self, "kraus", ops)
        defect = self.completeness_defect()
        if defect > COMPLETENESS_ATOL:
            raise ChannelError(f"Kraus operators not complete: |sum E^dag E - I| = {defect:.3e}")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def completeness_defect(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(total - np.eye(self.kraus[0].shape[0]))))

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def padded(self, n: int) -> tuple[np.ndarray, ...]:
        zeros = np.zeros((self.dim, self.dim), dtype=complex)
        return self.kraus + (zeros,) * (n - len(self.kraus))


def identity_channel(dim: int = 2) -> KrausChannel:
    return KrausChannel((np.eye(dim, dtype=complex),))


def amplitude_damping(gamma: float) -> KrausChannel:
    return KrausChannel((
        np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex),
    ))


def xy_channel() -> KrausChannel:
    """{X/sqrt2, Y/sqrt2}."""
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]], dtype=complex)
    return KrausChannel((x / np.sqrt(2), y / np.sqrt(2)))


def mix_kraus(channel: KrausChannel, unitary) -> KrausChannel:
    """Equivalent representation F_j = sum_k u_jk E_k of the same channel."""
    u = np.asarray(unitary, dtype=complex)
    ks = channel.kraus
    return KrausChannel(tuple(sum(u[j, k] * ks[k] for k in range(len(ks))) for j in range(u.shape[0])))


@dataclass(frozen=True)
class DensityMatrix:
    entries: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        rho = np.asarray(self.entries, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        n = int(np.prod(dims))
        if rho.shape != (n, n):
            raise qmath.DimensionError(f"density matrix shape {rho.shape} does not match dims {dims}")
        if np.max(np.abs(rho - rho.conj().T)) > DENSITY_HERM_ATOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho).real - 1) > DENSITY_ATOL:
            raise ValueError(f"density matrix trace {np.trace(rho).real!r} != 1")
        if np.linalg.eigvalsh(rho)[0] < -DENSITY_ATOL:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "entries", rho)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_pure(cls, state, dims: Sequence[int]) -> "DensityMatrix":
        psi = qmath.as_state(state, pure=True)
        return cls(np.outer(psi, psi.conj()), tuple(dims))


def singlet() -> np.ndarray:
    return np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)


def mixed_variance(op, rho) -> float:
    """Tr(rho O^dag O) - |Tr(rho O)|^2."""
    op = qmath.as_operator(op)
    rho = np.asarray(rho, dtype=complex)
    mean = np.trace(rho @ op)
    return float(np.trace(rho @ op.conj().T @ op).real - abs(mean) ** 2)


class ChannelFidelity(NamedTuple):
    fidelity: float
    variance_sum: float


def channel_fidelity(ch: KrausChannel, state) -> ChannelFidelity:
    """F = <psi| E(|psi><psi|) |psi> together with sum_k Var(E_k)."""
    psi = qmath.as_state(state, pure=True)
    if psi.size != ch.dim:
        raise qmath.DimensionError(f"state dim {psi.size} != channel dim {ch.dim}")
    means = np.array([np.vdot(psi, k @ psi) for k in ch.kraus])
    fid = float(np.sum(np.abs(means) ** 2))
    var_sum = float(sum(qmath.variance(k, psi) for k in ch.kraus))
    gap = abs(var_sum + fid - 1)
    if gap > 1e-12 + ch.completeness_defect():
        raise ArithmeticError(f"variance sum + fidelity deviates from 1 by {gap:.3e}")
    return ChannelFidelity(fid, var_sum)


def _fidelity_batch(kraus: Sequence[np.ndarray], states: np.ndarray) -> np.ndarray:
    """F for each row of ``states`` (normalized)."""
    total = np.zeros(states.shape[0])
    for k in kraus:
        total += np.abs(np.einsum("ni,ij,nj->n", states.conj(), k, states)) ** 2
    return total


def _bloch_states(n_theta: int, n_phi: int) -> np.ndarray:
    th = np.linspace(0, np.pi, n_theta)
    ph = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    return np.stack([np.cos(tt / 2), np.exp(1j * pp) * np.sin(tt / 2)], axis=-1).reshape(-1, 2)


def _refine(kraus, start: np.ndarray, maxiter: int) -> tuple[float, np.ndarray]:
    d = start.size

    def neg_f(x):
        v = x[:d] + 1j * x[d:]
        v = v / np.linalg.norm(v)
        return -_fidelity_batch(kraus, v[None, :])[0]

    x0 = np.concatenate([start.real, start.imag])
    res = minimize(neg_f, x0, method="BFGS", options={"maxiter": maxiter, "gtol": FMAX_TOL})
    v = res.x[:d] + 1j * res.x[d:]
    return -float(res.fun), v / np.linalg.norm(v)


def f_max(ch: KrausChannel) -> float:
    """max over pure |phi> of <phi|E(|phi><phi|)|phi>, by coarse search then BFGS refinement."""
    d = ch.dim
    if d > FMAX_MAX_DIM:
        raise ValueError(f"f_max supports dimension <= {FMAX_MAX_DIM}, got {d}")
    if d == 1:
        return float(np.clip(sum(abs(k[0, 0]) ** 2 for k in ch.kraus), 0, 1))
    if d == 2:
        candidates = _bloch_states(*BLOCH_GRID)
        n_starts = 1
    else:
        rng = rng_for(FMAX_SEED, d)
        candidates = np.stack([random_state(d, rng) for _ in range(HAAR_SAMPLES)])
        n_starts = REFINE_STARTS
    values = _fidelity_batch(ch.kraus, candidates)
    order = np.argsort(-values, kind="stable")[:n_starts]
    best = float(values[order[0]])
    for idx in order:
        val, _ = _refine(ch.kraus, candidates[idx], REFINE_ITERATIONS if d == 2 else 200)
        best = max(best, val)
    return float(np.clip(best, 0.0, 1.0))


def collective_operators(ch_a: KrausChannel, ch_b: KrausChannel) -> list[np.ndarray]:
    """M_k = E_k^A (x) I + I (x) E_k^B, shorter Kraus list padded with zeros."""
    n = max(len(ch_a.kraus), len(ch_b.kraus))
    eye_a = np.eye(ch_a.dim)
    eye_b = np.eye(ch_b.dim)
    return [np.kron(ea, eye_b) + np.kron(eye_a, eb) for ea, eb in zip(ch_a.padded(n), ch_b.padded(n))]


def _as_density(rho, ch_a: KrausChannel, ch_b: KrausChannel) -> DensityMatrix:
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(np.asarray(rho, dtype=complex), (ch_a.dim, ch_b.dim))
    if rho.dims != (ch_a.dim, ch_b.dim):
        raise qmath.DimensionError(f"state dims {rho.dims} do not match channels ({ch_a.dim}, {ch_b.dim})")
    return rho


def collective_variance_sum(ch_a: KrausChannel, ch_b: KrausChannel, rho) -> float:
    rho = _as_density(rho, ch_a, ch_b)
    return float(sum(mixed_variance(m, rho.entries) for m in collective_operators(ch_a, ch_b)))


@dataclass(frozen=True)
class SeparabilityReport:
    lhs: float
    rhs: float
    violated: bool
    margin: float
    f_max_a: float
    f_max_b: float
    n_kraus: tuple[int, int] = field(default=(0, 0))

    @property
    def verdict(self) -> str:
        return "entangled" if self.violated else "not violated"

    def as_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "violated": self.violated,
            "verdict": self.verdict,
            "f_max_a": self.f_max_a,
            "f_max_b": self.f_max_b,
            "n_kraus": list(self.n_kraus),
        }


def separability_test(ch_a: KrausChannel, ch_b: KrausChannel, rho, *, f_max_a=None, f_max_b=None) -> SeparabilityReport:
    """Evaluate the separable-state bound; precomputed F_max values may be passed in."""
    lhs = collective_variance_sum(ch_a, ch_b, rho)
    fa = f_max(ch_a) if f_max_a is None else float(f_max_a)
    fb = f_max(ch_b) if f_max_b is None else float(f_max_b)
    rhs = 2 - fa - fb
    return SeparabilityReport(
        lhs=lhs,
        rhs=rhs,
        violated=bool(lhs < rhs - VIOLATION_ATOL),
        margin=rhs - lhs,
        f_max_a=fa,
        f_max_b=fb,
        n_kraus=(len(ch_a.kraus), len(ch_b.kraus)),
    )
