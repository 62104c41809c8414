"""Phase-scanned Sagnac loop with operator A on the reflected arm and B on the transmitted arm.

The input |phi> enters a 50:50 beam splitter, the reflected arm ``e`` picks
up the phase-shifter factor exp(i theta) and operator A, the transmitted arm
``f`` gets operator B, and the two recombine on the same splitter into ports
``g`` and ``h``.  The detector sits on ``h``.  Its intensity is

    N_h(theta) = (<A^dag A> + <B^dag B> + 2 |<A^dag B>| cos(psi - theta)) / 4,

so the normalized fringe amplitude N_max - N_min equals |<A^dag B>|.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import optics, qmath

SAGNAC_PATHS = ("in", "vac", "e", "f", "g", "h")
DEFAULT_GRID_POINTS = 256
MIN_POINTS_PER_PERIOD = 8


class GridError(ValueError):
    """Phase grid cannot resolve a fringe."""


def default_phase_grid(n: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, 2 * np.pi, n, endpoint=False)


@dataclass(frozen=True)
class SagnacConfig:
    arm_reflect: np.ndarray
    arm_transmit: np.ndarray
    input: np.ndarray
    phase_grid: np.ndarray = field(default_factory=default_phase_grid)

    def __post_init__(self):
        a = qmath.as_operator(self.arm_reflect)
        b = qmath.as_operator(self.arm_transmit)
        psi = qmath.as_state(self.input)
        if not a.shape == b.shape == (psi.size, psi.size):
            raise qmath.DimensionError("arm operators and input state must share one dimension")
        grid = np.asarray(self.phase_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise GridError("phase grid must be strictly increasing")
        object.__setattr__(self, "arm_reflect", a)
        object.__setattr__(self, "arm_transmit", b)
        object.__setattr__(self, "input", psi)
        object.__setattr__(self, "phase_grid", grid)


def propagate(config: SagnacConfig, theta: float) -> optics.PathPolState:
    """Full path state after the second pass through the beam splitter."""
    paths = SAGNAC_PATHS
    state = {"in": config.input}
    state = optics.beam_splitter(state, ("in", "vac", "e", "f"), paths)
    state = optics.apply_on_path(state, "e", np.exp(1j * theta) * np.eye(config.input.size), paths)
    state = optics.apply_on_path(state, "e", config.arm_reflect, paths)
    state = optics.apply_on_path(state, "f", config.arm_transmit, paths)
    return optics.beam_splitter(state, ("e", "f", "g", "h"), paths)


def detector_intensity(config: SagnacConfig, theta: float) -> float:
    h = propagate(config, theta)["h"]
    return float(np.vdot(h, h).real)


def arm_amplitudes(config: SagnacConfig) -> tuple[np.ndarray, np.ndarray]:
    """Port-h amplitudes carried by arm e (at theta = 0) and by arm f.

    The setup is linear, so the port-h field at any phase is
    ``exp(1j * theta) * u + v``; each term is one explicit propagation with
    the other arm blocked.
    """
    zero = np.zeros_like(config.arm_reflect)
    u = propagate(replace(config, arm_transmit=zero), 0.0)["h"]
    v = propagate(replace(config, arm_reflect=zero), 0.0)["h"]
    return u, v


def scan_intensities(config: SagnacConfig) -> np.ndarray:
    u, v = arm_amplitudes(config)
    fields = np.exp(1j * config.phase_grid)[:, None] * u + v
    return np.sum(np.abs(fields) ** 2, axis=1)


def closed_form_intensity(a, b, state, theta) -> np.ndarray:
    """(<A^dag A> + <B^dag B> + 2|<A^dag B>| cos(psi - theta)) / 4 with psi = arg <A^dag B>."""
    t = qmath.gram_matrix(a, b, state).t
    ab = t[1, 2]
    return (t[1, 1].real + t[2, 2].real + 2 * abs(ab) * np.cos(np.angle(ab) - np.asarray(theta))) / 4


@dataclass(frozen=True)
class FringeScan:
    phases: np.ndarray
    intensities: np.ndarray
    n_max: float
    n_min: float
    psi: float
    counts: np.ndarray | None = None

    @property
    def visibility(self) -> float:
        total = self.n_max + self.n_min
        return (self.n_max - self.n_min) / total if total > 0 else 0.0

    @property
    def amplitude(self) -> float:
        return self.n_max - self.n_min

    @property
    def total(self) -> float:
        return self.n_max + self.n_min

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["phase_rad", "intensity"] + (["counts"] if self.counts is not None else [])
        writer.writerow(header)
        for i, (ph, val) in enumerate(zip(self.phases, self.intensities)):
            row = [f"{ph:.12g}", f"{val:.12g}"]
            if self.counts is not None:
                row.append(str(int(self.counts[i])))
            writer.writerow(row)
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "n_max": self.n_max,
            "n_min": self.n_min,
            "psi": self.psi,
            "visibility": self.visibility,
        }


def check_grid(phases: np.ndarray) -> None:
    phases = np.asarray(phases, dtype=float)
    if phases.ndim != 1 or phases.size < 2 or np.any(np.diff(phases) <= 0):
        raise GridError("phase grid must be strictly increasing")
    step = np.mean(np.diff(phases))
    span = phases[-1] - phases[0] + step
    if span < 2 * np.pi - 1e-9:
        raise GridError(f"phase grid spans {span:.4f} rad, need at least 2 pi")
    if 2 * np.pi / np.max(np.diff(phases)) < MIN_POINTS_PER_PERIOD:
        raise GridError(f"grid too coarse: fewer than {MIN_POINTS_PER_PERIOD} points per period")


def cosine_fit_matrix(phases: np.ndarray) -> np.ndarray:
    """Pseudo-inverse mapping samples to (offset, cos coeff, sin coeff)."""
    phases = np.asarray(phases, dtype=float)
    design = np.column_stack([np.ones_like(phases), np.cos(phases), np.sin(phases)])
    return np.linalg.pinv(design)


def fit_fringe(phases, values, *, mode: str = "fit", counts=None) -> FringeScan:
    """Extract extrema from sampled fringe data.

    ``mode="fit"`` least-squares fits ``c0 + c cos(theta) + s sin(theta)`` and
    reports ``c0 +- hypot(c, s)``; ``mode="raw"`` takes the sample max/min.
    """
    phases = np.asarray(phases, dtype=float)
    values = np.asarray(values, dtype=float)
    check_grid(phases)
    c0, c, s = cosine_fit_matrix(phases) @ values
    amp = float(np.hypot(c, s))
    psi = float(np.arctan2(s, c))
    if mode == "fit":
        n_max, n_min = float(c0 + amp), float(c0 - amp)
    elif mode == "raw":
        n_max, n_min = float(values.max()), float(values.min())
    else:
        raise ValueError(f"unknown extraction mode {mode!r}")
    return FringeScan(phases, values, n_max, n_min, psi, counts)


def scan_fringe(config: SagnacConfig, *, mode: str = "fit") -> FringeScan:
    check_grid(config.phase_grid)
    return fit_fringe(config.phase_grid, scan_intensities(config), mode=mode)


def t_from_fringes(scan_ab: FringeScan, scan_ii: FringeScan) -> float:
    """Normalized fringe amplitude (N_max - N_min) / (N_max(I,I) + N_min(I,I))."""
    denom = scan_ii.n_max + scan_ii.n_min
    if denom <= 0:
        raise ZeroDivisionError("normalization scan has no photons")
    return (scan_ab.n_max - scan_ab.n_min) / denom


# Arm settings (reflected, transmitted) that expose each magnitude.
ARM_PLAN = {
    "T22": ("A", "A"),
    "T33": ("B", "B"),
    "T23": ("A", "B"),
    "T12": ("A", "I"),
    "T13": ("I", "B"),
}
NORMALIZATION_ARMS = ("I", "I")


def arm_configs(a, b, state, phase_grid=None) -> dict[str, SagnacConfig]:
    """Sagnac configurations for the five magnitudes plus the (I, I) normalization."""
    ops = {"A": qmath.as_operator(a), "B": qmath.as_operator(b)}
    dim = ops["A"].shape[0]
    ops["I"] = np.eye(dim, dtype=complex)
    grid = default_phase_grid() if phase_grid is None else phase_grid
    plan = dict(ARM_PLAN, II=NORMALIZATION_ARMS)
    return {
        key: SagnacConfig(ops[r], ops[t], state, grid) for key, (r, t) in plan.items()
    }


def full_t_extraction(a, b, state, *, phase_grid=None, mode: str = "fit") -> dict[str, float]:
    """The five magnitudes |T22|, |T33|, |T23|, |T12|, |T13| read off simulated fringes."""
    qmath.as_state(state, pure=True)
    configs = arm_configs(a, b, state, phase_grid)
    scans = {key: scan_fringe(cfg, mode=mode) for key, cfg in configs.items()}
    norm = scans.pop("II")
    return {key: t_from_fringes(scan, norm) for key, scan in scans.items()}
