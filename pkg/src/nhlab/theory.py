"""Published closed-form |T_ij|(theta0) curves for the two bench configurations.

Kept only for side-by-side comparison with direct matrix evaluation.  Known
disagreement: the real-case |T22| curve carries a 3/8 sine coefficient where
direct composition gives 3/4 inside the same 1/2 |...| form; both agree at
theta0 = 0.  The complex-case expressions are taken as magnitudes.
"""

from __future__ import annotations

import numpy as np

SQ2 = np.sqrt(2)
SQ3 = np.sqrt(3)


def _x(theta0: float) -> float:
    # theta0 in degrees; the curves are written in theta0 * pi / 45 = 4 theta0 (rad)
    return np.deg2rad(4 * theta0)


def real_curves(theta0: float) -> dict[str, float]:
    x = _x(theta0)
    c, s = np.cos(x), np.sin(x)
    return {
        "T12": abs(-0.5 + 1.5 * (c + s)) / (2 * SQ2),
        "T13": abs((-1 + SQ3 / 2) + (1 + SQ3 / 2) * (c + s)) / (2 * SQ2),
        "T22": 0.5 * abs(5 / 4 - 3 / 8 * s),
        "T33": 0.5 * abs(7 / 4 + (-1 + SQ3 / 2) * (1 + SQ3 / 2) * s),
        "T23": 0.5 * abs(1 + SQ3 / 4 + (-1 + SQ3 / 4) * s),
    }


def complex_curves(theta0: float) -> dict[str, float]:
    x = _x(theta0)
    half = np.deg2rad(2 * theta0)  # theta0 * pi / 90
    c, s = np.cos(x), np.sin(x)
    return {
        "T12": abs(-1 + 3 * c + 1j * s) / (4 * SQ2),
        "T13": SQ3 / 2 * np.cos(half) ** 2 + np.sin(half) ** 2,
        "T22": 5 / 8,
        "T33": abs(0.75 * c**2 + s**2),
        "T23": abs(4 + SQ3 + SQ3 * (c - 1j * s) - 4 * (c + 1j * s)) / (8 * SQ2),
    }


def curves(mode: str, theta0: float) -> dict[str, float]:
    if mode == "real":
        return real_curves(theta0)
    if mode == "complex":
        return complex_curves(theta0)
    raise ValueError(f"unknown mode {mode!r}")
