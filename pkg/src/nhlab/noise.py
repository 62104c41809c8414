"""Poisson shot noise on fringe counts and first-order error propagation.

Propagation follows the linearized variance transfer rule

    var(y) = sum_i (df/dx_i)^2 var(x_i) + 2 sum_{i<j} (df/dx_i)(df/dx_j) cov(x_i, x_j)

with counts treated as Poisson (variance = count).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import interferometer as ifm
from .sampling import rng_for

EXTRACTIONS = ("extrema", "fit")


@dataclass(frozen=True)
class CountingModel:
    """Expected counts per unit normalized intensity, fringe contrast, RNG seed."""

    rate_scale: float
    visibility_factor: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.rate_scale > 0:
            raise ValueError(f"rate_scale must be > 0, got {self.rate_scale}")
        if not 0 < self.visibility_factor <= 1:
            raise ValueError(f"visibility_factor must lie in (0, 1], got {self.visibility_factor}")


@dataclass(frozen=True)
class ErrorBudget:
    """A value with its standard deviation; ``variance`` keeps sigma^2 unrounded."""

    value: float
    sigma: float
    method: str
    variance: float | None = None

    def __post_init__(self):
        if self.sigma < 0 or not np.isfinite(self.sigma):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.method not in ("propagation", "monte_carlo"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.variance is None:
            object.__setattr__(self, "variance", self.sigma**2)


class Measured(NamedTuple):
    """A directly measured quantity: mean and variance."""

    mean: float
    variance: float


def expected_rates(scan: ifm.FringeScan, model: CountingModel) -> np.ndarray:
    """Mean counts per phase point with the fringe contrast scaled about its DC level."""
    dc = 0.5 * (scan.n_max + scan.n_min)
    shaped = dc + model.visibility_factor * (np.asarray(scan.intensities) - dc)
    return model.rate_scale * np.clip(shaped, 0.0, None)


def sample_counts(scan: ifm.FringeScan, model: CountingModel, rng: np.random.Generator | None = None) -> np.ndarray:
    """Independent Poisson counts at every phase point of ``scan``."""
    if rng is None:
        rng = np.random.default_rng(model.seed)
    return rng.poisson(expected_rates(scan, model))


def propagate_variance(partials, sigmas2, covariances=None) -> float:
    partials = np.asarray(partials, dtype=float)
    sigmas2 = np.asarray(sigmas2, dtype=float)
    if partials.ndim != 1 or partials.shape != sigmas2.shape:
        raise ValueError(f"partials {partials.shape} and variances {sigmas2.shape} must be equal-length vectors")
    if np.any(sigmas2 < 0):
        raise ValueError("variances must be nonnegative")
    total = float(np.sum(partials**2 * sigmas2))
    if covariances is None:
        return total
    cov = np.asarray(covariances, dtype=float)
    n = partials.size
    if cov.shape != (n, n):
        raise ValueError(f"covariance matrix must be {n}x{n}, got {cov.shape}")
    if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
        raise ValueError("covariance matrix must be symmetric")
    if not np.allclose(np.diag(cov), sigmas2, rtol=1e-12, atol=0):
        raise ValueError("covariance diagonal must equal the listed variances")
    upper = np.triu(np.outer(partials, partials) * cov, k=1)
    return total + 2 * float(upper.sum())


def ratio_error(x1: Measured, x2: Measured, cov: float = 0.0) -> ErrorBudget:
    """y = x1 / x2; independent inputs by default."""
    m1, v1 = x1
    m2, v2 = x2
    if m2 == 0:
        raise ZeroDivisionError("ratio with zero-mean denominator")
    partials = [1 / m2, -m1 / m2**2]
    covariances = [[v1, cov], [cov, v2]]
    var = max(propagate_variance(partials, [v1, v2], covariances), 0.0)
    return ErrorBudget(m1 / m2, float(np.sqrt(var)), "propagation", var)


# --- extraction of amplitude / total from one set of counts -----------------

def _extrema_measure(phases: np.ndarray, counts: np.ndarray) -> tuple[Measured, Measured]:
    """Counts at the grid points nearest the fitted maximum and minimum."""
    fit = ifm.fit_fringe(phases, counts)
    i_max = int(np.argmin(np.abs(np.angle(np.exp(1j * (phases - fit.psi))))))
    i_min = int(np.argmin(np.abs(np.angle(np.exp(1j * (phases - fit.psi - np.pi))))))
    n_max, n_min = float(counts[i_max]), float(counts[i_min])
    # difference and sum of two independent Poisson counts share variance n_max + n_min
    var = n_max + n_min
    return Measured(n_max - n_min, var), Measured(n_max + n_min, var)


def _fit_measure(phases: np.ndarray, counts: np.ndarray, pinv: np.ndarray) -> tuple[Measured, Measured]:
    c0, c, s = pinv @ counts
    amp = float(np.hypot(c, s))
    var_counts = counts.astype(float)
    if amp > 0:
        d_amp = 2 * (c * pinv[1] + s * pinv[2]) / amp
    else:
        d_amp = np.zeros_like(pinv[0])
    d_total = 2 * pinv[0]
    return (
        Measured(2 * amp, propagate_variance(d_amp, var_counts)),
        Measured(2 * float(c0), propagate_variance(d_total, var_counts)),
    )


def measure(phases, counts, extraction: str = "extrema", pinv=None) -> tuple[Measured, Measured]:
    """(N_max - N_min, N_max + N_min) with Poisson plug-in variances."""
    phases = np.asarray(phases, dtype=float)
    counts = np.asarray(counts)
    if extraction == "extrema":
        return _extrema_measure(phases, counts)
    if extraction == "fit":
        return _fit_measure(phases, counts, ifm.cosine_fit_matrix(phases) if pinv is None else pinv)
    raise ValueError(f"unknown extraction {extraction!r}; expected one of {EXTRACTIONS}")


def noiseless_scans(a, b, state, phase_grid=None) -> dict[str, ifm.FringeScan]:
    configs = ifm.arm_configs(a, b, state, phase_grid)
    return {key: ifm.scan_fringe(cfg) for key, cfg in configs.items()}


def noisy_magnitudes(
    scans: dict[str, ifm.FringeScan],
    model: CountingModel,
    rng: np.random.Generator,
    extraction: str = "extrema",
    keys=None,
) -> dict[str, ErrorBudget]:
    """One simulated acquisition: counts for every scan, then |T| with propagated sigma."""
    keys = list(ifm.ARM_PLAN) if keys is None else list(keys)
    phases = scans["II"].phases
    pinv = ifm.cosine_fit_matrix(phases) if extraction == "fit" else None
    # normalization scan first so its draws do not depend on ``keys``
    _, total_ii = measure(phases, sample_counts(scans["II"], model, rng), extraction, pinv)
    out = {}
    for key in ifm.ARM_PLAN:
        counts = sample_counts(scans[key], model, rng)
        if key not in keys:
            continue
        amp, _ = measure(phases, counts, extraction, pinv)
        out[key] = ratio_error(amp, total_ii)
    return out


@dataclass(frozen=True)
class PipelineResult:
    """Per-magnitude error estimates for one configuration."""

    noiseless: dict[str, float]
    propagation: dict[str, ErrorBudget]
    monte_carlo: dict[str, ErrorBudget]
    mean_propagated_sigma: dict[str, float]
    trials: int

    def as_dict(self) -> dict:
        return {
            key: {
                "noiseless": self.noiseless[key],
                "propagation_value": self.propagation[key].value,
                "propagation_sigma": self.propagation[key].sigma,
                "mean_propagation_sigma": self.mean_propagated_sigma[key],
                "monte_carlo_mean": self.monte_carlo[key].value,
                "monte_carlo_sigma": self.monte_carlo[key].sigma,
            }
            for key in self.monte_carlo
        } | {"trials": self.trials}


def errorbar_pipeline(
    a,
    b,
    state,
    model: CountingModel,
    trials: int = 1000,
    *,
    extraction: str = "extrema",
    keys=None,
    phase_grid=None,
) -> PipelineResult:
    """Compare propagated error bars with the Monte-Carlo spread of extracted |T_ij|.

    Trial ``k`` draws from a generator seeded by ``(model.seed, k)`` so the
    result does not depend on evaluation order.  The propagation estimate is
    the one an experimenter would quote from trial 0 alone.
    """
    if trials < 100:
        raise ValueError("errorbar_pipeline needs at least 100 trials")
    scans = noiseless_scans(a, b, state, phase_grid)
    norm = scans["II"]
    noiseless = {k: ifm.t_from_fringes(scans[k], norm) for k in ifm.ARM_PLAN}
    keys = list(ifm.ARM_PLAN) if keys is None else list(keys)
    values = {k: np.empty(trials) for k in keys}
    sigmas = {k: np.empty(trials) for k in keys}
    first = None
    for trial in range(trials):
        res = noisy_magnitudes(scans, model, rng_for(model.seed, trial), extraction, keys)
        if first is None:
            first = res
        for k in keys:
            values[k][trial] = res[k].value
            sigmas[k][trial] = res[k].sigma
    mc = {
        k: ErrorBudget(
            float(values[k].mean()), float(values[k].std(ddof=1)), "monte_carlo", float(values[k].var(ddof=1))
        )
        for k in keys
    }
    return PipelineResult(
        noiseless={k: noiseless[k] for k in keys},
        propagation=first,
        monte_carlo=mc,
        mean_propagated_sigma={k: float(sigmas[k].mean()) for k in keys},
        trials=trials,
    )
