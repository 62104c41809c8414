"""Numerical laboratory for uncertainty relations of non-Hermitian operators.

Submodules
----------
qmath          states, operators, variances, polar decomposition, Gram matrix
uncertainty    product relation, normalized qubit bound, real-case equality
optics         Jones matrices and waveplate/beam-displacer operator trains
interferometer Sagnac fringes and normalized fringe amplitudes
noise          Poisson counts, error propagation, Monte-Carlo error bars
entanglement   Kraus channels, channel fidelity, separability test
experiments    sweeps and reports used by the command line
"""

from .qmath import (
    PolarFactors,
    TMatrix,
    expectation,
    gram_matrix,
    polar_decompose,
    variance,
)

__all__ = [
    "PolarFactors",
    "TMatrix",
    "expectation",
    "gram_matrix",
    "polar_decompose",
    "variance",
]

__version__ = "0.1.0"
