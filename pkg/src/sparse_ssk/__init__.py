"""Numerical laboratory for the spherical SK model with sparse couplings."""

from .ensemble import EnsembleConfig, MatrixSample, ScalarStatistics, moment_audit, sample_matrix, scalar_statistics
from .free_energy import (
    DeterministicCentering,
    SaddleResult,
    centering,
    find_saddle,
    free_energy_contour,
    g_derivative,
    g_eval,
    limiting_free_energy,
    predicted_fluctuation_law,
)
from .kernels import BACKEND
from .law import (
    ClassicalLocations,
    DeterministicLaw,
    beta_c,
    build_law,
    chebyshev_integral,
    classical_locations,
    measure_difference_report,
    solve_stieltjes,
)
from .spectra import SpectrumSample, eigenvalues, empirical_cdf

__version__ = "0.1.0"
