import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_ssk.ensemble import EnsembleConfig, sample_matrix
from sparse_ssk.errors import EigenAccuracyError
from sparse_ssk.law import semicircle_cdf
from sparse_ssk.spectra import (
    check_trace_identities,
    eigenvalues,
    empirical_cdf,
    spectrum_from_values,
    tridiagonal_eigenvalues,
)


def test_two_by_two():
    s = eigenvalues(np.array([[0.0, 1.5], [1.5, 0.0]]))
    np.testing.assert_allclose(s.eigenvalues, [1.5, -1.5], atol=1e-15)


def test_scaled_identity():
    s = eigenvalues(3.25 * np.eye(7))
    np.testing.assert_allclose(s.eigenvalues, 3.25, atol=1e-14)


def test_random_trace_identities():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((50, 50))
    a = (x + x.T) / 2
    s = eigenvalues(a)
    assert abs(np.sum(s.eigenvalues) - np.trace(a)) <= 1e-10
    assert abs(np.sum(s.eigenvalues**2) - np.sum(a * a)) <= 1e-10 * np.sum(a * a)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(1, 40), seed=st.integers(0, 10**6))
def test_ql_matches_lapack(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, n))
    a = x + x.T
    s1 = eigenvalues(a, method="ql")
    s2 = eigenvalues(a, method="lapack")
    norm = np.max(np.abs(s2.eigenvalues))
    assert np.all(np.diff(s1.eigenvalues) <= 0)
    np.testing.assert_allclose(s1.eigenvalues, s2.eigenvalues, atol=10 * n * 2.2e-16 * max(norm, 1.0))


def test_sparse_sample_spectrum_and_backends():
    cfg = EnsembleConfig(n=200, phi=0.3, seed=2)
    m = sample_matrix(cfg, 3)
    s = eigenvalues(m)
    assert s.n == 200 and s.phi == 0.3 and s.trial_index == 3
    assert s.eigenvalues.flags.writeable is False
    from scipy.linalg.lapack import dsytrd
    _, d, e, _, _ = dsytrd(m.entries, lower=1)
    a = tridiagonal_eigenvalues(d, e, backend="python")
    b = tridiagonal_eigenvalues(d, e)
    np.testing.assert_allclose(a, b, atol=1e-12)
    assert np.all(s.gaps >= 0) and s.gaps[0] == 0


def test_trace_gate_rejects_wrong_values():
    a = np.diag([1.0, 2.0, 3.0])
    with pytest.raises(EigenAccuracyError):
        check_trace_identities(a, np.array([3.0, 2.0, 1.1]))


def test_non_finite_and_non_square_rejected():
    with pytest.raises(ValueError):
        eigenvalues(np.array([[np.nan, 0], [0, 1.0]]))
    with pytest.raises(ValueError):
        eigenvalues(np.zeros((2, 3)))


def test_empirical_cdf():
    s = spectrum_from_values([3.0, 1.0, 2.0, 4.0])
    assert empirical_cdf(s, 0.5) == 0.0
    assert empirical_cdf(s, 4.0) == 1.0
    assert empirical_cdf(s, 2.5) == 0.5
    np.testing.assert_allclose(empirical_cdf(s, [0.0, 1.0, 10.0]), [0.0, 0.25, 1.0])


def test_determinism():
    cfg = EnsembleConfig(n=120, phi=0.3, seed=8)
    a = eigenvalues(sample_matrix(cfg, 1))
    b = eigenvalues(sample_matrix(cfg, 1))
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


@pytest.mark.slow
def test_semicircle_sanity_n2000():
    cfg = EnsembleConfig(n=2000, phi=0.35, seed=42)
    from sparse_ssk.experiments.runner import compute_spectrum, default_cache_dir
    s = compute_spectrum(cfg, 0, default_cache_dir())
    for x in (-1.0, 0.0, 1.0):
        assert abs(empirical_cdf(s, x) - semicircle_cdf(x)) <= 0.02
