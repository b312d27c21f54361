import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparse_ssk.ensemble import (
    EnsembleConfig,
    moment_audit,
    s_param,
    sample_matrix,
    scalar_statistics,
    sigma_closed_form,
    z_from_entries,
    z_variance_exact,
)
from sparse_ssk.errors import InsufficientTrialsError, InvalidConfigError, MemoryCapError
from sparse_ssk.spectra import eigenvalues


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=100, phi=0.5),
        dict(n=100, phi=0.0),
        dict(n=100, phi=-0.1),
        dict(n=1, phi=0.3),
        dict(n=100, phi=0.3, entry_law="cauchy"),
        dict(n=100, phi=0.3, seed=-1),
        dict(n=10.5, phi=0.3),
    ],
)
def test_invalid_configs_rejected(kwargs):
    with pytest.raises(InvalidConfigError):
        EnsembleConfig(**kwargs)


def test_phi_half_message_cites_open_interval():
    with pytest.raises(InvalidConfigError, match="open interval"):
        EnsembleConfig(n=100, phi=0.5)


def test_two_by_two_entries_take_the_diluted_values():
    cfg = EnsembleConfig(n=2, phi=0.25, seed=7)
    mag = (2 * 2 ** (-0.5)) ** -0.5
    assert cfg.magnitude == pytest.approx(mag)
    for t in range(20):
        m = sample_matrix(cfg, t).entries
        assert m.shape == (2, 2)
        assert np.all(np.isin(np.abs(m), [0.0, cfg.magnitude]))
        assert m[0, 1] == m[1, 0]


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 60), phi=st.floats(0.05, 0.45), seed=st.integers(0, 2**32), t=st.integers(0, 1000),
       law=st.sampled_from(["diluted_rademacher", "diluted_gaussian"]))
def test_symmetry_and_reproducibility(n, phi, seed, t, law):
    cfg = EnsembleConfig(n=n, phi=phi, seed=seed, entry_law=law)
    a = sample_matrix(cfg, t)
    b = sample_matrix(cfg, t)
    assert np.array_equal(a.entries, a.entries.T)
    assert np.array_equal(a.entries, b.entries)
    assert a.realized_nonzeros == int(np.count_nonzero(np.triu(a.entries)))
    if law == "diluted_rademacher":
        nz = a.entries[a.entries != 0]
        assert np.all(np.abs(nz) == cfg.magnitude)


def test_trials_are_distinct_and_hash_is_stable():
    cfg = EnsembleConfig(n=50, phi=0.3, seed=1)
    assert not np.array_equal(sample_matrix(cfg, 0).entries, sample_matrix(cfg, 1).entries)
    assert cfg.config_hash() == EnsembleConfig(n=50, phi=0.3, seed=1).config_hash()
    assert cfg.config_hash() != EnsembleConfig(n=50, phi=0.3, seed=2).config_hash()


def test_no_diagonal_option():
    cfg = EnsembleConfig(n=200, phi=0.45, seed=3, include_diagonal=False)
    assert np.all(np.diag(sample_matrix(cfg).entries) == 0)


def test_memory_cap():
    with pytest.raises(MemoryCapError):
        sample_matrix(EnsembleConfig(n=1000, phi=0.3), memory_cap=1000)


def test_nonzero_fraction_binomial_band():
    cfg = EnsembleConfig(n=1000, phi=0.3, seed=11)
    m = sample_matrix(cfg)
    count = cfg.n * (cfg.n + 1) // 2
    p = cfg.p
    assert p == pytest.approx(1000 ** -0.4)
    se = math.sqrt(p * (1 - p) / count)
    assert abs(m.realized_nonzeros / count - p) <= 3 * se


def test_zero_matrix_z_is_minus_one():
    assert z_from_entries(np.zeros((5, 5))) == -1.0


def test_sigma_closed_form_rademacher():
    for n, phi in [(500, 0.2), (2000, 0.3), (1000, 0.45)]:
        cfg = EnsembleConfig(n=n, phi=phi)
        # diagonal included: N^2 entries, each with E M^4 = p (Np)^-2
        assert sigma_closed_form(cfg) ** 2 == pytest.approx(n ** (-1 - 2 * phi), rel=1e-12)
        st_ = scalar_statistics(cfg, np.zeros((n, n)))
        assert st_.sigma_limit == pytest.approx(1.0, rel=1e-12)
        assert s_param(cfg) == pytest.approx(n ** (-2 * phi), rel=1e-12)
    g = EnsembleConfig(n=500, phi=0.2, entry_law="diluted_gaussian")
    assert scalar_statistics(g, np.zeros((500, 500))).sigma_limit == pytest.approx(math.sqrt(3.0))


def test_sigma_against_empirical_fourth_moment():
    cfg = EnsembleConfig(n=400, phi=0.25, seed=2, entry_law="diluted_gaussian")
    acc = []
    for t in range(30):
        m = sample_matrix(cfg, t).entries
        acc.append(np.sum(m**4) / cfg.n**2)
    assert math.sqrt(np.mean(acc)) == pytest.approx(sigma_closed_form(cfg), rel=0.05)


def test_z_matches_eigenvalue_form():
    cfg = EnsembleConfig(n=300, phi=0.3, seed=4)
    m = sample_matrix(cfg, 0)
    s = eigenvalues(m)
    z_eig = np.sum(s.eigenvalues**2) / cfg.n - 1.0
    assert abs(scalar_statistics(cfg, m).z_statistic - z_eig) <= 1e-10 * (1 + abs(z_eig))


def test_z_variance_monte_carlo():
    # small-N analogue of the 500-trial check: Var(Z) / (2 Sigma^2) in [0.8, 1.2]
    cfg = EnsembleConfig(n=400, phi=0.3, seed=9)
    z = [scalar_statistics(cfg, sample_matrix(cfg, t)).z_statistic for t in range(500)]
    ratio = np.var(z, ddof=1) / (2 * sigma_closed_form(cfg) ** 2)
    assert 0.8 <= ratio <= 1.2
    exact = z_variance_exact(cfg) / (2 * sigma_closed_form(cfg) ** 2)
    assert exact == pytest.approx((1 - cfg.p) * (1 - 1 / (2 * cfg.n)), rel=1e-12)


def test_moment_audit():
    cfg = EnsembleConfig(n=200, phi=0.35, seed=5)
    audit = moment_audit(cfg, 100, 6)
    assert [r.k for r in audit.rows] == [2, 4, 6]
    assert audit.rows[0].empirical == pytest.approx(1 / cfg.n, rel=0.02)
    assert audit.rows[1].ratio == pytest.approx(1.0, rel=0.02)
    assert not audit.any_flagged
    with pytest.raises(InsufficientTrialsError):
        moment_audit(cfg, 0)


@pytest.mark.slow
@pytest.mark.parametrize("n", [500, 1000, 2000])
@pytest.mark.parametrize("phi", [0.2, 0.35, 0.45])
def test_moment_scaling_grid(n, phi):
    audit = moment_audit(EnsembleConfig(n=n, phi=phi, seed=1), 100, 6)
    assert not audit.any_flagged
