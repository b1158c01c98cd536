"""Duration distributions: frozen examples, consistency properties, samplers."""

import math

import numpy as np
import pytest
from scipy.special import gammaln
from scipy.stats import chisquare

from lethe.distributions import DistributionError, make_distribution

from conftest import rng


# ---------------------------------------------------------------------------
# construction


def test_geometric_mean_9_gives_p_one_ninth():
    d = make_distribution("geometric", 9)
    assert d.p == pytest.approx(1 / 9, rel=1e-15)
    assert d.mean == 9


def _negbin_truncated_mean(d, j_max: int, chunk: int = 10_000_000) -> float:
    """sum_j j * pmf(j) over the pre-shift support, log-space chunks."""
    total = 0.0
    for lo in range(0, j_max, chunk):
        js = np.arange(lo, min(lo + chunk, j_max), dtype=np.float64)
        log_pmf = (
            gammaln(js + d.shape)
            - gammaln(d.shape)
            - gammaln(js + 1)
            + d.shape * math.log(d.p)
            + js * math.log1p(-d.p)
        )
        total += float((js * np.exp(log_pmf)).sum())
    return total


def test_negative_binomial_internal_parameterization():
    d = make_distribution("negative-binomial", 3600, shape=6e-4)
    assert d.pre_shift_mean == 3599.0
    assert d.p == pytest.approx(6e-4 / (6e-4 + 3599.0), rel=1e-15)
    # truncated-summation oracle: p * j_max = 20, leaving tail mass < 1e-9
    oracle = _negbin_truncated_mean(d, int(20 / d.p))
    assert oracle == pytest.approx(3599.0, rel=1e-6)
    assert d.mean == 3600.0


def test_degenerate_point_mass():
    d = make_distribution("degenerate", 3600)
    assert d.pmf(3600) == 1.0
    assert d.pmf(10) == 0.0
    assert d.mean == 3600


def test_zeta_mean_solved():
    d = make_distribution("zeta", 3600)
    import scipy.special as sp

    implied = float(sp.zeta(d.exponent - 1)) / float(sp.zeta(d.exponent))
    assert implied == pytest.approx(3600.0, rel=1e-6)
    assert 2.0 < d.exponent < 2.001


def test_construction_errors():
    with pytest.raises(DistributionError):
        make_distribution("geometric", 0.5)
    with pytest.raises(DistributionError):
        make_distribution("geometric", -3)
    with pytest.raises(DistributionError):
        make_distribution("negative-binomial", 3600)  # shape required
    with pytest.raises(DistributionError):
        make_distribution("negative-binomial", 3600, shape=-1)
    with pytest.raises(DistributionError):
        make_distribution("geometric", 9, shape=0.5)  # shape not accepted
    with pytest.raises(DistributionError):
        make_distribution("not-a-kind", 9)
    with pytest.raises(DistributionError):
        make_distribution("degenerate", 9.5)


def test_analytic_mean_exactness():
    cases = [
        ("geometric", 9.0, None),
        ("negative-binomial", 3600.0, 6e-4),
        ("poisson", 9.0, None),
        ("degenerate", 3600.0, None),
        ("discrete-uniform", 3600.0, None),
        ("zeta", 3600.0, None),
    ]
    for kind, mean, shape in cases:
        d = make_distribution(kind, mean, shape=shape)
        assert d.mean == pytest.approx(mean, rel=1e-6)


# ---------------------------------------------------------------------------
# pmf / ccdf examples


def test_geometric_pmf_ccdf():
    d = make_distribution("geometric", 9)
    assert d.pmf(1) == pytest.approx(1 / 9, rel=1e-12)
    assert d.ccdf(2) == pytest.approx((8 / 9) ** 2, rel=1e-12)


def test_negative_binomial_mass_at_one():
    d = make_distribution("negative-binomial", 3600, shape=6e-4)
    # shifted mass at 1 equals the unshifted mass at 0: p^n
    expected = math.exp(6e-4 * math.log(d.p))
    assert d.pmf(1) == pytest.approx(expected, rel=1e-12)
    assert d.pmf(1) == pytest.approx(0.99068, abs=5e-5)


def test_negative_binomial_ccdf_against_pmf_summation():
    d = make_distribution("negative-binomial", 3600, shape=6e-4)
    total = sum(d.pmf(k) for k in range(1, 61))
    oracle = 1.0 - total
    assert 0.004 <= d.ccdf(60) <= 0.010
    assert d.ccdf(60) == pytest.approx(oracle, rel=1e-6)


def test_negative_binomial_ccdf_deep_tail_against_summation():
    # tail values down to ~1e-10 must agree with brute-force summation;
    # ccdf(k) of the shifted variable is 1 - sum_{j=0}^{k-1} pmf_pre_shift(j)
    d = make_distribution("negative-binomial", 60, shape=0.05)
    for k in (10, 100, 1000, 5000, 20000):
        ccdf = d.ccdf(k)
        if ccdf < 1e-10:
            break
        js = np.arange(0, k)
        log_pmf = (
            gammaln(js + d.shape)
            - gammaln(d.shape)
            - gammaln(js + 1)
            + d.shape * math.log(d.p)
            + js * math.log1p(-d.p)
        )
        oracle = 1.0 - float(np.exp(log_pmf).sum())
        assert ccdf == pytest.approx(oracle, rel=1e-6), k


def test_discrete_uniform_strawman_support():
    d = make_distribution("discrete-uniform", 3600)
    assert d.upper == 7199
    assert d.ccdf(7200) == 0.0  # certain about deletion after two hours
    assert d.ccdf(0) == 1.0
    assert d.pmf(1) == pytest.approx(1 / 7199, rel=1e-12)


def test_pmf_ccdf_argument_contracts():
    d = make_distribution("geometric", 9)
    with pytest.raises(ValueError):
        d.pmf(0)
    with pytest.raises(ValueError):
        d.pmf(-1)
    with pytest.raises(ValueError):
        d.ccdf(-1)
    assert d.ccdf(0) == 1.0


# ---------------------------------------------------------------------------
# inverse hazard


def test_geometric_inverse_hazard_constant_to_a_million():
    d = make_distribution("geometric", 9)
    values = {d.inverse_hazard(k) for k in (1, 2, 10, 1000, 10**6)}
    assert values == {8.0}


def test_degenerate_inverse_hazard_zero_at_point():
    d = make_distribution("degenerate", 9)
    assert d.inverse_hazard(9) == 0.0
    with pytest.raises(ZeroDivisionError):
        d.inverse_hazard(5)


def test_poisson_inverse_hazard_strictly_decreasing():
    d = make_distribution("poisson", 9)
    values = [d.inverse_hazard(k) for k in range(1, 21)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_inverse_hazard_consistent_with_ratio():
    for kind, shape in [("geometric", None), ("negative-binomial", 6e-4), ("zeta", None)]:
        d = make_distribution(kind, 3600, shape=shape)
        for k in (1, 7, 100):
            assert d.inverse_hazard(k) == pytest.approx(
                d.ccdf(k) / d.pmf(k), rel=1e-9
            )


# ---------------------------------------------------------------------------
# telescoping property


@pytest.mark.parametrize("kind,shape", [
    ("geometric", None),
    ("negative-binomial", 6e-4),
    ("zeta", None),
    ("poisson", None),
    ("degenerate", None),
    ("discrete-uniform", None),
])
def test_ccdf_pmf_telescoping(kind, shape):
    d = make_distribution(kind, 3600, shape=shape)
    for k in (0, 1, 2, 10, 59, 3599, 3600, 7198, 10000):
        assert d.ccdf(k) - d.ccdf(k + 1) == pytest.approx(d.pmf(k + 1), abs=1e-9)


def test_pmf_partial_sums_monotone_toward_one():
    # light-tailed parameterizations converge within the scanned range;
    # the heavy-tailed shape only has to stay monotone and bounded
    cases = [
        ("geometric", 50, None, True),
        ("negative-binomial", 50, 0.5, True),
        ("poisson", 50, None, True),
        ("negative-binomial", 50, 6e-4, False),
    ]
    for kind, mean, shape, converges in cases:
        d = make_distribution(kind, mean, shape=shape)
        total = 0.0
        last = 0.0
        for k in range(1, 2000):
            total += d.pmf(k)
            assert total >= last
            assert total <= 1.0 + 1e-9
            last = total
        if converges:
            assert total == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# sampling


def _sample_kinds():
    return [
        ("geometric", 9.0, None),
        ("negative-binomial", 3600.0, 6e-4),
        ("poisson", 9.0, None),
        ("degenerate", 5.0, None),
        ("discrete-uniform", 9.0, None),
        ("zeta", 1.2, None),  # exponent ~3.6: finite variance
    ]


@pytest.mark.parametrize("kind,mean,shape", _sample_kinds())
def test_sample_mean_within_three_standard_errors(kind, mean, shape):
    d = make_distribution(kind, mean, shape=shape)
    n = 1_000_000
    draws = np.asarray(d.sample(rng("mean", kind), size=n), dtype=np.float64)
    assert draws.min() >= 1
    se = math.sqrt(d.variance / n) if d.variance > 0 else 0.0
    assert abs(draws.mean() - mean) <= max(3 * se, 1e-9)


def test_samples_positive_integers_heavy_tail():
    d = make_distribution("zeta", 3600)  # infinite variance: positivity only
    draws = d.sample(rng("zeta-heavy"), size=10_000)
    assert np.asarray(draws).min() >= 1


def test_sampler_determinism():
    d = make_distribution("negative-binomial", 3600, shape=6e-4)
    a = d.sample(rng("det"), size=1000)
    b = d.sample(rng("det"), size=1000)
    assert np.array_equal(a, b)


def test_sampler_batching_equivalence():
    # the value stream must not depend on how draws are batched
    for kind, mean, shape in [("geometric", 9.0, None), ("negative-binomial", 3600.0, 6e-4)]:
        d = make_distribution(kind, mean, shape=shape)
        whole = d.sample(rng("batch", kind), size=1000)
        r = rng("batch", kind)
        parts = np.concatenate([np.atleast_1d(d.sample(r, size=100)) for _ in range(10)])
        assert np.array_equal(whole, parts)


def test_degenerate_sample_any_seed():
    d = make_distribution("degenerate", 5)
    assert d.sample(rng("any")) == 5
    assert set(np.asarray(d.sample(rng("any2"), size=10))) == {5}


@pytest.mark.parametrize("kind,mean,shape", [
    ("geometric", 9.0, None),
    ("negative-binomial", 3600.0, 6e-4),
    ("poisson", 9.0, None),
    ("discrete-uniform", 9.0, None),
    ("zeta", 1.2, None),
])
def test_sampler_histogram_chi_square(kind, mean, shape):
    """Sampler matches the PMF over the 50 most probable outcomes."""
    d = make_distribution(kind, mean, shape=shape)
    n = 1_000_000
    draws = np.asarray(d.sample(rng("chi", kind), size=n))
    support = np.arange(1, 501)
    pmf = np.array([d.pmf(int(k)) for k in support])
    top = support[np.argsort(pmf)[::-1][:50]]
    observed = np.array([(draws == k).sum() for k in top], dtype=float)
    expected = np.array([d.pmf(int(k)) for k in top]) * n
    obs = np.append(observed, n - observed.sum())  # everything else
    exp = np.append(expected, n - expected.sum())
    keep = exp > 5
    _, p = chisquare(obs[keep], exp[keep] * obs[keep].sum() / exp[keep].sum())
    assert p > 0.001, (kind, p)
