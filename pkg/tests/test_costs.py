import math

import numpy as np
import pytest
from scipy.integrate import quad

from priopricing import (Exponential, LogNormal, QuadratureError,
                         TruncatedNormal, Uniform, integrate,
                         parse_distribution)

FAMILIES = [
    Uniform(0.0, 2.0),
    Uniform(0.5, 3.0),
    Exponential(1.0),
    Exponential(2.0),
    LogNormal(0.0, 1.0),
    LogNormal(0.5, 0.4),
    TruncatedNormal(1.0, 0.5),
    TruncatedNormal(-0.5, 1.0),
]


def _far_tail(dist):
    # integrate past the default truncation so tail mass cannot bias oracles
    lo, hi = dist.support
    if math.isinf(hi):
        hi = float(dist.sample(1.0 - 1e-13))
    return lo, hi


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def test_integrate_linear():
    r = integrate(lambda x: x, 0.0, 1.0)
    assert r.value == pytest.approx(0.5, abs=1e-14)
    assert r.evaluations >= 5


def test_integrate_cubics_exact():
    # Simpson panels are exact through cubic terms
    r = integrate(lambda x: 4.0 * x ** 3 - 2.0 * x + 1.0, 0.0, 1.0)
    assert r.value == pytest.approx(1.0, abs=1e-13)


def test_integrate_rational_kernels():
    # hand antiderivatives: (1-x/2)^-2 and -4c - 16 log(1 - c/4)
    r = integrate(lambda x: (1.0 - 0.5 * x) ** -3, 0.0, 1.0)
    assert r.value == pytest.approx(3.0, abs=1e-9)
    r = integrate(lambda c: c / (1.0 - c / 4.0), 0.0, 2.0)
    assert r.value == pytest.approx(16.0 * math.log(2.0) - 8.0, abs=1e-9)


def test_integrate_empty_and_bad_limits():
    assert integrate(lambda x: x, 1.0, 1.0).value == 0.0
    with pytest.raises(ValueError):
        integrate(lambda x: x, 1.0, 0.0)
    with pytest.raises(ValueError):
        integrate(lambda x: x, 0.0, math.inf)


def test_integrate_nonconvergence_carries_partial():
    with pytest.raises(QuadratureError) as err:
        integrate(lambda x: math.sin(1.0 / (x + 1e-12)), 0.0, 1.0,
                  abs_tol=1e-15, rel_tol=1e-15, max_intervals=16)
    partial = err.value.partial
    assert math.isfinite(partial.value)
    assert partial.abs_error_estimate > 0.0
    assert partial.evaluations > 0


def test_integrate_reports_error_estimate():
    r = integrate(lambda x: math.exp(x), 0.0, 1.0)
    assert abs(r.value - (math.e - 1.0)) <= max(1e-9, r.abs_error_estimate * 20)


# ---------------------------------------------------------------------------
# distribution examples
# ---------------------------------------------------------------------------

def test_uniform_examples():
    d = Uniform(0.0, 2.0)
    assert d.pdf(1.0) == 0.5
    assert d.pdf(3.0) == 0.0
    assert d.cdf(1.0) == 0.5
    assert d.sample(0.25) == 0.5
    assert d.mean() == 1.0


def test_exponential_examples():
    d = Exponential(1.0)
    assert d.pdf(0.0) == 1.0
    assert d.cdf(math.log(2.0)) == pytest.approx(0.5, rel=1e-12)
    assert d.sample(0.5) == pytest.approx(math.log(2.0), rel=1e-12)
    assert Exponential(2.0).mean() == 0.5
    assert d.cdf(-1.0) == 0.0


def test_lognormal_mean():
    d = LogNormal(0.0, 1.0)
    assert d.mean() == pytest.approx(math.exp(0.5), rel=1e-12)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec())
def test_pdf_integrates_to_one(dist):
    lo, hi = _far_tail(dist)
    val, _ = quad(dist.pdf, lo, hi, epsabs=1e-12, limit=200)
    assert val == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec())
def test_cdf_matches_pdf_quadrature(dist):
    lo, hi = _far_tail(dist)
    for frac in (0.1, 0.35, 0.75, 0.95):
        c = lo + frac * (min(hi, lo + 10.0) - lo)
        val, _ = quad(dist.pdf, lo, c, epsabs=1e-12, limit=200)
        assert dist.cdf(c) == pytest.approx(val, abs=1e-9)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec())
def test_mean_matches_quadrature(dist):
    lo, hi = _far_tail(dist)
    val, _ = quad(lambda c: c * dist.pdf(c), lo, hi, epsabs=1e-12, limit=200)
    assert dist.mean() == pytest.approx(val, abs=1e-8)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec())
def test_sample_cdf_round_trip(dist):
    us = np.linspace(0.001, 0.999, 97)
    cs = dist.sample(us)
    back = dist.cdf(cs)
    np.testing.assert_allclose(back, us, atol=1e-9)


@pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.spec())
def test_cdf_monotone_and_bounded(dist):
    lo, hi = _far_tail(dist)
    grid = np.linspace(lo - 1.0, hi, 400)
    vals = dist.cdf(grid)
    assert np.all(vals >= 0.0) and np.all(vals <= 1.0)
    assert np.all(np.diff(vals) >= -1e-12)
    assert dist.cdf(lo - 1.0) == 0.0


def test_sample_rejects_bad_probability():
    d = Uniform(0.0, 2.0)
    with pytest.raises(ValueError):
        d.sample(-0.01)
    with pytest.raises(ValueError):
        d.sample(1.01)


def test_degenerate_distributions_rejected():
    with pytest.raises(ValueError):
        Uniform(1.0, 1.0)  # point mass
    with pytest.raises(ValueError):
        Uniform(-0.5, 1.0)  # support outside [0, inf)
    with pytest.raises(ValueError):
        Exponential(0.0)
    with pytest.raises(ValueError):
        LogNormal(0.0, 0.0)
    with pytest.raises(ValueError):
        TruncatedNormal(1.0, -1.0)


def test_parse_round_trip():
    for dist in FAMILIES:
        again = parse_distribution(dist.spec())
        assert type(again) is type(dist)
        assert again.spec() == dist.spec()
    assert isinstance(parse_distribution("uniform 0 2"), Uniform)
    assert isinstance(parse_distribution("exponential 1.0"), Exponential)
    with pytest.raises(ValueError):
        parse_distribution("weibull 1 2")
    with pytest.raises(ValueError):
        parse_distribution("uniform 0")
    with pytest.raises(ValueError):
        parse_distribution("uniform 0 zwei")
    with pytest.raises(ValueError):
        parse_distribution("")


def test_truncated_support_keeps_finite_families():
    assert Uniform(0.0, 2.0).truncated_support() == (0.0, 2.0)
    lo, hi = Exponential(1.0).truncated_support()
    assert lo == 0.0 and math.isfinite(hi)
    assert Exponential(1.0).cdf(hi) > 1.0 - 1e-9
