import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rwlab import families
from rwlab.grid import Grid, SampledFunction
from rwlab.harness.dsl import parse_weight
from rwlab.lorentz import WeightedMeasureView, lorentz_norm
from rwlab.operators import maximal
from rwlab.rdf import (K0Estimate, RdfConfig, a1_power_family, buckley_bound, k0_estimate,
                       l_op, power_fit, rdf_iterate)
from rwlab.weights import a1_constant, build_weight, power_weight

G = Grid()
SMALL = Grid(8.0, 1024)


def w_of(text, g=G):
    return build_weight(parse_weight(text), g)


NU = "a1max(indicator(0,1), -0.5)"


@pytest.fixture(scope="module")
def family():
    return [f for _, f in families.family(G, "mixed", 8, 0)]


@pytest.fixture(scope="module")
def unweighted(family):
    u0, nu = power_weight(0, G), w_of(NU)
    return u0, nu, k0_estimate(u0, nu, 1.0, family)


# --------------------------------------------------------------------------- L_{u0}

def test_l_op_unweighted_is_maximal():
    f = SMALL.indicator(-1, 0.5)
    assert np.array_equal(l_op(power_weight(0, SMALL), f).samples, maximal(f).samples)


def test_l_op_of_one_below_a1():
    for text in ("power(-0.5)", "a1max(indicator(0,1), 0.5)"):
        u0 = w_of(text, SMALL)
        one = SMALL.sample(np.ones_like)
        assert np.max(l_op(u0, one).samples) <= a1_constant(u0) * (1 + 1e-12)


@given(st.integers(0, 2 ** 32 - 1))
def test_l_op_monotone(seed):
    rng = np.random.default_rng(seed)
    g = Grid(8.0, 256)
    u0 = power_weight(-0.5, g)
    f = SampledFunction(g, rng.random(256) * (rng.random(256) < 0.3))
    k = f.with_samples(f.samples + rng.random(256) * (rng.random(256) < 0.3))
    assert np.all(l_op(u0, f).samples <= l_op(u0, k).samples * (1 + 1e-12))


def test_l_op_rejects_negative():
    with pytest.raises(ValueError):
        l_op(power_weight(0, SMALL), SMALL.indicator(0, 1) * -1)


# --------------------------------------------------------------------------- config

def test_config_validation():
    u0, nu = power_weight(0, SMALL), w_of(NU, SMALL)
    RdfConfig(u0, nu, 1, 6, 50, 6)
    with pytest.raises(ValueError, match="k_max"):
        RdfConfig(u0, nu, 1, 6, 50, 6, k_max=20)
    with pytest.raises(ValueError, match="p >= p0"):
        RdfConfig(u0, nu, 1, 5, 50, 6)
    with pytest.raises(ValueError):
        RdfConfig(u0, nu, 0.5, 6, 50, 6)
    with pytest.raises(ValueError):
        RdfConfig(u0, nu, 1, 6, 0, 6)
    with pytest.raises(ValueError):
        RdfConfig(u0, nu, 1, 1, 50, 1)


def test_iterate_rejects_bad_input():
    u0, nu = power_weight(0, SMALL), w_of(NU, SMALL)
    cfg = RdfConfig(u0, nu, 1, 6, 50, 6)
    with pytest.raises(ValueError):
        rdf_iterate(cfg, SMALL.sample(np.zeros_like))
    with pytest.raises(ValueError):
        rdf_iterate(cfg, SMALL.indicator(0, 1) * -1)
    # K0 below [u0]/2: the series need not converge
    u1 = power_weight(-0.9, SMALL)
    with pytest.raises(ValueError, match="converge"):
        rdf_iterate(RdfConfig(u1, nu, 1, 6, 1.0, 6), SMALL.indicator(0, 1))
    # converges, but too slowly for the tail tolerance
    with pytest.raises(ValueError, match="tail"):
        rdf_iterate(RdfConfig(u1, nu, 1, 6, 0.26 * a1_constant(u1) * 2, 6), SMALL.indicator(0, 1))


# --------------------------------------------------------------------------- R_{u0}

def test_constant_input_gives_geometric_sum():
    u0, nu = power_weight(0, SMALL), w_of(NU, SMALL)
    K0 = 40.0
    res = rdf_iterate(RdfConfig(u0, nu, 1, 6, K0, 6), SMALL.sample(np.ones_like))
    expect = 2 * K0 / (2 * K0 - 1)
    assert np.allclose(res.Rh.samples, expect, rtol=1e-12)
    assert res.ok


def test_indicator_with_estimated_k0(unweighted):
    u0, nu, est = unweighted
    res = rdf_iterate(est.config(u0, nu, 1.0), G.indicator(0, 1))
    assert res.ok
    value, bound, _ = res.checks["majorizes"]
    assert value >= 0
    a1, bound, _ = res.checks["a1"]
    assert a1 <= bound * 1.05
    ratio, bound, _ = res.checks["lorentz"]
    assert ratio <= bound * 1.05
    assert res.observed_tail <= res.tail_bound


@given(st.floats(1e-3, 1e3))
def test_iterate_is_linear(c):
    u0, nu = power_weight(-0.5, SMALL), w_of(NU, SMALL)
    cfg = RdfConfig(u0, nu, 1, 6, 80, 6)
    h = SMALL.indicator(-0.5, 1)
    a = rdf_iterate(cfg, h * c).Rh.samples
    b = rdf_iterate(cfg, h).Rh.samples
    assert np.allclose(a, c * b, rtol=1e-12, atol=0)


def test_properties_at_several_p(unweighted):
    # boundedness is required for every p >= p0; sampled at p0, 2 p0, 4 p0
    u0, nu, est = unweighted
    h = families.step(G, 11, 6)
    for p in (est.p0, 2 * est.p0, 4 * est.p0):
        res = rdf_iterate(est.config(u0, nu, 1.0, p), h)
        assert res.ok, (p, res.checks)


# --------------------------------------------------------------------------- K0

def test_p0_arithmetic_unit_weight(family):
    u0 = power_weight(0, G)
    nu = w_of("a1max(indicator(0,1), -0.5) * a1max(indicator(-2,-1), -0.5)")
    est = k0_estimate(u0, nu, 1.0, family)
    # eps = 1/4, (1 + eps)/eps = 5, sum alpha = 1
    assert est.eps == 0.25
    assert est.p0 == pytest.approx(11.0, rel=1e-14)
    assert est.C1 == 1.0
    assert est.K0 == pytest.approx(44 * (est.C0 + 1), rel=1e-14)
    # Mf >= |f| a.e.; the A_p route only bounds C0 up to a p-dependent constant
    assert est.C0 >= 1
    assert 1 <= est.buckley < math.inf


def test_k0_rejects_missing_exponents(family):
    with pytest.raises(ValueError, match="exponent"):
        k0_estimate(power_weight(0, G), power_weight(0.5, G), 1.0, family)
    with pytest.raises(ValueError):
        k0_estimate(power_weight(0, G), w_of(NU), 1.0, [])


def test_k0_config_roundtrip(unweighted):
    u0, nu, est = unweighted
    cfg = est.config(u0, nu, 1.0)
    assert isinstance(est, K0Estimate)
    assert (cfg.K0, cfg.p0, cfg.p, cfg.k_max) == (est.K0, est.p0, est.p0, 27)


def test_buckley_bound_unit_weight():
    assert buckley_bound(np.zeros(1024), 3.0) == pytest.approx(1.0, rel=1e-12)
    assert buckley_bound(np.array([0.0, -2000.0] * 512), 1.5) == math.inf


def test_power_fit_recovers_exponent():
    x = np.array([1, 2, 4, 8.0])
    e, c = power_fit(x, 3 * x ** 1.7)
    assert e == pytest.approx(1.7) and math.exp(c) == pytest.approx(3)


def test_a1_power_family_doubles():
    fam = a1_power_family(G, 4)
    consts = [a1_constant(u) for u in fam]
    assert all(b > a for a, b in zip(consts, consts[1:]))


def test_measure_weight():
    u0, nu = power_weight(-0.5, SMALL), w_of(NU, SMALL)
    cfg = RdfConfig(u0, nu, 2.0, 6, 50, 6)
    assert np.allclose(cfg.measure_weight, u0.samples * nu.samples ** 2)
    view = WeightedMeasureView.of(cfg.measure_weight, grid=SMALL)
    assert lorentz_norm(SMALL.indicator(0, 1), view, 6, 1) > 0
