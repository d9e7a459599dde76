from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from medianlab.errors import DomainError
from medianlab.holder import CATALOG_NAMES, Density, HolderParams, builtin_catalog, reference_median
from medianlab.integrate import Setting
from medianlab.median import (
    Criterion,
    absolute_bound,
    delta_budget,
    i_max,
    log_inv,
    median_bisection,
    perturbed_bisection,
    residual_bound,
)
from oracles import binomial_sigma, quad_quantile

# calibrated once on the smooth catalog for eps in 2^-4..2^-14, frozen with margin
DET_COST_CONST = 1.5  # measured 1.25
QUANT_COST_CONST = 4.5  # measured 3.62


def test_delta_budget_examples():
    assert delta_budget("quant", 2.0**-10) == pytest.approx(1 / 40)
    assert delta_budget("rand", 2.0**-4) == pytest.approx(1 / 1024)
    assert delta_budget("det", 0.1) is None


@pytest.mark.parametrize("eps", [0.5, 0.7, 0.0, -1.0])
def test_delta_budget_domain(eps):
    with pytest.raises(DomainError):
        delta_budget("quant", eps)


def test_log_inv_powers_of_two():
    for k in range(1, 40):
        assert log_inv(2.0**-k) == k
    assert log_inv(0.3) == 2


def test_criterion_parse():
    assert Criterion.parse("absolute") is Criterion.ABSOLUTE
    with pytest.raises(DomainError):
        Criterion.parse("max")


def test_uniform_first_midpoint():
    d = builtin_catalog("uniform")
    res = median_bisection(d, 2.0**-8, "det")
    assert res.trace.i0 == 1 and res.trace.stop_reason == "residual_small"
    assert abs(res.xi_hat - 0.5) <= 2.0**-8
    assert abs(float(d.cdf(res.xi_hat)) - 0.5) <= 2 * 2.0**-8


def test_sine_det_example():
    d = builtin_catalog("sine-0.5")
    eps = 2.0**-10
    res = median_bisection(d, eps, "det")
    assert abs(float(d.cdf(res.xi_hat)) - 0.5) <= max(2, d.params.D) * eps
    assert abs(res.xi_hat - quad_quantile(d, 0.5)) <= absolute_bound(d, eps)


def test_sine_quantum_example():
    d = builtin_catalog("sine-0.5")
    eps, n = 2.0**-8, 400
    ok = 0
    for seed in range(n):
        res = median_bisection(d.fresh(), eps, "quant", np.random.default_rng(seed))
        ok += abs(float(d.cdf(res.xi_hat)) - 0.5) <= residual_bound(d, eps)
    assert ok / n >= 0.75 - 2 * binomial_sigma(0.75, n)


@pytest.mark.parametrize("eps", [0.5, 0.0, 1.0])
def test_median_domain(eps):
    with pytest.raises(DomainError):
        median_bisection(builtin_catalog("uniform"), eps, "det")


def _check_trace(res):
    tr = res.trace
    assert tr.i0 == len(tr.points) == len(tr.intervals)
    assert tr.i0 <= i_max(res.eps)
    for (lo, hi), (nlo, nhi) in zip(tr.intervals, tr.intervals[1:]):
        assert lo <= nlo and nhi <= hi
        assert math.isclose(nhi - nlo, 0.5 * (hi - lo))
    lo, hi = tr.intervals[-1]
    assert res.xi_hat == tr.points[-1][0] == 0.5 * (lo + hi)
    assert tr.total_queries == tr.classical_queries + tr.quantum_queries


@settings(max_examples=60, deadline=None)
@given(
    name=st.sampled_from(CATALOG_NAMES),
    k=st.integers(2, 12),
    setting=st.sampled_from(["det", "rand", "quant"]),
    seed=st.integers(0, 10_000),
)
def test_trace_structure(name, k, setting, seed):
    d = builtin_catalog(name)
    res = median_bisection(d, 2.0**-k, setting, np.random.default_rng(seed))
    _check_trace(res)
    assert res.queries == d.queries + res.trace.quantum_queries


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(CATALOG_NAMES), k=st.integers(2, 12))
def test_det_sign_consistency(name, k):
    d = builtin_catalog(name)
    eps = 2.0**-k
    res = median_bisection(d, eps, "det")
    for x, G in res.trace.points[:-1]:
        assert abs(G) > eps
        assert np.sign(float(d.cdf(x)) - 0.5) == np.sign(G)


@settings(max_examples=40, deadline=None)
@given(name=st.sampled_from(CATALOG_NAMES), k=st.integers(2, 12))
def test_det_error_bounds(name, k):
    d = builtin_catalog(name)
    eps = 2.0**-k
    res = median_bisection(d, eps, "det")
    assert abs(float(d.cdf(res.xi_hat)) - 0.5) <= residual_bound(d, eps)
    if d.params.gamma > 0:
        assert abs(res.xi_hat - reference_median(d)) <= absolute_bound(d, eps)


def test_tie_recurses_left():
    # an exact zero at the first midpoint must shrink the interval to [0, 1/2]
    d = builtin_catalog("uniform")
    res = perturbed_bisection(d, 0.5, 2.0**-8, "det")
    assert res.trace.points[0][1] == 0.0
    res2 = perturbed_bisection(d, 0.75, 2.0**-3, "det")
    assert res2.trace.intervals[1] == [0.5, 1.0]


def test_max_iters_branch_and_abs_guarantee():
    # with target 0.69 on poly-6 |G_i| stays above eps until the cap
    d = builtin_catalog("poly-6")
    eps = 2.0**-6
    res = perturbed_bisection(d, 0.69, eps, "det", criterion="abs")
    assert res.trace.stop_reason == "max_iters"
    assert res.trace.i0 == i_max(eps)
    g = res.to_dict()["guarantee"]
    assert g["branch"] == "interval"
    assert g["interval_halfwidth"] == pytest.approx(0.5 * 2.0 ** -(i_max(eps) - 1))
    json.dumps(res.to_dict())


def test_residual_branch_guarantee():
    res = median_bisection(builtin_catalog("uniform"), 2.0**-6, "det", criterion="abs")
    assert res.absolute_guarantee() == {"branch": "residual", "residual_bound": 2 * 2.0**-6}


def test_incremental_matches_guarantees():
    d = builtin_catalog("sine-0.5")
    for k in (6, 10):
        eps = 2.0**-k
        full = median_bisection(d.fresh(), eps, "det")
        inc = median_bisection(d.fresh(), eps, "det", incremental=True)
        assert abs(float(d.cdf(inc.xi_hat)) - 0.5) <= residual_bound(d, eps)
        assert inc.queries > 0 and full.queries > 0


def test_absolute_bound_needs_gamma():
    d = builtin_catalog("uniform")
    flat = Density(HolderParams(r=1, rho=1.0, D=2.0, H=10.0, gamma=0.0), d._derivs, d.reference_cdf)
    with pytest.raises(DomainError):
        absolute_bound(flat, 0.1)


def test_det_cost_bound_frozen():
    for name in ("sine-0.5", "sine-0.9", "poly-2", "cusp-1.5"):
        for k in range(4, 15):
            d = builtin_catalog(name)
            eps = 2.0**-k
            s = d.params.smoothness
            res = median_bisection(d, eps, "det")
            assert res.queries <= DET_COST_CONST * eps ** (-1 / s) * log_inv(eps)


def test_quant_cost_bound_frozen():
    for name in ("sine-0.5", "poly-2"):
        for k in range(4, 15, 2):
            d = builtin_catalog(name)
            eps = 2.0**-k
            s = d.params.smoothness
            L = log_inv(eps)
            res = median_bisection(d, eps, "quant", np.random.default_rng(k))
            assert res.queries <= QUANT_COST_CONST * eps ** (-1 / (s + 1)) * L * math.ceil(math.log2(max(2, L)))


def test_randomized_is_seed_reproducible():
    d = builtin_catalog("sine-0.9")
    a = median_bisection(d.fresh(), 2.0**-7, "rand", np.random.default_rng(9))
    b = median_bisection(d.fresh(), 2.0**-7, "rand", np.random.default_rng(9))
    assert a.xi_hat == b.xi_hat and a.queries == b.queries


def test_to_dict_fields():
    res = median_bisection(builtin_catalog("sine-0.5"), 2.0**-6, Setting.QUANTUM, np.random.default_rng(0))
    out = res.to_dict()
    assert set(out) >= {"xi_hat", "criterion", "eps", "setting", "target", "trace"}
    assert set(out["trace"]) >= {"points", "intervals", "i0", "stop_reason", "total_queries"}
    assert out["setting"] == "quant"


def test_quantum_success_with_amplitude_estimation_active():
    # at 2^-17 about half of the cost is amplitude-estimation queries
    d = builtin_catalog("sine-0.5")
    eps, n = 2.0**-17, 80
    ok, share = 0, []
    for seed in range(n):
        res = median_bisection(d.fresh(), eps, "quant", np.random.default_rng(seed))
        ok += abs(float(d.cdf(res.xi_hat)) - 0.5) <= residual_bound(d, eps)
        share.append(res.trace.quantum_queries / res.queries)
    assert np.mean(share) > 0.25
    assert ok / n >= 0.75 - 2 * binomial_sigma(0.75, n)
