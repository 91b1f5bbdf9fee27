import math

import numpy as np
import pytest
from conftest import random_pseudo
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from evgof.empirical import PseudoSample, empirical_copula, pseudo_observations
from evgof.errors import DegenerateError, DomainError
from evgof.families import EULER_GAMMA, CopulaModel
from evgof.pickands import (
    PickandsEstimate,
    batch_curves,
    curve,
    estimate,
    estimate_CFG,
    estimate_corrected,
    estimate_P,
    grid,
    integral_form_CFG,
    integral_form_P,
    xi,
    xi_sums,
)

T21 = np.linspace(0, 1, 21)


def one_point(a, b):
    """Pseudo-sample of a single pair with -log U = a and -log V = b."""
    return PseudoSample([math.exp(-a)], [math.exp(-b)])


def test_euler_constant():
    assert EULER_GAMMA == 0.57721566490153286
    assert_allclose(EULER_GAMMA, np.euler_gamma, rtol=1e-16)


def test_xi_examples():
    e1 = math.exp(-1)
    ps = PseudoSample([e1], [math.exp(-2)])
    assert_allclose(xi(ps, 0, 0.0), 1.0, rtol=1e-15)
    assert_allclose(xi(ps, 0, 1.0), 2.0, rtol=1e-15)
    ps = PseudoSample([e1], [e1])
    assert_allclose(xi(ps, 0, 0.5), 2.0, rtol=1e-15)


def test_estimate_P_examples():
    # every xi_i(1/2) = 1
    ps = PseudoSample([math.exp(-0.5)] * 3, [math.exp(-0.5)] * 3)
    assert_allclose(estimate_P(ps, 0.5), 1.0, rtol=1e-15)
    ps = PseudoSample([math.exp(-0.5), math.exp(-1.5)], [math.exp(-0.5), math.exp(-1.5)])
    assert_allclose(estimate_P(ps, 0.5), 0.5, rtol=1e-15)


def test_estimate_CFG_examples():
    c = 0.5 * math.exp(-EULER_GAMMA)
    ps = PseudoSample([math.exp(-c)] * 2, [math.exp(-c)] * 2)
    assert_allclose(estimate_CFG(ps, 0.5), 1.0, rtol=1e-15)
    assert_allclose(estimate_CFG(one_point(0.5, 0.5), 0.5), math.exp(-EULER_GAMMA), rtol=1e-15)
    assert_allclose(math.exp(-EULER_GAMMA), 0.5615, atol=1e-4)


def test_t_outside_unit_interval():
    ps = one_point(0.5, 0.5)
    with pytest.raises(DomainError):
        estimate_P(ps, 1.5)
    with pytest.raises(DomainError):
        estimate_corrected("CFG", ps, -0.1)
    with pytest.raises(DomainError):
        estimate_corrected("Q", ps, 0.5)


@given(st.integers(1, 120), st.integers(0, 2**32 - 1))
def test_sum_engine_matches_direct(n, seed):
    rng = np.random.default_rng(seed)
    ps = random_pseudo(rng, n) if n > 1 else one_point(*rng.exponential(size=2))
    t = np.concatenate([T21, rng.random(10)])
    a, b = -np.log(ps.u), -np.log(ps.v)
    with np.errstate(divide="ignore"):
        mat = np.minimum(a[:, None] / (1 - t), b[:, None] / t)
    tot, tot_log = xi_sums(a[None], b[None], t)
    assert_allclose(tot[0], mat.sum(axis=0), rtol=1e-13)
    assert_allclose(tot_log[0], np.log(mat).sum(axis=0), rtol=1e-12, atol=1e-12)
    assert_allclose(estimate("P", False, ps, t), 1 / mat.mean(axis=0), rtol=1e-13)


@pytest.mark.parametrize("n", [10, 100])
def test_integral_forms(n):
    rng = np.random.default_rng(n)
    for _ in range(50):
        ps = random_pseudo(rng, n)
        p = estimate_P(ps, T21)
        c = estimate_CFG(ps, T21)
        for j, t in enumerate(T21):
            assert abs(p[j] - integral_form_P(ps, t)) <= 1e-6
            assert abs(c[j] - integral_form_CFG(ps, t)) <= 1e-5


def test_adaptive_quadrature_oracle():
    # third route: adaptive quadrature of the integral forms in s = -log x
    rng = np.random.default_rng(17)
    for _ in range(5):
        ps = random_pseudo(rng, 10)
        a, b = -np.log(ps.u), -np.log(ps.v)
        for t in (0.1, 0.35, 0.5, 0.8):
            bps = np.sort(np.concatenate([a / (1 - t), b / t]))
            top = bps[-1] + 1.0

            def g(s):
                return float(empirical_copula(ps, math.exp(-s * (1 - t)), math.exp(-s * t)))

            pts = list(bps[bps < top])
            p_int = integrate.quad(g, 0, top, points=pts, limit=200, epsabs=1e-13)[0]
            assert_allclose(estimate_P(ps, t), 1 / p_int, atol=1e-6)
            pts1 = sorted(set(pts) | {1.0})
            c1 = integrate.quad(lambda s: (g(s) - 1) / s, 0, 1, points=[p for p in pts1 if p < 1], limit=200)[0]
            c2 = integrate.quad(lambda s: g(s) / s, 1, top, points=[p for p in pts1 if 1 < p < top], limit=200)[0]
            assert_allclose(estimate_CFG(ps, t), math.exp(-EULER_GAMMA - c1 - c2), atol=1e-5)


@given(st.integers(2, 80), st.integers(0, 2**32 - 1), st.sampled_from(["P", "CFG"]))
def test_corrected_endpoints_exact(n, seed, kind):
    ps = random_pseudo(np.random.default_rng(seed), n)
    vals = estimate_corrected(kind, ps, np.array([0.0, 0.3, 1.0]), clamp=True)
    assert vals[0] == 1.0 and vals[-1] == 1.0
    assert estimate_corrected(kind, ps, 0.0, clamp=True) == 1.0
    c = curve(kind, True, ps, 11)
    assert c.values[0] == 1.0 and c.values[-1] == 1.0


def test_corrected_equals_uncorrected_when_ends_are_one():
    t = np.linspace(0, 1, 11)
    # mean(-log U) = mean(-log V) = 1
    x = np.array([0.5, 1.5])
    ps = PseudoSample(np.exp(-x), np.exp(-x[::-1]))
    assert_allclose(estimate_P(ps, [0.0, 1.0]), 1.0, rtol=1e-15)
    assert_allclose(estimate_corrected("P", ps, t), estimate_P(ps, t), rtol=1e-14)
    # mean log(-log U) = mean log(-log V) = -gamma
    y = math.exp(-EULER_GAMMA) * np.array([2.0, 0.5])
    ps = PseudoSample(np.exp(-y), np.exp(-y[::-1]))
    assert_allclose(estimate_CFG(ps, [0.0, 1.0]), 1.0, rtol=1e-15)
    assert_allclose(estimate_corrected("CFG", ps, t), estimate_CFG(ps, t), rtol=1e-14)


def test_corrected_formulas():
    rng = np.random.default_rng(5)
    ps = random_pseudo(rng, 40)
    t = np.linspace(0, 1, 9)
    p0, p1 = estimate_P(ps, [0.0, 1.0])
    inv = 1 / estimate_P(ps, t) - (1 - t) * (1 / p0 - 1) - t * (1 / p1 - 1)
    assert_allclose(estimate_corrected("P", ps, t), 1 / inv, rtol=1e-13)
    c0, c1 = estimate_CFG(ps, [0.0, 1.0])
    log_c = np.log(estimate_CFG(ps, t)) - (1 - t) * np.log(c0) - t * np.log(c1)
    assert_allclose(estimate_corrected("CFG", ps, t), np.exp(log_c), rtol=1e-13)


def test_corrected_P_degenerate():
    ps = one_point(0.01, 100.0)
    with pytest.raises(DegenerateError):
        estimate_corrected("P", ps, 0.5)
    assert estimate_corrected("P", ps, 0.5, clamp=True) == 0.5
    c = curve("P", True, ps, 11)
    assert c.flags == ("clamped-degenerate",)
    _, deg = batch_curves("P", True, ps.as_array()[None], 11)
    assert deg.tolist() == [True]


def test_curve_grid_contract():
    ps = random_pseudo(np.random.default_rng(2), 30)
    c = curve("CFG", False, ps, 2)
    assert_allclose(c.values, estimate_CFG(ps, [0.0, 1.0]), rtol=1e-14)
    c = curve("P", True, ps, 3)
    assert_allclose(c.t, [0, 0.5, 1])
    assert c.values[0] == 1.0 and c.values[2] == 1.0
    assert_allclose(c.values[1], estimate_corrected("P", ps, 0.5), rtol=1e-14)
    assert len(curve("P", True, ps)) == 1001
    assert_allclose(grid(1001)[1], 0.001)
    with pytest.raises(DomainError):
        grid(1)


def test_bounded_curve_in_frechet_band():
    ps = random_pseudo(np.random.default_rng(4), 15)
    for kind in ("P", "CFG"):
        c = curve(kind, True, ps, 101, bound=True)
        assert np.all(c.values >= np.maximum(c.t, 1 - c.t))
        assert np.all(c.values <= 1.0)


def test_pickands_estimate_handle():
    ps = random_pseudo(np.random.default_rng(8), 25)
    h = PickandsEstimate("cfg", True, ps)
    assert h.kind == "CFG"
    assert np.all(np.isfinite(h.neg_log_u)) and np.all(h.neg_log_u > 0)
    assert_allclose(h(0.4), estimate_corrected("CFG", ps, 0.4), rtol=1e-15)
    assert_allclose(h.curve(21).values, curve("CFG", True, ps, 21).values, rtol=0)


@given(st.integers(2, 60), st.integers(0, 2**32 - 1))
def test_rank_statistic_permutation_invariant(n, seed):
    rng = np.random.default_rng(seed)
    ps = random_pseudo(rng, n)
    perm = rng.permutation(n)
    qs = PseudoSample(ps.u[perm], ps.v[perm])
    for kind in ("P", "CFG"):
        for corrected in (False, True):
            a = batch_curves(kind, corrected, ps.as_array()[None], 101)[0]
            b = batch_curves(kind, corrected, qs.as_array()[None], 101)[0]
            assert_allclose(a, b, rtol=1e-14)


def test_batch_matches_single():
    rng = np.random.default_rng(12)
    samples = [random_pseudo(rng, 50) for _ in range(6)]
    uv = np.stack([s.as_array() for s in samples])
    for kind in ("P", "CFG"):
        vals, _ = batch_curves(kind, True, uv, 51)
        for k, s in enumerate(samples):
            assert np.array_equal(vals[k], curve(kind, True, s, 51).values)


def test_consistency_large_sample():
    model = CopulaModel("gh", 2.0)
    ps = pseudo_observations(model.sample(10_000, 21))
    t = grid(1001)
    for kind in ("P", "CFG"):
        c = curve(kind, True, ps, 1001)
        assert np.max(np.abs(c.values - model.pickands(t))) <= 0.05


def test_error_decreases_with_n():
    model = CopulaModel("galambos", 1.0)
    t = grid(201)
    a = model.pickands(t)
    med = {}
    for n in (500, 5000):
        errs = []
        for r in range(20):
            ps = pseudo_observations(model.sample(n, 1000 * n + r))
            errs.append(np.max(np.abs(curve("CFG", True, ps, 201).values - a)))
        med[n] = np.median(errs)
    assert med[500] > med[5000]
