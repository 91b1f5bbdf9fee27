from concurrent.futures import ProcessPoolExecutor

import numpy as np
import pytest
from conftest import random_pseudo
from numpy.testing import assert_allclose

from evgof.empirical import PseudoSample, empirical_copula, pseudo_observations
from evgof.errors import ConfigError, TieError
from evgof.estimation import ModelSpec
from evgof.families import CopulaModel
from evgof.gof import (
    CHUNK,
    GofConfig,
    _pvalue,
    _run_chunk,
    bootstrap_many,
    bootstrap_pseudo,
    bootstrap_test,
    check_null,
    stat_kind,
    statistic_Sn,
    statistic_Tn,
    with_seed,
)
from evgof.pickands import curve, grid


class FixedCdf:
    def __init__(self, fn):
        self.cdf = fn


def gh_data(n=120, seed=1, theta=2.0):
    return CopulaModel("gh", theta).sample(n, seed)


# -- statistics ----------------------------------------------------------------

def test_Sn_examples():
    a = CopulaModel("gh", 2.0).pickands
    assert statistic_Sn(a, a, 100) == 0.0
    d = 0.03
    assert abs(statistic_Sn(lambda t: a(t) + d, a, 150) - 150 * d * d) <= 1e-12
    val = statistic_Sn(lambda t: a(t) + d * t, a, 150)
    assert abs(val - 150 * d * d / 3) <= 1e-6


def test_Sn_accepts_arrays():
    t = grid(1001)
    a = CopulaModel("hr", 1.2).pickands(t)
    b = CopulaModel("hr", 1.5).pickands(t)
    assert statistic_Sn(a, b, 50) == statistic_Sn(CopulaModel("hr", 1.2).pickands, CopulaModel("hr", 1.5).pickands, 50)


@pytest.mark.parametrize("pair", [(("gh", 2.0), ("gh", 2.5)), (("hr", 1.2), ("galambos", 1.0)), (("tev", 0.3), ("gh", 1.4))])
def test_Sn_quadrature_converges(pair):
    a = CopulaModel(*pair[0]).pickands
    b = CopulaModel(*pair[1]).pickands
    s1 = statistic_Sn(a, b, 300, 1001)
    s2 = statistic_Sn(a, b, 300, 2001)
    assert abs(s1 - s2) <= 1e-6 * (1 + s1)


def test_Tn_examples():
    ps = PseudoSample([0.25, 0.5, 0.75], [0.5, 0.75, 0.25])
    cn = empirical_copula(ps, ps.u, ps.v)
    assert statistic_Tn(ps, FixedCdf(lambda u, v: empirical_copula(ps, u, v))) == 0.0
    one = PseudoSample([0.5], [0.5])
    assert_allclose(statistic_Tn(one, CopulaModel("gh", 1.0)), (1 - 0.25) ** 2, rtol=1e-15)
    # C_n = (1/3, 2/3, 1/3) against uv = (0.125, 0.375, 0.1875)
    expected = (1 / 3 - 0.125) ** 2 + (2 / 3 - 0.375) ** 2 + (1 / 3 - 0.1875) ** 2
    assert_allclose(cn, [1 / 3, 2 / 3, 1 / 3])
    assert_allclose(statistic_Tn(ps, CopulaModel("gh", 1.0)), expected, rtol=1e-14)


def test_observed_statistics_match_definitions():
    x = gh_data()
    ps = pseudo_observations(x)
    res = bootstrap_many(x, "gh", ("SnP", "SnCFG", "Tn"), GofConfig(N=5))
    model = CopulaModel("gh", res["SnP"].theta_hat[0])
    for kind, est in (("SnP", "P"), ("SnCFG", "CFG")):
        a_n = curve(est, True, ps, 1001).values
        assert_allclose(res[kind].statistic, statistic_Sn(a_n, model.pickands, ps.n), rtol=1e-12)
    assert_allclose(res["Tn"].statistic, statistic_Tn(ps, model), rtol=1e-12)


# -- p-values ------------------------------------------------------------------

def test_pvalue_rule():
    reps = np.array([1.0, 2.0, 3.0, 4.0])
    assert _pvalue(0.5, reps, "count") == 1.0
    assert _pvalue(5.0, reps, "count") == 0.0
    assert _pvalue(3.5, reps, "count") == 0.25
    assert _pvalue(3.0, reps, "count") == 0.5
    assert _pvalue(3.5, reps, "mid") == 1.5 / 5


def test_pvalue_is_exact_count():
    res = bootstrap_test(gh_data(), "gh", GofConfig(N=60))
    assert res.replicates.size == 60
    assert res.pvalue == np.sum(res.replicates >= res.statistic) / 60
    assert 0.0 <= res.pvalue <= 1.0 and res.statistic >= 0.0
    mid = bootstrap_test(gh_data(), "gh", GofConfig(N=60, pvalue_rule="mid"))
    assert mid.pvalue == (np.sum(mid.replicates >= mid.statistic) + 0.5) / 61


# -- configuration -------------------------------------------------------------

def test_config_validation():
    with pytest.raises(ConfigError):
        GofConfig(N=0)
    with pytest.raises(ConfigError):
        GofConfig(grid_m=100)
    with pytest.raises(ConfigError):
        GofConfig(pvalue_rule="other")
    with pytest.raises(ConfigError):
        GofConfig(statistic="ks")
    assert GofConfig(statistic="Sn", estimator="P").kind == "SnP"
    assert GofConfig(statistic="tn").kind == "Tn"
    assert stat_kind("cfg") == "SnCFG"
    assert with_seed(GofConfig(), 9).master_seed == 9


def test_configuration_errors_before_work():
    x = gh_data(30)
    with pytest.raises(ConfigError):
        bootstrap_test(x, "clayton", GofConfig(N=5))
    with pytest.raises(ConfigError):
        bootstrap_test(x, "clayton", GofConfig(N=5, statistic="tn", method="irho"))
    with pytest.raises(ConfigError):
        check_null("frank", ("SnCFG",), "itau")
    assert check_null("a-gh", ("SnP",), "itau") == "mpl"
    res = bootstrap_test(x, "clayton", GofConfig(N=5, statistic="tn"))
    assert res.family == "clayton"


def test_ties_policy():
    x = np.round(gh_data(80), 1)
    with pytest.raises(TieError):
        bootstrap_test(x, "gh", GofConfig(N=5))
    res = bootstrap_test(x, "gh", GofConfig(N=5, ties="midrank"))
    assert "ties-midrank" in res.flags


def test_asymmetric_null_uses_mpl():
    x = CopulaModel("gh", 2.0, (0.3, 0.8)).sample(150, 3)
    res = bootstrap_test(x, "a-gh", GofConfig(N=4))
    assert res.method == "mpl"
    assert "method-mpl-for-vector-parameter" in res.flags
    assert len(res.theta_hat) == 3


# -- bootstrap structure -------------------------------------------------------

def test_deterministic_given_seed():
    x = gh_data()
    a = bootstrap_test(x, "gh", GofConfig(N=40, master_seed=3))
    b = bootstrap_test(x, "gh", GofConfig(N=40, master_seed=3))
    c = bootstrap_test(x, "gh", GofConfig(N=40, master_seed=4))
    assert np.array_equal(a.replicates, b.replicates) and a.pvalue == b.pvalue
    assert not np.array_equal(a.replicates, c.replicates)


def test_workers_do_not_change_results():
    x = gh_data()
    cfg = GofConfig(N=2 * CHUNK + 7, master_seed=5)
    one = bootstrap_many(x, "gh", ("SnP", "SnCFG", "Tn"), cfg)
    many = bootstrap_many(x, "gh", ("SnP", "SnCFG", "Tn"), GofConfig(N=2 * CHUNK + 7, master_seed=5, workers=3))
    for k in one:
        assert np.array_equal(one[k].replicates, many[k].replicates)
        assert one[k].pvalue == many[k].pvalue and one[k].flags == many[k].flags
    with ProcessPoolExecutor(2) as pool:
        ps = pseudo_observations(x)
        pooled = bootstrap_pseudo(ps, "gh", ("SnCFG",), cfg, pool=pool)
    assert np.array_equal(pooled["SnCFG"].replicates, one["SnCFG"].replicates)


def test_joint_statistics_equal_single_runs():
    x = gh_data()
    cfg = GofConfig(N=30, master_seed=8)
    joint = bootstrap_many(x, "galambos", ("SnP", "SnCFG", "Tn"), cfg)
    for kind, stat in (("SnP", "p"), ("SnCFG", "cfg"), ("Tn", "tn")):
        single = bootstrap_test(x, "galambos", GofConfig(statistic=stat, N=30, master_seed=8))
        assert np.array_equal(joint[kind].replicates, single.replicates)
        assert joint[kind].pvalue == single.pvalue


def test_replicates_exchangeable():
    x = gh_data()
    ps = pseudo_observations(x)
    cfg = GofConfig(N=12, master_seed=2)
    res = bootstrap_pseudo(ps, "gh", ("SnCFG",), cfg)["SnCFG"]
    spec = ModelSpec("gh")
    params = np.array(res.theta_hat)
    # each replicate depends only on its own sub-seed: evaluate them one at a
    # time in reversed order
    rev = [
        _run_chunk((spec, params, ps.n, ("SnCFG",), "itau", 1001, True, 2, (), k, k + 1))[0]["SnCFG"][0]
        for k in reversed(range(12))
    ]
    assert np.array_equal(np.array(rev), res.replicates[::-1])
    assert np.array_equal(np.sort(rev), np.sort(res.replicates))
    assert _pvalue(res.statistic, np.array(rev), "count") == res.pvalue


def test_rank_invariance_end_to_end():
    x = gh_data(100, 4)
    y = np.column_stack([np.log(x[:, 0]), 5 * x[:, 1] ** 2])
    cfg = GofConfig(N=20, master_seed=1)
    a = bootstrap_many(x, "hr", ("SnP", "Tn"), cfg)
    b = bootstrap_many(y, "hr", ("SnP", "Tn"), cfg)
    for k in a:
        assert a[k].statistic == b[k].statistic and a[k].pvalue == b[k].pvalue
        assert a[k].theta_hat == b[k].theta_hat and a[k].flags == b[k].flags
        assert np.array_equal(a[k].replicates, b[k].replicates)


def test_uncorrected_and_irho_paths_run():
    x = gh_data()
    r1 = bootstrap_test(x, "gh", GofConfig(N=10, corrected=False))
    r2 = bootstrap_test(x, "gh", GofConfig(N=10, method="irho"))
    r3 = bootstrap_test(x, "gh", GofConfig(N=10, method="mpl"))
    for r in (r1, r2, r3):
        assert 0 <= r.pvalue <= 1 and r.statistic >= 0
    assert r2.method == "irho" and r3.method == "mpl"


def test_gross_misfit_rejected():
    x = CopulaModel("clayton", 4.0).sample(200, 2)
    res = bootstrap_many(x, "gh", ("SnP", "SnCFG"), GofConfig(N=100))
    assert res["SnCFG"].pvalue < 0.05 and res["SnP"].pvalue < 0.05


def test_result_dict():
    res = bootstrap_test(gh_data(), "gh", GofConfig(N=5))
    d = res.as_dict()
    assert set(d) == {"family", "method", "statistic_kind", "statistic", "pvalue", "N", "theta_hat", "flags"}
    assert d["statistic_kind"] == "SnCFG" and d["N"] == 5


def test_small_random_samples_never_abort():
    rng = np.random.default_rng(0)
    for n in (5, 8):
        ps = random_pseudo(rng, n)
        res = bootstrap_pseudo(ps, "gh", ("SnP", "SnCFG", "Tn"), GofConfig(N=50))
        for r in res.values():
            assert np.all(np.isfinite(r.replicates))
