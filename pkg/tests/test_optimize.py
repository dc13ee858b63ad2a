from __future__ import annotations

import math

import numpy as np
import pytest

from optosqueeze.model import symmetric_setting
from optosqueeze.optimize import (
    NoInteriorMinimumError,
    OptResult,
    asymmetric_j_opt,
    c_e_approx,
    j_objective_approx,
    j_opt_closed_form,
    j_opt_numeric,
    minimize_over_r,
    r_opt_approx,
    r_opt_exact,
    r_opt_grid,
    variance_at_ropt,
    variance_bound,
)
from optosqueeze.spectrum import EnvSummary, env_summary
from optosqueeze.weakcoupling import variance_eq17, variance_x1


def fig5(n_th=10.0, j=5.0):
    return symmetric_setting(10.0, 0.1, j, 0.1, 0.5, 1e-5, n_th)


def test_r_opt_frozen_value():
    env = EnvSummary.from_ratios(0.0, 0.0, 1.0)
    assert r_opt_exact(env, 0.0) == pytest.approx(2 - math.sqrt(2), rel=1e-12)
    assert round(r_opt_exact(env, 0.0), 5) == 0.58579
    assert variance_at_ropt(env, 0.0) == pytest.approx(variance_eq17(2 - math.sqrt(2), 0, 0, 1.0, 0.0), rel=1e-10)


def test_r_opt_matches_fine_grid_anchor():
    env = EnvSummary.from_ratios(0.025, 0.025, 400.0)
    assert abs(r_opt_exact(env, 10.0) - r_opt_grid(env, 10.0)) < 1e-4


def test_r_opt_ideal_limit():
    for ce in (1e4, 1e6, 1e8):
        env = EnvSummary.from_ratios(0.0, 0.0, ce)
        r = r_opt_exact(env, 0.0)
        assert 0 < r < 1
        assert 1 - r == pytest.approx(1 / math.sqrt(ce), rel=2 / math.sqrt(ce) + 1e-6)
    assert variance_at_ropt(EnvSummary.from_ratios(0.0, 0.0, 1e10), 0.0) < 1e-4


def test_r_opt_domain_errors():
    with pytest.raises(ValueError):
        r_opt_exact(EnvSummary.from_ratios(1.0, 1.0, 10.0), 0.0)
    with pytest.raises(ValueError):
        r_opt_exact(EnvSummary.from_ratios(0.1, 0.2, 10.0), 0.0)
    with pytest.raises(ValueError):
        variance_at_ropt(EnvSummary.from_ratios(0.1, 0.1, 0.0), 0.0)


def test_r_opt_grid_agreement_and_identity(rng):
    for _ in range(200):
        eps = rng.uniform(0, 0.5)
        env = EnvSummary.from_ratios(eps, eps, 10 ** rng.uniform(0, 4))
        n = rng.uniform(0, 100)
        r = r_opt_exact(env, n)
        assert abs(r - r_opt_grid(env, n)) < 2e-5
        assert variance_at_ropt(env, n) == pytest.approx(variance_eq17(r, eps, eps, env.c_e, n), rel=1e-10)
        assert variance_at_ropt(env, n) >= math.sqrt(eps / 2) * (1 - 1e-12)


def test_identity_against_full_variance():
    p = symmetric_setting(10.0, 0.2, 5.0, 0.02, 0.5, 1e-5, 10.0)
    env = env_summary(p)
    r = r_opt_exact(env, p.n_th)
    assert variance_at_ropt(env, p.n_th) == pytest.approx(variance_x1(p.with_(r=r), env), rel=1e-10)


def test_r_opt_approx_values_and_flags():
    r, var, flags = r_opt_approx(EnvSummary.from_ratios(0.0, 0.0, 400.0), 0.0)
    assert r == pytest.approx(0.9525, rel=1e-12)
    assert var == pytest.approx(0.025, rel=1e-12)
    assert flags == ()
    _, _, flags = r_opt_approx(EnvSummary.from_ratios(0.2, 0.2, 5.0), 0.0)
    assert flags == ("C_e < 10", "eps > 0.1")
    assert r_opt_approx(EnvSummary.from_ratios(0.0, 0.0, 1e12), 5.0)[1] < 1e-5


def test_regime_convergence():
    errs = []
    for ce in (1e2, 1e3, 1e4):
        env = EnvSummary.from_ratios(0.01, 0.01, ce)
        exact = r_opt_exact(env, 1.0)
        errs.append(abs(exact - r_opt_approx(env, 1.0)[0]) / exact)
    assert errs[0] > errs[1] > errs[2]


def test_variance_bound_values():
    b = variance_bound(symmetric_setting(10.0, 0.2, 5.0, 0.02, 0.5, 1e-5))
    assert b.approx == pytest.approx(math.sqrt(0.0125), rel=1e-12)
    assert round(b.approx, 4) == 0.1118
    assert b.exact == pytest.approx(b.approx, rel=0.02)
    assert b.floor == pytest.approx(0.05)
    assert variance_bound(symmetric_setting(10.0, 1.0, 5.0, 0.02, 0.5, 1e-5)).floor == pytest.approx(0.25)
    tiny = variance_bound(symmetric_setting(10.0, 1e-4, 1e3, 0.02, 0.5, 1e-5))
    assert tiny.exact < 1e-3 and tiny.approx < 1e-3


def test_j_opt_closed_form_anchor():
    cf = j_opt_closed_form(fig5())
    assert cf.c == pytest.approx(400.0)
    assert cf.c_th == pytest.approx(400 / 21)
    assert cf.j_opt == pytest.approx(6.606, abs=5e-4)
    assert cf.variance_opt == pytest.approx(0.13957, abs=1e-5)
    assert j_opt_closed_form(fig5(), n_th=0.0).c_th == pytest.approx(400.0)


def test_eq32_at_j_opt_reproduces_eq33():
    for n in (0.0, 10.0):
        cf = j_opt_closed_form(fig5(), n)
        assert j_objective_approx(fig5(), cf.j_opt, n) == pytest.approx(cf.variance_opt, rel=0.02)


@pytest.mark.parametrize("j", [1.0, 3.0, 6.6, 15.0, 40.0])
def test_c_e_approximation(j):
    for kappa in (0.01, 0.05, 0.1):
        p = symmetric_setting(10.0, kappa, j, 0.1, 0.5, 1e-5)
        assert c_e_approx(p) == pytest.approx(env_summary(p).c_e, rel=0.10)


def test_j_opt_numeric_interior_and_certified():
    for n in (0.0, 10.0):
        res = j_opt_numeric(fig5(), n)
        cf = j_opt_closed_form(fig5(), n)
        assert res.method == "golden-section" and res.certified
        assert res.argmin == pytest.approx(cf.j_opt, rel=0.20)
    assert j_opt_numeric(fig5(), 0.0).variance == pytest.approx(j_opt_closed_form(fig5(), 0.0).variance_opt, rel=0.10)


def test_j_opt_degenerate_range_and_boundary():
    res = j_opt_numeric(fig5(), 10.0, j_range=(2.0, 2.0))
    assert res.argmin == 2.0 and res.flags == ("boundary",)
    with pytest.raises(NoInteriorMinimumError) as info:
        j_opt_numeric(fig5(), 10.0, j_range=(0.1, 1.0))
    assert info.value.code == "no-interior-minimum"
    with pytest.raises(ValueError):
        j_opt_numeric(fig5(), 10.0, j_range=(0.0, 1.0))


def _slope(kcs, js):
    return np.polyfit(np.log(kcs), np.log(js), 1)[0]


def test_j_opt_scales_as_sqrt_kappa_c_at_fixed_cooperativity():
    kcs = np.geomspace(1, 100, 7)
    js = []
    for kc in kcs:
        p = symmetric_setting(kc, 0.1, 5.0, 0.1 * math.sqrt(kc / 10), 0.5, 1e-5, 10.0)
        js.append(j_opt_numeric(p, j_range=(0.1, 300.0)).argmin)
    assert _slope(kcs, js) == pytest.approx(0.5, rel=0.15)


def test_j_opt_scales_as_quarter_power_at_fixed_coupling():
    kcs = np.geomspace(1, 100, 7)
    js = [j_opt_numeric(fig5().with_(kappa_c=kc), j_range=(0.1, 300.0)).argmin for kc in kcs]
    assert _slope(kcs, js) == pytest.approx(0.25, rel=0.15)


def test_minimize_over_r_tolerates_failures():
    def objective(r):
        if r > 0.8:
            raise ArithmeticError("unstable")
        return (r - 0.3) ** 2 + 0.5

    res = minimize_over_r(objective)
    assert res.argmin == pytest.approx(0.3, abs=1e-6)
    assert res.certified and res.s_db == pytest.approx(0.0, abs=1e-9)
    edge = minimize_over_r(lambda r: r)
    assert edge.flags == ("boundary",) and edge.method == "grid"


def test_opt_result_certificate():
    assert OptResult(1.0, 0.2, "grid", (), (0.3, 0.25)).certified
    assert not OptResult(1.0, 0.2, "grid", (), (0.1, 0.25)).certified


def fig6(gamma=0.2):
    return symmetric_setting(10.0, 0.2, 1.0, 0.1, 0.8, gamma, 10.0)


@pytest.mark.parametrize("gamma", [0.2, 1e-5])
def test_asymmetric_ratio_regimes(gamma):
    small = asymmetric_j_opt(fig6(gamma), None, 0.5)
    assert small.argmin > 1 and small.certified
    large = asymmetric_j_opt(fig6(gamma), None, 6.0)
    assert large.argmin == pytest.approx(1.0, rel=0.05) and large.certified


def test_asymmetric_variance_drops_with_j2_at_small_gamma():
    v = [asymmetric_j_opt(fig6(1e-5), None, j2).variance for j2 in (0.2, 0.5, 1.0, 2.0, 5.0)]
    assert all(a > b for a, b in zip(v, v[1:]))


def test_asymmetric_with_r_reoptimized():
    fixed = asymmetric_j_opt(fig6(1e-5), None, 2.0)
    free = asymmetric_j_opt(fig6(1e-5), None, 2.0, optimize_r=True, points=9)
    assert free.variance <= fixed.variance + 1e-12
