from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from optosqueeze.langevin import (
    BASIS,
    GaussianState,
    NonConvergentError,
    UnstableDriftError,
    assemble,
    check_physical,
    mech_quadrature_variance,
    mechanical_variance,
    steady_state_algebraic,
    steady_state_periodic,
    symplectic_form,
)
from optosqueeze.model import SystemParams, symmetric_setting
from optosqueeze.spectrum import EnvSummary, env_summary
from optosqueeze.weakcoupling import variance_eq17, variance_x1


def fig3(g_minus=0.02, r=0.5, n_th=10.0):
    return symmetric_setting(10.0, 0.2, 5.0, g_minus, r, 1e-5, n_th)


def hamiltonian(p: SystemParams, t: float, z: np.ndarray) -> float:
    """Classical linearized Hamiltonian at phase-space point z = (x_c, p_c, ..., x_m, p_m)."""
    a = (z[0::2] + 1j * z[1::2]) / math.sqrt(2)
    c, a1, a2, m = a
    h = -p.delta_1 * abs(a1) ** 2 - p.delta_2 * abs(a2) ** 2
    h += 2 * (p.j_1 * np.conj(c) * a1).real + 2 * (p.j_2 * np.conj(c) * a2).real
    h += 2 * (np.conj(c) * (p.g_minus * m + p.g_plus * np.conj(m))).real
    rot = np.exp(-2j * t)
    h += 2 * (np.conj(c) * (p.g_plus * m * rot + p.g_minus * np.conj(m) * np.conj(rot))).real
    return float(h)


def drift_from_hamiltonian(p: SystemParams, t: float) -> np.ndarray:
    """Hamilton's equations plus amplitude damping, from the exact Hessian of a quadratic form."""
    n = 8
    hess = np.zeros((n, n))
    eye = np.eye(n)
    for i in range(n):
        for j in range(n):
            hess[i, j] = (
                hamiltonian(p, t, eye[i] + eye[j]) - hamiltonian(p, t, eye[i] - eye[j])
                - hamiltonian(p, t, -eye[i] + eye[j]) + hamiltonian(p, t, -eye[i] - eye[j])
            ) / 4
    rates = np.repeat([p.kappa_c, p.kappa_1, p.kappa_2, p.gamma_m], 2)
    return symplectic_form(4) @ hess - np.diag(rates / 2)


@pytest.mark.parametrize("t", [0.0, 0.3, 1.1, 2.5])
def test_drift_matches_hamiltonian(t):
    p = SystemParams(3.0, 0.4, 0.7, 1.5, -2.5, 1.2, 0.8, 0.13, 0.21, 0.01, 2.0)
    dd = assemble(p)
    assert np.allclose(dd.drift(t), drift_from_hamiltonian(p, t), atol=1e-12)


def test_drift_periodic_and_rwa_constant():
    dd = assemble(fig3(g_minus=0.1))
    for t in (0.0, 0.4, 1.3):
        assert np.array_equal(dd.drift(t + dd.period), dd.drift(t)) or np.allclose(
            dd.drift(t + dd.period), dd.drift(t), atol=1e-15
        )
    assert dd.period == pytest.approx(math.pi)
    rwa = assemble(fig3(g_minus=0.1), include_cr=False)
    assert rwa.time_independent and np.array_equal(rwa.drift(0.7), rwa.a0)


def test_uncoupled_drift_block_diagonal():
    dd = assemble(fig3(g_minus=0.0, r=0.0))
    for t in (0.0, 0.9):
        a = dd.drift(t)
        assert not a[:6, 6:].any() and not a[6:, :6].any()
    d = dd.diffusion
    assert np.allclose(d, d.T) and np.min(np.linalg.eigvalsh(d)) >= 0
    assert BASIS[6:] == ("mech.x", "mech.p")


def test_uncoupled_fixed_points_exact():
    p = fig3(g_minus=0.0, r=0.0, n_th=7.0).with_(j_1=0.0, j_2=0.0)
    v = steady_state_algebraic(assemble(p, include_cr=False)).cov
    assert np.allclose(v, np.diag([0.5] * 6 + [7.5] * 2), atol=1e-10, rtol=0)
    res = steady_state_periodic(assemble(p))
    assert res.periods_used == 1
    assert np.allclose(res.average.cov, np.diag([0.5] * 6 + [7.5] * 2), atol=1e-10, rtol=0)


def test_quadrature_readout():
    vac = GaussianState(np.eye(8) * 0.5, 0.0)
    th = GaussianState(np.diag([0.5] * 6 + [10.5] * 2), 0.0)
    for theta in np.linspace(0, math.pi, 5):
        assert mech_quadrature_variance(vac, theta) == pytest.approx(0.5)
        assert mech_quadrature_variance(th, theta) == pytest.approx(10.5)


def test_physicality_checks():
    assert check_physical(GaussianState(np.eye(8) * 0.5, 0.0)) == []
    bad = GaussianState(np.eye(8) * 0.1, 0.0)
    problems = check_physical(bad)
    assert any("uncertainty" in s for s in problems)
    assert any("Sigma" in s for s in problems)


def test_unstable_drift_detected():
    p = symmetric_setting(10.0, 0.5, 0.0, 0.1, 1.2, 1e-7)
    with pytest.raises(UnstableDriftError):
        steady_state_algebraic(assemble(p, include_cr=False))
    with pytest.raises(ValueError):
        steady_state_algebraic(assemble(p))
    with pytest.raises(UnstableDriftError):
        steady_state_periodic(assemble(p), max_periods=10**9)


def test_nonconvergence_reported():
    with pytest.raises(NonConvergentError):
        steady_state_periodic(assemble(fig3()), max_periods=10)


def test_periodic_solver_matches_brute_force_integration():
    p = SystemParams(2.0, 0.5, 0.5, 2.0, -2.0, 1.0, 1.0, 0.15, 0.3, 0.05, 1.0)
    dd = assemble(p)
    res = steady_state_periodic(dd, tol=1e-12)

    def rhs(t, y):
        a = dd.drift(t)
        v = y.reshape(8, 8)
        av = a @ v
        return (av + av.T + dd.diffusion).ravel()

    v0 = np.diag([0.5] * 6 + [1.5] * 2)
    sol = solve_ivp(rhs, (0, 150 * math.pi), v0.ravel(), method="DOP853", rtol=1e-11, atol=1e-13)
    brute = sol.y[:, -1].reshape(8, 8)
    assert np.allclose(res.strobe.cov, brute, rtol=1e-7, atol=1e-9)


def test_periodic_machinery_reproduces_lyapunov(rng):
    for _ in range(100):
        kc = 10 ** rng.uniform(-0.5, 1.5)
        k = 10 ** rng.uniform(-1.5, 0)
        j = rng.uniform(0, 5)
        gm = rng.uniform(0.01, 0.3) * min(kc, k)
        p = symmetric_setting(kc, k, j, gm, rng.uniform(0, 0.9), 10 ** rng.uniform(-3, -1), rng.uniform(0, 5))
        dd = assemble(p, include_cr=False)
        exact = steady_state_algebraic(dd).cov
        artificial = dd.with_period(rng.uniform(0.5, 3.0))
        periodic = steady_state_periodic(artificial, tol=1e-12, max_periods=10**9).average.cov
        assert np.allclose(periodic, exact, rtol=1e-6, atol=1e-8 * np.abs(exact).max())


def test_rwa_resolved_sideband_ideal_limit():
    for r in (0.3, 0.5, 0.7):
        p = symmetric_setting(0.1, 0.5, 0.0, 0.01, r, 1e-8, 0.0)
        env = env_summary(p)
        assert env.c_e > 1e4
        v = mech_quadrature_variance(steady_state_algebraic(assemble(p, include_cr=False)))
        assert v == pytest.approx(math.exp(-2 * math.atanh(r)) / 2, rel=0.02)


def test_rwa_matches_eq17_without_counter_rotating_bath():
    p = fig3(g_minus=0.02, r=0.5)
    env = env_summary(p)
    v = mech_quadrature_variance(steady_state_algebraic(assemble(p, include_cr=False)))
    assert v == pytest.approx(variance_eq17(p.r, 0.0, 0.0, env.c_e, p.n_th), rel=0.02)


def test_weak_coupling_draw_within_five_percent():
    p = fig3(g_minus=0.01, r=0.6)
    v = mechanical_variance(p, tol=1e-12, max_periods=10**9)
    assert v == pytest.approx(variance_x1(p, env_summary(p)), rel=0.05)
    strobe = mechanical_variance(p, tol=1e-12, max_periods=10**9, averaged=False)
    assert strobe == pytest.approx(v, rel=1e-3)


def test_steady_states_are_physical(rng):
    for _ in range(10):
        p = symmetric_setting(10.0, rng.uniform(0.1, 0.5), rng.uniform(0, 10), rng.uniform(0.01, 0.3),
                              rng.uniform(0, 0.9), 1e-5, rng.uniform(0, 10))
        res = steady_state_periodic(assemble(p), tol=1e-10, max_periods=10**9)
        assert check_physical(res.average) == []
        assert check_physical(res.strobe) == []
        assert np.linalg.det(res.average.mech_block) >= 0.25 - 1e-9
