"""Exact Gaussian steady state of the linearized four-mode system.

Quadrature covariances V_jk = <{dR_j, dR_k}>/2 of R = (x_c, p_c, x_1, p_1,
x_2, p_2, x_m, p_m) obey

    dV/dt = A(t) V + V A(t)^T + D

with a drift A(t) of period pi/Omega when the counter-rotating terms are
kept. The periodic fixed point is reached by composing the one-period map
V -> Phi V Phi^T + Q with itself (period doubling), so relaxation over
millions of mechanical periods costs a few dozen matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_continuous_lyapunov

from .model import SystemParams

__all__ = [
    "BASIS",
    "DriftDiffusion",
    "GaussianState",
    "NonConvergentError",
    "PeriodicSteadyState",
    "UnstableDriftError",
    "assemble",
    "check_physical",
    "mech_quadrature_variance",
    "mechanical_variance",
    "period_map",
    "steady_state_algebraic",
    "steady_state_periodic",
]

MODES = ("main", "aux1", "aux2", "mech")
BASIS = tuple(f"{m}.{q}" for m in MODES for q in ("x", "p"))
MECH = slice(6, 8)

# interleaved (x0, p0, x1, p1, ...) from block (x0, x1, ..., p0, p1, ...)
_PERM = np.array([k for i in range(4) for k in (i, i + 4)])

RTOL = 1e-10
ATOL = 1e-13


class UnstableDriftError(ArithmeticError):
    pass


class NonConvergentError(RuntimeError):
    pass


@dataclass(frozen=True)
class DriftDiffusion:
    """A(t) = a0 + a_cos cos(2 Omega t) + a_sin sin(2 Omega t), constant D."""

    a0: np.ndarray
    a_cos: np.ndarray
    a_sin: np.ndarray
    diffusion: np.ndarray
    period: float
    include_cr: bool
    basis: tuple[str, ...] = BASIS

    @property
    def dim(self) -> int:
        return self.a0.shape[0]

    @property
    def time_independent(self) -> bool:
        return not (self.a_cos.any() or self.a_sin.any())

    def drift(self, t: float) -> np.ndarray:
        if self.time_independent:
            return self.a0
        w = 2.0 * math.pi / self.period
        return self.a0 + self.a_cos * math.cos(w * t) + self.a_sin * math.sin(w * t)

    def with_period(self, period: float) -> "DriftDiffusion":
        """Same matrices, different nominal period (for time-independent drifts)."""
        return DriftDiffusion(self.a0, self.a_cos, self.a_sin, self.diffusion, period, self.include_cr, self.basis)


@dataclass(frozen=True)
class GaussianState:
    cov: np.ndarray
    time_tag: str | float  # phase within the period, or "period-averaged"

    @property
    def mech_block(self) -> np.ndarray:
        return self.cov[MECH, MECH]


@dataclass(frozen=True)
class PeriodicSteadyState:
    strobe: GaussianState
    average: GaussianState
    converged: bool
    periods_used: int
    residual: float


def _real_drift(m: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Real quadrature drift for  da/dt = M a + N a^+  (interleaved basis)."""
    top = np.hstack([(m + n).real, -(m - n).imag])
    bottom = np.hstack([(m + n).imag, (m - n).real])
    block = np.vstack([top, bottom])
    return block[np.ix_(_PERM, _PERM)]


def assemble(params: SystemParams, include_cr: bool = True) -> DriftDiffusion:
    """Drift and diffusion of the linearized Langevin equations.

    Mode order: main cavity, auxiliary 1, auxiliary 2, mechanics, each as
    (x, p). With ``include_cr`` the blue-drive beam-splitter and red-drive
    two-mode-squeezing terms oscillating at 2 Omega are kept.
    """
    gp, gm = params.g_plus, params.g_minus
    c, m = 0, 3
    # Hamiltonian H = sum h_jk a_j^+ a_k + 1/2 sum (s_jk a_j^+ a_k^+ + h.c.);
    # Heisenberg: da/dt = -i h a - i s a^+ - damping.
    h0 = np.zeros((4, 4), complex)
    s0 = np.zeros((4, 4), complex)
    h0[1, 1] = -params.delta_1
    h0[2, 2] = -params.delta_2
    h0[c, 1] = h0[1, c] = params.j_1
    h0[c, 2] = h0[2, c] = params.j_2
    h0[c, m] = h0[m, c] = gm
    s0[c, m] = s0[m, c] = gp

    # counter-rotating parts: h_pos multiplies exp(+2i Omega t), h_neg exp(-2i Omega t)
    h_pos = np.zeros((4, 4), complex)
    h_neg = np.zeros((4, 4), complex)
    s_pos = np.zeros((4, 4), complex)
    s_neg = np.zeros((4, 4), complex)
    if include_cr:
        h_neg[c, m] = gp
        h_pos[m, c] = gp
        s_pos[c, m] = s_pos[m, c] = gm

    rates = np.array([params.kappa_c, params.kappa_1, params.kappa_2, params.gamma_m])
    m0 = -1j * h0 - np.diag(rates / 2)
    n0 = -1j * s0
    a0 = _real_drift(m0, n0)
    # exp(+-2i w t) = cos +- i sin
    a_cos = _real_drift(-1j * (h_pos + h_neg), -1j * (s_pos + s_neg))
    a_sin = _real_drift(-1j * 1j * (h_pos - h_neg), -1j * 1j * (s_pos - s_neg))

    occupation = np.array([0.0, 0.0, 0.0, params.n_th])
    diffusion = np.diag(np.repeat(rates * (occupation + 0.5), 2))
    return DriftDiffusion(
        a0=a0,
        a_cos=a_cos,
        a_sin=a_sin,
        diffusion=diffusion,
        period=math.pi / params.omega_m,
        include_cr=include_cr,
    )


def uncoupled_fixed_point(params: SystemParams) -> np.ndarray:
    return np.diag([0.5] * 6 + [params.n_th + 0.5] * 2)


def steady_state_algebraic(dd: DriftDiffusion) -> GaussianState:
    """Solve A V + V A^T + D = 0 for a time-independent, Hurwitz drift."""
    if not dd.time_independent:
        raise ValueError("algebraic steady state needs a time-independent drift")
    eig = np.linalg.eigvals(dd.a0)
    if np.max(eig.real) >= 0:
        raise UnstableDriftError(f"unstable-drift: max Re(eig) = {np.max(eig.real):.3g}")
    v = solve_continuous_lyapunov(dd.a0, -dd.diffusion)
    v = 0.5 * (v + v.T)
    resid = np.linalg.norm(dd.a0 @ v + v @ dd.a0.T + dd.diffusion)
    if resid > 1e-10 * max(np.linalg.norm(dd.diffusion), 1.0):
        raise ArithmeticError(f"Lyapunov residual {resid:.3g} too large")
    return GaussianState(v, time_tag=0.0)


def _integrate(rhs, y0, period, dense=False):
    sol = solve_ivp(rhs, (0.0, period), y0, method="DOP853", rtol=RTOL, atol=ATOL, dense_output=dense)
    if not sol.success:
        raise NonConvergentError(f"ODE integration failed: {sol.message}")
    return sol


def period_map(dd: DriftDiffusion) -> tuple[np.ndarray, np.ndarray]:
    """One-period map V(T) = Phi V(0) Phi^T + Q."""
    n = dd.dim
    d = dd.diffusion

    def rhs(t, y):
        a = dd.drift(t)
        ph = y[: n * n].reshape(n, n)
        q = y[n * n :].reshape(n, n)
        aq = a @ q
        return np.concatenate([(a @ ph).ravel(), (aq + aq.T + d).ravel()])

    y0 = np.concatenate([np.eye(n).ravel(), np.zeros(n * n)])
    sol = _integrate(rhs, y0, dd.period)
    y = sol.y[:, -1]
    phi = y[: n * n].reshape(n, n)
    q = y[n * n :].reshape(n, n)
    return phi, 0.5 * (q + q.T)


def _period_average(dd: DriftDiffusion, v0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Propagate V over one period from v0; return (V(T), time average of V)."""
    n = dd.dim
    d = dd.diffusion

    def rhs(t, y):
        a = dd.drift(t)
        v = y[: n * n].reshape(n, n)
        av = a @ v
        return np.concatenate([(av + av.T + d).ravel(), y[: n * n]])

    y0 = np.concatenate([v0.ravel(), np.zeros(n * n)])
    sol = _integrate(rhs, y0, dd.period)
    y = sol.y[:, -1]
    v_end = y[: n * n].reshape(n, n)
    avg = y[n * n :].reshape(n, n) / dd.period
    return 0.5 * (v_end + v_end.T), 0.5 * (avg + avg.T)


def steady_state_periodic(
    dd: DriftDiffusion,
    tol: float = 1e-8,
    max_periods: int = 10**6,
    v0: np.ndarray | None = None,
) -> PeriodicSteadyState:
    """Periodic covariance fixed point, reached stroboscopically from ``v0``.

    Stops once ||V(t + T) - V(t)||_F < tol ||V(t)||_F. Raises
    NonConvergentError past ``max_periods`` and UnstableDriftError when the
    covariance grows beyond 1e6 times its initial norm.
    """
    if v0 is None:
        # uncoupled fixed point: each damped quadrature alone relaxes to D_ii / (-2 A_ii)
        v0 = np.diag(np.diag(dd.diffusion) / (-2.0 * np.diag(dd.a0)))
    phi, q = period_map(dd)
    norm0 = np.linalg.norm(v0)

    # (phi_k, q_k) advance by 2**k periods
    phi_k, q_k = phi, q
    v = v0
    periods = 0
    while True:
        step = phi @ v @ phi.T + q
        step = 0.5 * (step + step.T)
        resid = np.linalg.norm(step - v) / np.linalg.norm(v)
        if resid < tol:
            break
        nv = np.linalg.norm(v)
        if not np.isfinite(nv) or nv > 1e6 * norm0:
            raise UnstableDriftError(f"unstable: covariance norm grew to {nv:.3g} after {periods} periods")
        jump = 1 if periods == 0 else periods
        if periods + jump > max_periods:
            raise NonConvergentError(f"non-convergent: residual {resid:.3g} after {periods} periods")
        if periods == 0:
            v = step
        else:
            v = phi_k @ v @ phi_k.T + q_k
            v = 0.5 * (v + v.T)
            q_k = phi_k @ q_k @ phi_k.T + q_k
            q_k = 0.5 * (q_k + q_k.T)
            phi_k = phi_k @ phi_k
        periods += jump

    v_end, avg = _period_average(dd, v)
    return PeriodicSteadyState(
        strobe=GaussianState(v, time_tag=0.0),
        average=GaussianState(avg, time_tag="period-averaged"),
        converged=True,
        periods_used=max(periods, 1),
        residual=float(resid),
    )


def mech_quadrature_variance(gs: GaussianState, theta: float = 0.0) -> float:
    """Variance of X_theta = X1 cos(theta) + X2 sin(theta) for the mechanics."""
    b = gs.mech_block
    c, s = math.cos(theta), math.sin(theta)
    return float(c * c * b[0, 0] + s * s * b[1, 1] + 2 * c * s * b[0, 1])


def symplectic_form(n_modes: int = 4) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def check_physical(gs: GaussianState, atol: float = 1e-9) -> list[str]:
    """Return a list of violated physicality conditions (empty when physical)."""
    v = gs.cov
    problems = []
    if not np.allclose(v, v.T, atol=atol):
        problems.append("covariance not symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (v + v.T))) <= 0:
        problems.append("covariance not positive definite")
    herm = v + 0.5j * symplectic_form(v.shape[0] // 2)
    if np.min(np.linalg.eigvalsh(herm)) < -atol:
        problems.append("violates V + i Sigma/2 >= 0")
    for k in range(v.shape[0] // 2):
        block = v[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]
        if np.linalg.det(block) < 0.25 - atol:
            problems.append(f"mode {k} uncertainty det < 1/4")
    return problems


def mechanical_variance(
    params: SystemParams,
    include_cr: bool = True,
    tol: float = 1e-8,
    max_periods: int = 10**6,
    averaged: bool = True,
) -> float:
    """X1 variance of the mechanics in the full linear model."""
    dd = assemble(params, include_cr)
    if not include_cr:
        return mech_quadrature_variance(steady_state_algebraic(dd))
    res = steady_state_periodic(dd, tol=tol, max_periods=max_periods)
    return mech_quadrature_variance(res.average if averaged else res.strobe)
