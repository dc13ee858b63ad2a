"""Effective master equation for the mechanics in the weak-coupling limit.

With the cavities traced out, the mechanics obeys

    d rho/dt = G- D[d] rho + G+ D[d^+] rho + G_S (D_S[d] + D_S[d^+]) rho

with cooling/heating rates ``Gamma_-``/``Gamma_+`` and squeezing rate
``Gamma_S`` set by the bath spectrum at 0 and +/-2 Omega. Its steady state is
a thermal state of a Bogoliubov mode, which yields closed forms for the
variance of the X1 = (d + d^+)/sqrt(2) quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import R_MAX, SystemParams
from .spectrum import EnvSummary

__all__ = [
    "FeasibilityReport",
    "LindbladForm",
    "NonLindbladizableError",
    "RateSet",
    "Stability",
    "UnstableError",
    "feasibility",
    "lindblad_form",
    "quadrature_variance_squeezed",
    "rates",
    "squeezing_db",
    "stability",
    "variance_eq17",
    "variance_from_rates",
    "variance_via_lindblad",
    "variance_x1",
]


class UnstableError(ArithmeticError):
    """The heating rate reaches the cooling rate; no steady state exists."""


class NonLindbladizableError(ArithmeticError):
    pass


@dataclass(frozen=True)
class RateSet:
    gamma_minus: float
    gamma_plus: float
    gamma_s: float

    @property
    def net_cooling(self) -> float:
        return self.gamma_minus - self.gamma_plus


@dataclass(frozen=True)
class LindbladForm:
    a: float
    b: float
    u: float
    v: float
    gamma_bp_minus: float
    gamma_bp_plus: float
    n_bp: float


@dataclass(frozen=True)
class Stability:
    stable: bool
    margin: float  # RHS - LHS of  r^2 < (1 - eps- + 1/C_e)/(1 - eps+)


def rates(params: SystemParams, env: EnvSummary) -> RateSet:
    gp, gm, g, n = params.g_plus, params.g_minus, params.gamma_m, params.n_th
    return RateSet(
        gamma_minus=g * (1 + n) + gm**2 * env.s0 + gp**2 * env.s_plus,
        gamma_plus=g * n + gp**2 * env.s0 + gm**2 * env.s_minus,
        gamma_s=gp * gm * env.s0,
    )


def lindblad_form(rs: RateSet) -> LindbladForm:
    """Rewrite the master equation as cooling/heating of the mode B' = u d + v d^+.

    u and v cancel the anomalous dissipators; they are evaluated as
    u = sqrt((a + b)/2b), v = -Gamma_S sqrt(2/(b (a + b))), which equals
    u = (Gamma_S/b) sqrt(2b/(a - b)), v = -sqrt((a - b)/2b) but stays finite
    (u, v) -> (1, 0) as Gamma_S -> 0.
    """
    a = rs.gamma_minus + rs.gamma_plus
    disc = a * a - 4.0 * rs.gamma_s**2
    if a <= 0 or disc <= (1e-12 * a) ** 2:
        raise NonLindbladizableError(
            f"(Gamma_- + Gamma_+)^2 - 4 Gamma_S^2 = {disc:.3g}: B' mode is not defined"
        )
    b = math.sqrt(disc)
    u = math.sqrt((a + b) / (2 * b))
    v = -rs.gamma_s * math.sqrt(2.0 / (b * (a + b)))
    bp_minus = 0.5 * (rs.gamma_minus - rs.gamma_plus + b)
    bp_plus = 0.5 * (rs.gamma_plus - rs.gamma_minus + b)
    net = bp_minus - bp_plus
    n_bp = bp_plus / net if net > 0 else math.inf
    return LindbladForm(a=a, b=b, u=u, v=v, gamma_bp_minus=bp_minus, gamma_bp_plus=bp_plus, n_bp=n_bp)


def stability(params: SystemParams, env: EnvSummary) -> Stability:
    """Strict inequality G+^2/G-^2 < (1 - eps- + 1/C_e)/(1 - eps+)."""
    inv_ce = 1.0 / env.c_e if env.c_e > 0 else math.inf
    if math.isinf(inv_ce):
        # no red drive: only the intrinsic bath acts on the mechanics
        return Stability(stable=True, margin=math.inf)
    r2 = params.r**2
    if env.eps_plus < 1.0:
        margin = (1 - env.eps_minus + inv_ce) / (1 - env.eps_plus) - r2
        return Stability(stable=margin > 0, margin=margin)
    # eps+ >= 1 flips the inequality when dividing; test the undivided form
    undivided = (1 - env.eps_minus + inv_ce) - r2 * (1 - env.eps_plus)
    return Stability(stable=undivided > 0, margin=undivided)


def variance_eq17(r: float, eps_plus: float, eps_minus: float, c_e: float, n_th: float) -> float:
    """Steady-state <dX1^2> in terms of zeta = atanh(r), eps+/-, C_e and n_th."""
    if r < 0 or r > R_MAX:
        raise ValueError(f"drive ratio r = {r} outside [0, 1)")
    zeta = math.atanh(r)
    ch2 = math.cosh(zeta) ** 2
    sh2 = math.sinh(zeta) ** 2
    inv_ce = 1.0 / c_e
    num = math.exp(-2 * zeta) + (eps_minus + (1 + 2 * n_th) * inv_ce) * ch2 + eps_plus * sh2
    den = 1 + (inv_ce - eps_minus) * ch2 + eps_plus * sh2
    if not den > 0:
        raise UnstableError(f"stability condition violated (denominator {den:.3g})")
    return 0.5 * num / den


def variance_x1(params: SystemParams, env: EnvSummary) -> float:
    if not stability(params, env).stable:
        raise UnstableError("heating exceeds cooling: no steady state")
    return variance_eq17(params.r, env.eps_plus, env.eps_minus, env.c_e, params.n_th)


def variance_from_rates(rs: RateSet) -> float:
    """<dX1^2> = (Gamma_- + Gamma_+ - 2 Gamma_S) / (2 (Gamma_- - Gamma_+)).

    Follows from the steady-state moments <d^+ d> = Gamma_+/(Gamma_- - Gamma_+)
    and <d d> = -Gamma_S/(Gamma_- - Gamma_+). Unlike the zeta form it stays
    defined for G+ >= G- as long as the system is stable.
    """
    net = rs.gamma_minus - rs.gamma_plus
    if not net > 0:
        raise UnstableError("heating exceeds cooling: no steady state")
    return 0.5 * (rs.gamma_minus + rs.gamma_plus - 2 * rs.gamma_s) / net


def variance_via_lindblad(rs: RateSet) -> float:
    """X1 variance of the thermal B' state: (u + v)^2 (2 n_B' + 1)/2."""
    lf = lindblad_form(rs)
    if not lf.gamma_bp_minus > lf.gamma_bp_plus:
        raise UnstableError("heating exceeds cooling: no steady state")
    return 0.5 * (lf.u + lf.v) ** 2 * (2 * lf.n_bp + 1)


def squeezing_db(variance: float) -> float:
    """-10 log10(2 <dX1^2>); 3 dB is a variance of 1/4."""
    if not variance > 0:
        raise ValueError(f"variance must be positive, got {variance}")
    return -10.0 * math.log10(2.0 * variance)


def quadrature_variance_squeezed(r: float, beta: float, theta: float) -> float:
    """Variance of X_theta = X1 cos(theta) + X2 sin(theta) in the squeezed vacuum |r, beta>.

    Equals (cosh 2r - sinh 2r cos(beta - 2 theta))/2.
    """
    ch, sh = math.cosh(r), math.sinh(r)
    cross = math.cos(beta) * ch * sh
    return (
        (sh**2 - cross + 0.5) * math.cos(theta) ** 2
        + (sh**2 + cross + 0.5) * math.sin(theta) ** 2
        - math.sin(2 * theta) * math.sin(beta) * ch * sh
    )


@dataclass(frozen=True)
class FeasibilityReport:
    """Necessary conditions for squeezing and how the variance depends on eps+.

    ``eps_plus_case`` is "b" (variance rises with eps+, squeezing possible),
    "c" (variance falls with eps+ but stays above 1/2) or "d" (pole at
    negative eps+; unphysical or no squeezing).
    """

    nth_bound: float
    nth_ok: bool
    eps_minus_bound: float
    eps_minus_ok: bool
    pole: float  # C/D
    intercept: float  # A/C, variance at eps+ = 0
    eps_plus_case: str


def feasibility(params: SystemParams, env: EnvSummary) -> FeasibilityReport:
    r = params.r
    if r > R_MAX:
        raise ValueError("feasibility analysis needs G+ < G-")
    zeta = math.atanh(r)
    ch2 = math.cosh(zeta) ** 2
    sh2 = math.sinh(zeta) ** 2
    n, ce, em = params.n_th, env.c_e, env.eps_minus
    gain = (1 - math.exp(-2 * zeta)) / (2 * ch2)
    nth_bound = ce * gain
    eps_bound = gain - n / ce

    c_part = 1 + (1 / ce - em) * ch2
    pole = c_part / sh2 if sh2 > 0 else math.copysign(math.inf, c_part)
    intercept = 0.5 * (math.exp(-2 * zeta) + (em + (1 + 2 * n) / ce) * ch2) / c_part
    if pole > 0:
        case = "b" if intercept < 0.5 else "c"
    else:
        case = "d"
    return FeasibilityReport(
        nth_bound=nth_bound,
        nth_ok=n < nth_bound,
        eps_minus_bound=eps_bound,
        eps_minus_ok=em < eps_bound,
        pole=pole,
        intercept=intercept,
        eps_plus_case=case,
    )
