"""Optimal drive ratio, optimal inter-cavity coupling and related bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import R_MAX, SystemParams
from .search import golden_section, scan_and_refine
from .spectrum import EnvSummary, env_summary, epsilon_approx
from .weakcoupling import UnstableError, squeezing_db, stability, variance_x1

__all__ = [
    "JOptClosedForm",
    "NoInteriorMinimumError",
    "OptResult",
    "VarianceBound",
    "asymmetric_j_opt",
    "c_e_approx",
    "j_objective_approx",
    "j_opt_closed_form",
    "j_opt_numeric",
    "minimize_over_r",
    "r_opt_approx",
    "r_opt_exact",
    "r_opt_grid",
    "r_opt_langevin",
    "variance_at_ropt",
    "variance_bound",
]

COARSE_POINTS = 33


class NoInteriorMinimumError(ArithmeticError):
    """The smallest objective value lies on the boundary of the searched range."""

    code = "no-interior-minimum"


@dataclass(frozen=True)
class OptResult:
    """Location and value of a minimum.

    ``neighbors`` holds the objective at the two coarse-grid points that
    bracket the argmin (empty for closed forms).
    """

    argmin: float
    variance: float
    method: str  # "closed-form", "grid" or "golden-section"
    flags: tuple[str, ...] = ()
    neighbors: tuple[float, ...] = field(default=())

    @property
    def s_db(self) -> float:
        return squeezing_db(self.variance) if self.variance > 0 else math.inf

    @property
    def certified(self) -> bool:
        return all(self.variance <= v for v in self.neighbors)


def _symmetric_eps(env: EnvSummary) -> float:
    eps = env.eps
    if not math.isclose(env.eps_plus, env.eps_minus, rel_tol=1e-9, abs_tol=1e-15):
        raise ValueError("closed-form optimum needs eps+ = eps- (symmetric setting)")
    if eps >= 1:
        raise ValueError(f"eps = {eps:.4g} >= 1: optimum formula undefined")
    if not env.c_e > 0:
        raise ValueError("effective cooperativity must be positive")
    return eps


def r_opt_exact(env: EnvSummary, n_th: float) -> float:
    """Optimal G+/G- minimizing the weak-coupling variance."""
    eps = _symmetric_eps(env)
    ce = env.c_e
    k = ce * (1 - eps)
    d = ce * (1 - eps**2) + n_th * (1 - eps) + 1
    disc = d * d - k * (k + 1)
    # (D - sqrt(D^2 - k(k+1)))/k rewritten to avoid cancellation
    return (k + 1) / (d + math.sqrt(disc))


def variance_at_ropt(env: EnvSummary, n_th: float) -> float:
    eps = _symmetric_eps(env)
    ce, r = env.c_e, r_opt_exact(env, n_th)
    num = 1 + 2 * n_th + ce * ((r - 1) ** 2 + eps * (r * r + 1))
    return num / (2 * (1 + ce * (eps - 1) * (r * r - 1)))


def r_opt_approx(env: EnvSummary, n_th: float) -> tuple[float, float, tuple[str, ...]]:
    """Large-C_e, small-eps expansions of r_opt and the optimal variance."""
    ce, eps = env.c_e, env.eps
    flags = []
    if ce < 10:
        flags.append("C_e < 10")
    if eps > 0.1:
        flags.append("eps > 0.1")
    radical = 1 + 2 * ce * eps + 2 * n_th
    r = 1 - math.sqrt(radical / ce) + (1 + ce * eps + n_th) / ce
    var = math.sqrt(radical / (4 * ce)) + n_th / (2 * ce)
    return r, var, tuple(flags)


@dataclass(frozen=True)
class VarianceBound:
    exact: float  # sqrt(eps/2) with the exact eps
    approx: float  # narrow-auxiliary, large-J radical
    floor: float  # kappa/(4 Omega), reached as J -> infinity


def variance_bound(params: SystemParams) -> VarianceBound:
    """Infinite-cooperativity floor of the optimal variance."""
    env = env_summary(params) if params.g_minus > 0 else env_summary(params.with_(g_minus=1.0))
    kc, kappa, j, w = params.kappa_c, params.kappa_1, params.j_1, params.omega_m
    epsilon_approx(params)  # symmetric-setting check
    first = math.inf if j == 0 else kc * kappa / (8 * j**2)
    return VarianceBound(
        exact=math.sqrt(env.eps / 2),
        approx=math.sqrt(first + kappa**2 / (16 * w**2)),
        floor=kappa / (4 * w),
    )


@dataclass(frozen=True)
class JOptClosedForm:
    c: float
    c_th: float
    j_opt: float
    variance_opt: float


def _cooperativities(params: SystemParams, n_th: float) -> tuple[float, float]:
    c = 4 * params.g_minus**2 / (params.gamma_m * params.kappa_c)
    return c, c / (2 * n_th + 1)


def j_opt_closed_form(params: SystemParams, n_th: float | None = None) -> JOptClosedForm:
    n = params.n_th if n_th is None else n_th
    c, c_th = _cooperativities(params, n)
    w = params.omega_m
    return JOptClosedForm(
        c=c,
        c_th=c_th,
        j_opt=c_th**0.25 * math.sqrt(w * params.kappa_c),
        variance_opt=0.5 * (math.sqrt(1 / c_th) + params.kappa_1 / (2 * w)),
    )


def c_e_approx(params: SystemParams) -> float:
    """C_e ~ C / (1 + J^2 kappa/(2 Omega^2 kappa_c)) for kappa << Omega."""
    c, _ = _cooperativities(params, 0.0)
    return c / (1 + params.j_1**2 * params.kappa_1 / (2 * params.omega_m**2 * params.kappa_c))


def j_objective_approx(params: SystemParams, j: float, n_th: float | None = None) -> float:
    """Approximate optimal-r variance as a function of J (kappa << Omega, large C_e)."""
    n = params.n_th if n_th is None else n_th
    _, c_th = _cooperativities(params, n)
    kc, kappa, w = params.kappa_c, params.kappa_1, params.omega_m
    return 0.5 * math.sqrt(
        (1 + j**2 * kappa / (2 * w**2 * kc)) / c_th + kappa * kc / (2 * j**2) + kappa**2 / (4 * w**2)
    )


def _scan(f, grid, log: bool) -> OptResult:
    """Coarse scan plus golden-section refinement, optionally in log coordinates."""
    grid = np.asarray(grid, dtype=float)
    if log:
        res, values = scan_and_refine(lambda u: f(math.exp(u)), np.log(grid), xtol=1e-10)
        x = math.exp(res.x)
    else:
        res, values = scan_and_refine(f, grid, xtol=1e-10)
        x = res.x
    i = int(np.argmin(values))
    neighbors = tuple(float(values[k]) for k in (i - 1, i + 1) if 0 <= k < len(values))
    if res.boundary:
        return OptResult(x, res.fx, "grid", ("boundary",), neighbors)
    return OptResult(x, res.fx, "golden-section", (), neighbors)


def _raise_on_boundary(res: OptResult, what: str) -> OptResult:
    if "boundary" in res.flags:
        raise NoInteriorMinimumError(f"no-interior-minimum: {what} minimum at range edge {res.argmin:.6g}")
    return res


def _symmetric_j(params: SystemParams, j: float) -> SystemParams:
    return params.with_(j_1=j, j_2=j)


def j_opt_numeric(
    params: SystemParams,
    n_th: float | None = None,
    j_range: tuple[float, float] = (0.1, 100.0),
    points: int = COARSE_POINTS,
) -> OptResult:
    """Minimize the optimal-r variance over a symmetric J."""
    n = params.n_th if n_th is None else n_th
    lo, hi = j_range
    if not (0 < lo <= hi):
        raise ValueError("j_range must be a positive interval")

    def objective(j: float) -> float:
        env = env_summary(_symmetric_j(params, j))
        try:
            return variance_at_ropt(env, n)
        except ValueError:
            return math.inf

    if lo == hi:
        return OptResult(lo, objective(lo), "grid", ("boundary",))
    res = _scan(objective, np.geomspace(lo, hi, points), log=True)
    return _raise_on_boundary(res, "J")


def _fixed_r_objective(params: SystemParams):
    def objective(p: SystemParams) -> float:
        env = env_summary(p)
        if not stability(p, env).stable:
            return math.inf
        try:
            return variance_x1(p, env)
        except (UnstableError, ValueError):
            return math.inf

    return objective


def asymmetric_j_opt(
    params: SystemParams,
    n_th: float | None,
    j2: float,
    ratio_range: tuple[float, float] = (0.05, 200.0),
    points: int = COARSE_POINTS,
    optimize_r: bool = False,
) -> OptResult:
    """Optimal J1/J2 at fixed J2.

    By default G+/G- is held at the value in ``params``; with ``optimize_r``
    the drive ratio is re-optimized at every ratio.
    """
    base = params.with_(j_2=j2) if n_th is None else params.with_(j_2=j2, n_th=n_th)
    fixed = _fixed_r_objective(base)

    def objective(ratio: float) -> float:
        p = base.with_(j_1=ratio * j2)
        if not optimize_r:
            return fixed(p)
        return minimize_over_r(lambda r: fixed(p.with_(r=r))).variance

    res = _scan(objective, np.geomspace(*ratio_range, points), log=True)
    return _raise_on_boundary(res, "J1/J2")


def minimize_over_r(objective, r_max: float = R_MAX, points: int = 61, r_min: float = 0.0) -> OptResult:
    """Grid scan over r in [r_min, r_max] followed by golden-section refinement.

    ``objective`` may return +inf (or raise) for unstable points.
    """

    def safe(r: float) -> float:
        try:
            return float(objective(r))
        except (ArithmeticError, ValueError):
            return math.inf

    return _scan(safe, np.linspace(r_min, r_max, points), log=False)


def r_opt_grid(env: EnvSummary, n_th: float, step: float = 1e-5) -> float:
    """Argmin of the weak-coupling variance over an r grid of the given step (oracle)."""
    r = np.arange(0.0, R_MAX, step)
    z = np.arctanh(r)
    ch2, sh2 = np.cosh(z) ** 2, np.sinh(z) ** 2
    inv = 1.0 / env.c_e
    num = np.exp(-2 * z) + (env.eps_minus + (1 + 2 * n_th) * inv) * ch2 + env.eps_plus * sh2
    den = 1 + (inv - env.eps_minus) * ch2 + env.eps_plus * sh2
    var = np.where(den > 0, 0.5 * num / np.where(den > 0, den, 1.0), np.inf)
    return float(r[int(np.argmin(var))])



def r_opt_langevin(
    params: SystemParams,
    points: int = 61,
    r_max: float = 0.999,
    tol: float = 1e-10,
    max_periods: int = 10**9,
) -> OptResult:
    """Optimal G+/G- of the period-averaged variance of the full linear model."""
    from .langevin import NonConvergentError, mechanical_variance

    def objective(r: float) -> float:
        try:
            return mechanical_variance(params.with_(r=r), tol=tol, max_periods=max_periods)
        except NonConvergentError:
            return math.inf

    return minimize_over_r(objective, r_max=r_max, points=points)
