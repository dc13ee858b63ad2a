"""Spectral density of the engineered optical bath seen by the mechanics.

The main cavity is coupled to two auxiliary cavities; the spectrum of its
fluctuations is ``S_op(w) = 2 Re[1 / A(w)]`` with the complex response

    A(w) = kappa_c/2 - i w + i sum_j J_j^2 / (w + Delta_j + i kappa_j/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .model import SystemParams
from .search import golden_section

__all__ = [
    "EnvSummary",
    "EpsilonApprox",
    "Feature",
    "FeatureReport",
    "SpectrumPoint",
    "env_summary",
    "epsilon_approx",
    "response",
    "s0_closed_form",
    "s_op",
    "sample",
    "spectral_features",
]


class NotSymmetricError(ValueError):
    """A closed form valid only for the symmetric setting was called on other parameters."""


@dataclass(frozen=True)
class SpectrumPoint:
    omega: float
    a_value: complex
    s_op: float


@dataclass(frozen=True)
class EnvSummary:
    """Bath values at 0 and +/-2 Omega and the derived ratios."""

    s0: float
    s_plus: float
    s_minus: float
    eps_plus: float
    eps_minus: float
    c_e: float

    @property
    def eps(self) -> float:
        """Common value of eps+/eps- (only meaningful for the symmetric setting)."""
        return 0.5 * (self.eps_plus + self.eps_minus)

    @classmethod
    def from_ratios(cls, eps_plus: float, eps_minus: float, c_e: float, s0: float = 1.0) -> "EnvSummary":
        """Summary specified directly through eps+/-, C_e (S_op(0) only sets the units)."""
        return cls(
            s0=s0,
            s_plus=eps_plus * s0,
            s_minus=eps_minus * s0,
            eps_plus=eps_plus,
            eps_minus=eps_minus,
            c_e=c_e,
        )


def response(params: SystemParams, omega):
    """Complex response A(w); vectorized over ``omega``."""
    w = np.asarray(omega, dtype=float)
    a = params.kappa_c / 2 - 1j * w
    for j, delta, kappa in (
        (params.j_1, params.delta_1, params.kappa_1),
        (params.j_2, params.delta_2, params.kappa_2),
    ):
        if j != 0.0:
            a = a + 1j * j**2 / (w + delta + 0.5j * kappa)
    return a if a.ndim else complex(a)


def s_op(params: SystemParams, omega):
    """Optical spectral density S_op(w) = 1/A + 1/A*."""
    a = response(params, omega)
    s = 2.0 * np.real(1.0 / np.asarray(a))
    return s if s.ndim else float(s)


def sample(params: SystemParams, omegas) -> list[SpectrumPoint]:
    a = np.atleast_1d(response(params, omegas))
    s = 2.0 * np.real(1.0 / a)
    return [SpectrumPoint(float(w), complex(av), float(sv)) for w, av, sv in zip(np.atleast_1d(omegas), a, s)]


def _require_symmetric(params: SystemParams) -> None:
    if not params.is_symmetric:
        raise NotSymmetricError(
            "closed form requires Delta_1 = -Delta_2 = 2 Omega, J_1 = J_2 and kappa_1 = kappa_2"
        )


def s0_closed_form(params: SystemParams) -> float:
    """S_op(0) = 2 / (kappa_c/2 + J^2 kappa / (kappa^2/4 + 4 Omega^2)) in the symmetric setting."""
    _require_symmetric(params)
    kappa, j, w = params.kappa_1, params.j_1, params.omega_m
    return 2.0 / (params.kappa_c / 2 + j**2 * kappa / (kappa**2 / 4 + 4 * w**2))


@dataclass(frozen=True)
class EpsilonApprox:
    value: float
    flags: tuple[str, ...] = ()


def epsilon_approx(params: SystemParams) -> EpsilonApprox:
    """Large-J, narrow-auxiliary estimate eps ~ kappa_c kappa/(4 J^2) + kappa^2/(8 Omega^2)."""
    _require_symmetric(params)
    kappa, j, w = params.kappa_1, params.j_1, params.omega_m
    flags = []
    if kappa >= w / 2:
        flags.append("kappa not << Omega")
    if j**2 <= 10 * params.kappa_c * kappa:
        flags.append("J^2 not >> kappa_c kappa")
    first = math.inf if j == 0 else params.kappa_c * kappa / (4 * j**2)
    return EpsilonApprox(first + kappa**2 / (8 * w**2), tuple(flags))


def env_summary(params: SystemParams) -> EnvSummary:
    """Exact bath values entering the master-equation rates."""
    two = 2.0 * params.omega_m
    s0, sp, sm = s_op(params, np.array([0.0, two, -two]))
    c_e = params.g_minus**2 * s0 / params.gamma_m
    return EnvSummary(
        s0=float(s0),
        s_plus=float(sp),
        s_minus=float(sm),
        eps_plus=float(sp / s0),
        eps_minus=float(sm / s0),
        c_e=float(c_e),
    )


# ---------------------------------------------------------------------------
# peak / dip structure


@dataclass(frozen=True)
class Feature:
    """One spectral extremum. Widths are half widths at half maximum."""

    kind: str  # "dip", "middle-peak", "side-peak", "peak"
    location_predicted: float
    location_measured: float
    width_predicted: float = math.nan
    width_measured: float = math.nan


@dataclass
class FeatureReport:
    regime: str
    grid_spacing: float
    features: list[Feature] = field(default_factory=list)

    def of_kind(self, kind: str) -> list[Feature]:
        return [f for f in self.features if f.kind == kind]


def _grid(params: SystemParams, min_points: int) -> np.ndarray:
    j = params.j_1
    split = math.sqrt(2 * j**2 + 4 * params.omega_m**2)
    # the bare Lorentzian needs room for its half-maximum points at +/- kappa_c/2
    wmax = 2 * split if j != 0.0 else max(2 * split, params.kappa_c)
    kmin = min(params.kappa_c, params.kappa_1, params.kappa_2)
    n = max(min_points, int(math.ceil(8 * wmax / kmin)) + 1)
    n = min(n, 400_001)
    return np.linspace(-wmax, wmax, n)


def _refine(f, grid: np.ndarray, i: int) -> float:
    """Golden-section refinement of a grid extremum of ``f`` at index i."""
    res = golden_section(f, grid[i - 1], grid[i + 1], xtol=1e-13)
    return res.x if res.fx <= f(grid[i]) else float(grid[i])


def _half_width(params: SystemParams, grid: np.ndarray, values: np.ndarray, i: int, w0: float) -> float:
    """Half width at half maximum of the peak at grid index i (refined location w0)."""
    half = 0.5 * s_op(params, w0)
    edges = []
    for step in (-1, 1):
        k = i
        while 0 <= k + step < len(grid):
            nxt = k + step
            if values[nxt] < half:
                edges.append(brentq(lambda w: s_op(params, w) - half, grid[k], grid[nxt], xtol=1e-13))
                break
            if values[nxt] > values[k]:
                return math.nan  # climbs into another peak before reaching half maximum
            k = nxt
        else:
            return math.nan
    return 0.5 * (edges[1] - edges[0])


def spectral_features(params: SystemParams, min_points: int = 4001) -> FeatureReport:
    """Locate peaks and dips of S_op and compare with the coupled-mode predictions.

    Predictions (symmetric setting): dips at -Delta_1, -Delta_2; peaks at 0
    and +/- sqrt(2 J^2 + 4 Omega^2); middle-peak half width
    (kappa_c - kappa) Omega^2/J^2 + kappa/2 and side-peak half width
    (kappa_c + kappa)/4 - (kappa_c - kappa) Omega^2/(2 J^2).
    """
    _require_symmetric(params)
    j, kappa, kc, w = params.j_1, params.kappa_1, params.kappa_c, params.omega_m
    grid = _grid(params, min_points)
    vals = s_op(params, grid)
    spacing = float(grid[1] - grid[0])

    inner = np.arange(1, len(grid) - 1)
    is_max = inner[(vals[1:-1] > vals[:-2]) & (vals[1:-1] >= vals[2:])]
    is_min = inner[(vals[1:-1] < vals[:-2]) & (vals[1:-1] <= vals[2:])]

    def peak_at(i):
        return _refine(lambda x: -s_op(params, x), grid, i)

    def dip_at(i):
        return _refine(lambda x: s_op(params, x), grid, i)

    peaks = [(i, peak_at(i)) for i in is_max]
    dips = [(i, dip_at(i)) for i in is_min]

    if j == 0.0:
        regime = "bare"
    elif j >= kc:
        regime = "autler-townes"
    else:
        regime = "eit-like"

    def nearest(found, target):
        if not found:
            return None
        return min(found, key=lambda item: abs(item[1] - target))

    report = FeatureReport(regime=regime, grid_spacing=spacing)
    if regime == "bare":
        hit = nearest(peaks, 0.0)
        measured = hit[1] if hit else math.nan
        width = _half_width(params, grid, vals, hit[0], hit[1]) if hit else math.nan
        report.features.append(Feature("peak", 0.0, measured, kc / 2, width))
        return report

    for delta in (params.delta_1, params.delta_2):
        hit = nearest(dips, -delta)
        report.features.append(Feature("dip", -delta, hit[1] if hit else math.nan))

    split = math.sqrt(2 * j**2 + 4 * w**2)
    # the width expansions only hold once the peaks are well separated
    if regime == "autler-townes":
        middle_width = (kc - kappa) * w**2 / j**2 + kappa / 2
        side_width = (kc + kappa) / 4 - (kc - kappa) * w**2 / (2 * j**2)
    else:
        middle_width = side_width = math.nan
    for kind, target, width_pred in (
        ("side-peak", -split, side_width),
        ("middle-peak", 0.0, middle_width),
        ("side-peak", split, side_width),
    ):
        hit = nearest(peaks, target)
        # an extremum counts only if it is closer to this prediction than to the dips
        if hit is not None and abs(hit[1] - target) > 0.5 * min(abs(target - 2 * w), abs(target + 2 * w), split):
            hit = None
        if hit is None:
            report.features.append(Feature(kind, target, math.nan, width_pred))
            continue
        width = _half_width(params, grid, vals, hit[0], hit[1])
        report.features.append(Feature(kind, target, hit[1], width_pred, width))
    return report
