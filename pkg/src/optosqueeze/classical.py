"""Leading-order classical amplitudes of the two-tone driven system.

Converts laser drive amplitudes into the dressed couplings G+/- used by the
rest of the package, and reports the auxiliary-cavity and mechanical
amplitudes that the linearization discards.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .model import SystemParams, check, validity_ratio

__all__ = [
    "DisplacementCoefficients",
    "DressedCouplings",
    "DriveSpec",
    "auxiliary_amplitudes",
    "dressed_couplings",
    "drive_to_params",
    "mech_displacement",
    "validity_ratio",
]


@dataclass(frozen=True)
class DriveSpec:
    """Two drive tones at omega_c +/- Omega on the main cavity.

    Frequencies are in units of the mechanical frequency; only differences
    between them matter.
    """

    alpha_plus: complex
    alpha_minus: complex
    omega_c: float
    omega_1: float
    omega_2: float
    g0: float
    omega_m: float = 1.0

    @property
    def omega_plus(self) -> float:
        return self.omega_c + self.omega_m

    @property
    def omega_minus(self) -> float:
        return self.omega_c - self.omega_m

    @classmethod
    def for_params(cls, alpha_plus, alpha_minus, g0: float, params: SystemParams, omega_c: float = 0.0) -> "DriveSpec":
        """Drive spec whose auxiliary frequencies follow Delta_i = omega_c - omega_i of ``params``."""
        return cls(
            alpha_plus=complex(alpha_plus),
            alpha_minus=complex(alpha_minus),
            omega_c=omega_c,
            omega_1=omega_c - params.delta_1,
            omega_2=omega_c - params.delta_2,
            g0=g0,
            omega_m=params.omega_m,
        )


@dataclass(frozen=True)
class DressedCouplings:
    g_plus: float
    g_minus: float
    alpha_bar_plus: complex
    alpha_bar_minus: complex

    @property
    def phase_plus(self) -> float:
        return cmath.phase(self.alpha_bar_plus)

    @property
    def phase_minus(self) -> float:
        return cmath.phase(self.alpha_bar_minus)


def _cavity_denominator(ds: DriveSpec, params: SystemParams, w: float) -> complex:
    den = w - ds.omega_c + 0.5j * params.kappa_c
    for j, wi, ki in ((params.j_1, ds.omega_1, params.kappa_1), (params.j_2, ds.omega_2, params.kappa_2)):
        den -= j**2 / (w - wi + 0.5j * ki)
    return den


def dressed_couplings(ds: DriveSpec, params: SystemParams) -> DressedCouplings:
    """Intracavity amplitudes at the two drive tones and G+/- = g |alpha_bar+/-|."""
    ab_plus = ds.alpha_plus / _cavity_denominator(ds, params, ds.omega_plus)
    ab_minus = ds.alpha_minus / _cavity_denominator(ds, params, ds.omega_minus)
    return DressedCouplings(
        g_plus=ds.g0 * abs(ab_plus),
        g_minus=ds.g0 * abs(ab_minus),
        alpha_bar_plus=ab_plus,
        alpha_bar_minus=ab_minus,
    )


def auxiliary_amplitudes(ds: DriveSpec, params: SystemParams, dc: DressedCouplings) -> np.ndarray:
    """Fourier coefficients of alpha_i(t).

    Row i-1 holds the coefficients of exp(-i omega_+ t) and exp(-i omega_- t)
    for auxiliary cavity i.
    """
    out = np.zeros((2, 2), complex)
    for row, (j, wi, ki) in enumerate(
        ((params.j_1, ds.omega_1, params.kappa_1), (params.j_2, ds.omega_2, params.kappa_2))
    ):
        out[row, 0] = j * dc.alpha_bar_plus / (ds.omega_plus - wi + 0.5j * ki)
        out[row, 1] = j * dc.alpha_bar_minus / (ds.omega_minus - wi + 0.5j * ki)
    return out


@dataclass(frozen=True)
class DisplacementCoefficients:
    """beta(t) = static + minus * exp(-2i Omega t) + plus * exp(+2i Omega t)."""

    static: complex
    minus: complex
    plus: complex

    @property
    def cavity_shift(self) -> float:
        """Static main-cavity frequency shift g (beta + beta*) / g, i.e. 2 Re(static); multiply by g."""
        return 2.0 * self.static.real


def mech_displacement(ds: DriveSpec, params: SystemParams, dc: DressedCouplings) -> DisplacementCoefficients:
    """Particular solution of d beta/dt = -(i Omega + gamma/2) beta - i g |alpha|^2.

    For real alpha_bar this is
    -g (a+^2 + a-^2)/(Omega - i gamma/2)
    + g a+ a- (exp(-2i Omega t)/(Omega + i gamma/2) - exp(2i Omega t)/(3 Omega - i gamma/2)).
    """
    g, w, gam = ds.g0, params.omega_m, params.gamma_m
    ap, am = dc.alpha_bar_plus, dc.alpha_bar_minus
    power = abs(ap) ** 2 + abs(am) ** 2
    beat = ap * am.conjugate()
    return DisplacementCoefficients(
        static=-g * power / (w - 0.5j * gam),
        minus=g * beat / (w + 0.5j * gam),
        plus=-g * beat.conjugate() / (3 * w - 0.5j * gam),
    )


@dataclass(frozen=True)
class DriveReport:
    params: SystemParams
    couplings: DressedCouplings
    displacement: DisplacementCoefficients
    cavity_shift: float
    validity_ratio: float


def drive_to_params(ds: DriveSpec, params: SystemParams) -> DriveReport:
    """Replace G+/- in ``params`` by the values implied by the drive spec."""
    dc = dressed_couplings(ds, params)
    out = check(params.with_(g_plus=dc.g_plus, g_minus=dc.g_minus))
    disp = mech_displacement(ds, params, dc)
    return DriveReport(
        params=out,
        couplings=dc,
        displacement=disp,
        cavity_shift=ds.g0 * disp.cavity_shift,
        validity_ratio=validity_ratio(out),
    )
