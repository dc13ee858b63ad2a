"""Parameter space of the three-cavity optomechanical squeezer.

Every rate, detuning and coupling is stored in units of the mechanical
frequency, so ``omega_m`` is exactly 1 in the normalized form used by the
rest of the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

__all__ = [
    "Diagnostic",
    "ParameterError",
    "SqueezeParam",
    "SystemParams",
    "load_params",
    "params_from_mapping",
    "params_to_mapping",
    "symmetric_setting",
    "validate",
    "validity_ratio",
    "weak_coupling_limit",
]

# Largest drive ratio for which atanh(r) is evaluated.
R_MAX = 1.0 - 1e-12

# Linearization validity bound: warn when max(G)/max(sqrt(kappa_c), J) exceeds this.
VALIDITY_WARN_RATIO = 0.1


class ParameterError(ValueError):
    """Raised for physically meaningless parameter sets."""


@dataclass(frozen=True)
class SystemParams:
    """Linearized model parameters in units of the mechanical frequency.

    ``delta_i`` is the detuning ``omega_c - omega_i`` of auxiliary cavity i,
    ``j_i`` its tunnel coupling to the main cavity, ``g_plus``/``g_minus``
    the dressed couplings of the blue/red sideband drives.
    """

    kappa_c: float
    kappa_1: float
    kappa_2: float
    delta_1: float
    delta_2: float
    j_1: float
    j_2: float
    g_plus: float
    g_minus: float
    gamma_m: float
    n_th: float = 0.0
    omega_m: float = 1.0

    @property
    def r(self) -> float:
        """Drive ratio G+/G-."""
        if self.g_minus == 0.0:
            return math.inf if self.g_plus > 0 else 0.0
        return self.g_plus / self.g_minus

    @property
    def is_symmetric(self) -> bool:
        """True for the Delta_1 = -Delta_2 = 2, J_1 = J_2, kappa_1 = kappa_2 setting."""
        return (
            math.isclose(self.delta_1, 2.0 * self.omega_m, rel_tol=1e-12)
            and math.isclose(self.delta_2, -2.0 * self.omega_m, rel_tol=1e-12)
            and math.isclose(self.j_1, self.j_2, rel_tol=1e-12, abs_tol=0.0)
            and math.isclose(self.kappa_1, self.kappa_2, rel_tol=1e-12)
        )

    def with_(self, **changes) -> "SystemParams":
        """Copy with some fields replaced. ``r`` resets G+ = r * G-."""
        r = changes.pop("r", None)
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        if r is not None:
            values["g_plus"] = r * values["g_minus"]
        return SystemParams(**values)

    def normalized(self) -> "SystemParams":
        """Rescale every frequency by ``omega_m`` so that ``omega_m == 1``."""
        if self.omega_m == 1.0:
            return self
        w = self.omega_m
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for name in values:
            if name not in ("n_th", "omega_m"):
                values[name] = values[name] / w
        values["omega_m"] = 1.0
        return SystemParams(**values)


@dataclass(frozen=True)
class SqueezeParam:
    """Drive ratio ``r = G+/G-`` and the squeeze parameter with tanh(zeta) = r."""

    r: float
    zeta: float

    @classmethod
    def from_ratio(cls, r: float) -> "SqueezeParam":
        if r < 0:
            raise ParameterError(f"drive ratio must be nonnegative, got {r}")
        if r > R_MAX:
            return cls(r=r, zeta=math.nan)
        return cls(r=r, zeta=math.atanh(r))

    @classmethod
    def from_zeta(cls, zeta: float) -> "SqueezeParam":
        return cls(r=math.tanh(zeta), zeta=zeta)


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" | "warning"
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.level}[{self.code}]: {self.message}"


def validity_ratio(params: SystemParams) -> float:
    """max(G+, G-) / max(sqrt(Omega kappa_c), J_1, J_2).

    The linearized treatment requires this ratio to be much smaller than one.
    """
    g = max(params.g_plus, params.g_minus)
    if g == 0.0:
        return 0.0
    scale = max(math.sqrt(params.omega_m * params.kappa_c), params.j_1, params.j_2)
    return g / scale


def weak_coupling_limit(params: SystemParams) -> float:
    """Smallest damping rate among the cavities that are actually coupled."""
    rates = [params.kappa_c]
    if params.j_1 != 0.0:
        rates.append(params.kappa_1)
    if params.j_2 != 0.0:
        rates.append(params.kappa_2)
    return min(rates)


def validate(params: SystemParams) -> list[Diagnostic]:
    """Collect hard errors and regime warnings for a parameter set."""
    out: list[Diagnostic] = []
    for name in ("kappa_c", "kappa_1", "kappa_2", "gamma_m", "omega_m"):
        value = getattr(params, name)
        if not np.isfinite(value) or value <= 0:
            out.append(Diagnostic("error", "nonpositive damping", f"{name} = {value} must be > 0"))
    for name in ("g_plus", "g_minus", "n_th"):
        value = getattr(params, name)
        if not np.isfinite(value) or value < 0:
            out.append(Diagnostic("error", "negative input", f"{name} = {value} must be >= 0"))
    for name in ("delta_1", "delta_2", "j_1", "j_2"):
        if not np.isfinite(getattr(params, name)):
            out.append(Diagnostic("error", "non-finite input", f"{name} is not finite"))
    if out:
        return out

    kmin = weak_coupling_limit(params)
    g = max(params.g_plus, params.g_minus)
    if g > kmin:
        out.append(
            Diagnostic(
                "warning",
                "weak coupling",
                f"max(G+, G-) = {g:g} exceeds the smallest coupled cavity damping {kmin:g}; "
                "master-equation results are unreliable (threshold G = kappa_min is a package choice)",
            )
        )
    ratio = validity_ratio(params)
    if ratio > VALIDITY_WARN_RATIO:
        out.append(
            Diagnostic(
                "warning",
                "linearization",
                f"G/max(sqrt(Omega kappa_c), J) = {ratio:.3g} > {VALIDITY_WARN_RATIO}",
            )
        )
    return out


def check(params: SystemParams) -> SystemParams:
    """Raise ParameterError if ``validate`` reports any hard error."""
    errors = [d for d in validate(params) if d.level == "error"]
    if errors:
        raise ParameterError("; ".join(str(e) for e in errors))
    return params


def symmetric_setting(
    kappa_c: float,
    kappa: float,
    j: float,
    g_minus: float,
    r: float,
    gamma_m: float,
    n_th: float = 0.0,
) -> SystemParams:
    """Dips at -Delta_i = -/+2 and the peak at 0: Delta_1 = -Delta_2 = 2, J_1 = J_2, kappa_1 = kappa_2."""
    if r < 0:
        raise ParameterError(f"drive ratio must be nonnegative, got {r}")
    params = SystemParams(
        kappa_c=kappa_c,
        kappa_1=kappa,
        kappa_2=kappa,
        delta_1=2.0,
        delta_2=-2.0,
        j_1=j,
        j_2=j,
        g_plus=r * g_minus,
        g_minus=g_minus,
        gamma_m=gamma_m,
        n_th=n_th,
    )
    return check(params)


# ---------------------------------------------------------------------------
# flat key/value parameter files

PARAM_KEYS = (
    "omega",
    "kappa_c",
    "kappa_1",
    "kappa_2",
    "delta_1",
    "delta_2",
    "j_1",
    "j_2",
    "g_minus",
    "r",
    "gamma",
    "n_th",
)


def params_from_mapping(values: dict[str, float]) -> SystemParams:
    """Build normalized params from a flat mapping of file keys.

    Absolute values are divided by ``omega`` when it is given. The auxiliary
    keys fall back to the symmetric setting using ``kappa`` and ``j``.
    """
    v = {k: float(x) for k, x in values.items()}
    unknown = set(v) - set(PARAM_KEYS) - {"kappa", "j", "g_plus"}
    if unknown:
        raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")
    omega = v.get("omega", 1.0)
    if omega <= 0:
        raise ParameterError("omega must be positive")

    def pick(key: str, fallback_key: str | None = None, default: float | None = None) -> float:
        if key in v:
            return v[key]
        if fallback_key is not None and fallback_key in v:
            return v[fallback_key]
        if default is not None:
            return default
        raise ParameterError(f"missing parameter '{key}'")

    g_minus = pick("g_minus")
    if "g_plus" in v:
        g_plus = v["g_plus"]
    else:
        g_plus = pick("r", default=0.0) * g_minus
    params = SystemParams(
        kappa_c=pick("kappa_c"),
        kappa_1=pick("kappa_1", "kappa"),
        kappa_2=pick("kappa_2", "kappa"),
        delta_1=pick("delta_1", default=2.0 * omega),
        delta_2=pick("delta_2", default=-2.0 * omega),
        j_1=pick("j_1", "j"),
        j_2=pick("j_2", "j"),
        g_plus=g_plus,
        g_minus=g_minus,
        gamma_m=pick("gamma"),
        n_th=pick("n_th", default=0.0),
        omega_m=omega,
    )
    return check(params.normalized())


def params_to_mapping(params: SystemParams) -> dict[str, float]:
    p = params.normalized()
    out = {
        "omega": 1.0,
        "kappa_c": p.kappa_c,
        "kappa_1": p.kappa_1,
        "kappa_2": p.kappa_2,
        "delta_1": p.delta_1,
        "delta_2": p.delta_2,
        "j_1": p.j_1,
        "j_2": p.j_2,
        "g_minus": p.g_minus,
        "r": p.r,
        "gamma": p.gamma_m,
        "n_th": p.n_th,
    }
    if p.g_minus == 0.0:
        del out["r"]
        out["g_plus"] = p.g_plus
    return out


def parse_params_text(text: str) -> dict[str, float]:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``:`` also separates."""
    out: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        for sep in ("=", ":"):
            if sep in line:
                key, value = line.split(sep, 1)
                break
        else:
            key, _, value = line.partition(" ")
        key = key.strip()
        try:
            out[key] = float(value.strip())
        except ValueError:
            raise ParameterError(f"line {lineno}: cannot parse value for '{key}'") from None
    return out


def load_params(path: str | Path) -> SystemParams:
    return params_from_mapping(parse_params_text(Path(path).read_text()))


def format_params(params: SystemParams) -> str:
    lines = [f"{k} = {v!r}" for k, v in params_to_mapping(params).items()]
    return "\n".join(lines) + "\n"
