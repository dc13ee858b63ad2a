"""Command-line front end: single evaluations, parameter sweeps and figure presets.

Every command writes CSV files into ``--out``. Files start with ``#``
provenance lines; only the final ``# generated:`` line depends on the clock.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import functools
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classical import DriveSpec, drive_to_params
from .langevin import (
    NonConvergentError,
    UnstableDriftError,
    assemble,
    check_physical,
    mech_quadrature_variance,
    mechanical_variance,
    steady_state_algebraic,
    steady_state_periodic,
)
from .model import (
    R_MAX,
    ParameterError,
    SystemParams,
    format_params,
    load_params,
    params_from_mapping,
    params_to_mapping,
    parse_params_text,
    symmetric_setting,
    validate,
)
from .optimize import (
    NoInteriorMinimumError,
    OptResult,
    asymmetric_j_opt,
    j_opt_closed_form,
    j_opt_numeric,
    minimize_over_r,
    r_opt_approx,
    r_opt_exact,
    r_opt_langevin,
    variance_at_ropt,
)
from .spectrum import env_summary, response, spectral_features
from .weakcoupling import (
    UnstableError,
    rates,
    squeezing_db,
    stability,
    variance_from_rates,
    variance_x1,
)

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGENT = 2

# tolerances of the periodic Langevin solver used by sweeps and presets
LANGEVIN_TOL = 1e-12
LANGEVIN_MAX_PERIODS = 10**9

SPECTRUM_HEADER = ["omega", "s_op", "re_A", "im_A"]
FEATURES_HEADER = ["kind", "location_predicted", "location_measured", "width_predicted", "width_measured"]
VARIANCE_HEADER = [
    "variance_x1", "s_db", "stable", "c_e", "eps_plus", "eps_minus", "gamma_minus", "gamma_plus", "gamma_s",
]
LANGEVIN_HEADER = ["variance_x1_avg", "variance_x1_strobe", "s_db_avg", "converged", "periods_used"]
OPTIMIZE_HEADER = ["over", "argmin", "variance", "s_db", "method", "flags"]

PRESETS = ("fig1b", "fig2a", "fig2b", "fig3", "fig4", "fig5a", "fig5b", "fig5c", "fig6")


class ValidationError(Exception):
    """Bad user input; maps to exit code 1."""


# ---------------------------------------------------------------------------
# CSV output


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[list], provenance: dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# optosqueeze {__version__} schema v{SCHEMA_VERSION}\n")
        for key, value in provenance.items():
            fh.write(f"# {key}: {value}\n")
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        fh.write(f"# generated: {stamp}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Header and rows of a file written by ``write_csv`` (comment lines skipped)."""
    with Path(path).open(encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, list(reader)


def _params_note(params: SystemParams) -> str:
    return " ".join(f"{k}={v!r}" for k, v in params_to_mapping(params).items())


def _pmap(func, items, threads: int) -> list:
    """Order-preserving map, in worker processes when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) < 2:
        return [func(x) for x in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# sweeps

PLAIN_AXES = {
    "kappa_c": "kappa_c",
    "kappa_1": "kappa_1",
    "kappa_2": "kappa_2",
    "delta_1": "delta_1",
    "delta_2": "delta_2",
    "j_1": "j_1",
    "j_2": "j_2",
    "g_minus": "g_minus",
    "g_plus": "g_plus",
    "gamma": "gamma_m",
    "n_th": "n_th",
}
DERIVED_AXES = ("kappa", "j", "j_ratio", "r")
AXIS_NAMES = tuple(PLAIN_AXES) + DERIVED_AXES
METRICS = ("variance_analytic", "variance_numeric", "s_db", "eps", "c_e", "r_opt", "stability")
ENGINES = ("weakcoupling", "langevin", "both")


@dataclass(frozen=True)
class Axis:
    name: str
    start: float
    stop: float
    count: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def validate(self) -> None:
        if self.name not in AXIS_NAMES:
            raise ValidationError(f"unknown axis '{self.name}'; choose from {', '.join(AXIS_NAMES)}")
        if self.count < 2:
            raise ValidationError(f"axis '{self.name}' needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError(f"axis '{self.name}' range is not finite")
        if self.scale not in ("linear", "log"):
            raise ValidationError(f"axis scale must be linear or log, got '{self.scale}'")
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise ValidationError(f"log axis '{self.name}' needs a positive range")

    @classmethod
    def parse(cls, text: str) -> "Axis":
        """``name:start:stop:count[:log]``."""
        parts = text.split(":")
        if len(parts) not in (4, 5):
            raise ValidationError(f"axis '{text}' is not name:start:stop:count[:scale]")
        try:
            return cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]), parts[4] if len(parts) == 5 else "linear")
        except ValueError as exc:
            raise ValidationError(f"axis '{text}': {exc}") from None


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams
    axes: tuple[Axis, ...]
    metrics: tuple[str, ...] = ("variance_analytic", "s_db", "stability")
    engine: str = "weakcoupling"
    tol: float = LANGEVIN_TOL
    max_periods: int = LANGEVIN_MAX_PERIODS

    def validate(self) -> "SweepSpec":
        if not self.axes:
            raise ValidationError("sweep needs at least one axis")
        for axis in self.axes:
            axis.validate()
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate sweep axis")
        bad = [m for m in self.metrics if m not in METRICS]
        if bad or not self.metrics:
            raise ValidationError(f"unknown metrics {bad}; choose from {', '.join(METRICS)}")
        if self.engine not in ENGINES:
            raise ValidationError(f"engine must be one of {', '.join(ENGINES)}")
        return self

    @classmethod
    def from_mapping(cls, data: dict, base_dir: Path = Path("."), base: SystemParams | None = None) -> "SweepSpec":
        raw = data.get("base")
        if isinstance(raw, dict):
            base = params_from_mapping(raw)
        elif isinstance(raw, str):
            base = load_params(base_dir / raw)
        if base is None:
            raise ValidationError("sweep spec needs a base parameter set")
        axes = tuple(
            Axis(a["name"], float(a["start"]), float(a["stop"]), int(a["count"]), a.get("scale", "linear"))
            for a in data.get("axes", [])
        )
        kwargs = {}
        if "tol" in data:
            kwargs["tol"] = float(data["tol"])
        if "max_periods" in data:
            kwargs["max_periods"] = int(data["max_periods"])
        return cls(
            base=base,
            axes=axes,
            metrics=tuple(data.get("metrics", cls.metrics)),
            engine=data.get("engine", "weakcoupling"),
            **kwargs,
        ).validate()

    def provenance(self) -> dict[str, object]:
        return {
            "engine": self.engine,
            "tolerances": f"langevin tol={self.tol!r} max_periods={self.max_periods}",
            "axes": "; ".join(f"{a.name} {a.scale} {a.start!r}..{a.stop!r} x{a.count}" for a in self.axes),
            "base": _params_note(self.base),
        }


def apply_axes(base: SystemParams, assignment: dict[str, float]) -> SystemParams:
    """Apply axis values: plain keys, then kappa/j, then j_ratio, then r.

    Sweeping g_minus keeps the base drive ratio unless g_plus is also swept.
    """
    plain = {PLAIN_AXES[k]: v for k, v in assignment.items() if k in PLAIN_AXES}
    p = base.with_(**plain)
    if "g_minus" in assignment and "g_plus" not in assignment and base.g_minus > 0:
        p = p.with_(r=base.r)
    if "kappa" in assignment:
        p = p.with_(kappa_1=assignment["kappa"], kappa_2=assignment["kappa"])
    if "j" in assignment:
        p = p.with_(j_1=assignment["j"], j_2=assignment["j"])
    if "j_ratio" in assignment:
        p = p.with_(j_1=assignment["j_ratio"] * p.j_2)
    if "r" in assignment:
        p = p.with_(r=assignment["r"])
    return p


def metric_columns(metrics: tuple[str, ...], engine: str) -> list[str]:
    analytic = engine in ("weakcoupling", "both")
    numeric = engine in ("langevin", "both")
    cols: list[str] = []
    for m in metrics:
        if m == "variance_analytic" and analytic:
            cols.append("variance_analytic")
        elif m == "variance_numeric" and numeric:
            cols.append("variance_numeric")
        elif m == "s_db":
            cols += (["s_db_analytic"] if analytic else []) + (["s_db_numeric"] if numeric else [])
        elif m == "eps":
            cols += ["eps_plus", "eps_minus"]
        elif m in ("c_e", "r_opt"):
            cols.append(m)
        elif m == "stability":
            cols.append("stable")
    if engine == "both" and "variance_analytic" in metrics and "variance_numeric" in metrics:
        cols.append("rel_dev")
    return cols


def analytic_variance(p: SystemParams, env=None) -> float:
    """Weak-coupling variance; the rate form continues it past G+ = G-."""
    env = env_summary(p) if env is None else env
    if p.r <= R_MAX:
        return variance_x1(p, env)
    if not stability(p, env).stable:
        raise UnstableError("heating exceeds cooling: no steady state")
    return variance_from_rates(rates(p, env))


def _analytic_r_opt(p: SystemParams, env) -> float:
    if p.is_symmetric and env.eps < 1:
        return r_opt_exact(env, p.n_th)

    def objective(r: float) -> float:
        q = p.with_(r=r)
        return variance_x1(q, env_summary(q))

    return minimize_over_r(objective, points=201).argmin


def evaluate_point(
    p: SystemParams,
    metrics: tuple[str, ...],
    engine: str,
    tol: float = LANGEVIN_TOL,
    max_periods: int = LANGEVIN_MAX_PERIODS,
) -> tuple[dict[str, object], list[str]]:
    """Metric values and diagnostic flags for one parameter set. Never raises."""
    flags: list[str] = []
    out: dict[str, object] = {}
    diags = validate(p)
    if any(d.level == "error" for d in diags):
        return out, ["invalid"]
    flags += [d.code.replace(" ", "-") for d in diags]

    env = env_summary(p)
    stab = stability(p, env)
    if "stability" in metrics:
        out["stable"] = stab.stable
    if "eps" in metrics:
        out["eps_plus"], out["eps_minus"] = env.eps_plus, env.eps_minus
    if "c_e" in metrics:
        out["c_e"] = env.c_e
    if "r_opt" in metrics:
        try:
            out["r_opt"] = _analytic_r_opt(p, env)
        except (ArithmeticError, ValueError):
            flags.append("no-r-opt")

    analytic = None
    if engine in ("weakcoupling", "both") and ("variance_analytic" in metrics or "s_db" in metrics):
        if stab.stable:
            analytic = analytic_variance(p, env)
            if "variance_analytic" in metrics:
                out["variance_analytic"] = analytic
            if "s_db" in metrics:
                out["s_db_analytic"] = squeezing_db(analytic)
        else:
            flags.append("unstable")

    numeric = None
    if engine in ("langevin", "both") and ("variance_numeric" in metrics or "s_db" in metrics):
        try:
            numeric = mechanical_variance(p, tol=tol, max_periods=max_periods)
        except UnstableDriftError:
            flags.append("unstable-numeric")
        except NonConvergentError:
            flags.append("nonconvergent")
        if numeric is not None:
            if "variance_numeric" in metrics:
                out["variance_numeric"] = numeric
            if "s_db" in metrics:
                out["s_db_numeric"] = squeezing_db(numeric)
    if analytic is not None and numeric is not None:
        out["rel_dev"] = abs(numeric - analytic) / analytic
    return out, flags


def _sweep_point(spec: SweepSpec, assignment: tuple[tuple[str, float], ...]):
    try:
        p = apply_axes(spec.base, dict(assignment))
    except (ParameterError, ValueError, TypeError):
        return {}, ["invalid"]
    return evaluate_point(p, spec.metrics, spec.engine, spec.tol, spec.max_periods)


@dataclass
class SweepResult:
    header: list[str]
    rows: list[list]
    provenance: dict[str, object] = field(default_factory=dict)


def run_sweep(spec: SweepSpec, threads: int = 1) -> SweepResult:
    """Evaluate every grid point; row order is mixed-radix with the last axis fastest."""
    spec.validate()
    names = [a.name for a in spec.axes]
    grid = list(itertools.product(*(a.values() for a in spec.axes)))
    jobs = [tuple(zip(names, (float(x) for x in point))) for point in grid]
    results = _pmap(functools.partial(_sweep_point, spec), jobs, threads)
    cols = metric_columns(spec.metrics, spec.engine)
    rows = []
    for point, (values, flags) in zip(grid, results):
        rows.append([float(x) for x in point] + [values.get(c) for c in cols] + [";".join(flags)])
    return SweepResult(header=names + cols + ["flags"], rows=rows, provenance=spec.provenance())


# ---------------------------------------------------------------------------
# presets

FIG1B_KAPPA = 0.5
FIG2_KAPPA_C = 10.0
FIG2_KAPPA = 0.1
FIG3 = dict(kappa_c=10.0, kappa=0.2, j=5.0, gamma_m=1e-5, n_th=10.0)
FIG3_G_MINUS = (0.005, 0.01, 0.02)
FIG5 = dict(kappa_c=10.0, kappa=0.1, g_minus=0.1, gamma_m=1e-5)
FIG6 = dict(kappa_c=10.0, kappa=0.2, g_minus=0.1, r=0.8, n_th=10.0)
FIG6_GAMMA = 0.2

PRESET_POINTS = {"fig1b": 8, "fig2a": 4001, "fig2b": 4001, "fig3": 20, "fig4": 12, "fig5a": 40, "fig5b": 13, "fig5c": 13, "fig6": 25}


@dataclass
class PresetFile:
    name: str
    header: list[str]
    rows: list[list]
    provenance: dict[str, object]


def _fig1b_point(args):
    j, kappa_c = args
    p = symmetric_setting(kappa_c=kappa_c, kappa=FIG1B_KAPPA, j=j, g_minus=0.1, r=0.0, gamma_m=1e-5, n_th=0.0)
    env = env_summary(p)
    flags = []
    try:
        r_a = r_opt_exact(env, 0.0)
        v_a = variance_at_ropt(env, 0.0)
    except ValueError:
        r_a = v_a = None
        flags.append("no-analytic-optimum")
    res = r_opt_langevin(p, tol=1e-10)
    if not math.isfinite(res.variance):
        flags.append("nonconvergent")
        r_n = v_n = None
    else:
        r_n, v_n = res.argmin, res.variance
        flags += list(res.flags)
    return [
        kappa_c, r_n, v_n, squeezing_db(v_n) if v_n else None,
        r_a, v_a, squeezing_db(v_a) if v_a else None, ";".join(flags),
    ]


def preset_fig1b(points: int, threads: int, **_) -> list[PresetFile]:
    kcs = np.geomspace(0.5, 10.0, points)
    header = ["kappa_c", "r_opt_numeric", "variance_numeric", "s_db_numeric",
              "r_opt_analytic", "variance_analytic", "s_db_analytic", "flags"]
    out = []
    for j in (0.0, 10.0):
        rows = _pmap(_fig1b_point, [(j, float(k)) for k in kcs], threads)
        out.append(PresetFile(f"fig1b_J{j:g}", header, rows, {
            "preset": "fig1b",
            "engine": "both (numeric: langevin, r optimized on 61-point grid + golden section)",
            "parameters": f"kappa=0.5 delta=+-2 n_th=0 gamma=1e-05 g_minus=0.1 j={j:g}",
            "axis": f"kappa_c log 0.5..10 x{points} (range reconstructed from the figure)",
        }))
    return out


def _spectrum_rows(p: SystemParams, omegas: np.ndarray) -> list[list]:
    a = np.atleast_1d(response(p, omegas))
    s = 2.0 * np.real(1.0 / a)
    return [[float(w), float(sv), float(av.real), float(av.imag)] for w, av, sv in zip(omegas, a, s)]


def _spectrum_preset(name: str, couplings, points: int) -> list[PresetFile]:
    omegas = np.linspace(-20.0, 20.0, points)
    out = []
    for j1, j2 in couplings:
        p = SystemParams(kappa_c=FIG2_KAPPA_C, kappa_1=FIG2_KAPPA, kappa_2=FIG2_KAPPA, delta_1=2.0,
                         delta_2=-2.0, j_1=j1, j_2=j2, g_plus=0.0, g_minus=0.0, gamma_m=1e-5)
        label = f"J{j1:g}" if j1 == j2 else f"J1_{j1:g}_J2_{j2:g}"
        out.append(PresetFile(f"{name}_{label}", SPECTRUM_HEADER, _spectrum_rows(p, omegas), {
            "preset": name,
            "parameters": f"kappa_c=10 kappa=0.1 delta=+-2 j_1={j1:g} j_2={j2:g}",
            "axis": f"omega linear -20..20 x{points}",
        }))
    return out


def preset_fig2a(points: int, **_) -> list[PresetFile]:
    files = _spectrum_preset("fig2a", [(0.0, 0.0), (0.5, 0.5), (10.0, 10.0)], points)
    rows = []
    for j in (0.0, 0.5, 10.0):
        p = symmetric_setting(kappa_c=FIG2_KAPPA_C, kappa=FIG2_KAPPA, j=j, g_minus=0.0, r=0.0, gamma_m=1e-5)
        rep = spectral_features(p)
        for f in rep.features:
            rows.append([j, rep.regime, f.kind, f.location_predicted, f.location_measured,
                         f.width_predicted, f.width_measured])
    files.append(PresetFile("fig2a_features", ["j", "regime"] + FEATURES_HEADER, rows,
                            {"preset": "fig2a", "note": "widths are half widths at half maximum"}))
    return files


def preset_fig2b(points: int, **_) -> list[PresetFile]:
    return _spectrum_preset("fig2b", [(1.0, 3.0), (3.0, 3.0), (0.0, 0.0)], points)


def _r_stab(p: SystemParams) -> float:
    env = env_summary(p)
    return math.sqrt((1 - env.eps_minus + 1 / env.c_e) / (1 - env.eps_plus))


def _fig3_point(args):
    g_minus, r = args
    p = symmetric_setting(g_minus=g_minus, r=r, **FIG3)
    values, flags = evaluate_point(p, ("variance_analytic", "variance_numeric", "s_db"), "both")
    return [g_minus, r, values.get("variance_analytic"), values.get("variance_numeric"), values.get("rel_dev"),
            values.get("s_db_analytic"), values.get("s_db_numeric"), ";".join(flags)]


def preset_fig3(points: int, threads: int, **_) -> list[PresetFile]:
    header = ["g_minus", "r", "variance_analytic", "variance_numeric", "rel_dev",
              "s_db_analytic", "s_db_numeric", "flags"]
    out = []
    optima = []
    for gm in FIG3_G_MINUS:
        p = symmetric_setting(g_minus=gm, r=0.0, **FIG3)
        rs = np.linspace(0.0, 0.95 * _r_stab(p), points)
        rows = _pmap(_fig3_point, [(gm, float(r)) for r in rs], threads)
        out.append(PresetFile(f"fig3_g{gm:g}", header, rows, {
            "preset": "fig3", "engine": "both",
            "tolerances": f"langevin tol={LANGEVIN_TOL!r} max_periods={LANGEVIN_MAX_PERIODS}",
            "parameters": "j=5 kappa=0.2 kappa_c=10 gamma=1e-05 n_th=10 g_minus=" + repr(gm),
            "axis": f"r linear 0..0.95 r_stab x{points}",
        }))
        env = env_summary(p)
        r_ap, v_ap, fl = r_opt_approx(env, p.n_th)
        optima.append([gm, r_ap, v_ap, r_opt_exact(env, p.n_th), variance_at_ropt(env, p.n_th), ";".join(fl)])
    out.append(PresetFile("fig3_optima", ["g_minus", "r_opt_approx", "variance_approx", "r_opt_exact",
                                          "variance_exact", "flags"], optima, {"preset": "fig3"}))
    return out


def _fig4_point(g_minus: float):
    p = symmetric_setting(g_minus=g_minus, r=0.0, **FIG3)
    env = env_summary(p)
    r_ap, v_ap, flags = r_opt_approx(env, p.n_th)
    flags = list(flags)
    r_ex, v_ex = r_opt_exact(env, p.n_th), variance_at_ropt(env, p.n_th)
    res = r_opt_langevin(p, tol=LANGEVIN_TOL)
    r_n = v_n = None
    if math.isfinite(res.variance):
        r_n, v_n = res.argmin, res.variance
        flags += list(res.flags)
    else:
        flags.append("nonconvergent")
    return [g_minus, r_ap, v_ap, r_ex, v_ex, squeezing_db(v_ex), r_n, v_n,
            squeezing_db(v_n) if v_n else None, g_minus < FIG3["kappa"], ";".join(flags)]


def preset_fig4(points: int, threads: int, **_) -> list[PresetFile]:
    gms = [float(g) for g in np.geomspace(0.005, 1.5, points)]
    rows = _pmap(_fig4_point, gms, threads)
    header = ["g_minus", "r_opt_approx", "variance_approx", "r_opt_exact", "variance_exact", "s_db_exact",
              "r_opt_numeric", "variance_numeric", "s_db_numeric", "weak_coupling", "flags"]
    return [PresetFile("fig4", header, rows, {
        "preset": "fig4", "engine": "both (numeric: langevin, r optimized)",
        "parameters": "j=5 kappa=0.2 kappa_c=10 gamma=1e-05 n_th=10",
        "axis": f"g_minus log 0.005..1.5 x{points} (range reconstructed from the figure)",
    })]


def preset_fig5a(points: int, **_) -> list[PresetFile]:
    rows = []
    for j in np.geomspace(0.3, 100.0, points):
        p = symmetric_setting(j=float(j), r=0.0, n_th=10.0, **FIG5)
        env = env_summary(p)
        try:
            r, v = r_opt_exact(env, p.n_th), variance_at_ropt(env, p.n_th)
            rows.append([float(j), r, v, squeezing_db(v), 1 / env.c_e, env.eps, ""])
        except ValueError:
            rows.append([float(j), None, None, None, 1 / env.c_e, env.eps, "no-optimum"])
    return [PresetFile("fig5a", ["j", "r_opt", "variance", "s_db", "inv_c_e", "eps", "flags"], rows, {
        "preset": "fig5a", "parameters": "kappa_c=10 kappa=0.1 gamma=1e-05 g_minus=0.1 n_th=10",
        "axis": f"j log 0.3..100 x{points}",
    })]


def _fig5_rows(points: int) -> dict[float, list[list]]:
    out = {}
    for n in (0.0, 10.0):
        rows = []
        for kc in np.geomspace(1.0, 100.0, points):
            p = symmetric_setting(j=1.0, r=0.0, n_th=n, **{**FIG5, "kappa_c": float(kc)})
            cf = j_opt_closed_form(p)
            flags = []
            try:
                num = j_opt_numeric(p, j_range=(0.1, 1000.0))
                j_n, v_n = num.argmin, num.variance
            except NoInteriorMinimumError:
                j_n = v_n = None
                flags.append("no-interior-minimum")
            rows.append([float(kc), j_n, cf.j_opt, v_n, cf.variance_opt, cf.c_th, ";".join(flags)])
        out[n] = rows
    return out


def preset_fig5b(points: int, **_) -> list[PresetFile]:
    data = _fig5_rows(points)
    return [PresetFile(f"fig5b_nth{n:g}", ["kappa_c", "j_opt_numeric", "j_opt_closed"],
                       [[r[0], r[1], r[2]] for r in rows], {
                           "preset": "fig5b", "parameters": f"kappa=0.1 gamma=1e-05 g_minus=0.1 n_th={n:g}",
                           "axis": f"kappa_c log 1..100 x{points} (swept variable reconstructed)",
                       }) for n, rows in data.items()]


def preset_fig5c(points: int, **_) -> list[PresetFile]:
    data = _fig5_rows(points)
    header = ["kappa_c", "variance_numeric", "variance_closed", "s_db_numeric", "s_db_closed", "flags"]
    files = []
    for n, rows in data.items():
        body = [[r[0], r[3], r[4], squeezing_db(r[3]) if r[3] else None, squeezing_db(r[4]), r[6]] for r in rows]
        files.append(PresetFile(f"fig5c_nth{n:g}", header, body, {
            "preset": "fig5c", "parameters": f"kappa=0.1 gamma=1e-05 g_minus=0.1 n_th={n:g}",
            "axis": f"kappa_c log 1..100 x{points} (swept variable reconstructed)",
        }))
    return files


def preset_fig6(points: int, gamma: float | None = None, **_) -> list[PresetFile]:
    gam = FIG6_GAMMA if gamma is None else gamma
    base = symmetric_setting(j=1.0, gamma_m=gam, **FIG6)
    rows = []
    for j2 in np.geomspace(0.1, 10.0, points):
        try:
            res = asymmetric_j_opt(base, None, float(j2))
            rows.append([float(j2), res.argmin, res.variance, squeezing_db(res.variance), res.certified, ""])
        except NoInteriorMinimumError:
            rows.append([float(j2), None, None, None, False, "no-interior-minimum"])
    return [PresetFile("fig6", ["j_2", "ratio_opt", "variance", "s_db", "certified", "flags"], rows, {
        "preset": "fig6",
        "parameters": f"g_minus=0.1 g_plus=0.08 kappa_c=10 kappa=0.2 n_th=10 gamma={gam!r}",
        "note": "gamma=0.2 as printed for this figure; override with --gamma",
        "axis": f"j_2 log 0.1..10 x{points}",
    })]


PRESET_FUNCS = {
    "fig1b": preset_fig1b, "fig2a": preset_fig2a, "fig2b": preset_fig2b, "fig3": preset_fig3,
    "fig4": preset_fig4, "fig5a": preset_fig5a, "fig5b": preset_fig5b, "fig5c": preset_fig5c,
    "fig6": preset_fig6,
}


def run_preset(name: str, out_dir: Path, threads: int = 1, points: int | None = None,
               gamma: float | None = None) -> list[Path]:
    if name not in PRESET_FUNCS:
        raise ValidationError(f"unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    n = PRESET_POINTS[name] if points is None else points
    if n < 2:
        raise ValidationError("presets need at least 2 points per axis")
    files = PRESET_FUNCS[name](points=n, threads=threads, gamma=gamma)
    return [write_csv(Path(out_dir) / f"{f.name}.csv", f.header, f.rows, f.provenance) for f in files]


# ---------------------------------------------------------------------------
# subcommands


def _load(args) -> SystemParams:
    if not args.params:
        raise ValidationError("--params FILE is required for this command")
    p = load_params(args.params)
    for d in validate(p):
        print(str(d), file=sys.stderr)
    return p


def cmd_spectrum(args) -> int:
    p = _load(args)
    split = math.sqrt(2 * max(p.j_1, p.j_2) ** 2 + 4 * p.omega_m**2)
    wmax = args.wmax if args.wmax is not None else max(2 * split, p.kappa_c)
    omegas = np.linspace(-wmax, wmax, args.points)
    prov = {"command": "spectrum", "parameters": _params_note(p)}
    paths = [write_csv(args.out / "spectrum.csv", SPECTRUM_HEADER, _spectrum_rows(p, omegas), prov)]
    if p.is_symmetric:
        rep = spectral_features(p)
        rows = [[f.kind, f.location_predicted, f.location_measured, f.width_predicted, f.width_measured]
                for f in rep.features]
        prov = {**prov, "regime": rep.regime, "grid_spacing": repr(rep.grid_spacing),
                "note": "widths are half widths at half maximum"}
        paths.append(write_csv(args.out / "features.csv", FEATURES_HEADER, rows, prov))
    else:
        print("features skipped: parameters are not in the symmetric setting", file=sys.stderr)
    _report(paths)
    return EXIT_OK


def cmd_variance(args) -> int:
    p = _load(args)
    env = env_summary(p)
    rs = rates(p, env)
    stab = stability(p, env)
    var = analytic_variance(p, env) if stab.stable else None
    row = [var, squeezing_db(var) if var else None, stab.stable, env.c_e, env.eps_plus, env.eps_minus,
           rs.gamma_minus, rs.gamma_plus, rs.gamma_s]
    path = write_csv(args.out / "variance.csv", VARIANCE_HEADER, [row],
                     {"command": "variance", "engine": "weakcoupling", "parameters": _params_note(p)})
    _report([path])
    if not stab.stable:
        print("unstable: heating exceeds cooling, no steady state", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_langevin(args) -> int:
    p = _load(args)
    dd = assemble(p, include_cr=args.cr)
    if args.cr:
        res = steady_state_periodic(dd, tol=args.tol, max_periods=args.max_periods)
        avg, strobe, periods = res.average, res.strobe, res.periods_used
    else:
        avg = strobe = steady_state_algebraic(dd)
        periods = 0
    for problem in check_physical(avg):
        print(f"warning[physicality]: {problem}", file=sys.stderr)
    v_avg = mech_quadrature_variance(avg)
    row = [v_avg, mech_quadrature_variance(strobe), squeezing_db(v_avg), True, periods]
    prov = {"command": "langevin", "engine": "langevin",
            "counter_rotating": "kept" if args.cr else "dropped",
            "tolerances": f"tol={args.tol!r} max_periods={args.max_periods}",
            "parameters": _params_note(p)}
    paths = [write_csv(args.out / "langevin.csv", LANGEVIN_HEADER, [row], prov)]
    if args.theta_scan:
        thetas = np.linspace(0.0, math.pi, args.theta_scan, endpoint=False)
        rows = [[float(t), mech_quadrature_variance(avg, float(t))] for t in thetas]
        paths.append(write_csv(args.out / "theta_scan.csv", ["theta", "variance"], rows, prov))
    _report(paths)
    return EXIT_OK


DRIVE_KEYS = ("alpha_plus", "alpha_plus_im", "alpha_minus", "alpha_minus_im", "g0", "omega_c")


def cmd_drive(args) -> int:
    values = parse_params_text(Path(args.params).read_text()) if args.params else {}
    values.update(parse_params_text(Path(args.drive).read_text()))
    drive = {k: values.pop(k) for k in DRIVE_KEYS if k in values}
    if "g0" not in drive:
        raise ValidationError("drive file needs g0")
    values.setdefault("g_minus", 0.0)
    values.pop("r", None)
    values.pop("g_plus", None)
    base = params_from_mapping(values)
    ds = DriveSpec.for_params(
        complex(drive.get("alpha_plus", 0.0), drive.get("alpha_plus_im", 0.0)),
        complex(drive.get("alpha_minus", 0.0), drive.get("alpha_minus_im", 0.0)),
        drive["g0"], base, omega_c=drive.get("omega_c", 0.0),
    )
    rep = drive_to_params(ds, base)
    diags = validate(rep.params)
    for d in diags:
        print(str(d), file=sys.stderr)
    args.out.mkdir(parents=True, exist_ok=True)
    ppath = args.out / "drive_params.txt"
    ppath.write_text("# dressed couplings from the drive spec\n" + format_params(rep.params))
    c, d = rep.couplings, rep.displacement
    header = ["g_plus", "g_minus", "abar_plus_re", "abar_plus_im", "abar_minus_re", "abar_minus_im",
              "beta_static_re", "beta_static_im", "beta_minus_re", "beta_minus_im", "beta_plus_re",
              "beta_plus_im", "cavity_shift", "validity_ratio", "warnings"]
    row = [c.g_plus, c.g_minus, c.alpha_bar_plus.real, c.alpha_bar_plus.imag, c.alpha_bar_minus.real,
           c.alpha_bar_minus.imag, d.static.real, d.static.imag, d.minus.real, d.minus.imag, d.plus.real,
           d.plus.imag, rep.cavity_shift, rep.validity_ratio, ";".join(x.code for x in diags)]
    path = write_csv(args.out / "drive.csv", header, [row], {
        "command": "drive", "note": "phases of the dressed amplitudes are reported but not used downstream",
    })
    _report([ppath, path])
    return EXIT_OK


def _opt_row(over: str, res: OptResult) -> list:
    return [over, res.argmin, res.variance, res.s_db, res.method, ";".join(res.flags)]


def cmd_optimize(args) -> int:
    p = _load(args)
    rows = []
    closed = args.method in ("closed", "both")
    numeric = args.method in ("numeric", "both")
    if args.over == "r":
        env = env_summary(p)
        if closed:
            r = r_opt_exact(env, p.n_th)
            rows.append(_opt_row("r", OptResult(r, variance_at_ropt(env, p.n_th), "closed-form")))
            r_ap, v_ap, fl = r_opt_approx(env, p.n_th)
            rows.append(_opt_row("r", OptResult(r_ap, v_ap, "approximate", fl)))
        if numeric:
            if args.engine == "langevin":
                res = r_opt_langevin(p, tol=args.tol, max_periods=args.max_periods)
            else:
                res = minimize_over_r(lambda r: analytic_variance(p.with_(r=r)))
            rows.append(_opt_row("r", res))
    elif args.over == "j":
        if closed:
            cf = j_opt_closed_form(p)
            rows.append(_opt_row("j", OptResult(cf.j_opt, cf.variance_opt, "closed-form")))
        if numeric:
            rows.append(_opt_row("j", j_opt_numeric(p, j_range=(args.j_min, args.j_max))))
    else:
        if args.method == "closed":
            raise ValidationError("no closed form exists for the J1/J2 ratio; use --method numeric")
        j2 = p.j_2 if args.j2 is None else args.j2
        rows.append(_opt_row("j_ratio", asymmetric_j_opt(p, None, j2, optimize_r=args.reoptimize_r)))
    path = write_csv(args.out / "optimize.csv", OPTIMIZE_HEADER, rows,
                     {"command": "optimize", "over": args.over, "parameters": _params_note(p)})
    _report([path])
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.spec:
        spec_path = Path(args.spec)
        data = json.loads(spec_path.read_text())
        base = load_params(args.params) if args.params else None
        spec = SweepSpec.from_mapping(data, spec_path.parent, base)
    else:
        base = _load(args)
        spec = SweepSpec(
            base=base,
            axes=tuple(Axis.parse(a) for a in args.axis or []),
            metrics=tuple(args.metrics.split(",")),
            engine=args.engine,
            tol=args.tol,
            max_periods=args.max_periods,
        ).validate()
    res = run_sweep(spec, threads=args.threads)
    path = write_csv(args.out / f"{args.name}.csv", res.header, res.rows, {"command": "sweep", **res.provenance})
    _report([path])
    return EXIT_OK


def cmd_preset(args) -> int:
    paths = run_preset(args.name, args.out, threads=args.threads, points=args.points, gamma=args.gamma)
    _report(paths)
    return EXIT_OK


def _report(paths) -> None:
    for p in paths:
        print(p)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="parameter file (key = value lines)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")

    langevin_opts = argparse.ArgumentParser(add_help=False)
    langevin_opts.add_argument("--tol", type=float, default=1e-8, help="relative one-period residual")
    langevin_opts.add_argument("--max-periods", type=int, default=10**6)

    parser = argparse.ArgumentParser(prog="optosqueeze", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", parents=[common], help="optical bath spectrum and its features")
    sp.add_argument("--points", type=int, default=4001)
    sp.add_argument("--wmax", type=float, default=None, help="half width of the frequency window")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("variance", parents=[common], help="weak-coupling variance and rates")
    sp.set_defaults(func=cmd_variance)

    sp = sub.add_parser("langevin", parents=[common, langevin_opts], help="exact linear steady state")
    sp.add_argument("--cr", action=argparse.BooleanOptionalAction, default=True,
                    help="keep the counter-rotating terms (default) or drop them")
    sp.add_argument("--theta-scan", type=int, default=0, metavar="N", help="also scan N quadrature angles")
    sp.set_defaults(func=cmd_langevin)

    sp = sub.add_parser("drive", parents=[common], help="drive amplitudes to dressed couplings")
    sp.add_argument("--drive", required=True, help="drive file: alpha_plus[_im], alpha_minus[_im], g0, omega_c")
    sp.set_defaults(func=cmd_drive)

    sp = sub.add_parser("optimize", parents=[common, langevin_opts], help="optimal r, J or J1/J2")
    sp.add_argument("--over", choices=("r", "j", "j-ratio"), default="r")
    sp.add_argument("--method", choices=("closed", "numeric", "both"), default="both")
    sp.add_argument("--engine", choices=("weakcoupling", "langevin"), default="weakcoupling",
                    help="objective of the numeric r optimization")
    sp.add_argument("--j-min", type=float, default=0.1)
    sp.add_argument("--j-max", type=float, default=100.0)
    sp.add_argument("--j2", type=float, default=None, help="fixed J2 for --over j-ratio")
    sp.add_argument("--reoptimize-r", action="store_true", help="re-optimize G+/G- at every J1/J2")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", parents=[common], help="grid sweep over parameters")
    sp.add_argument("--spec", help="JSON sweep spec (base, axes, metrics, engine)")
    sp.add_argument("--axis", action="append", help="name:start:stop:count[:log]; repeatable")
    sp.add_argument("--metrics", default="variance_analytic,s_db,stability")
    sp.add_argument("--engine", choices=ENGINES, default="weakcoupling")
    sp.add_argument("--tol", type=float, default=LANGEVIN_TOL)
    sp.add_argument("--max-periods", type=int, default=LANGEVIN_MAX_PERIODS)
    sp.add_argument("--name", default="sweep", help="output file stem")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("preset", parents=[common], help="reproduce the data behind a figure")
    sp.add_argument("name", choices=PRESETS)
    sp.add_argument("--points", type=int, default=None, help="override the number of points per curve")
    sp.add_argument("--gamma", type=float, default=None, help="mechanical damping override (fig6)")
    sp.set_defaults(func=cmd_preset)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ParameterError, UnstableError, NoInteriorMinimumError, UnstableDriftError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NonConvergentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT


if __name__ == "__main__":
    sys.exit(main())
