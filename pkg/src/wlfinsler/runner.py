"""Config-driven scenarios, verdicts and report files.

A run is described by a :class:`RunConfig` (JSON on disk).  Every scenario
returns a :class:`ScenarioResult` whose verdicts carry a status, the worst
margin and the threshold it was held to.  Reports are written by
:func:`emit_report`; the JSON summary excludes timing so that identical
configs produce identical bytes.

Independent work items (suite families, Bonnet-Myers directions) can be
spread over a process pool whose size comes from ``WLF_WORKERS``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import __version__
from . import models as M
from .congruence import (detect_conjugate_points, evolve_weighted_congruence, focusing_verdict,
                         genericity_probe, jacobi_tensor, point_congruence_tensor)
from .geodesics import integrate_geodesic, orthonormal_frame, transport_frame
from .geometry import (GeometryError, ParameterError, WeightedRicciParams, c_coefficient,
                       epsilon_range_check, metric_values, weighted_ricci_batch)

__all__ = [
    "ConfigError",
    "RunConfig",
    "Verdict",
    "ScenarioResult",
    "load_config",
    "build_model",
    "run_scenario",
    "bonnet_myers_sweep",
    "emit_report",
    "exit_code",
    "summary_json",
]

PASS, FAIL, INCONCLUSIVE, INFO = "pass", "fail", "inconclusive", "info"


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key path."""


# -- configuration ---------------------------------------------------------

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelBlock(_Strict):
    builtin: str | None = "minkowski"
    params: dict[str, float | int | str] = Field(default_factory=dict)
    expression_L: str | None = None
    expression_psi: str | None = None
    dim: int | None = None
    future_seed: list[float] | None = None
    chart_domain: list[list[float]] | None = None
    validate_signature: bool = True

    @model_validator(mode="after")
    def _one_source(self):
        if self.expression_L is not None:
            if self.dim is None or self.future_seed is None:
                raise ValueError("expression models need 'dim' and 'future_seed'")
            self.builtin = None
        elif self.builtin is None:
            raise ValueError("give either 'builtin' or 'expression_L'")
        return self


class NumericBlock(_Strict):
    tol: float = Field(1e-10, gt=0)
    t_span: tuple[float, float] = (0.0, 5.0)
    grid: int = Field(401, ge=11)
    N: float | Literal["inf"] = "inf"
    epsilon: list[float] = Field(default_factory=lambda: [0.0])
    seed: int = 0
    x0: list[float] | None = None
    v0: list[float] | None = None
    t0: float | None = None
    K: float | None = None
    directions: int = Field(6, ge=1)
    samples: int = Field(1024, ge=64)
    expected_components: int | None = None
    radius: float = Field(2.0, gt=0)
    resolution: int = Field(3, ge=2)
    expect_trapped: bool | None = None

    @field_validator("t_span")
    @classmethod
    def _span(cls, v):
        if not v[1] > v[0]:
            raise ValueError("t_span must be increasing")
        return v

    @property
    def N_value(self) -> float:
        return math.inf if self.N == "inf" else float(self.N)


class OutputBlock(_Strict):
    directory: str | None = None
    formats: list[Literal["csv", "json"]] = Field(default_factory=lambda: ["json"])


class RunConfig(_Strict):
    scenario: Literal["geodesic", "congruence", "cones", "bonnet_myers", "surface", "suite"]
    model: ModelBlock = Field(default_factory=ModelBlock)
    numeric: NumericBlock = Field(default_factory=NumericBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)

    def canonical(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()


def _format_errors(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        path = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{path}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from None


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from None
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>: expected a JSON object")
    return parse_config(data)


def build_model(block: ModelBlock, validate: bool | None = None) -> M.SpacetimeModel:
    validate = block.validate_signature if validate is None else validate
    if block.expression_L is not None:
        return M.model_from_expressions(block.expression_L, block.dim, block.future_seed,
                                        block.expression_psi, block.chart_domain)
    return M.builtin_registry(block.builtin, dict(block.params), validate=validate)


# -- results -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    status: str
    margin: float
    threshold: float
    invariant: str
    detail: str = ""

    def as_dict(self):
        return {"status": self.status, "margin": _jsonable(self.margin),
                "threshold": _jsonable(self.threshold), "invariant": self.invariant,
                "detail": self.detail}


def bound_verdict(invariant: str, value: float, threshold: float, detail: str = "") -> Verdict:
    """``pass`` when ``value <= threshold`` (``nan`` counts as a failure)."""
    ok = bool(np.isfinite(value) or value == -math.inf) and value <= threshold
    return Verdict(PASS if ok else FAIL, float(value), threshold, invariant, detail)


@dataclass
class ScenarioResult:
    scenario: str
    verdicts: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)  # name -> (header, rows)
    series: list = field(default_factory=list)  # (series, t, value)
    summary: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    def add(self, name: str, verdict: Verdict):
        self.verdicts[name] = verdict

    def merge(self, other: "ScenarioResult", prefix: str = ""):
        for k, v in other.verdicts.items():
            self.verdicts[prefix + k] = v
        for k, v in other.tables.items():
            self.tables[prefix + k] = v
        self.series.extend(other.series)
        if other.summary:
            self.summary[prefix.rstrip("/") or other.scenario] = other.summary
        for k, v in other.timing.items():
            self.timing[prefix + k] = v

    @property
    def failures(self) -> list:
        return [k for k, v in self.verdicts.items() if v.status == FAIL]


def exit_code(result: ScenarioResult) -> int:
    """0 all pass, 2 any failure, 3 inconclusive without failures."""
    statuses = {v.status for v in result.verdicts.values()}
    if FAIL in statuses:
        return 2
    if INCONCLUSIVE in statuses:
        return 3
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def summary_json(result: ScenarioResult, config: RunConfig | None = None) -> str:
    """JSON summary text: verdicts, scenario data, config echo and hash, version."""
    doc = {
        "version": __version__,
        "scenario": result.scenario,
        "config_hash": config.digest() if config is not None else None,
        "config": json.loads(config.canonical()) if config is not None else None,
        "seed": config.numeric.seed if config is not None else None,
        "exit_code": exit_code(result),
        "verdicts": {k: v.as_dict() for k, v in sorted(result.verdicts.items())},
        "summary": _jsonable(result.summary),
    }
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([("%.17g" % x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def emit_report(result: ScenarioResult, formats, directory, config: RunConfig | None = None) -> list:
    """Write ``summary.json``, per-table CSVs and ``plot_data.csv``.

    Returns the written paths, which are also appended to ``result.artifacts``.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if "json" in formats:
        p = out / "summary.json"
        p.write_text(summary_json(result, config), encoding="utf-8")
        paths.append(p)
    if "csv" in formats:
        for name, (header, rows) in sorted(result.tables.items()):
            safe = name.replace("/", "_")
            p = out / f"{result.scenario}_{safe}.csv"
            rows = [list(r) for r in np.asarray(rows, dtype=object)] if len(rows) else []
            p.write_text(_csv_text(header, rows), encoding="utf-8")
            paths.append(p)
        p = out / "plot_data.csv"
        p.write_text(_csv_text(["series", "t", "value"],
                               [(s, float(t), float(v)) for s, t, v in result.series]),
                     encoding="utf-8")
        paths.append(p)
        vrows = [(k, v.status, float(v.margin), float(v.threshold), v.invariant)
                 for k, v in sorted(result.verdicts.items())]
        p = out / f"{result.scenario}_verdicts.csv"
        p.write_text(_csv_text(["name", "status", "margin", "threshold", "invariant"], vrows),
                     encoding="utf-8")
        paths.append(p)
    result.artifacts.extend(str(p) for p in paths)
    return paths


# -- helpers -----------------------------------------------------------------

def workers() -> int:
    try:
        return max(1, int(os.environ.get("WLF_WORKERS", "1")))
    except ValueError:
        return 1


def pool_map(fn: Callable, tasks: list) -> list:
    """Ordered map, over a process pool when ``WLF_WORKERS > 1``."""
    n = workers()
    if n <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(n, len(tasks))) as ex:
        return list(ex.map(fn, tasks))


def _base_point(model: M.SpacetimeModel, numeric: NumericBlock) -> np.ndarray:
    if numeric.x0 is not None:
        x0 = np.asarray(numeric.x0, dtype=float)
        if x0.size != model.dim:
            raise ConfigError(f"numeric.x0: expected {model.dim} entries")
        return x0
    # the origin unless the chart excludes it, then the middle of the box
    x0 = np.zeros(model.dim)
    for i, (lo, hi) in enumerate(model.chart_domain):
        if not lo <= 0.0 <= hi:
            x0[i] = 0.5 * (lo + hi) if np.isfinite(lo) and np.isfinite(hi) else (lo + 1.0 if np.isfinite(lo) else hi - 1.0)
    return x0


def _initial_velocity(model, x0, numeric):
    if numeric.v0 is not None:
        v0 = np.asarray(numeric.v0, dtype=float)
        if v0.size != model.dim:
            raise ConfigError(f"numeric.v0: expected {model.dim} entries")
        return v0
    return model.seed(x0).copy()


def _geodesic_table(geo):
    header, rows = geo.csv_rows()
    return header, rows


# -- scenarios ---------------------------------------------------------------

def scenario_geodesic(model, numeric: NumericBlock) -> ScenarioResult:
    res = ScenarioResult("geodesic")
    x0 = _base_point(model, numeric)
    v0 = _initial_velocity(model, x0, numeric)
    eps = tuple(sorted(set(numeric.epsilon)))
    geo = integrate_geodesic(model, x0, v0, numeric.t_span, tol=numeric.tol, epsilons=eps)
    drift = geo.L_drift()
    res.add("L_conservation", bound_verdict("sup |L(eta') - L(eta'(t0))|", drift, 1e-7))
    res.tables["geodesic"] = _geodesic_table(geo)
    for j, e in enumerate(eps):
        res.series.extend((f"tau_eps={e:g}", t, v) for t, v in zip(geo.t_grid, geo.tau[:, j]))
    res.series.extend(("psi_eta", t, v) for t, v in zip(geo.t_grid, geo.psi_eta))
    res.summary = {"causal": geo.causal, "event": geo.event, "t_end": geo.t_end,
                   "L_drift": drift, "steps": int(geo.t_grid.size)}
    return res


RESIDUAL_TOL = 1e-6


def congruence_verdicts(rep, tensor, res: ScenarioResult, prefix: str, bishop: bool,
                        horizon: str = INCONCLUSIVE):
    """Append the per-run identity and inequality verdicts of one report.

    ``horizon`` is the status recorded when the focusing bound runs past the
    epsilon-proper time available on the run; batteries that only audit the
    identities pass ``INFO`` so a horizon does not make the whole run
    inconclusive.
    """
    add = lambda k, v: res.add(prefix + k, v)  # noqa: E731
    add("jacobi", bound_verdict("weighted Jacobi equation", rep.max("jacobi_residual"), RESIDUAL_TOL))
    add("riccati", bound_verdict("weighted Riccati equation", rep.max("riccati_residual"), RESIDUAL_TOL))
    if rep.equation != "none":
        add("raychaudhuri", bound_verdict(f"weighted Raychaudhuri equation ({rep.equation})",
                                          rep.max("raychaudhuri_residual"), RESIDUAL_TOL))
    add("inequality", bound_verdict("theta* + c theta^2 <= -Ric_N - tr sigma^2",
                                    rep.max("inequality_margin"), RESIDUAL_TOL))
    if bishop:
        add("bishop", bound_verdict("xi** <= -c xi Ric_N", rep.max("bishop_margin"), RESIDUAL_TOL))
    add("theta_identity", bound_verdict("theta_eps = f (theta - psi')", rep.theta_identity_residual, 1e-7))
    add("trace_free", bound_verdict("trace sigma_eps = 0", rep.trace_free_residual, 1e-9))
    add("ricci_routes", bound_verdict("trace R_(N,eps) = Ric_N(eta*)", rep.ricci_route_residual, 1e-7))
    v = focusing_verdict(rep, tensor)
    status = {"pass": PASS, "fail": FAIL, "inconclusive: horizon": horizon}.get(v.status, INFO)
    margin = math.nan if v.first_zero is None or v.s0 is None else v.first_zero - (v.t0 + v.s0)
    add("focusing_bound", Verdict(status, margin, 0.0, "det J = 0 within [t0, t0 + s0]",
                                  v.status if status in (INFO, INCONCLUSIVE) else v.detail))


def _run_congruence(model, numeric: NumericBlock, res: ScenarioResult, tag: str = ""):
    x0 = _base_point(model, numeric)
    v0 = _initial_velocity(model, x0, numeric)
    geo = integrate_geodesic(model, x0, v0, numeric.t_span, tol=numeric.tol,
                             epsilons=tuple(sorted(set(numeric.epsilon))))
    frame = transport_frame(model, geo, orthonormal_frame(model, geo.x[0], geo.v[0]),
                            samples=numeric.grid)
    tensor = point_congruence_tensor(model, frame)
    res.add(tag + "jacobi_tensor", bound_verdict("J'' + R J = 0", tensor.jacobi_residual(), RESIDUAL_TOL))
    res.add(tag + "lagrange", bound_verdict("J'^T h J - J^T h J' = 0", tensor.lagrange_residual(), 1e-7))
    nt = tensor.nontriviality()
    res.add(tag + "nontrivial", Verdict(PASS if nt > 1e-10 else FAIL, nt, 1e-10,
                                        "min singular value of [J; J']"))
    conj, tang = detect_conjugate_points(tensor)
    runs = {}
    for eps in numeric.epsilon:
        key = f"{tag}N={numeric.N}/eps={eps:g}/"
        rep = evolve_weighted_congruence(model, tensor, numeric.N_value, eps, t0=numeric.t0)
        congruence_verdicts(rep, tensor, res, key, bishop=geo.causal == "timelike")
        header, rows = rep.csv_rows()
        res.tables[key + "congruence"] = (header, rows)
        res.series.extend((key + "theta_eps", t, v) for t, v in zip(rep.times, rep.theta_eps))
        runs[f"eps={eps:g}"] = {"c": rep.c, "t0": rep.t0, "window": list(rep.window),
                                "s0": None if rep.s0 is None else
                                {"status": rep.s0.status, "value": rep.s0.s0}}
    margin, generic = genericity_probe(model, geo, frame)
    res.summary = {
        "causal": geo.causal,
        "conjugate_times": [{"t": p.t, "error": p.error, "multiplicity": p.multiplicity,
                             "sign_change": p.sign_change} for p in conj],
        "tangencies": [p.t for p in tang],
        "conjugate_verdict": "conjugate points found" if conj else "no conjugate points",
        "generic": generic,
        "genericity_margin": margin,
        "runs": runs,
    }
    return tensor


def scenario_congruence(model, numeric: NumericBlock) -> ScenarioResult:
    res = ScenarioResult("congruence")
    _run_congruence(model, numeric, res)
    return res


def scenario_cones(model, numeric: NumericBlock) -> ScenarioResult:
    res = ScenarioResult("cones")
    x0 = _base_point(model, numeric)
    count = M.count_cone_components(model, x0, samples=numeric.samples)
    expected = numeric.expected_components
    if expected is None and model.name == "beem":
        expected = int(model.params["k"])
    if expected is None:
        res.add("components", Verdict(INFO, float(count), math.nan, "cone component count"))
    else:
        res.add("components", Verdict(PASS if count == expected else FAIL, float(abs(count - expected)),
                                      0.0, "cone component count", f"counted {count}, expected {expected}"))
    res.summary = {"components": count, "expected": expected, "samples": numeric.samples}
    res.tables["census"] = (["model", "components", "samples"], [[model.name, count, numeric.samples]])
    return res


class PreconditionError(GeometryError):
    """A hypothesis of a sweep failed at a witness point."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness


def fan_directions(model, x0, count: int, rapidities=(0.0, 0.35, 0.7)) -> list:
    """Unit-ish timelike directions ``cosh(b) e0 + sinh(b) (cos a e1 + sin a e2)``."""
    T = model.seed(x0)
    g = metric_values(model, x0, T)
    e0 = T / math.sqrt(-(T @ g @ T))
    E = orthonormal_frame(model, x0, e0)
    out = [e0.copy()]
    for b in rapidities[1:]:
        for j in range(count):
            a = 2 * math.pi * j / count
            s = math.cos(a) * E[:, 0] + (math.sin(a) * E[:, 1] if E.shape[1] > 1 else 0.0)
            out.append(math.cosh(b) * e0 + math.sinh(b) * s)
    return out


def _bm_task(args):
    spec, x0, v, N, K, T, tol, grid = args
    model = build_model(ModelBlock(**spec))
    geo = integrate_geodesic(model, x0, v, (0.0, T), tol=tol, epsilons=(1.0,))
    frame = transport_frame(model, geo, orthonormal_frame(model, geo.x[0], geo.v[0]), samples=grid)
    ts = frame.times
    x, vv = frame.geodesic.state(ts)
    ric = weighted_ricci_batch(model, x, vv, N)
    F2 = -2.0 * np.asarray(model.lagrangian(list(x), list(vv)), float)
    slack = ric - K * F2
    worst = int(np.argmin(slack))
    tensor = point_congruence_tensor(model, frame)
    conj, _ = detect_conjugate_points(tensor)
    return {"first": conj[0].t if conj else None, "slack": float(slack[worst]),
            "witness_t": float(ts[worst]), "event": geo.event, "t_end": geo.t_end}


def bonnet_myers_sweep(model_block: ModelBlock, numeric: NumericBlock):
    """First conjugate times along a fan of unit timelike geodesics.

    Returns ``(rows, bound, min_slack)`` with rows
    ``(direction, first_time, bound, satisfied)``.  Requires ``n <= N < inf``
    and ``K > 0``; a sample with ``Ric_N < K F^2`` raises
    :class:`PreconditionError` carrying the witness.
    """
    model = build_model(model_block)
    N, K = numeric.N_value, numeric.K
    if K is None or not K > 0:
        raise ParameterError("bonnet_myers needs a positive K")
    if not (model.n <= N < math.inf):
        raise ParameterError("bonnet_myers needs n <= N < inf")
    bound = math.pi * math.sqrt(N / K)
    x0 = _base_point(model, numeric)
    dirs = fan_directions(model, x0, numeric.directions)
    T = 1.15 * bound
    spec = model_block.model_dump()
    tasks = [(spec, x0, v, N, K, T, numeric.tol, numeric.grid) for v in dirs]
    out = pool_map(_bm_task, tasks)
    rows, min_slack = [], math.inf
    for j, r in enumerate(out):
        if r["slack"] < -1e-9 * max(1.0, K):
            raise PreconditionError(f"Ric_N < K F^2 on direction {j} at t={r['witness_t']:.6g}",
                                    {"direction": j, "t": r["witness_t"], "slack": r["slack"]})
        min_slack = min(min_slack, r["slack"])
        first = r["first"]
        ok = first is not None and first <= bound + 1e-3
        rows.append([j, math.nan if first is None else first, bound, int(ok)])
    return rows, bound, min_slack


def scenario_bonnet_myers(model_block: ModelBlock, numeric: NumericBlock) -> ScenarioResult:
    res = ScenarioResult("bonnet_myers")
    try:
        rows, bound, slack = bonnet_myers_sweep(model_block, numeric)
    except PreconditionError as exc:
        res.add("ricci_lower_bound", Verdict(FAIL, exc.witness["slack"], 0.0, "Ric_N >= K F^2", str(exc)))
        res.summary = {"witness": exc.witness}
        return res
    res.add("ricci_lower_bound", Verdict(PASS, slack, 0.0, "Ric_N >= K F^2 (minimum slack)"))
    firsts = np.array([r[1] for r in rows], dtype=float)
    worst = float(np.nanmax(firsts) - bound) if np.isfinite(firsts).any() else math.inf
    ok = all(r[3] for r in rows)
    res.add("diameter_bound", Verdict(PASS if ok else FAIL, worst, 1e-3,
                                      "first conjugate time <= pi sqrt(N/K)"))
    res.tables["sweep"] = (["direction", "first_conjugate_time", "bound", "satisfied"], rows)
    res.summary = {"bound": bound, "first_conjugate_times": firsts.tolist(), "min_slack": slack}
    return res


def scenario_surface(model, numeric: NumericBlock) -> ScenarioResult:
    from .surfaces import build_surface, round_sphere, surface_congruence_tensor

    res = ScenarioResult("surface")
    patch = round_sphere(model.dim, numeric.radius, resolution=numeric.resolution)
    data = build_surface(model, patch)
    wl, wg = data.normal_residuals(model)
    res.add("normals_lightlike", bound_verdict("L(V+-) = 0", wl, 1e-9))
    res.add("normals_orthogonal", bound_verdict("g_V(V, w) = 0", wg, 1e-8))
    trapped = data.psi_trapped
    frac = float(trapped.mean())
    if numeric.expect_trapped is None:
        res.add("psi_trapped", Verdict(INFO, frac, math.nan, "fraction of samples psi-trapped"))
    else:
        ok = bool(trapped.all()) if numeric.expect_trapped else not bool(trapped.any())
        res.add("psi_trapped", Verdict(PASS if ok else FAIL, frac, float(numeric.expect_trapped),
                                       "psi-trapped verdict"))
    res.tables["expansions"] = (
        ["sample"] + [f"u{j}" for j in range(data.params.shape[1])]
        + ["theta_plus", "theta_minus", "theta1_plus", "theta1_minus", "trapped"],
        [[i, *data.params[i], data.theta_plus[i], data.theta_minus[i], data.theta1_plus[i],
          data.theta1_minus[i], int(trapped[i])] for i in range(len(data.params))])
    summary = {"samples": int(len(data.params)), "trapped_fraction": frac,
               "theta_plus": data.theta_plus.tolist(), "theta_minus": data.theta_minus.tolist(),
               "theta1_plus": data.theta1_plus.tolist(), "theta1_minus": data.theta1_minus.tolist()}
    th = float(data.theta_minus[0])
    m = model.n - 1
    if th < 0:
        c = c_coefficient(WeightedRicciParams(math.inf, 0.0, "null"), model.n)
        psi0 = float(np.asarray(model.psi(data.points[0], data.V_minus[0])))
        est = -1.0 / (c * math.exp(2 * psi0 / m) * float(data.theta1_minus[0]))
        if not est > 0:
            est = -1.0 / (c * th)
        tensor, geo = surface_congruence_tensor(model, data, 0, "minus", t_end=1.3 * est,
                                                samples=numeric.grid)
        rep = evolve_weighted_congruence(model, tensor, math.inf, 0.0, t0=0.0)
        congruence_verdicts(rep, tensor, res, "ingoing/", bishop=False)
        first = rep.conjugate_times[0].t if rep.conjugate_times else None
        s0 = rep.s0.s0 if rep.s0 is not None and not rep.s0.inconclusive else None
        summary["ingoing"] = {"first_focal_time": first, "s0": s0}
    res.summary = summary
    return res


# -- suite -------------------------------------------------------------------

def scenario_suite(numeric: NumericBlock) -> ScenarioResult:
    from . import suite as S

    res = ScenarioResult("suite")
    names = list(S.FAMILIES)
    t_start = time.perf_counter()
    outs = pool_map(S.run_family, [(name, numeric.seed) for name in names])
    rows = []
    for name, fam in zip(names, outs):
        res.merge(fam, prefix=f"{name}/")
        statuses = [v.status for v in fam.verdicts.values()]
        status = FAIL if FAIL in statuses else INCONCLUSIVE if INCONCLUSIVE in statuses else PASS
        worst = max((v.margin / v.threshold for v in fam.verdicts.values()
                     if v.status in (PASS, FAIL) and v.threshold and np.isfinite(v.threshold)
                     and np.isfinite(v.margin) and v.threshold > 0), default=0.0)
        rows.append([name, status, float(worst), len(fam.verdicts)])
    res.tables["families"] = (["family", "status", "worst_margin_over_threshold", "checks"], rows)
    res.timing["suite"] = time.perf_counter() - t_start
    return res


def run_scenario(config: RunConfig) -> ScenarioResult:
    """Execute ``config.scenario``; model errors propagate to the caller."""
    start = time.perf_counter()
    sc, num = config.scenario, config.numeric
    if sc == "suite":
        res = scenario_suite(num)
    elif sc == "bonnet_myers":
        res = scenario_bonnet_myers(config.model, num)
    elif sc == "cones":
        res = scenario_cones(build_model(config.model, validate=False), num)
    else:
        model = build_model(config.model)
        res = {"geodesic": scenario_geodesic, "congruence": scenario_congruence,
               "surface": scenario_surface}[sc](model, num)
    res.timing["total"] = time.perf_counter() - start
    return res
