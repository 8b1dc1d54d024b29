"""Spacetime models: a Lagrangian ``L(x, v)``, a weight ``psi(x, v)`` and a chart.

Every evaluator is written against the small function set in
:mod:`wlfinsler.autodiff`, so it accepts floats, numpy arrays (with trailing
batch axes) and jets alike.

Builtin families
----------------
``minkowski(n)``
    ``L = (-(v0)^2 + sum (vi)^2) / 2`` in dimension ``n + 1``.
``warped_product(n, f, rate)``
    ``L = (-(v0)^2 + f(rate*x0)^2 sum (vi)^2) / 2`` with ``f`` in ``{exp, cosh}``.
    ``f = exp`` is the flat slicing of de Sitter space.
``anti_de_sitter(n, K)``
    Nested ``cosh`` warping with constant flag curvature ``K > 0``; timelike
    geodesics from a point refocus at parameter ``pi / sqrt(K)``.
``randers_perturbed(n, strength, modulation)``
    Minkowski plus ``strength * (1 + modulation sin x1) * v0 * |v|``, where
    ``|v|`` is the Euclidean norm of all fiber components.  Not reversible
    and not quadratic in ``v``.
``beem(k)``
    Two-dimensional ``L = r^2 cos(k theta)`` in polar fiber coordinates.
``weighted(base, psi, ...)``
    Any of the above with ``psi = -lambda x0`` (``linear_t``) or
    ``psi = (kappa/2) log(1 + sum (vi)^2 / (v0)^2)`` (``direction_dependent``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import autodiff as ad
from .expression import ModelExpression, parse_expression

__all__ = [
    "ModelError",
    "ModelIntegrityError",
    "SpacetimeModel",
    "CausalClass",
    "classify_vector",
    "count_cone_components",
    "lorentz_finsler_norm",
    "builtin_registry",
    "model_from_expressions",
    "minkowski",
    "warped_product",
    "anti_de_sitter",
    "randers_perturbed",
    "beem",
    "weighted",
    "BUILTIN_NAMES",
]


class ModelError(ValueError):
    """Unknown model or parameter outside its validated range."""


class ModelIntegrityError(ModelError):
    """The model violates a structural requirement (signature, cone)."""


def _zero_weight(x, v):
    return 0.0


@dataclass(frozen=True)
class SpacetimeModel:
    """Immutable description of a weighted Lorentz-Finsler spacetime.

    Attributes
    ----------
    dim : int
        Manifold dimension ``n + 1``.
    lagrangian, weight : callable
        ``f(x, v)`` taking sequences of coordinates (floats, arrays or jets).
    chart_domain : ndarray, shape (dim, 2)
        Box ``[lo, hi]`` per coordinate; infinite bounds are allowed.
    future_seed : ndarray or callable
        A timelike vector (or ``x -> vector``) marking the future cone.
    """

    dim: int
    lagrangian: Callable
    weight: Callable = _zero_weight
    chart_domain: np.ndarray = None
    future_seed: Any = None
    name: str = "custom"
    params: Mapping = field(default_factory=dict)
    quadratic: bool = False
    weighted: bool = False

    def __post_init__(self):
        if self.dim < 2:
            raise ModelError("dimension must be at least 2")
        dom = self.chart_domain
        if dom is None:
            dom = np.tile([-np.inf, np.inf], (self.dim, 1))
        dom = np.asarray(dom, dtype=float).reshape(self.dim, 2)
        object.__setattr__(self, "chart_domain", dom)
        if self.future_seed is None:
            seed = np.zeros(self.dim)
            seed[0] = 1.0
            object.__setattr__(self, "future_seed", seed)
        elif not callable(self.future_seed):
            object.__setattr__(self, "future_seed", np.asarray(self.future_seed, dtype=float))

    @property
    def n(self) -> int:
        return self.dim - 1

    def L(self, x, v):
        return self.lagrangian(list(x), list(v))

    def psi(self, x, v):
        return self.weight(list(x), list(v))

    def seed(self, x) -> np.ndarray:
        if callable(self.future_seed):
            return np.asarray(self.future_seed(np.asarray(x, dtype=float)), dtype=float)
        return self.future_seed

    def in_chart(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.chart_domain[:, 0]) and np.all(x <= self.chart_domain[:, 1]))

    def sample_points(self, rng: np.random.Generator, count: int, spread: float = 1.0) -> np.ndarray:
        """Random base points inside the chart, shape ``(dim, count)``."""
        lo = np.maximum(self.chart_domain[:, 0], -spread)
        hi = np.minimum(self.chart_domain[:, 1], spread)
        return lo[:, None] + (hi - lo)[:, None] * rng.random((self.dim, count))

    def with_weight(self, weight: Callable, **info) -> "SpacetimeModel":
        return replace(self, weight=weight, weighted=True, **info)


@dataclass(frozen=True)
class CausalClass:
    kind: str  # "timelike" | "lightlike" | "spacelike" | "zero"
    future_directed: bool = False

    @property
    def causal(self) -> bool:
        return self.kind in ("timelike", "lightlike")


def _scalar(value) -> float:
    if isinstance(value, ad.Jet):
        value = value.value
    return float(value)


def _in_seed_component(model, x, v, samples: int = 64) -> bool:
    """Is ``v`` in the closure of the cone component containing the seed?

    Each component of the timelike cone is convex, so the open segment from a
    member ``v`` to the seed stays timelike; outside it the segment leaves.
    """
    seed = model.seed(x)
    s = np.linspace(0.0, 1.0, samples + 1)[1:]
    pts = (1.0 - s)[None, :] * np.asarray(v, float)[:, None] + s[None, :] * seed[:, None]
    vals = np.asarray(model.lagrangian(list(np.asarray(x, float)[:, None]), list(pts)), dtype=float)
    return bool(np.all(np.broadcast_to(vals, s.shape) < 0))


def _g_pairing(model, x, v, w) -> float:
    """``g_v(v, w) = dL/dv(v) . w`` by homogeneity."""
    b = ad.basis(model.dim, 0, 1, 1)
    xs, vs = ad.variables(x, v, b)
    out = model.lagrangian(xs, vs)
    if not isinstance(out, ad.Jet):
        return 0.0
    grad = np.array([ad.partial(out, [("v", i)]) for i in range(model.dim)])
    return float(grad @ np.asarray(w, float))


def classify_vector(model: SpacetimeModel, x, v, tol: float = 1e-9) -> CausalClass:
    """Causal character of ``v`` at ``x`` and whether it points to the future.

    ``|L| <= tol |v|^2`` counts as lightlike.  Orientation first uses the sign
    of ``g_v(v, seed)``: a non-negative value rules the seed's cone out.  A
    negative value is confirmed by checking that the segment from ``v`` to the
    seed stays timelike, which matters for models with several cones.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not model.in_chart(x):
        raise ModelError("point outside chart domain")
    norm2 = float(v @ v)
    if norm2 == 0.0:
        return CausalClass("zero")
    Lv = _scalar(model.L(x, v))
    if abs(Lv) <= tol * norm2:
        kind = "lightlike"
    elif Lv < 0:
        kind = "timelike"
    else:
        return CausalClass("spacelike")
    seed = model.seed(x)
    hint = _g_pairing(model, x, v, seed)
    if hint >= 0 and kind == "timelike":
        return CausalClass(kind, False)
    return CausalClass(kind, _in_seed_component(model, x, v))


def lorentz_finsler_norm(model: SpacetimeModel, x, v, tol: float = 1e-9) -> float:
    """``F(v) = sqrt(-2 L(v))`` for causal ``v``; zero on lightlike vectors."""
    v = np.asarray(v, dtype=float)
    Lv = _scalar(model.L(x, v))
    if Lv > tol * float(v @ v):
        raise ad.DomainError("Lorentz-Finsler norm of a spacelike vector")
    return math.sqrt(max(0.0, -2.0 * Lv))


def count_cone_components(model: SpacetimeModel, x, samples: int = 1024) -> int:
    """Number of connected regions of ``{L < 0}`` on the unit sphere of directions.

    Dimension 2 sweeps the circle; dimension 3 uses a latitude-longitude grid
    whose negative cells are joined across edges, the longitude seam and the
    poles.
    """
    if samples < 64:
        raise ValueError("samples must be at least 64")
    x = np.asarray(x, dtype=float)
    if model.dim == 2:
        ang = 2 * np.pi * np.arange(samples) / samples
        dirs = np.stack([np.cos(ang), np.sin(ang)])
        neg = np.asarray(model.lagrangian(list(x[:, None]), list(dirs)), float) < 0
        neg = np.broadcast_to(neg, ang.shape)
        if not neg.any():
            raise ModelIntegrityError("no timelike direction found")
        if neg.all():
            return 1
        # count rising edges on the cycle
        return int(np.sum(neg & ~np.roll(neg, 1)))
    if model.dim == 3:
        nlat = max(16, int(math.sqrt(samples / 2)))
        nlon = 2 * nlat
        lat = (np.arange(nlat) + 0.5) / nlat * np.pi  # polar angle from +v0
        lon = np.arange(nlon) / nlon * 2 * np.pi
        P, Q = np.meshgrid(lat, lon, indexing="ij")
        dirs = np.stack([np.cos(P), np.sin(P) * np.cos(Q), np.sin(P) * np.sin(Q)]).reshape(3, -1)
        neg = np.asarray(model.lagrangian(list(x[:, None]), list(dirs)), float) < 0
        neg = np.broadcast_to(neg, (nlat * nlon,)).reshape(nlat, nlon)
        if not neg.any():
            raise ModelIntegrityError("no timelike direction found")
        idx = np.arange(nlat * nlon).reshape(nlat, nlon)
        a, b = [], []
        lon_pairs = neg & np.roll(neg, -1, axis=1)
        a.append(idx[lon_pairs])
        b.append(np.roll(idx, -1, axis=1)[lon_pairs])
        lat_pairs = neg[:-1] & neg[1:]
        a.append(idx[:-1][lat_pairs])
        b.append(idx[1:][lat_pairs])
        for row in (0, nlat - 1):  # cells around each pole touch each other
            cells = idx[row][neg[row]]
            if cells.size > 1:
                a.append(cells[:-1])
                b.append(cells[1:])
        a, b = np.concatenate(a), np.concatenate(b)
        graph = coo_matrix((np.ones(a.size), (a, b)), shape=(idx.size, idx.size))
        _, labels = connected_components(graph, directed=False)
        return int(np.unique(labels[neg.ravel()]).size)
    raise ModelError("cone census supports dimensions 2 and 3 only")


# -- builtin families ------------------------------------------------------

def _sum_sq(v, start=1):
    total = v[start] * v[start]
    for c in v[start + 1:]:
        total = total + c * c
    return total


def minkowski(n: int = 3) -> SpacetimeModel:
    if n < 1:
        raise ModelError("minkowski needs n >= 1")

    def lag(x, v):
        return 0.5 * (_sum_sq(v) - v[0] * v[0])

    return SpacetimeModel(n + 1, lag, name="minkowski", params={"n": n}, quadratic=True)


def warped_product(n: int = 3, f: str = "cosh", rate: float = 1.0) -> SpacetimeModel:
    fn = {"exp": ad.exp, "cosh": ad.cosh}.get(f)
    if fn is None:
        raise ModelError(f"warping function must be 'exp' or 'cosh', got {f!r}")
    if n < 1:
        raise ModelError("warped_product needs n >= 1")

    def lag(x, v):
        w = fn(rate * x[0])
        return 0.5 * (w * w * _sum_sq(v) - v[0] * v[0])

    bound = 30.0 / max(abs(rate), 1e-12)
    dom = np.tile([-np.inf, np.inf], (n + 1, 1))
    dom[0] = [-bound, bound]
    return SpacetimeModel(n + 1, lag, chart_domain=dom, name="warped_product",
                          params={"n": n, "f": f, "rate": rate}, quadratic=True)


def anti_de_sitter(n: int = 3, K: float = 1.0) -> SpacetimeModel:
    r"""Constant positive flag curvature ``K`` via nested ``cosh`` warping.

    The metric is ``-prod_i cosh^2(x_i/l) dt^2 + sum_i prod_{j>i} cosh^2(x_j/l) dx_i^2``
    with ``l = 1/sqrt(K)``, i.e. anti-de Sitter space sliced by lower
    dimensional copies of itself.
    """
    if not K > 0:
        raise ModelError("anti_de_sitter needs K > 0")
    if n < 1:
        raise ModelError("anti_de_sitter needs n >= 1")
    ell = 1.0 / math.sqrt(K)

    def lag(x, v):
        c2 = [ad.cosh(x[i] / ell) ** 2 for i in range(1, n + 1)]
        total = 0.0
        for i in range(n, 0, -1):
            w = v[i] * v[i]
            for j in range(i + 1, n + 1):
                w = w * c2[j - 1]
            total = total + w
        w0 = v[0] * v[0]
        for j in range(1, n + 1):
            w0 = w0 * c2[j - 1]
        return 0.5 * (total - w0)

    dom = np.tile([-10.0 * ell, 10.0 * ell], (n + 1, 1))
    dom[0] = [-np.inf, np.inf]
    return SpacetimeModel(n + 1, lag, chart_domain=dom, name="anti_de_sitter",
                          params={"n": n, "K": K}, quadratic=True)


def randers_perturbed(n: int = 3, strength: float = 0.1, modulation: float = 0.0) -> SpacetimeModel:
    if not 0 <= strength < 0.3:
        raise ModelError("randers_perturbed needs 0 <= strength < 0.3")
    if not abs(modulation) <= 1:
        raise ModelError("randers_perturbed needs |modulation| <= 1")
    if n < 1:
        raise ModelError("randers_perturbed needs n >= 1")

    def lag(x, v):
        q = ad.sqrt(_sum_sq(v, 0))
        coeff = strength
        if modulation:
            coeff = strength * (1.0 + modulation * ad.sin(x[1]))
        return 0.5 * (_sum_sq(v) - v[0] * v[0]) + coeff * v[0] * q

    return SpacetimeModel(n + 1, lag, name="randers_perturbed",
                          params={"n": n, "strength": strength, "modulation": modulation})


def beem(k: int = 3) -> SpacetimeModel:
    """``L = r^2 cos(k theta) = Re((v0 + i v1)^k) r^(2-k)`` on the plane."""
    if k < 1 or int(k) != k:
        raise ModelError("beem needs a positive integer k")
    k = int(k)
    terms = [(math.comb(k, j) * (-1) ** (j // 2), k - j, j) for j in range(0, k + 1, 2)]

    def lag(x, v):
        re = None
        for c, p0, p1 in terms:
            t = c * (v[0] ** p0) * (v[1] ** p1)
            re = t if re is None else re + t
        if k == 2:
            return re
        r2 = v[0] * v[0] + v[1] * v[1]
        return re * ad.power(r2, (2 - k) / 2.0)

    seed = np.array([math.cos(math.pi / k), math.sin(math.pi / k)])
    return SpacetimeModel(2, lag, future_seed=seed, name="beem", params={"k": k}, quadratic=(k == 2))


def weighted(base: SpacetimeModel, psi: str = "linear_t", lam: float = 0.0,
             kappa: float = 0.0) -> SpacetimeModel:
    """Attach a weight to ``base``.

    ``linear_t`` gives ``psi = -lam * x0``; ``direction_dependent`` gives
    ``psi = (kappa / 2) log(1 + sum_i (vi)^2 / (v0)^2)``, which is
    0-homogeneous in ``v`` and defined wherever ``v0 != 0``.
    """
    if psi == "linear_t":
        def w(x, v):
            return -lam * x[0]
        info = {"psi": psi, "lambda": lam}
    elif psi == "direction_dependent":
        def w(x, v):
            return 0.5 * kappa * ad.log(1.0 + _sum_sq(v) / (v[0] * v[0]))
        info = {"psi": psi, "kappa": kappa}
    else:
        raise ModelError(f"unknown weight {psi!r}")
    params = dict(base.params)
    params.update(info)
    return replace(base, weight=w, weighted=True, name=f"weighted({base.name})", params=params)


def model_from_expressions(expression_L: str, dim: int, future_seed: Sequence[float],
                           expression_psi: str | None = None, chart_domain=None,
                           name: str = "expression") -> SpacetimeModel:
    """Model whose ``L`` and ``psi`` come from the expression language."""
    lag = parse_expression(expression_L, dim)
    weight: Callable = _zero_weight
    if expression_psi:
        weight = parse_expression(expression_psi, dim)
    model = SpacetimeModel(dim, lag, weight=weight, chart_domain=chart_domain,
                           future_seed=np.asarray(future_seed, float), name=name,
                           params={"L": expression_L, "psi": expression_psi or "0"},
                           weighted=bool(expression_psi))
    check_signature(model, [np.zeros(dim)])
    return model


_FAMILIES = {
    "minkowski": (minkowski, {"n": int}),
    "warped_product": (warped_product, {"n": int, "f": str, "rate": float}),
    "anti_de_sitter": (anti_de_sitter, {"n": int, "K": float}),
    "randers_perturbed": (randers_perturbed, {"n": int, "strength": float, "modulation": float}),
    "beem": (beem, {"k": int}),
}
BUILTIN_NAMES = tuple(_FAMILIES) + ("weighted",)


def _coerce(name, key, typ, value):
    if typ is int:
        if float(value) != int(float(value)):
            raise ModelError(f"{name}: parameter {key!r} must be an integer")
        return int(float(value))
    if typ is float:
        return float(value)
    return str(value)


def builtin_registry(name: str, params: Mapping[str, Any] | None = None,
                     validate: bool = True) -> SpacetimeModel:
    """Construct a builtin model by name and validate its signature.

    ``weighted`` takes ``base`` (a family name), ``psi`` and either
    ``lambda`` or ``kappa``; remaining keys go to the base family.  With
    ``validate=False`` the signature check at the origin is skipped, which
    the cone census needs for ``beem(1)``.
    """
    params = dict(params or {})
    if name == "weighted":
        base_name = params.pop("base", "minkowski")
        psi = params.pop("psi", "linear_t")
        lam = float(params.pop("lambda", 0.0))
        kappa = float(params.pop("kappa", 0.0))
        if base_name == "weighted":
            raise ModelError("weighted models cannot be nested")
        return weighted(builtin_registry(base_name, params, validate), psi, lam=lam, kappa=kappa)
    if name not in _FAMILIES:
        raise ModelError(f"unknown builtin model {name!r}")
    factory, schema = _FAMILIES[name]
    unknown = set(params) - set(schema)
    if unknown:
        raise ModelError(f"{name}: unknown parameter(s) {sorted(unknown)}")
    kwargs = {k: _coerce(name, k, schema[k], v) for k, v in params.items()}
    model = factory(**kwargs)
    if validate:
        check_signature(model, [np.zeros(model.dim)])
    return model


def check_signature(model: SpacetimeModel, points, tol: float = 1e-10) -> None:
    """Raise :class:`ModelIntegrityError` unless ``g`` at the seed is Lorentzian."""
    from .geometry import metric_values  # local import: geometry depends on models

    pts = np.asarray(points, dtype=float).T
    seeds = np.stack([model.seed(p) for p in pts.T], axis=1)
    if np.any(np.asarray(model.lagrangian(list(pts), list(seeds)), float) >= 0):
        raise ModelIntegrityError(f"{model.name}: future_seed is not timelike")
    g = metric_values(model, pts, seeds)
    eig = np.linalg.eigvalsh(g)
    scale = np.abs(eig).max(axis=-1, keepdims=True)
    neg = np.sum(eig < -tol * scale, axis=-1)
    pos = np.sum(eig > tol * scale, axis=-1)
    if np.any(neg != 1) or np.any(pos != model.dim - 1):
        raise ModelIntegrityError(f"{model.name}: metric at future_seed is not Lorentzian")
