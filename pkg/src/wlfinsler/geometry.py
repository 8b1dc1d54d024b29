"""Pointwise geometry of a Lagrangian: metric, spray, connection and curvature.

All quantities come from one jet evaluation of ``L`` at ``(x, v)``.  The
truncation orders used below are the smallest that carry every derivative
each object needs:

=============  ===========  =====================================================
object         (px, pv, pt)  reason
=============  ===========  =====================================================
metric         (0, 2, 2)    ``g = d^2 L / dv dv``
spray          (1, 2, 2)    ``G`` needs ``d^2 L / dx dv``, ``dL/dx`` and ``g``
connection     (1, 3, 3)    ``N = dG/dv`` and ``dg/dx``, ``dg/dv``
curvature      (2, 4, 4)    ``dG/dx``, ``dN/dx`` and ``dN/dv`` of the spray jet
weight         (2, 2, 2)    first and second derivatives of ``psi`` along geodesics
=============  ===========  =====================================================

Functions accept ``x`` and ``v`` of shape ``(dim,)`` or ``(dim, B)``; the
batched form returns arrays with a leading batch axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .models import ModelIntegrityError, SpacetimeModel

__all__ = [
    "GeometryError",
    "DegeneracyError",
    "FlagError",
    "ParameterError",
    "MetricAtVector",
    "ConnectionData",
    "CurvatureAtVector",
    "WeightedRicciParams",
    "metric_at",
    "metric_values",
    "connection_at",
    "curvature_at",
    "curvature_batch",
    "spray_values",
    "spray_and_connection",
    "flag_curvature",
    "psi_derivatives",
    "psi_derivatives_fd",
    "weighted_ricci",
    "weighted_ricci_batch",
    "epsilon_range_check",
    "c_coefficient",
    "ORDERS",
]

ORDERS = {
    "metric": (0, 2, 2),
    "spray": (1, 2, 2),
    "connection": (1, 3, 3),
    "curvature": (2, 4, 4),
    "weight": (2, 2, 2),
}


class GeometryError(ValueError):
    pass


class DegeneracyError(GeometryError):
    """The fundamental tensor is (numerically) singular."""


class FlagError(GeometryError):
    """Flag pole and transverse edge span a degenerate plane."""


class ParameterError(GeometryError):
    """``(N, epsilon)`` outside the legal range."""


# -- jet plumbing ----------------------------------------------------------

def _prep(x, v):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    single = x.ndim == 1 and v.ndim == 1
    if x.ndim == 1:
        x = x[:, None]
    if v.ndim == 1:
        v = v[:, None]
    B = max(x.shape[1], v.shape[1])
    return np.broadcast_to(x, (x.shape[0], B)), np.broadcast_to(v, (v.shape[0], B)), single


def _scalar_jet(fn, x, v, order):
    dim = x.shape[0]
    b = ad.basis(dim, *order)
    xs, vs = ad.variables(x, v, b)
    out = fn(xs, vs)
    if not isinstance(out, ad.Jet):
        out = ad.Jet.constant(b, np.broadcast_to(np.asarray(out, float), (x.shape[1],)))
    elif out.coef.shape[1:] != (x.shape[1],):
        out = ad.Jet(out.basis, np.broadcast_to(out.coef, (out.basis.size, x.shape[1])).copy())
    return out, vs


def _stack(jets: Sequence[ad.Jet], shape) -> ad.Jet:
    key = tuple(min(j.basis.key[i] for j in jets) for i in range(4))
    common = ad.basis(*key)
    coefs = [j.truncate(common).coef for j in jets]
    arr = np.stack(coefs, axis=-1)
    return ad.Jet(common, arr.reshape(arr.shape[:-1] + tuple(shape)))


def _metric_jet(L: ad.Jet) -> ad.Jet:
    dim = L.basis.dim
    first = [L.derivative("v", a) for a in range(dim)]
    comps = {}
    for a in range(dim):
        for b in range(a, dim):
            comps[a, b] = comps[b, a] = first[a].derivative("v", b)
    return _stack([comps[a, b] for a in range(dim) for b in range(dim)], (dim, dim))


def _spray_jet(L: ad.Jet, vs) -> tuple[ad.Jet, ad.Jet]:
    """``G = g^{-1} (d^2L/dx dv . v - dL/dx) / 2`` as a jet, plus the metric jet."""
    dim = L.basis.dim
    g = _metric_jet(L)
    ginv = ad.jet_inv(g)
    Lx = [L.derivative("x", c) for c in range(dim)]
    w = []
    for d in range(dim):
        acc = -Lx[d]
        for c in range(dim):
            acc = acc + Lx[c].derivative("v", d) * vs[c]
        w.append(acc)
    wj = _stack(w, (dim, 1))
    G = ad.jet_matmul(ginv, wj)
    G = ad.Jet(G.basis, 0.5 * G.coef[..., 0])
    return G, g


def _coef(jet: ad.Jet, slots) -> np.ndarray:
    """Mixed partial stored in a (possibly array-valued) jet."""
    return ad.partial(jet, slots)


def _out(arr, single):
    return arr[0] if single else arr


# -- metric ----------------------------------------------------------------

@dataclass(frozen=True)
class MetricAtVector:
    g: np.ndarray
    g_inv: np.ndarray
    point: np.ndarray
    direction: np.ndarray

    def inner(self, a, b) -> float:
        return float(np.asarray(a) @ self.g @ np.asarray(b))


def metric_values(model: SpacetimeModel, x, v) -> np.ndarray:
    """``g_v`` at one or many points without any validation."""
    x, v, single = _prep(x, v)
    L, _ = _scalar_jet(model.lagrangian, x, v, ORDERS["metric"])
    dim = model.dim
    g = np.empty((x.shape[1], dim, dim))
    for a in range(dim):
        for b in range(a, dim):
            g[:, a, b] = g[:, b, a] = _coef(L, [("v", a), ("v", b)])
    return _out(g, single)


def _check_metric(g: np.ndarray, validate_signature: bool, tol: float = 1e-10):
    scale = np.abs(g).max()
    if scale == 0 or abs(np.linalg.det(g)) < 1e-12 * scale ** g.shape[0]:
        raise DegeneracyError("fundamental tensor is singular")
    if validate_signature:
        eig = np.linalg.eigvalsh(g)
        if np.sum(eig < -tol * scale) != 1 or np.sum(eig > tol * scale) != g.shape[0] - 1:
            raise ModelIntegrityError(f"signature is not (-,+,...,+): eigenvalues {eig}")


def metric_at(model: SpacetimeModel, x, v, validate_signature: bool = True) -> MetricAtVector:
    """Fundamental tensor ``g_v = d^2 L / dv dv`` and its inverse.

    Raises
    ------
    DegeneracyError
        ``|det g|`` below ``1e-12 * scale^dim``.
    ModelIntegrityError
        Signature other than ``(-,+,...,+)`` (when validated).
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise GeometryError("metric at the zero vector is undefined")
    g = metric_values(model, x, v)
    _check_metric(g, validate_signature)
    return MetricAtVector(g, np.linalg.inv(g), x.copy(), v.copy())


# -- spray and connection --------------------------------------------------

def spray_values(model: SpacetimeModel, x, v) -> np.ndarray:
    """``G(v)`` using only first/second partials of ``L`` and a linear solve.

    This is the fast path used by geodesic integration; it does not form a
    jet of ``G``.
    """
    x, v, single = _prep(x, v)
    L, _ = _scalar_jet(model.lagrangian, x, v, ORDERS["spray"])
    dim = model.dim
    g = np.empty((x.shape[1], dim, dim))
    mixed = np.empty((x.shape[1], dim, dim))  # [c, d] = d^2 L / dx^c dv^d
    Lx = np.empty((x.shape[1], dim))
    for a in range(dim):
        Lx[:, a] = _coef(L, [("x", a)])
        for b in range(dim):
            mixed[:, a, b] = _coef(L, [("x", a), ("v", b)])
            if b >= a:
                g[:, a, b] = g[:, b, a] = _coef(L, [("v", a), ("v", b)])
    w = np.einsum("bcd,cb->bd", mixed, v) - Lx
    G = 0.5 * np.linalg.solve(g, w[..., None])[..., 0]
    return _out(G, single)


def spray_and_connection(model: SpacetimeModel, x, v):
    """``(G, N)`` values from a connection-order jet; ``N = dG/dv``."""
    x, v, single = _prep(x, v)
    L, vs = _scalar_jet(model.lagrangian, x, v, ORDERS["connection"])
    G, _ = _spray_jet(L, vs)
    dim = model.dim
    N = np.stack([_coef(G, [("v", b)]) for b in range(dim)], axis=-1)  # [B, alpha, beta]
    return _out(G.coef[0], single), _out(N, single)


@dataclass(frozen=True)
class ConnectionData:
    gamma_tilde: np.ndarray  # [alpha, beta, gamma]
    spray: np.ndarray
    nonlinear: np.ndarray  # [alpha, beta]
    gamma: np.ndarray


def connection_at(model: SpacetimeModel, x, v) -> ConnectionData:
    """Christoffel-type symbols, spray and nonlinear connection at ``v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise GeometryError("connection at the zero vector is undefined")
    xb, vb, _ = _prep(x, v)
    L, vs = _scalar_jet(model.lagrangian, xb, vb, ORDERS["connection"])
    G, gj = _spray_jet(L, vs)
    dim = model.dim
    g = gj.coef[0][0]
    _check_metric(g, validate_signature=False)
    ginv = np.linalg.inv(g)
    dgx = np.stack([_coef(gj, [("x", c)])[0] for c in range(dim)], axis=-1)  # [a, b, c] = d_c g_ab
    dgv = np.stack([_coef(gj, [("v", c)])[0] for c in range(dim)], axis=-1)
    N = np.stack([_coef(G, [("v", b)])[0] for b in range(dim)], axis=-1)
    # lower[d, b, c] = d_b g_dc + d_c g_bd - d_d g_bc
    lower = np.einsum("dcb->dbc", dgx) + np.einsum("bdc->dbc", dgx) - np.einsum("bcd->dbc", dgx)
    gamma_tilde = 0.5 * np.einsum("ad,dbc->abc", ginv, lower)
    # modification with dg/dv contracted against N
    dgvN = np.einsum("dcm,mb->dbc", dgv, N)  # d g_dc / dv^m N^m_b
    corr = dgvN + np.einsum("bdm,mc->dbc", dgv, N) - np.einsum("bcm,md->dbc", dgv, N)
    gamma = gamma_tilde - 0.5 * np.einsum("ad,dbc->abc", ginv, corr)
    return ConnectionData(gamma_tilde, G.coef[0][0], N, gamma)


# -- curvature -------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureAtVector:
    R_matrix: np.ndarray
    ricci: float
    point: np.ndarray
    direction: np.ndarray


@dataclass
class _CurvaturePack:
    """Everything derived from one curvature-order jet of ``L`` (batched)."""

    g: np.ndarray
    G: np.ndarray
    N: np.ndarray
    dGx: np.ndarray
    R: np.ndarray


def _curvature_pack(model: SpacetimeModel, x, v) -> _CurvaturePack:
    L, vs = _scalar_jet(model.lagrangian, x, v, ORDERS["curvature"])
    G, gj = _spray_jet(L, vs)
    dim = model.dim
    g = gj.coef[0]
    Gv = G.coef[0]  # [B, a]
    # [B, a, b] arrays
    dGx = np.stack([_coef(G, [("x", b)]) for b in range(dim)], axis=-1)
    N = np.stack([_coef(G, [("v", b)]) for b in range(dim)], axis=-1)
    # [B, a, b, c] = d N^a_b / dx^c and d N^a_b / dv^c
    dNx = np.stack([np.stack([_coef(G, [("v", b), ("x", c)]) for c in range(dim)], axis=-1)
                    for b in range(dim)], axis=-2)
    dNv = np.stack([np.stack([_coef(G, [("v", b), ("v", c)]) for c in range(dim)], axis=-1)
                    for b in range(dim)], axis=-2)
    R = (2.0 * dGx
         - np.einsum("Babc,cB->Bab", dNx, v)
         + 2.0 * np.einsum("Babc,Bc->Bab", dNv, Gv)
         - np.einsum("Bac,Bcb->Bab", N, N))
    return _CurvaturePack(g, Gv, N, dGx, R)


def curvature_batch(model: SpacetimeModel, x, v, chunk: int = 96) -> dict:
    """Batched ``R``, ``g``, ``G``, ``N`` and ``dG/dx`` for ``x, v`` of shape ``(dim, B)``."""
    x, v, _ = _prep(x, v)
    parts = []
    for s in range(0, x.shape[1], chunk):
        parts.append(_curvature_pack(model, x[:, s:s + chunk], v[:, s:s + chunk]))
    return {k: np.concatenate([getattr(p, k) for p in parts]) for k in ("g", "G", "N", "dGx", "R")}


def curvature_at(model: SpacetimeModel, x, v) -> CurvatureAtVector:
    """Curvature endomorphism ``R_v`` and ``Ric(v) = trace R_v``."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise GeometryError("curvature at the zero vector is undefined")
    pack = _curvature_pack(model, *_prep(x, v)[:2])
    _check_metric(pack.g[0], validate_signature=False)
    R = pack.R[0]
    return CurvatureAtVector(R, float(np.trace(R)), x.copy(), v.copy())


def flag_curvature(model: SpacetimeModel, x, v, w) -> float:
    """Flag curvature ``K(v, w) = -g_v(R_v w, w) / (g_v(v,v) g_v(w,w) - g_v(v,w)^2)``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    pack = _curvature_pack(model, *_prep(x, v)[:2])
    g, R = pack.g[0], pack.R[0]
    gvv, gww, gvw = v @ g @ v, w @ g @ w, v @ g @ w
    den = gvv * gww - gvw ** 2
    scale = (v @ v) * (w @ w) * max(1.0, np.abs(g).max()) ** 2
    if abs(den) < 1e-10 * scale:
        raise FlagError("degenerate flag")
    return float(-(w @ g @ (R @ w)) / den)


# -- weights ---------------------------------------------------------------

def _psi_chain(model, x, v, G, N, dGx):
    """``psi'`` and ``psi''`` along the geodesic with initial velocity ``v``.

    With ``a = -2G`` the acceleration and
    ``da/dt = -2 (dG/dx . v - 2 N G)`` its derivative, the chain rule gives
    exact values from the second-order jet of ``psi``.
    """
    P, _ = _scalar_jet(model.weight, x, v, ORDERS["weight"])
    dim = model.dim
    vv = v.T  # [B, a]
    a = -2.0 * G
    adot = -2.0 * (np.einsum("Bab,Bb->Ba", dGx, vv) - 2.0 * np.einsum("Bab,Bb->Ba", N, G))
    px = np.stack([_coef(P, [("x", i)]) for i in range(dim)], axis=-1)
    pv = np.stack([_coef(P, [("v", i)]) for i in range(dim)], axis=-1)

    def hess(r1, r2):
        return np.stack([np.stack([_coef(P, [(r1, i), (r2, j)]) for j in range(dim)], axis=-1)
                         for i in range(dim)], axis=-2)

    pxx, pxv, pvv = hess("x", "x"), hess("x", "v"), hess("v", "v")
    d1 = np.einsum("Ba,Ba->B", px, vv) + np.einsum("Ba,Ba->B", pv, a)
    d2 = (np.einsum("Bab,Ba,Bb->B", pxx, vv, vv)
          + 2.0 * np.einsum("Bab,Ba,Bb->B", pxv, vv, a)
          + np.einsum("Bab,Ba,Bb->B", pvv, a, a)
          + np.einsum("Ba,Ba->B", px, a)
          + np.einsum("Ba,Ba->B", pv, adot))
    return P.coef[0], d1, d2


def psi_derivatives(model: SpacetimeModel, x, v):
    """``(psi, psi', psi'')`` of ``psi_eta`` at ``t = 0`` for ``eta'(0) = v``."""
    xb, vb, single = _prep(x, v)
    L, vs = _scalar_jet(model.lagrangian, xb, vb, ORDERS["curvature"])
    G, _ = _spray_jet(L, vs)
    dim = model.dim
    N = np.stack([_coef(G, [("v", b)]) for b in range(dim)], axis=-1)
    dGx = np.stack([_coef(G, [("x", b)]) for b in range(dim)], axis=-1)
    p0, p1, p2 = _psi_chain(model, xb, vb, G.coef[0], N, dGx)
    if single:
        return float(p0[0]), float(p1[0]), float(p2[0])
    return p0, p1, p2


def psi_derivatives_fd(model: SpacetimeModel, x, v, h: float = 1e-3):
    """Independent estimate of ``(psi', psi'')`` from a short geodesic solve.

    Integrates the geodesic through ``v`` on ``[-2h, 2h]`` and applies
    five-point central differences to ``psi_eta``, with one Richardson
    extrapolation against step ``2h``.
    """
    from scipy.integrate import solve_ivp

    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    scale = max(1.0, float(np.linalg.norm(v)))
    h = h / scale
    dim = model.dim

    def rhs(t, y):
        return np.concatenate([y[dim:], -2.0 * spray_values(model, y[:dim], y[dim:])])

    y0 = np.concatenate([x, v])
    ts = np.array([-4, -2, -1, 1, 2, 4]) * h
    fwd = solve_ivp(rhs, (0, 4 * h), y0, method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
    bwd = solve_ivp(rhs, (0, -4 * h), y0, method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)

    def psi_at(t):
        if t == 0:
            y = y0
        else:
            y = fwd.sol(t) if t > 0 else bwd.sol(t)
        return float(np.asarray(model.weight(list(y[:dim]), list(y[dim:])), float))

    p = {k: psi_at(k * h) for k in (-4, -2, -1, 0, 1, 2, 4)}

    def five(step):
        s = step // 1
        d1 = (p[-2 * s] - 8 * p[-s] + 8 * p[s] - p[2 * s]) / (12 * s * h)
        d2 = (-p[2 * s] + 16 * p[s] - 30 * p[0] + 16 * p[-s] - p[-2 * s]) / (12 * (s * h) ** 2)
        return d1, d2

    fine, coarse = five(1), five(2)
    d1 = fine[0] + (fine[0] - coarse[0]) / 15.0
    d2 = fine[1] + (fine[1] - coarse[1]) / 15.0
    return d1, d2


@dataclass(frozen=True)
class WeightedRicciParams:
    """Effective dimension ``N`` (``math.inf`` allowed), ``epsilon`` and side."""

    N: float
    epsilon: float = 0.0
    side: str = "timelike"

    def __post_init__(self):
        if self.side not in ("timelike", "null"):
            raise ParameterError("side must be 'timelike' or 'null'")
        if math.isnan(self.N) or self.N == -math.inf:
            raise ParameterError("N must be a real number or +inf")


def _ricci_weight_term(n, N, d1, d2, tol):
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    if N == math.inf:
        return d2
    if N == n:
        return np.where(np.abs(d1) > tol, -np.inf, d2)
    return d2 - d1 ** 2 / (N - n)


def _check_causal(model, x, v, tol=1e-9):
    Lv = np.asarray(model.lagrangian(list(x), list(v)), float)
    if np.any(Lv > tol * np.sum(v * v, axis=0)):
        raise GeometryError("weighted Ricci curvature needs a causal vector")


def weighted_ricci(model: SpacetimeModel, x, v, N: float, tol: float = 1e-12) -> float:
    """``Ric_N(v) = Ric(v) + psi'' - psi'^2 / (N - n)``.

    ``N = inf`` drops the last term; ``N = n`` gives ``-inf`` unless
    ``|psi'| <= tol``.
    """
    xb, vb, _ = _prep(x, v)
    _check_causal(model, xb, vb)
    return float(weighted_ricci_batch(model, xb, vb, N, tol)[0])


def weighted_ricci_batch(model: SpacetimeModel, x, v, N: float, tol: float = 1e-12,
                         chunk: int = 96) -> np.ndarray:
    """Vectorized :func:`weighted_ricci` over ``(dim, B)`` inputs (no causality check)."""
    x, v, _ = _prep(x, v)
    out = []
    for s in range(0, x.shape[1], chunk):
        xs, vs = x[:, s:s + chunk], v[:, s:s + chunk]
        pack = _curvature_pack(model, xs, vs)
        _, d1, d2 = _psi_chain(model, xs, vs, pack.G, pack.N, pack.dGx)
        ric = np.trace(pack.R, axis1=1, axis2=2)
        out.append(ric + _ricci_weight_term(model.n, N, d1, d2, tol))
    return np.concatenate(out)


# -- epsilon range ---------------------------------------------------------

_BOUNDARY = 1e-9


def epsilon_range_check(params: WeightedRicciParams, n: int) -> tuple[bool, float]:
    """Admissibility of ``epsilon`` for ``N`` and the bound on ``|epsilon|``.

    Timelike: ``N = 0`` forces ``epsilon = 0``, ``N = n`` admits every value
    and otherwise ``|epsilon| < sqrt(N / (N - n))`` (bound 1 at ``N = inf``).
    Null: the same with ``N - 1`` in the numerator and ``N = 1`` forcing
    ``epsilon = 0``.  Values within ``1e-9`` of the bound are rejected.
    """
    N, eps = params.N, abs(params.epsilon)
    low = 0.0 if params.side == "timelike" else 1.0
    if low < N < n:
        raise ParameterError(f"N={N} lies in the excluded interval ({low:g}, {n})")
    if N == low:
        return eps == 0.0, 0.0
    if N == n:
        return True, math.inf
    if N == math.inf:
        bound = 1.0
    else:
        bound = math.sqrt((N - low) / (N - n))
    return eps < bound - _BOUNDARY, bound


def c_coefficient(params: WeightedRicciParams, n: int) -> float:
    """Coefficient ``c(N, epsilon)`` of the weighted Raychaudhuri inequality."""
    ok, _ = epsilon_range_check(params, n)
    if not ok:
        raise ParameterError(f"epsilon={params.epsilon} inadmissible for N={params.N}")
    N, eps = params.N, params.epsilon
    if params.side == "timelike":
        m, low = n, 0.0
    else:
        m, low = n - 1, 1.0
    if N == math.inf:
        return (1.0 - eps ** 2) / m
    if N == low or N == n:
        return 1.0 / m
    return (1.0 - eps ** 2 * (N - n) / (N - low)) / m
