"""Codimension-two spacelike surfaces: lightlike normals and null expansions.

A surface patch is a map ``u -> x(u)`` from ``n - 1`` parameters into the
chart.  At each sample the two future lightlike normals ``V+`` and ``V-``
solve

    L(V) = 0,    g_V(V, w_i) = 0  (w_i tangent),    s . V = 1,

where ``s`` fixes the scale (``s = seed / |seed|^2``, so in Minkowski the
time component of ``V`` is one).  Newton's method is started from the two
vectors ``T +- nu`` built from the future seed ``T`` and a unit normal
``nu`` in the plane orthogonal to ``T`` and to the surface.

Null expansions are the traces of ``w -> D^V_w V`` restricted to the
surface, with ``D^V_w V = dV(w) + N(V) w`` and ``dV`` taken by central
differences in parameter space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import null_space

from .autodiff import DomainError
from .geodesics import integrate_geodesic, transport_frame
from .geometry import GeometryError, metric_values, psi_derivatives, spray_and_connection
from .models import SpacetimeModel, classify_vector

__all__ = [
    "SurfaceError",
    "SurfacePatch",
    "SurfaceData",
    "round_sphere",
    "lightlike_normals",
    "build_surface",
    "surface_expansion",
    "surface_congruence_tensor",
]


class SurfaceError(GeometryError):
    """Newton failure, collapsed normals or a non-spacelike tangent plane."""


@dataclass(frozen=True)
class SurfacePatch:
    """Parametrized patch ``embed(u)`` with a sample grid of parameters.

    ``outward(u)`` is an optional vector used only to decide which of the
    two normals is called ``V+`` (the one whose pairing with it is larger).
    """

    embed: Callable
    params: np.ndarray  # (P, n - 1)
    scale: float = 1.0
    outward: Callable | None = None
    name: str = "patch"

    def point(self, u) -> np.ndarray:
        return np.asarray(self.embed(np.asarray(u, dtype=float)), dtype=float)

    def tangents(self, u, h: float | None = None) -> np.ndarray:
        """Columns ``dx/du_j`` by central differences, shape ``(dim, n - 1)``."""
        h = self.scale * 1e-3 if h is None else h
        u = np.asarray(u, dtype=float)
        cols = []
        for j in range(u.size):
            e = np.zeros_like(u)
            e[j] = h
            cols.append((self.point(u + e) - self.point(u - e)) / (2 * h))
        return np.column_stack(cols)


def _sphere_embed(n: int, radius: float, time: float, center: np.ndarray):
    def embed(u):
        # hyperspherical angles: u[0..n-3] in (0, pi), u[n-2] periodic
        y = np.empty(n)
        s = 1.0
        for i in range(n - 1):
            y[i] = s * math.cos(u[i])
            s *= math.sin(u[i])
        y[n - 1] = s
        return np.concatenate([[time], center + radius * y])
    return embed


def round_sphere(dim: int, radius: float, time: float = 0.0, center=None,
                 resolution: int = 4, margin: float = 0.4) -> SurfacePatch:
    """Round sphere of ``radius`` in the slice ``x0 = time``.

    Samples ``resolution`` values per angle, keeping the polar angles at least
    ``margin`` away from the coordinate poles.
    """
    n = dim - 1
    if n < 2:
        raise SurfaceError("a codimension-two sphere needs n >= 2")
    if radius <= 0:
        raise SurfaceError("radius must be positive")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    axes = [np.linspace(margin, math.pi - margin, resolution) for _ in range(n - 2)]
    axes.append(np.linspace(0.0, 2 * math.pi, resolution, endpoint=False) + 0.1)
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n - 1)
    embed = _sphere_embed(n, radius, time, center)

    def outward(u):
        p = embed(u)
        out = np.zeros(dim)
        out[1:] = p[1:] - center
        return out

    return SurfacePatch(embed, grid, 1.0, outward, f"sphere(r={radius:g})")


def _check_spacelike(model, x, W, samples: int = 256):
    k = W.shape[1]
    if k == 1:
        dirs = np.array([[1.0], [-1.0]])
    else:
        rng = np.random.default_rng(0)
        dirs = rng.normal(size=(samples, k))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    vecs = W @ dirs.T
    Ls = np.asarray(model.lagrangian(list(x[:, None] + 0 * vecs), list(vecs)), dtype=float)
    if np.any(np.broadcast_to(Ls, (vecs.shape[1],)) <= 0):
        raise SurfaceError("tangent plane contains causal directions")


def _newton(model, x, W, s, v, max_iter: int = 50, tol: float = 1e-13):
    d = model.dim
    for _ in range(max_iter):
        g = metric_values(model, x, v)
        gv = g @ v
        F = np.concatenate([[0.5 * v @ gv], W.T @ gv, [s @ v - 1.0]])
        Jac = np.vstack([gv[None, :], (g @ W).T, s[None, :]])
        try:
            step = np.linalg.solve(Jac, F)
        except np.linalg.LinAlgError as exc:
            raise SurfaceError("singular Newton system") from exc
        v = v - step
        if not np.all(np.isfinite(v)):
            break
        if np.max(np.abs(step)) <= tol * max(1.0, np.max(np.abs(v))):
            return v
    raise SurfaceError("Newton iteration for a lightlike normal did not converge")


def lightlike_normals(model: SpacetimeModel, x, tangent_basis, outward=None,
                      seeds: tuple | None = None):
    """The two future lightlike normals ``(V+, V-)`` at ``x``.

    Parameters
    ----------
    tangent_basis : array_like, shape (dim, n - 1)
        Spanning vectors of the (spacelike) tangent plane.
    outward : array_like, optional
        Orientation hint; ``V+`` has the larger Euclidean pairing with it.
    seeds : tuple of two arrays, optional
        Starting guesses (used for warm starts on a stencil).

    Raises
    ------
    SurfaceError
        Causal tangent directions, Newton failure, a past-directed or
        non-null solution, or both solutions on one ray.
    """
    x = np.asarray(x, dtype=float)
    W = np.asarray(tangent_basis, dtype=float).reshape(model.dim, -1)
    _check_spacelike(model, x, W)
    T = model.seed(x)
    s = T / float(T @ T)
    if seeds is None:
        gT = metric_values(model, x, T)
        # g_T-normal to both T and the surface
        nu = null_space(np.vstack([(gT @ T)[None, :], (gT @ W).T]))[:, 0]
        nu = nu / math.sqrt(abs(nu @ gT @ nu))
        Tn = T / math.sqrt(abs(T @ gT @ T))
        seeds = (Tn + nu, Tn - nu)
    sols = [_newton(model, x, W, s, np.asarray(seed, dtype=float) / (s @ seed)) for seed in seeds]
    for V in sols:
        Lv = float(np.asarray(model.L(x, V)))
        if abs(Lv) > 1e-9 * float(V @ V):
            raise SurfaceError("normal is not lightlike")
        if not classify_vector(model, x, V).future_directed:
            raise SurfaceError("normal is not future-directed")
    a, b = sols
    cosang = abs(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b))
    if cosang > 1 - 1e-10:
        raise SurfaceError("the two normals collapsed onto one ray")
    if outward is not None:
        o = np.asarray(outward, dtype=float)
        if a @ o < b @ o:
            a, b = b, a
    return a, b


@dataclass
class SurfaceData:
    """Samples of a patch with its normals and null expansions."""

    patch: SurfacePatch
    params: np.ndarray
    points: np.ndarray  # (P, dim)
    tangents: np.ndarray  # (P, dim, n - 1)
    V_plus: np.ndarray
    V_minus: np.ndarray
    theta_plus: np.ndarray = field(default=None)
    theta_minus: np.ndarray = field(default=None)
    theta1_plus: np.ndarray = field(default=None)
    theta1_minus: np.ndarray = field(default=None)
    shape_plus: np.ndarray = field(default=None, repr=False)  # (P, n-1, n-1)
    shape_minus: np.ndarray = field(default=None, repr=False)

    @property
    def psi_trapped(self) -> np.ndarray:
        """Pointwise verdict ``theta1+ < 0 and theta1- < 0``."""
        return (self.theta1_plus < 0) & (self.theta1_minus < 0)

    def normal_residuals(self, model: SpacetimeModel) -> tuple[float, float]:
        """Worst ``|L(V)|`` and worst ``|g_V(V, w)|`` over both normals."""
        worst_L, worst_g = 0.0, 0.0
        for x, W, Vp, Vm in zip(self.points, self.tangents, self.V_plus, self.V_minus):
            for V in (Vp, Vm):
                g = metric_values(model, x, V)
                worst_L = max(worst_L, abs(0.5 * V @ g @ V))
                worst_g = max(worst_g, float(np.max(np.abs(W.T @ g @ V))))
        return worst_L, worst_g


def _normals_at(model, patch, u, seeds=None):
    x = patch.point(u)
    W = patch.tangents(u)
    hint = patch.outward(u) if patch.outward is not None else None
    Vp, Vm = lightlike_normals(model, x, W, hint, seeds)
    return x, W, Vp, Vm


def build_surface(model: SpacetimeModel, patch: SurfacePatch, expansions: bool = True) -> SurfaceData:
    """Normals at every sample of ``patch`` and, by default, both expansions."""
    pts, tans, vps, vms = [], [], [], []
    for u in patch.params:
        x, W, Vp, Vm = _normals_at(model, patch, u)
        pts.append(x)
        tans.append(W)
        vps.append(Vp)
        vms.append(Vm)
    data = SurfaceData(patch, patch.params.copy(), np.array(pts), np.array(tans),
                       np.array(vps), np.array(vms))
    if expansions:
        for side in ("plus", "minus"):
            theta, theta1, A = surface_expansion(model, data, side, return_shape=True)
            setattr(data, f"theta_{side}", theta)
            setattr(data, f"theta1_{side}", theta1)
            setattr(data, f"shape_{side}", A)
    return data


def _shape_operator(model, patch, u, x, W, V, side, Vp, Vm):
    """Matrix ``A`` with ``D^V_{w_j} V = sum_i A_ij w_i (mod V)``."""
    h = patch.scale * 1e-3
    k = W.shape[1]
    dV = np.empty((model.dim, k))
    for j in range(k):
        e = np.zeros_like(u)
        e[j] = h
        vals = []
        for sgn in (1.0, -1.0):
            _, _, a, b = _normals_at(model, patch, u + sgn * e, seeds=(Vp, Vm))
            vals.append(a if side == "plus" else b)
        dV[:, j] = (vals[0] - vals[1]) / (2 * h)
    _, N = spray_and_connection(model, x, V)
    D = dV + N @ W
    g = metric_values(model, x, V)
    hgram = W.T @ g @ W
    return np.linalg.solve(hgram, W.T @ g @ D)


def surface_expansion(model: SpacetimeModel, surface: SurfaceData, side: str = "plus",
                      return_shape: bool = False):
    """``theta`` and ``theta_1 = theta - psi'`` at every sample for ``V+`` or ``V-``.

    The weight correction uses ``psi'`` at ``t = 0`` along the null geodesic
    with initial velocity ``V`` (``epsilon = 1``, so no exponential factor).
    """
    if side not in ("plus", "minus"):
        raise ValueError("side must be 'plus' or 'minus'")
    thetas, theta1s, shapes = [], [], []
    for u, x, W, Vp, Vm in zip(surface.params, surface.points, surface.tangents,
                               surface.V_plus, surface.V_minus):
        V = Vp if side == "plus" else Vm
        try:
            A = _shape_operator(model, surface.patch, u, x, W, V, side, Vp, Vm)
        except (SurfaceError, DomainError) as exc:
            raise SurfaceError(f"stencil failed near u={u}: {exc}") from exc
        theta = float(np.trace(A))
        _, d1, _ = psi_derivatives(model, x, V)
        thetas.append(theta)
        theta1s.append(theta - d1)
        shapes.append(A)
    if return_shape:
        return np.array(thetas), np.array(theta1s), np.array(shapes)
    return np.array(thetas), np.array(theta1s)


def surface_congruence_tensor(model: SpacetimeModel, surface: SurfaceData, index: int = 0,
                              side: str = "minus", t_end: float = 1.0, tol: float = 1e-11,
                              samples: int = 801):
    """Jacobi tensor of the normal null geodesics leaving the surface.

    Along the geodesic from ``points[index]`` with velocity ``V+`` or ``V-``,
    the tangent vectors are transported as the quotient frame and
    ``J(0) = I``, ``J'(0) = A`` with ``A`` the shape operator of that normal.
    Returns ``(tensor, geodesic)``.
    """
    from .congruence import jacobi_tensor

    x = surface.points[index]
    W = surface.tangents[index]
    V = surface.V_plus[index] if side == "plus" else surface.V_minus[index]
    A = getattr(surface, f"shape_{side}")
    if A is None:
        _, _, A = surface_expansion(model, surface, side, return_shape=True)
    A = A[index]
    geo = integrate_geodesic(model, x, V, (0.0, t_end), tol=tol, epsilons=(0.0, 1.0))
    frame = transport_frame(model, geo, W, samples=samples)
    k = W.shape[1]
    tensor = jacobi_tensor(model, frame, np.eye(k), A, kind="from_surface")
    return tensor, frame.geodesic
