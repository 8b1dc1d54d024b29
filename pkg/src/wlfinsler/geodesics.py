"""Geodesics, epsilon-proper time, parallel frames and curve length.

The geodesic equation is ``x'' + 2 G(x') = 0``.  States are integrated with
:func:`scipy.integrate.solve_ivp` (dense output) and may be augmented by

* one epsilon-proper-time quadrature per requested ``epsilon``:
  ``d tau_eps / dt = exp(2 (eps - 1) psi_eta / m)`` with ``m = n`` on
  timelike and ``m = n - 1`` on lightlike geodesics;
* a frame ``P`` (``dim x k``) transported by ``P' = -N(x') P``, which is
  ``D P = 0`` since ``Gamma^a_{bc}(v) v^b = N^a_c(v)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.linalg import null_space
from scipy.optimize import brentq

from . import autodiff as ad
from .geometry import (DegeneracyError, GeometryError, connection_at, metric_values,
                       spray_and_connection, spray_values)
from .models import SpacetimeModel, classify_vector, lorentz_finsler_norm

__all__ = [
    "GeodesicError",
    "ChartExitError",
    "GeodesicSolution",
    "ParallelFrame",
    "integrate_geodesic",
    "transport_frame",
    "covariant_derivative",
    "exponential_map",
    "curve_length",
    "orthonormal_frame",
]


class GeodesicError(RuntimeError):
    """Integration failure; ``state`` holds the last good ``(t, x, v)``."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ChartExitError(GeodesicError):
    pass


def _psi_scalar(model, x, v) -> float:
    return float(np.asarray(model.weight(list(x), list(v)), dtype=float))


@dataclass
class GeodesicSolution:
    """Dense solution of a causal geodesic.

    ``t_grid`` holds the solver's accepted steps.  ``x``, ``v``,
    ``psi_eta`` and ``tau`` are sampled there; :meth:`state` and
    :meth:`tau_at` evaluate the dense interpolant anywhere in the range.
    """

    model: SpacetimeModel
    t_grid: np.ndarray
    x: np.ndarray
    v: np.ndarray
    L_value: float
    psi_eta: np.ndarray
    epsilons: tuple
    tau: np.ndarray
    unit_speed: bool
    causal: str
    m: int
    event: str | None
    sol: Callable = field(repr=False)
    frame_shape: tuple | None = None
    tol: float = 1e-10

    @property
    def dim(self) -> int:
        return self.model.dim

    @property
    def t0(self) -> float:
        return float(self.t_grid[0])

    @property
    def t_end(self) -> float:
        return float(self.t_grid[-1])

    def _y(self, t):
        return self.sol(np.asarray(t, dtype=float))

    def state(self, t):
        y = self._y(t)
        d = self.dim
        return y[:d], y[d:2 * d]

    def frame(self, t) -> np.ndarray:
        if self.frame_shape is None:
            raise GeometryError("no frame was transported with this geodesic")
        y = self._y(t)
        d, k = self.frame_shape
        off = 2 * d + len(self.epsilons)
        P = y[off:off + d * k]
        if P.ndim == 1:
            return P.reshape(d, k)
        return np.moveaxis(P.reshape(d, k, -1), -1, 0)

    def tau_at(self, t, epsilon: float) -> np.ndarray:
        """``tau_eps(t)`` with ``tau_eps(t0) = 0``."""
        if epsilon in self.epsilons:
            j = self.epsilons.index(epsilon)
            return self._y(t)[2 * self.dim + j]
        return self._tau_quadrature(np.atleast_1d(t), epsilon).reshape(np.shape(t))

    def _tau_quadrature(self, t, epsilon):
        grid = np.linspace(self.t0, self.t_end, 4001)
        x, v = self.state(grid)
        psi = np.asarray(self.model.weight(list(x), list(v)), float)
        psi = np.broadcast_to(psi, grid.shape)
        rate = np.exp(2.0 * (epsilon - 1.0) * psi / self.m)
        from scipy.integrate import cumulative_simpson
        tau = np.concatenate([[0.0], cumulative_simpson(rate, x=grid)])
        return np.interp(t, grid, tau)

    def tau_rate(self, t, epsilon: float) -> np.ndarray:
        """Integrand ``exp(2 (eps - 1) psi_eta / m)`` of the epsilon-proper time."""
        x, v = self.state(t)
        psi = np.asarray(self.model.weight(list(x), list(v)), float)
        return np.exp(2.0 * (epsilon - 1.0) * psi / self.m)

    def tau_inverse(self, target: float, epsilon: float) -> float | None:
        """Parameter ``t`` with ``tau_eps(t) = target``; ``None`` beyond the run."""
        grid = np.linspace(self.t0, self.t_end, 2001)
        tau = np.asarray(self.tau_at(grid, epsilon))
        if target < tau[0] or target > tau[-1]:
            return None
        i = int(np.searchsorted(tau, target))
        if i == 0:
            return float(grid[0])
        lo, hi = grid[i - 1], grid[min(i, grid.size - 1)]
        if lo == hi:
            return float(lo)
        return float(brentq(lambda s: float(self.tau_at(s, epsilon)) - target, lo, hi,
                            xtol=1e-13, rtol=4 * np.finfo(float).eps))

    def L_drift(self, samples: int = 2001) -> float:
        """``sup |L(x'(t)) - L(x'(t0))|`` over the steps and a dense resample."""
        t = np.union1d(self.t_grid, np.linspace(self.t0, self.t_end, samples))
        x, v = self.state(t)
        Ls = np.asarray(self.model.lagrangian(list(x), list(v)), float)
        return float(np.max(np.abs(Ls - self.L_value)))

    def csv_rows(self):
        """Header and rows for the dense-output table."""
        d = self.dim
        header = (["t"] + [f"x{a}" for a in range(d)] + [f"v{a}" for a in range(d)]
                  + ["L", "psi_eta"] + [f"tau_eps={e:g}" for e in self.epsilons])
        Ls = np.asarray(self.model.lagrangian(list(self.x.T), list(self.v.T)), float)
        Ls = np.broadcast_to(Ls, self.t_grid.shape)
        rows = np.column_stack([self.t_grid, self.x, self.v, Ls, self.psi_eta]
                               + ([self.tau] if self.epsilons else []))
        return header, rows


@dataclass
class ParallelFrame:
    """Frame ``e_1..e_m`` along a geodesic, sampled on ``times``."""

    times: np.ndarray
    basis: np.ndarray  # (T, dim, m)
    gram: np.ndarray  # (T, m, m)
    orthogonality: np.ndarray  # (T,) max |g(eta', e_i)|
    geodesic: GeodesicSolution

    @property
    def m(self) -> int:
        return self.basis.shape[2]

    def at(self, t) -> np.ndarray:
        return self.geodesic.frame(t)

    def gram_drift(self) -> float:
        return float(np.max(np.abs(self.gram - self.gram[0])))


def _chart_event(model):
    dom = model.chart_domain
    finite = np.isfinite(dom)
    if not finite.any():
        return None
    d = model.dim

    def event(t, y):
        x = y[:d]
        gaps = []
        if finite[:, 0].any():
            gaps.append(np.min((x - dom[:, 0])[finite[:, 0]]))
        if finite[:, 1].any():
            gaps.append(np.min((dom[:, 1] - x)[finite[:, 1]]))
        return float(min(gaps))

    event.terminal = True
    event.direction = -1
    return event


def integrate_geodesic(model: SpacetimeModel, x0, v0, t_span, tol: float = 1e-10,
                       epsilons: Sequence[float] = (), unit_speed: bool = True,
                       frame=None, method: str = "DOP853", max_step: float = np.inf,
                       causal_tol: float = 1e-9) -> GeodesicSolution:
    """Integrate the geodesic with ``x(t0) = x0`` and ``x'(t0) = v0``.

    Parameters
    ----------
    t_span : (float, float)
        Start and end parameter.
    tol : float
        Relative tolerance; the absolute tolerance is ``tol * 1e-2``.
    epsilons : sequence of float
        Epsilon values whose proper times are carried as extra states.
    unit_speed : bool
        Rescale a timelike ``v0`` to ``F(v0) = 1`` before integrating.
    frame : array (dim, k), optional
        Columns transported in parallel along the geodesic.
    method : str
        ``"DOP853"`` (default) or ``"RK45"``; any :func:`solve_ivp` method.

    Returns
    -------
    GeodesicSolution
        ``event`` is ``"chart_exit"`` if the curve left the chart first.

    Raises
    ------
    GeometryError
        ``v0`` is not causal or ``x0`` is outside the chart.
    GeodesicError
        The step size collapsed or the metric degenerated along the way.
    """
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    d = model.dim
    if not model.in_chart(x0):
        raise GeometryError("initial point outside the chart")
    cls = classify_vector(model, x0, v0, tol=causal_tol)
    if not cls.causal:
        raise GeometryError(f"initial velocity is {cls.kind}, not causal")
    if cls.kind == "timelike" and unit_speed:
        v0 = v0 / lorentz_finsler_norm(model, x0, v0)
    causal = cls.kind
    m = model.n if causal == "timelike" else model.n - 1
    eps = tuple(float(e) for e in epsilons)
    if m < 1 and (eps or frame is not None):
        raise GeometryError("lightlike epsilon-times and frames need dimension >= 3")
    ne = len(eps)
    k = 0
    parts = [x0, v0, np.zeros(ne)]
    if frame is not None:
        frame = np.asarray(frame, dtype=float).reshape(d, -1)
        k = frame.shape[1]
        parts.append(frame.ravel())
    y0 = np.concatenate(parts)
    weighted = model.weighted and ne > 0

    def rhs(t, y):
        x, v = y[:d], y[d:2 * d]
        try:
            if k:
                G, N = spray_and_connection(model, x, v)
            else:
                G = spray_values(model, x, v)
        except (np.linalg.LinAlgError, ZeroDivisionError, ad.DomainError) as err:
            raise GeodesicError(f"metric degenerated at t={t:g}: {err}", (t, x, v)) from err
        out = [v, -2.0 * G]
        if ne:
            psi = _psi_scalar(model, x, v) if weighted else 0.0
            out.append(np.exp(2.0 * (np.array(eps) - 1.0) * psi / m))
        if k:
            P = y[2 * d + ne:].reshape(d, k)
            out.append((-N @ P).ravel())
        return np.concatenate(out)

    event = _chart_event(model)
    sol = solve_ivp(rhs, t_span, y0, method=method, rtol=tol, atol=tol * 1e-2,
                    dense_output=True, events=event, max_step=max_step)
    if sol.status == -1:
        last = (sol.t[-1], sol.y[:d, -1], sol.y[d:2 * d, -1])
        raise GeodesicError(f"integration failed: {sol.message}", last)
    reason = "chart_exit" if sol.status == 1 else None
    xs, vs = sol.y[:d].T, sol.y[d:2 * d].T
    psi = np.broadcast_to(np.asarray(model.weight(list(xs.T), list(vs.T)), float), sol.t.shape)
    L0 = float(np.asarray(model.L(x0, v0), float))
    return GeodesicSolution(model, sol.t, xs, vs, L0, np.array(psi), eps,
                            sol.y[2 * d:2 * d + ne].T, unit_speed and causal == "timelike",
                            causal, m, reason, sol.sol, (d, k) if k else None, tol)


def orthonormal_frame(model: SpacetimeModel, x, v) -> np.ndarray:
    """Frame of ``N_v = {w : g_v(v, w) = 0}`` (or of its quotient by ``v``).

    Timelike ``v``: ``n`` columns, ``g_v``-orthonormal.  Lightlike ``v``:
    ``n - 1`` columns orthonormal for the induced metric ``h`` on the
    quotient ``N_v / v``.

    Raises
    ------
    GeometryError
        ``v`` is spacelike, so ``N_v`` is not positive definite.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if classify_vector(model, x, v).kind == "spacelike":
        raise GeometryError("orthonormal_frame needs a causal vector, got a spacelike one")
    g = metric_values(model, x, v)
    ns = null_space((g @ v)[None, :])
    gram = ns.T @ g @ ns
    w, U = np.linalg.eigh(gram)
    scale = np.abs(w).max()
    keep = w > 1e-9 * scale
    return ns @ U[:, keep] / np.sqrt(w[keep])


def transport_frame(model: SpacetimeModel, geodesic: GeodesicSolution, initial_basis,
                    samples: int = 201) -> ParallelFrame:
    """Parallel-transport ``initial_basis`` along ``geodesic``.

    The geodesic is re-integrated jointly with the frame over the same span
    and tolerance, with its initial velocity as stored.

    Raises
    ------
    GeometryError
        The basis is not ``g_v0``-orthogonal to ``v0`` (relative violation
        above ``1e-8``) or is dependent (modulo ``v0`` for null geodesics).
    """
    E = np.asarray(initial_basis, dtype=float)
    x0, v0 = geodesic.x[0], geodesic.v[0]
    g0 = metric_values(model, x0, v0)
    viol = np.abs(v0 @ g0 @ E) / (np.linalg.norm(g0 @ v0) * np.linalg.norm(E, axis=0))
    if np.any(viol > 1e-8):
        raise GeometryError(f"initial basis not orthogonal to v0 (violation {viol.max():.2e})")
    stack = np.column_stack([v0, E]) if geodesic.causal == "lightlike" else E
    if np.linalg.matrix_rank(stack, tol=1e-10 * np.abs(stack).max()) < stack.shape[1]:
        raise GeometryError("initial basis is linearly dependent")
    full = integrate_geodesic(model, x0, v0, (geodesic.t0, geodesic.t_end), tol=geodesic.tol,
                              epsilons=geodesic.epsilons, unit_speed=False, frame=E)
    return frame_samples(full, np.linspace(full.t0, full.t_end, samples))


def frame_samples(geodesic: GeodesicSolution, times) -> ParallelFrame:
    times = np.asarray(times, dtype=float)
    x, v = geodesic.state(times)
    P = geodesic.frame(times)
    g = metric_values(geodesic.model, x, v)
    gram = np.einsum("Tai,Tab,Tbj->Tij", P, g, P)
    orth = np.abs(np.einsum("aT,Tab,Tbi->Ti", v, g, P)).max(axis=1)
    return ParallelFrame(times, P, gram, orth, geodesic)


def covariant_derivative(model: SpacetimeModel, X: Callable, geodesic: GeodesicSolution,
                         times, reference: Callable | None = None,
                         X_dot: Callable | None = None, h: float = 1e-3) -> np.ndarray:
    """``D^w_{eta'} X = X' + Gamma(w) eta' X`` along ``geodesic`` at ``times``.

    ``X`` and ``reference`` map ``t`` to a vector; the reference defaults to
    the velocity.  ``X'`` is taken from ``X_dot`` when given, otherwise from
    a fourth-order central difference with step ``h``.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = []
    for t in times:
        x, v = geodesic.state(t)
        w = v if reference is None else np.asarray(reference(t), float)
        if not np.any(w):
            raise GeometryError("zero reference vector")
        if X_dot is not None:
            xd = np.asarray(X_dot(t), float)
        else:
            xd = (np.asarray(X(t - 2 * h)) - 8 * np.asarray(X(t - h)) + 8 * np.asarray(X(t + h))
                  - np.asarray(X(t + 2 * h))) / (12 * h)
        gam = connection_at(model, x, w).gamma
        out.append(xd + np.einsum("abc,b,c->a", gam, v, np.asarray(X(t), float)))
    return np.array(out)


def exponential_map(model: SpacetimeModel, x, v, t: float = 1.0, tol: float = 1e-12) -> np.ndarray:
    """``eta(t)`` for the geodesic with ``eta(0) = x`` and ``eta'(0) = v``."""
    sol = integrate_geodesic(model, x, v, (0.0, t), tol=tol, unit_speed=False)
    if sol.event == "chart_exit":
        raise ChartExitError("geodesic left the chart before the requested parameter",
                             (sol.t_end, sol.x[-1], sol.v[-1]))
    return sol.x[-1].copy()


def curve_length(model: SpacetimeModel, t, x=None, v=None, tol: float = 1e-9,
                 samples: int = 2001) -> float:
    """Lorentz-Finsler length ``int F(x') dt`` by Simpson's rule.

    Pass either a :class:`GeodesicSolution` (sampled densely) or arrays ``t``,
    ``x`` (T, dim) and ``v`` (T, dim).
    """
    if isinstance(t, GeodesicSolution):
        geo = t
        t = np.linspace(geo.t0, geo.t_end, samples)
        xs, vs = geo.state(t)
    else:
        t = np.asarray(t, dtype=float)
        xs, vs = np.asarray(x, float).T, np.asarray(v, float).T
    Ls = np.broadcast_to(np.asarray(model.lagrangian(list(xs), list(vs)), float), t.shape)
    if np.any(Ls > tol * np.sum(vs * vs, axis=0)):
        raise ad.DomainError("spacelike tangent on the curve")
    F = np.sqrt(np.maximum(0.0, -2.0 * Ls))
    return float(simpson(F, x=t))
