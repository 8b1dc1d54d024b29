"""Jacobi tensors, weighted expansion and shear, and focusing diagnostics.

Conventions along a geodesic with frame ``E`` (columns parallel, spanning
``N_eta`` or representing the quotient ``N_eta / eta'``):

* ``m`` is ``n`` on timelike and ``n - 1`` on lightlike geodesics, and
  ``N0`` is ``0`` and ``1`` respectively;
* ``f = exp(2 (1 - eps) psi_eta / m)`` so that ``X* = f X'``;
* ``R_frame = h^{-1} E^T g R E`` with ``h = E^T g E`` the frame gram;
* ``R_(N,eps) = f^2 (R_frame + (psi'' - psi'^2 / (N - n)) I / m)``.

Second derivatives ``J''`` used in the residual checks come from a
fourth-order central difference of the dense ``J'``, not from the ODE
right-hand side, so the Jacobi residual is a genuine check of the solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .geodesics import GeodesicSolution, ParallelFrame, frame_samples
from .geometry import (GeometryError, ParameterError, WeightedRicciParams, _psi_chain,
                       c_coefficient, curvature_batch, epsilon_range_check, psi_derivatives,
                       weighted_ricci_batch)
from .models import SpacetimeModel

__all__ = [
    "FrameCurvature",
    "JacobiTensorPath",
    "CongruenceReport",
    "S0Result",
    "frame_curvature",
    "jacobi_tensor",
    "point_congruence_tensor",
    "evolve_weighted_congruence",
    "detect_conjugate_points",
    "s0_prediction",
    "focusing_verdict",
    "genericity_probe",
]


@dataclass
class FrameCurvature:
    """Curvature and weight data on a time grid along one geodesic."""

    times: np.ndarray
    x: np.ndarray  # (T, dim)
    v: np.ndarray  # (T, dim)
    E: np.ndarray  # (T, dim, m)
    h: np.ndarray  # (T, m, m)
    R_frame: np.ndarray  # (T, m, m)
    psi: np.ndarray
    dpsi: np.ndarray
    d2psi: np.ndarray
    side: str
    n: int

    @property
    def m(self) -> int:
        return self.R_frame.shape[1]

    @property
    def N0(self) -> float:
        return 0.0 if self.side == "timelike" else 1.0

    @property
    def ricci(self) -> np.ndarray:
        return np.trace(self.R_frame, axis1=1, axis2=2)

    def factor(self, epsilon: float) -> np.ndarray:
        return np.exp(2.0 * (1.0 - epsilon) * self.psi / self.m)

    def weight_term(self, N: float) -> np.ndarray:
        """``psi'' - psi'^2 / (N - n)`` with the ``N = inf`` and ``N = n`` conventions."""
        if N == math.inf:
            return self.d2psi.copy()
        if N == self.n:
            return np.where(np.abs(self.dpsi) > 1e-12, -np.inf, self.d2psi)
        return self.d2psi - self.dpsi ** 2 / (N - self.n)

    def weighted(self, N: float, epsilon: float) -> np.ndarray:
        """``R_(N, eps)`` in frame coordinates, shape ``(T, m, m)``."""
        f2 = self.factor(epsilon) ** 2
        eye = np.eye(self.m)
        w = self.weight_term(N)
        with np.errstate(invalid="ignore"):
            return f2[:, None, None] * (self.R_frame + (w / self.m)[:, None, None] * eye)

    def ricci_N_star(self, N: float, epsilon: float) -> np.ndarray:
        """``Ric_N(eta*)`` from the trace of the weighted frame curvature."""
        return self.factor(epsilon) ** 2 * (self.ricci + self.weight_term(N))


def frame_curvature(model: SpacetimeModel, geodesic: GeodesicSolution, frame: ParallelFrame | None = None,
                    weighted: tuple | None = None, samples: int = 401):
    """Curvature endomorphism in frame coordinates along ``geodesic``.

    Returns a :class:`FrameCurvature`; with ``weighted=(N, eps)`` the
    matrix series ``R_(N, eps)`` is returned instead.
    """
    if frame is None:
        frame = frame_samples(geodesic, np.linspace(geodesic.t0, geodesic.t_end, samples))
    times = frame.times
    x, v = frame.geodesic.state(times)
    pack = curvature_batch(model, x, v)
    E = frame.basis
    h = frame.gram
    gR = np.einsum("Tab,Tbc->Tac", pack["g"], pack["R"])
    M = np.einsum("Tai,Tab,Tbj->Tij", E, gR, E)
    R_frame = np.linalg.solve(h, M)
    psi, d1, d2 = _psi_chain(model, x, v, pack["G"], pack["N"], pack["dGx"])
    side = "timelike" if geodesic.causal == "timelike" else "null"
    fc = FrameCurvature(times, x.T, v.T, E, h, R_frame, psi, d1, d2, side, model.n)
    if weighted is not None:
        return fc.weighted(*weighted)
    return fc


@dataclass
class JacobiTensorPath:
    """Matrix Jacobi field ``J`` in a parallel frame, with ``J'`` and ``J''``."""

    m: int
    times: np.ndarray
    J: np.ndarray
    Jp: np.ndarray
    Jpp: np.ndarray
    R_frame: np.ndarray
    kind: str
    lagrange: bool
    curvature: FrameCurvature
    geodesic: GeodesicSolution
    sol: Callable = field(repr=False)
    fd_step: float = 1e-3

    def J_at(self, t):
        y = self.sol(np.asarray(t, dtype=float))
        m2 = self.m * self.m
        return np.moveaxis(y[:m2].reshape((self.m, self.m) + np.shape(t)), -1, 0) \
            if np.ndim(t) else y[:m2].reshape(self.m, self.m)

    def det(self, t) -> np.ndarray:
        return np.linalg.det(self.J_at(t))

    def jacobi_residual(self) -> float:
        """``max |J'' + R J|`` relative to the run's largest term."""
        RJ = self.R_frame @ self.J
        res = np.abs(self.Jpp + RJ).max()
        span = float(self.times[-1] - self.times[0])
        # natural size of J'' on this run, so flat runs are not judged on round-off
        scale = max(np.abs(self.Jpp).max(), np.abs(RJ).max(), np.abs(self.Jp).max() / span,
                    np.abs(self.J).max() / span ** 2, 1e-300)
        return float(res / scale)

    def lagrange_residual(self) -> float:
        """``max |J'^T h J - J^T h J'|`` (``h``-transpose), relative."""
        h = self.curvature.h
        W = np.swapaxes(self.Jp, 1, 2) @ h @ self.J - np.swapaxes(self.J, 1, 2) @ h @ self.Jp
        scale = max(1.0, float(np.abs(self.J).max() * np.abs(self.Jp).max() * np.abs(h).max()))
        return float(np.abs(W).max() / scale)

    def nontriviality(self) -> float:
        """Minimum over the grid of the smallest singular value of ``[J; J']``."""
        stacked = np.concatenate([self.J, self.Jp], axis=1)
        return float(np.linalg.svd(stacked, compute_uv=False)[:, -1].min())


def jacobi_tensor(model: SpacetimeModel, frame: ParallelFrame, J0, J0p, kind: str = "custom",
                  tol: float = 1e-11, curvature: FrameCurvature | None = None,
                  fd_step: float = 1e-3) -> JacobiTensorPath:
    """Integrate ``J'' = -R_frame J`` from ``(J0, J0')`` along ``frame.geodesic``.

    ``R_frame`` is evaluated on ``frame.times`` and interpolated by a cubic
    spline; the ODE is solved with dense output.
    """
    geo = frame.geodesic
    fc = curvature or frame_curvature(model, geo, frame)
    m = fc.m
    J0 = np.asarray(J0, dtype=float).reshape(m, m)
    J0p = np.asarray(J0p, dtype=float).reshape(m, m)
    spline = CubicSpline(fc.times, fc.R_frame, axis=0)
    m2 = m * m

    def rhs(t, y):
        J = y[:m2].reshape(m, m)
        return np.concatenate([y[m2:], (-spline(t) @ J).ravel()])

    t0, t1 = fc.times[0], fc.times[-1]
    sol = solve_ivp(rhs, (t0, t1), np.concatenate([J0.ravel(), J0p.ravel()]), method="DOP853",
                    rtol=tol, atol=tol * 1e-3, dense_output=True)
    if sol.status != 0:
        raise GeometryError(f"Jacobi integration failed: {sol.message}")
    times = fc.times
    Y = sol.sol(times)
    J = np.moveaxis(Y[:m2].reshape(m, m, -1), -1, 0)
    Jp = np.moveaxis(Y[m2:].reshape(m, m, -1), -1, 0)
    d = fd_step
    tt = np.clip(times, t0 + 2 * d, t1 - 2 * d)  # one-sided shift only at the two ends

    def jp(s):
        return np.moveaxis(sol.sol(s)[m2:].reshape(m, m, -1), -1, 0)

    Jpp = (jp(tt - 2 * d) - 8 * jp(tt - d) + 8 * jp(tt + d) - jp(tt + 2 * d)) / (12 * d)
    # at the clipped ends fall back to the equation itself rather than a shifted stencil
    ends = tt != times
    Jpp[ends] = -fc.R_frame[ends] @ J[ends]
    h = fc.h
    W0 = J0p.T @ h[0] @ J0 - J0.T @ h[0] @ J0p
    lagrange = bool(np.abs(W0).max() <= 1e-12 * max(1.0, np.abs(h[0]).max()))
    return JacobiTensorPath(m, times, J, Jp, Jpp, fc.R_frame, kind, lagrange, fc, geo, sol.sol, d)


def point_congruence_tensor(model: SpacetimeModel, frame: ParallelFrame, **kw) -> JacobiTensorPath:
    """Jacobi tensor of the geodesics leaving ``eta(t0)``: ``J(t0) = 0``, ``J'(t0) = I``.

    ``J(t0) = 0`` makes it a Lagrange tensor.  The frame should be orthonormal
    for ``J'(t0) = I`` to mean the identity endomorphism.
    """
    m = frame.m
    return jacobi_tensor(model, frame, np.zeros((m, m)), np.eye(m), kind="from_point", **kw)


# -- conjugate points --------------------------------------------------------

@dataclass(frozen=True)
class ConjugatePoint:
    t: float
    error: float
    multiplicity: int
    sign_change: bool


def detect_conjugate_points(tensor: JacobiTensorPath, t_min: float | None = None,
                            resolution: int = 4000, rel_threshold: float = 1e-8):
    """Zeros of ``det J`` after ``t_min`` (default: a little past the start).

    A bracketed sign change of ``det J`` is refined with Brent's method; other
    dips of the smallest singular value are refined by bounded minimization
    and kept only if that value falls below ``rel_threshold`` times the median
    over the run.  Returns ``(accepted, tangencies)`` lists of
    :class:`ConjugatePoint`.
    """
    t0, t1 = float(tensor.times[0]), float(tensor.times[-1])
    if t_min is None:
        t_min = t0 + 1e-3 * (t1 - t0)
    ts = np.linspace(t_min, t1, resolution)
    Js = tensor.J_at(ts)
    dets = np.linalg.det(Js)
    svals = np.linalg.svd(Js, compute_uv=False)
    smin = svals[:, -1]
    median = float(np.median(svals[:, 0]))
    thresh = rel_threshold * max(median, 1e-300)

    def smin2_at(t):
        # squared so the minimum is smooth rather than a kink
        return float(np.linalg.svd(tensor.J_at(t), compute_uv=False)[-1]) ** 2

    def mult_at(t):
        s = np.linalg.svd(tensor.J_at(t), compute_uv=False)
        return int(np.sum(s < 1e-5 * max(median, 1e-300)))

    accepted, tangencies, seen = [], [], []
    signs = np.sign(dets)
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        a, b = ts[i], ts[i + 1]
        root = brentq(lambda s: float(np.linalg.det(tensor.J_at(s))), a, b, xtol=1e-12)
        accepted.append(ConjugatePoint(root, 1e-12, max(1, mult_at(root)), True))
        seen.append(root)
    # local minima of the smallest singular value without a det sign change
    idx = np.nonzero((smin[1:-1] <= smin[:-2]) & (smin[1:-1] <= smin[2:]))[0] + 1
    for i in idx:
        a, b = ts[i - 1], ts[i + 1]
        if any(a - 1e-9 <= s <= b + 1e-9 for s in seen):
            continue
        res = minimize_scalar(smin2_at, bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        value = math.sqrt(max(res.fun, 0.0))
        point = ConjugatePoint(float(res.x), 1e-9, mult_at(res.x), False)
        if value < thresh:
            accepted.append(point)
        elif value < 1e-3 * max(median, 1e-300):
            tangencies.append(point)
    accepted.sort(key=lambda p: p.t)
    return accepted, tangencies


# -- s0 bound -------------------------------------------------------------------

@dataclass(frozen=True)
class S0Result:
    status: str  # "ok" | "horizon"
    s0: float | None
    target_tau: float

    @property
    def inconclusive(self) -> bool:
        return self.status != "ok"


def s0_prediction(theta_eps_t0: float, t0: float, c: float, tau: GeodesicSolution,
                  epsilon: float) -> S0Result:
    """``s0 = tau_eps^{-1}(tau_eps(t0) - 1 / (c theta_eps(t0))) - t0``.

    When the target epsilon-proper time lies outside the integrated run the
    result has status ``"horizon"`` and no value.
    """
    if theta_eps_t0 == 0:
        raise ParameterError("theta_eps(t0) must be nonzero")
    if not c > 0:
        raise ParameterError("c must be positive")
    target = float(tau.tau_at(t0, epsilon)) - 1.0 / (c * theta_eps_t0)
    t_star = tau.tau_inverse(target, epsilon)
    if t_star is None:
        return S0Result("horizon", None, target)
    return S0Result("ok", t_star - t0, target)


# -- weighted congruence ------------------------------------------------------

@dataclass
class CongruenceReport:
    times: np.ndarray
    tau: np.ndarray
    theta: np.ndarray
    theta_eps: np.ndarray
    sigma_eps_norm2: np.ndarray
    B_eps: np.ndarray
    ricN_etastar: np.ndarray
    raychaudhuri_residual: np.ndarray
    jacobi_residual: np.ndarray
    riccati_residual: np.ndarray
    inequality_margin: np.ndarray
    bishop_margin: np.ndarray
    theta_identity_residual: float
    trace_free_residual: float
    ricci_route_residual: float
    conjugate_times: list
    tangencies: list
    s0: S0Result | None
    N: float
    epsilon: float
    c: float
    side: str
    equation: str
    window: tuple
    t0: float | None = None

    def max(self, name: str) -> float:
        arr = np.asarray(getattr(self, name), dtype=float)
        arr = arr[np.isfinite(arr)]
        return float(arr.max()) if arr.size else 0.0

    def csv_rows(self):
        header = ["t", "tau_eps", "theta", "theta_eps", "trace_sigma_eps2", "RicN_etastar",
                  "residual"]
        rows = np.column_stack([self.times, self.tau, self.theta, self.theta_eps,
                                self.sigma_eps_norm2, self.ricN_etastar, self.raychaudhuri_residual])
        return header, rows


def _rel(total, terms, floor):
    scale = np.maximum(np.max(np.abs(np.stack(terms)), axis=0), floor)
    return np.abs(total) / scale


def _window(J, cond_max=1e10):
    cond = np.linalg.cond(J)
    ok = np.isfinite(cond) & (cond < cond_max)
    best, start = (0, 0), None
    for i, flag in enumerate(np.append(ok, False)):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return best


def evolve_weighted_congruence(model: SpacetimeModel, tensor: JacobiTensorPath, N: float,
                               epsilon: float, t0: float | None = None,
                               cond_max: float = 1e10) -> CongruenceReport:
    """Weighted expansion, shear and identity residuals along ``tensor``.

    Parameters
    ----------
    N, epsilon : float
        Effective dimension (``math.inf`` allowed) and epsilon; must be
        admissible for the side of the geodesic.
    t0 : float, optional
        Reference time for the focusing bound ``s0``.  By default the grid
        time with ``theta_eps < 0`` whose bound ``t0 + s0`` is earliest.

    Notes
    -----
    The Raychaudhuri residual uses the form matching ``N``: the ``N = N0``
    form, the finite-``N`` form, or the ``N = inf`` form.  ``N = n`` has no
    equation and reports ``nan`` residuals; the inequality is still checked.
    """
    fc = tensor.curvature
    side, n, m, N0 = fc.side, fc.n, fc.m, fc.N0
    params = WeightedRicciParams(N, epsilon, side)
    ok, _ = epsilon_range_check(params, n)
    if not ok:
        raise ParameterError(f"epsilon={epsilon} inadmissible for N={N} ({side})")
    c = c_coefficient(params, n)
    lo, hi = _window(tensor.J, cond_max)
    if hi - lo < 3:
        raise GeometryError("invertibility window is empty")
    sl = slice(lo, hi)
    t = tensor.times[sl]
    J, Jp, Jpp = tensor.J[sl], tensor.Jp[sl], tensor.Jpp[sl]
    psi, d1, d2 = fc.psi[sl], fc.dpsi[sl], fc.d2psi[sl]
    R = fc.R_frame[sl]
    eye = np.eye(m)
    a = 2.0 * (1.0 - epsilon) / m
    f = np.exp(a * psi)
    fp = a * d1 * f
    e = np.exp(-psi / m)
    # starred quantities
    ps1 = f * d1
    ps2 = f * f * (d2 + a * d1 * d1)
    Jpsi = e[:, None, None] * J
    dJpsi = e[:, None, None] * (Jp - (d1 / m)[:, None, None] * J)
    Jpsi_s = f[:, None, None] * dJpsi
    ddJpsi = (-(d1 / m)[:, None, None] * dJpsi
              + e[:, None, None] * (Jpp - (d2 / m)[:, None, None] * J - (d1 / m)[:, None, None] * Jp))
    Jpsi_ss = f[:, None, None] * (fp[:, None, None] * dJpsi + f[:, None, None] * ddJpsi)
    R0 = fc.weighted(N0, epsilon)[sl]
    jac_terms = [Jpsi_ss, (2 * epsilon / m) * ps1[:, None, None] * Jpsi_s, R0 @ Jpsi]
    jac_total = sum(jac_terms)
    jac_norms = [np.abs(x).max(axis=(1, 2)) for x in jac_terms]
    span = float(t[-1] - t[0])
    jac_scale = max(max(x.max() for x in jac_norms), np.abs(Jpsi_s).max() / span,
                    np.abs(Jpsi).max() / span ** 2, 1e-300)
    jac_res = np.abs(jac_total).max(axis=(1, 2)) / jac_scale

    Jinv = np.linalg.inv(J)
    B = Jp @ Jinv
    Beps = Jpsi_s @ np.linalg.inv(Jpsi)
    Bp = Jpp @ Jinv - B @ B
    dBeps = fp[:, None, None] * (B - (d1 / m)[:, None, None] * eye) \
        + f[:, None, None] * (Bp - (d2 / m)[:, None, None] * eye)
    Beps_s = f[:, None, None] * dBeps
    ric_terms = [Beps_s, (2 * epsilon / m) * ps1[:, None, None] * Beps, Beps @ Beps, R0]
    ric_total = sum(ric_terms)
    ric_norm = [np.abs(x).max(axis=(1, 2)) for x in ric_terms]
    floor = 1e-3 * np.median(np.max(np.stack(ric_norm), axis=0))
    ric_res = _rel(np.abs(ric_total).max(axis=(1, 2)), ric_norm, floor)

    theta = np.trace(B, axis1=1, axis2=2)
    theta_eps = np.trace(Beps, axis1=1, axis2=2)
    theta_eps_alt = f * (theta - d1)
    sc = np.maximum(np.abs(theta_eps_alt), 1e-300)
    theta_id = float(np.max(np.abs(theta_eps - theta_eps_alt) / np.maximum(sc, np.median(sc))))
    sigma = Beps - (theta_eps / m)[:, None, None] * eye
    trace_free = float(np.max(np.abs(np.trace(sigma, axis1=1, axis2=2))
                              / np.maximum(np.abs(theta_eps), np.median(np.abs(theta_eps)) + 1e-300)))
    sig2 = np.trace(sigma @ sigma, axis1=1, axis2=2)
    theta_eps_s = np.trace(Beps_s, axis1=1, axis2=2)

    ricN = fc.ricci_N_star(N, epsilon)[sl]
    # second route: weighted Ricci at eta* = f eta' from the pointwise geometry layer
    vstar = (f[:, None] * fc.v[sl]).T
    ricN_b = weighted_ricci_batch(model, fc.x[sl].T, vstar, N)
    both = np.isfinite(ricN) & np.isfinite(ricN_b)
    rscale = max(1.0, float(np.abs(ricN[both]).max()) if both.any() else 1.0)
    ricci_route = float(np.abs(ricN[both] - ricN_b[both]).max() / rscale) if both.any() else 0.0
    if np.any(np.isfinite(ricN) != np.isfinite(ricN_b)):
        ricci_route = math.inf

    M = N - N0
    if N == N0:
        eq = "N=N0"
        terms = [theta_eps_s, (2 * epsilon / m) * ps1 * theta_eps, theta_eps ** 2 / m, sig2, ricN]
    elif N == math.inf:
        eq = "N=inf"
        terms = [theta_eps_s, (1 - epsilon ** 2) * theta_eps ** 2 / m,
                 (epsilon * theta_eps + ps1) ** 2 / m, sig2, ricN]
    elif N == n:
        eq = "none"
        terms = None
    else:
        eq = "finite"
        terms = [theta_eps_s, (1 - epsilon ** 2 * (M - m) / M) * theta_eps ** 2 / m,
                 (M * (M - m) / m) * (epsilon * theta_eps / M + ps1 / (M - m)) ** 2, sig2, ricN]
    if terms is None:
        ray_res = np.full(t.shape, np.nan)
    else:
        norms = [np.abs(x) for x in terms]
        floor = 1e-3 * np.median(np.max(np.stack(norms), axis=0))
        ray_res = _rel(sum(terms), norms, floor)

    # inequality theta* <= -Ric_N - tr sigma^2 - c theta^2, as a relative margin (<= 0 is fine)
    ineq_terms = [theta_eps_s, c * theta_eps ** 2, sig2, ricN]
    with np.errstate(invalid="ignore"):
        lhs = theta_eps_s + c * theta_eps ** 2 + sig2 + ricN
        finite_norms = [np.where(np.isfinite(x), np.abs(x), 0.0) for x in ineq_terms]
        floor = 1e-3 * np.median(np.max(np.stack(finite_norms), axis=0))
        ineq = lhs / np.maximum(np.max(np.stack(finite_norms), axis=0), floor)
    ineq = np.where(np.isfinite(ineq), ineq, -np.inf)

    # weighted Bishop: xi = |det J_psi|^c, xi** = xi (c theta* + c^2 theta^2)
    xi = np.abs(np.linalg.det(Jpsi)) ** c
    xi_ss = xi * (c * theta_eps_s + c * c * theta_eps ** 2)
    with np.errstate(invalid="ignore"):
        bish = xi_ss + c * xi * ricN
        bterms = [xi * c * np.abs(theta_eps_s), xi * c * c * theta_eps ** 2,
                  c * xi * np.abs(np.where(np.isfinite(ricN), ricN, 0.0))]
        bscale = np.max(np.stack(bterms), axis=0)
        bscale = np.maximum(bscale, 1e-3 * np.median(bscale) + 1e-300)
        bish = np.where(np.isfinite(bish), bish / bscale, -np.inf)

    tau = np.asarray(tensor.geodesic.tau_at(t, epsilon))
    conj, tang = detect_conjugate_points(tensor)
    s0 = None
    if t0 is None:
        # tau_eps is increasing, so the smallest target tau gives the earliest t0 + s0
        neg = np.nonzero(theta_eps < 0)[0]
        if neg.size:
            target = tau[neg] - 1.0 / (c * theta_eps[neg])
            t0 = float(t[neg[int(np.argmin(target))]])
    if t0 is not None:
        th0 = _theta_eps_at(model, tensor, t0, epsilon)
        if th0 != 0:
            s0 = s0_prediction(th0, t0, c, tensor.geodesic, epsilon)
    return CongruenceReport(t, tau, theta, theta_eps, sig2, Beps, ricN, ray_res, jac_res, ric_res,
                            ineq, bish, theta_id, trace_free, ricci_route, conj, tang, s0,
                            N, epsilon, c, side, eq, (float(t[0]), float(t[-1])), t0)


def _theta_eps_at(model: SpacetimeModel, tensor: JacobiTensorPath, t: float, epsilon: float) -> float:
    """``theta_eps`` at an arbitrary parameter from the dense Jacobi solution."""
    m = tensor.m
    y = tensor.sol(float(t))
    J = y[:m * m].reshape(m, m)
    Jp = y[m * m:2 * m * m].reshape(m, m)
    theta = float(np.trace(np.linalg.solve(J.T, Jp.T).T))
    x, v = tensor.geodesic.state(float(t))
    psi, dpsi, _ = psi_derivatives(model, x, v)
    return math.exp(2.0 * (1.0 - epsilon) * psi / m) * (theta - dpsi)


@dataclass(frozen=True)
class FocusingVerdict:
    status: str  # "pass" | "fail" | "inconclusive: horizon" | "precondition"
    t0: float
    s0: float | None
    first_zero: float | None
    detail: str = ""


def focusing_verdict(report: CongruenceReport, tensor: JacobiTensorPath, ric_tol: float = 1e-9) -> FocusingVerdict:
    """Check that ``det J`` vanishes in ``[t0, t0 + s0]`` plus one grid cell.

    Preconditions are ``Ric_N(eta*) >= 0`` on the run and
    ``theta_eps(t0) < 0``; when they fail the status is ``"precondition"``.
    """
    if report.t0 is None or report.s0 is None:
        return FocusingVerdict("precondition", report.t0 or math.nan, None, None, "theta_eps never negative")
    th0 = float(np.interp(report.t0, report.times, report.theta_eps))
    ric = tensor.curvature.ricci_N_star(report.N, report.epsilon)
    if th0 >= 0 or np.nanmin(ric) < -ric_tol * max(1.0, np.nanmax(np.abs(ric[np.isfinite(ric)]))):
        return FocusingVerdict("precondition", report.t0, None, None, "Ric_N or theta_eps sign")
    if report.s0.inconclusive:
        return FocusingVerdict("inconclusive: horizon", report.t0, None, None)
    cell = float(np.max(np.diff(tensor.times)))
    zeros = [p.t for p in report.conjugate_times if p.t >= report.t0 - 1e-12]
    first = zeros[0] if zeros else None
    limit = report.t0 + report.s0.s0 + cell
    if first is not None and first <= limit:
        return FocusingVerdict("pass", report.t0, report.s0.s0, first)
    if first is None and limit >= tensor.times[-1]:
        return FocusingVerdict("inconclusive: horizon", report.t0, report.s0.s0, None)
    return FocusingVerdict("fail", report.t0, report.s0.s0, first,
                           f"first zero {first} after bound {limit}")


def genericity_probe(model: SpacetimeModel, geodesic: GeodesicSolution, frame: ParallelFrame | None = None,
                     weighted_variant: bool = False, threshold: float = 1e-10) -> tuple[float, bool]:
    """Largest ``|R_frame|`` (or ``|R_(N0, 0)|``) along the geodesic, and the verdict."""
    fc = frame_curvature(model, geodesic, frame)
    mats = fc.weighted(fc.N0, 0.0) if weighted_variant else fc.R_frame
    margin = float(np.max(np.linalg.norm(mats, ord=2, axis=(1, 2))))
    return margin, margin > threshold
