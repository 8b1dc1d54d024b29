"""Independent finite-difference references for quadratic (Lorentzian) models.

Nothing here touches the jet machinery.  For a quadratic ``L`` the metric
is recovered by polarization, ``g(a, b) = L(a + b) - L(a) - L(b)``, and
Christoffel symbols and the Riemann tensor follow from fourth-order central
differences in ``x``.  These serve as oracles for the Finsler code paths
on models where the two must agree.
"""

from __future__ import annotations

import numpy as np

from .models import SpacetimeModel

__all__ = [
    "polarized_metric",
    "christoffel_fd",
    "riemann_fd",
    "jacobi_operator_fd",
    "covariant_derivative_fd",
]

_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def polarized_metric(model: SpacetimeModel, x) -> np.ndarray:
    """Metric of a quadratic model from plain float evaluations of ``L``."""
    x = np.asarray(x, dtype=float)
    d = model.dim
    eye = np.eye(d)
    Ls = [float(model.L(x, eye[a])) for a in range(d)]
    g = np.empty((d, d))
    for a in range(d):
        g[a, a] = 2.0 * Ls[a]
        for b in range(a + 1, d):
            g[a, b] = g[b, a] = float(model.L(x, eye[a] + eye[b])) - Ls[a] - Ls[b]
    return g


def _d(fn, x, h):
    """Fourth-order central derivatives of ``fn`` along each axis, stacked last."""
    x = np.asarray(x, dtype=float)
    out = []
    for c in range(x.size):
        acc = 0.0
        for k, w in _STENCIL:
            e = np.zeros_like(x)
            e[c] = k * h
            acc = acc + w * fn(x + e)
        out.append(acc / (12.0 * h))
    return np.stack(out, axis=-1)


def christoffel_fd(model: SpacetimeModel, x, h: float = 1e-3) -> np.ndarray:
    """``Gamma[a, b, c]`` of the Levi-Civita connection."""
    g = polarized_metric(model, x)
    dg = _d(lambda y: polarized_metric(model, y), x, h)  # [d, c, e] = d_e g_dc
    lower = 0.5 * (np.einsum("dcb->dbc", dg) + np.einsum("bdc->dbc", dg) - np.einsum("bcd->dbc", dg))
    return np.linalg.solve(g, lower.reshape(g.shape[0], -1)).reshape(lower.shape)


def riemann_fd(model: SpacetimeModel, x, h: float = 1e-2, h_inner: float = 1e-3) -> np.ndarray:
    """``R[a, b, c, d] = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb``."""
    gam = christoffel_fd(model, x, h_inner)
    dgam = _d(lambda y: christoffel_fd(model, y, h_inner), x, h)  # [a, b, c, e] = d_e Gamma^a_bc
    term = np.einsum("adbc->abcd", dgam)  # d_c Gamma^a_db
    R = term - np.einsum("abcd->abdc", term)
    R += np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam)
    return R


def jacobi_operator_fd(model: SpacetimeModel, x, v, **kw) -> np.ndarray:
    """Matrix of ``w -> R(w, v) v``, the Lorentzian Jacobi operator."""
    R = riemann_fd(model, x, **kw)
    v = np.asarray(v, dtype=float)
    return np.einsum("abcd,b,d->ac", R, v, v)


def covariant_derivative_fd(model: SpacetimeModel, x, velocity, X, X_dot, h: float = 1e-3) -> np.ndarray:
    """``X' + Gamma(velocity, X)`` with Christoffel symbols from the oracle."""
    gam = christoffel_fd(model, x, h)
    return np.asarray(X_dot, float) + np.einsum("abc,b,c->a", gam, velocity, X)
