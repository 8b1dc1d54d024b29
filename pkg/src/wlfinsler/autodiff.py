"""Truncated multivariate Taylor jets over tangent-bundle coordinates.

A :class:`Jet` stores the Taylor coefficients of a scalar (or an array of
scalars) in the displacements ``(dx, dv)`` around a base point ``(x, v)``.
Truncation is per group: total degree in ``dx`` at most ``px``, in ``dv`` at
most ``pv`` and overall at most ``pt``.  The monomial tables are built once
per ``(dim, px, pv, pt)`` and cached.

Coefficients carry trailing batch axes, so one evaluation of a model on a
jet whose value is an array of shape ``(B,)`` yields jets for ``B`` base
points at once.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MonomialBasis",
    "Jet",
    "DiffConfig",
    "DomainError",
    "basis",
    "lift",
    "variables",
    "partial",
    "finite_difference_check",
    "exp",
    "log",
    "sqrt",
    "sin",
    "cos",
    "sinh",
    "cosh",
    "atan",
    "atan2",
    "power",
]


class DomainError(ValueError):
    """Raised when a function is applied outside its real domain."""


class MonomialBasis:
    """Downward-closed monomial set in ``2*dim`` variables ``(x, v)``."""

    def __init__(self, dim: int, px: int, pv: int, pt: int):
        if dim < 1:
            raise ValueError("dim must be positive")
        pt = min(pt, px + pv)
        self.dim, self.px, self.pv, self.pt = dim, px, pv, pt
        nvar = 2 * dim
        exps = []
        for total in range(pt + 1):
            for combo in itertools.combinations_with_replacement(range(nvar), total):
                e = [0] * nvar
                for c in combo:
                    e[c] += 1
                if sum(e[:dim]) <= px and sum(e[dim:]) <= pv:
                    exps.append(tuple(e))
        self.exponents = np.array(exps, dtype=np.int64).reshape(len(exps), nvar)
        self.index = {e: k for k, e in enumerate(exps)}
        self.size = len(exps)
        self.degree = self.exponents.sum(axis=1)
        self.max_degree = int(self.degree.max())

        pi, pj, pk = [], [], []
        for k, e in enumerate(exps):
            for sub in itertools.product(*(range(c + 1) for c in e)):
                rest = tuple(a - b for a, b in zip(e, sub))
                pi.append(self.index[sub])
                pj.append(self.index[rest])
                pk.append(k)
        order = np.argsort(np.array(pk), kind="stable")
        self._pi = np.array(pi)[order]
        self._pj = np.array(pj)[order]
        pk_sorted = np.array(pk)[order]
        self._starts = np.searchsorted(pk_sorted, np.arange(self.size))
        # factorial weights turning Taylor coefficients into partials
        self.factorial = np.array(
            [math.prod(math.factorial(int(c)) for c in e) for e in exps], dtype=float
        )

    def __repr__(self) -> str:
        return (f"MonomialBasis(dim={self.dim}, px={self.px}, pv={self.pv}, "
                f"pt={self.pt}, size={self.size})")

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.dim, self.px, self.pv, self.pt)

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = _align(a, b)
        prod = a[self._pi] * b[self._pj]
        return np.add.reduceat(prod, self._starts, axis=0)

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        prod = np.matmul(a[self._pi], b[self._pj])
        return np.add.reduceat(prod, self._starts, axis=0)

    def slot(self, role: str, i: int) -> int | None:
        """Index of the first-order monomial of a coordinate (None if truncated away)."""
        e = [0] * (2 * self.dim)
        e[i if role == "x" else self.dim + i] = 1
        return self.index.get(tuple(e))


@lru_cache(maxsize=None)
def basis(dim: int, px: int, pv: int, pt: int | None = None) -> MonomialBasis:
    """Cached :class:`MonomialBasis`; ``pt`` defaults to ``px + pv``."""
    return MonomialBasis(dim, px, pv, px + pv if pt is None else pt)


def _align(a: np.ndarray, b: np.ndarray):
    """Pad coefficient arrays so their value shapes broadcast like numpy arrays."""
    if a.ndim < b.ndim:
        a = a.reshape(a.shape[:1] + (1,) * (b.ndim - a.ndim) + a.shape[1:])
    elif b.ndim < a.ndim:
        b = b.reshape(b.shape[:1] + (1,) * (a.ndim - b.ndim) + b.shape[1:])
    return a, b


@lru_cache(maxsize=None)
def _transfer(src_key, dst_key):
    src, dst = basis(*src_key), basis(*dst_key)
    take = np.array([src.index[tuple(e)] for e in dst.exponents.tolist()])
    return take


@lru_cache(maxsize=None)
def _derivative_map(key, var):
    """Index map and multipliers for d/d(var) from basis ``key``."""
    src = basis(*key)
    dim, px, pv, pt = key
    if var < dim:
        if px == 0:
            raise ValueError("x-order exhausted")
        dst = basis(dim, px - 1, pv, pt - 1)
    else:
        if pv == 0:
            raise ValueError("v-order exhausted")
        dst = basis(dim, px, pv - 1, pt - 1)
    take, mult = [], []
    for e in dst.exponents.tolist():
        up = list(e)
        up[var] += 1
        take.append(src.index[tuple(up)])
        mult.append(up[var])
    return dst.key, np.array(take), np.array(mult, dtype=float)


def _as_coef(value, shape):
    return np.broadcast_to(np.asarray(value, dtype=float), shape)


class Jet:
    """Truncated Taylor expansion with optional trailing batch axes.

    ``coef[k]`` is the Taylor coefficient of monomial ``k`` of
    :attr:`basis`; the mixed partial is ``coef[k] * basis.factorial[k]``.
    """

    __array_priority__ = 100

    def __init__(self, basis_: MonomialBasis, coef: np.ndarray):
        self.basis = basis_
        self.coef = coef

    # -- construction -----------------------------------------------------
    @classmethod
    def constant(cls, basis_: MonomialBasis, value) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros((basis_.size,) + value.shape)
        coef[0] = value
        return cls(basis_, coef)

    @property
    def value(self):
        v = self.coef[0]
        return float(v) if v.ndim == 0 else v

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[1:]

    def __repr__(self) -> str:
        return f"Jet(value={self.value!r}, basis={self.basis!r})"

    # -- alignment --------------------------------------------------------
    def truncate(self, target: MonomialBasis) -> "Jet":
        if target.key == self.basis.key:
            return self
        take = _transfer(self.basis.key, target.key)
        return Jet(target, self.coef[take])

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.basis.key == self.basis.key:
                return self, other
            k = tuple(min(a, b) for a, b in zip(self.basis.key, other.basis.key))
            common = basis(*k)
            return self.truncate(common), other.truncate(common)
        return self, None

    # -- arithmetic -------------------------------------------------------
    def __neg__(self):
        return Jet(self.basis, -self.coef)

    def __pos__(self):
        return self

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            ca, cb = _align(a.coef, b.coef)
            return Jet(a.basis, ca + cb)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(self.shape, other.shape)
        coef = np.array(np.broadcast_to(self.coef, (self.basis.size,) + shape))
        coef[0] = coef[0] + other
        return Jet(self.basis, coef)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.basis, a.basis.multiply(a.coef, b.coef))
        other = np.asarray(other, dtype=float)
        return Jet(self.basis, self.coef * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / np.asarray(other, dtype=float))

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            return exp(exponent * log(self))
        if float(exponent).is_integer():
            return self._ipow(int(exponent))
        return power(self, float(exponent))

    def __rpow__(self, base):
        return exp(self * np.log(base))

    def _ipow(self, k: int) -> "Jet":
        if k < 0:
            return self._ipow(-k).reciprocal()
        result = Jet.constant(self.basis, np.ones(self.shape))
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def reciprocal(self) -> "Jet":
        a0 = self.coef[0]
        if np.any(a0 == 0):
            raise ZeroDivisionError("jet division by a zero value")
        d = self.basis.max_degree
        inv = 1.0 / a0
        derivs = [(-1) ** k * math.factorial(k) * inv ** (k + 1) for k in range(d + 1)]
        return _compose(self, derivs)

    # -- Taylor bookkeeping -----------------------------------------------
    def derivative(self, role: str, i: int) -> "Jet":
        """Exact partial derivative, returned on a basis of one lower order."""
        var = i if role == "x" else self.basis.dim + i
        key, take, mult = _derivative_map(self.basis.key, var)
        coef = self.coef[take] * mult.reshape((-1,) + (1,) * len(self.shape))
        return Jet(basis(*key), coef)

    def partial(self, multi_index) -> float | np.ndarray:
        return partial(self, multi_index)

    def __getitem__(self, item):
        if not isinstance(item, tuple):
            item = (item,)
        return Jet(self.basis, self.coef[(slice(None),) + item])


def jet_matmul(a: Jet, b: Jet) -> Jet:
    """Matrix product of matrix-valued jets (batch axes ``(..., m, k)``)."""
    a, b = a._coerce(b)
    return Jet(a.basis, a.basis.matmul(a.coef, b.coef))


def jet_inv(a: Jet) -> Jet:
    """Inverse of a matrix-valued jet via a truncated Neumann series."""
    a0 = a.coef[0]
    x = np.linalg.inv(a0)
    h = Jet(a.basis, a.coef.copy())
    h.coef[0] = 0.0
    m = Jet(a.basis, -np.matmul(x, h.coef))
    xj = Jet.constant(a.basis, x)
    result = xj
    for _ in range(a.basis.max_degree):
        result = xj + jet_matmul(m, result)
    return result


def _compose(a: Jet, derivs: Sequence) -> Jet:
    """Evaluate ``f(a)`` from the derivatives of ``f`` at ``a.value``."""
    h = Jet(a.basis, a.coef.copy())
    h.coef[0] = 0.0
    d = len(derivs) - 1
    acc = Jet.constant(a.basis, derivs[d] / math.factorial(d))
    for k in range(d - 1, -1, -1):
        acc = acc * h
        acc.coef[0] = acc.coef[0] + derivs[k] / math.factorial(k)
    return acc


def _unary(a, float_fn: Callable, derivs_fn: Callable):
    if isinstance(a, Jet):
        return _compose(a, derivs_fn(a.coef[0], a.basis.max_degree))
    return float_fn(a)


def exp(a):
    return _unary(a, np.exp, lambda a0, d: [np.exp(a0)] * (d + 1))


def _check_positive(a0, name):
    if np.any(np.asarray(a0) <= 0):
        raise DomainError(f"{name} of a non-positive value")


def log(a):
    def derivs(a0, d):
        _check_positive(a0, "log")
        return [np.log(a0)] + [(-1) ** (k - 1) * math.factorial(k - 1) / a0 ** k
                               for k in range(1, d + 1)]

    if not isinstance(a, Jet):
        _check_positive(a, "log")
    return _unary(a, np.log, derivs)


def power(a, p: float):
    """``a**p`` for real ``p`` and positive base (general binomial series)."""
    def derivs(a0, d):
        _check_positive(a0, "power")
        out, c = [], 1.0
        for k in range(d + 1):
            out.append(c * a0 ** (p - k))
            c *= p - k
        return out

    if not isinstance(a, Jet):
        _check_positive(a, "power")
        return np.asarray(a, dtype=float) ** p
    return _compose(a, derivs(a.coef[0], a.basis.max_degree))


def sqrt(a):
    if not isinstance(a, Jet):
        _check_positive(a, "sqrt")
        return np.sqrt(a)
    return power(a, 0.5)


def sin(a):
    return _unary(a, np.sin, lambda a0, d: [
        (np.sin(a0), np.cos(a0), -np.sin(a0), -np.cos(a0))[k % 4] for k in range(d + 1)])


def cos(a):
    return _unary(a, np.cos, lambda a0, d: [
        (np.cos(a0), -np.sin(a0), -np.cos(a0), np.sin(a0))[k % 4] for k in range(d + 1)])


def sinh(a):
    return _unary(a, np.sinh, lambda a0, d: [
        (np.sinh(a0), np.cosh(a0))[k % 2] for k in range(d + 1)])


def cosh(a):
    return _unary(a, np.cosh, lambda a0, d: [
        (np.cosh(a0), np.sinh(a0))[k % 2] for k in range(d + 1)])


def _atan_taylor(d):
    # derivatives of atan at 0: k-th derivative = (k-1)! * (-1)^((k-1)/2) for odd k
    return [0.0] + [0.0 if k % 2 == 0 else (-1) ** ((k - 1) // 2) * math.factorial(k - 1)
                    for k in range(1, d + 1)]


def atan(a):
    if not isinstance(a, Jet):
        return np.arctan(a)
    a0 = a.coef[0]
    # shift to zero: atan(a) = atan(a0) + atan((a - a0) / (1 + a0 * a))
    u = (a - a0) / (1.0 + a0 * a)
    out = _compose(u, _atan_taylor(a.basis.max_degree))
    out.coef[0] = out.coef[0] + np.arctan(a0)
    return out


def atan2(y, x):
    """Quadrant-aware angle; jets are expanded around the base angle."""
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    y0 = y.coef[0] if isinstance(y, Jet) else np.asarray(y, dtype=float)
    x0 = x.coef[0] if isinstance(x, Jet) else np.asarray(x, dtype=float)
    if np.any((x0 == 0) & (y0 == 0)):
        raise DomainError("atan2 at the origin")
    cross = x0 * y - y0 * x
    dot = x0 * x + y0 * y
    if not isinstance(cross, Jet):
        cross = Jet.constant(dot.basis, cross)
    u = cross / dot
    out = _compose(u, _atan_taylor(u.basis.max_degree))
    out.coef[0] = out.coef[0] + np.arctan2(y0, x0)
    return out


# -- seeding and extraction ----------------------------------------------

def lift(value, role, basis_: MonomialBasis) -> Jet:
    """Seed a jet for one coordinate.

    ``role`` is ``"constant"`` or a pair ``("x", i)`` / ``("v", i)``.
    """
    jet = Jet.constant(basis_, value)
    if role == "constant":
        return jet
    kind, i = role
    if kind not in ("x", "v"):
        raise ValueError(f"unknown coordinate role {kind!r}")
    if not 0 <= i < basis_.dim:
        raise IndexError(f"coordinate index {i} out of range for dim {basis_.dim}")
    k = basis_.slot(kind, i)
    if k is not None:
        jet.coef[k] = 1.0
    return jet


def variables(x, v, basis_: MonomialBasis) -> tuple[list[Jet], list[Jet]]:
    """Lift every base and fiber coordinate; ``x``/``v`` may carry a batch axis."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    xs = [lift(x[i], ("x", i), basis_) for i in range(basis_.dim)]
    vs = [lift(v[i], ("v", i), basis_) for i in range(basis_.dim)]
    return xs, vs


def _exponent_tuple(multi_index, dim):
    """Accept either a length-2*dim exponent tuple or a list of ("x"|"v", i) slots."""
    if len(multi_index) == 2 * dim and all(isinstance(c, (int, np.integer)) for c in multi_index):
        return tuple(int(c) for c in multi_index)
    e = [0] * (2 * dim)
    for kind, i in multi_index:
        e[i if kind == "x" else dim + i] += 1
    return tuple(e)


def partial(jet: Jet, multi_index):
    """Mixed partial derivative stored in ``jet``.

    ``multi_index`` is either an exponent tuple over ``(x0..xn, v0..vn)`` or a
    sequence of slots such as ``[("x", 0), ("v", 1)]``.
    """
    e = _exponent_tuple(multi_index, jet.basis.dim)
    k = jet.basis.index.get(e)
    if k is None:
        raise ValueError(f"derivative order {e} exceeds truncation {jet.basis.key}")
    out = jet.coef[k] * jet.basis.factorial[k]
    return float(out) if np.ndim(out) == 0 else out


# -- finite-difference oracle ----------------------------------------------

@dataclass(frozen=True)
class DiffConfig:
    fd_step: float = 1e-5
    fd_enabled: bool = True

    def __post_init__(self):
        if not self.fd_step > 0:
            raise ValueError("fd_step must be positive")


def _central(f, point, slots, steps):
    if not slots:
        return f(point)
    k, rest = slots[0], slots[1:]
    h = steps[k]
    up, dn = point.copy(), point.copy()
    up[k] += h
    dn[k] -= h
    return (_central(f, up, rest, steps) - _central(f, dn, rest, steps)) / (2 * h)


def finite_difference_check(f: Callable, x, v, multi_index, config: DiffConfig = DiffConfig(),
                            jet_basis: MonomialBasis | None = None) -> float:
    """``|jet partial - central difference|`` for ``f(x, v)`` at one point.

    The step is ``fd_step`` scaled by ``max(1, |coordinate|)`` and raised to
    ``eps**(1/(order+2))`` for higher orders where cancellation dominates.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    dim = x.size
    e = _exponent_tuple(multi_index, dim)
    order = sum(e)
    if order > 3:
        raise ValueError("finite-difference oracle supports order <= 3")
    if jet_basis is None:
        jet_basis = basis(dim, max(2, sum(e[:dim])), max(3, sum(e[dim:])))
    xs, vs = variables(x, v, jet_basis)
    out = f(xs, vs)
    exact = partial(out, e) if isinstance(out, Jet) else 0.0
    if not config.fd_enabled:
        return 0.0

    point = np.concatenate([x, v])
    base = max(config.fd_step, np.finfo(float).eps ** (1.0 / (order + 2)))
    steps = base * np.maximum(1.0, np.abs(point))
    slots = [k for k, c in enumerate(e) for _ in range(c)]

    def g(p):
        try:
            return float(f(list(p[:dim]), list(p[dim:])))
        except (DomainError, ZeroDivisionError, FloatingPointError) as err:
            raise DomainError(f"evaluation failed inside stencil: {err}") from err

    approx = _central(g, point, slots, steps)
    return abs(exact - approx)
