"""Singular power nonlinearity ``f(rho) = rho**alpha`` and its regularizations.

Every kernel accepts a scalar or an array of densities and returns the same
shape (a Python float for scalar input).  Slightly negative densities, which
can only come from rounding in ``|psi|^2``, are clamped to zero.

Kinds
-----
``exact``     ``f = rho^alpha``, ``F = rho^(alpha+1)/(alpha+1)``
``ler``       local energy regularization of degree ``n``: ``F`` is replaced on
              ``[0, eps^2)`` by ``rho * Q_n(rho)``, ``Q_n`` the degree-``n``
              Taylor polynomial of ``rho^alpha/(alpha+1)`` about ``eps^2``
``shift``     ``f = (rho + eps^2)^alpha``
``rational``  ``f = 1/(rho^(-alpha) + eps)``
"""
from __future__ import annotations

import enum
import threading
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class DomainError(ValueError):
    """Raised when the singular nonlinearity is evaluated at zero density."""


class Kind(str, enum.Enum):
    EXACT = "exact"
    LER = "ler"
    SHIFT = "shift"
    RATIONAL = "rational"


DEFAULT_LER_DEGREE = 5


@dataclass(frozen=True)
class Regularization:
    kind: Kind
    alpha: float
    epsilon: float = 0.0
    n: int = DEFAULT_LER_DEGREE

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        cubic = self.kind is Kind.EXACT and self.alpha == 1
        if not (-1 / 3 < self.alpha < 0 or cubic):
            raise ValueError(f"alpha must lie in (-1/3, 0), got {self.alpha}")
        if self.kind is not Kind.EXACT and not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive for {self.kind.value}, got {self.epsilon}")
        if self.kind is Kind.LER and (int(self.n) != self.n or self.n < 1):
            raise ValueError(f"LER degree n must be an integer >= 1, got {self.n}")

    @classmethod
    def exact(cls, alpha: float) -> "Regularization":
        return cls(Kind.EXACT, alpha)

    @classmethod
    def ler(cls, alpha: float, epsilon: float, n: int = DEFAULT_LER_DEGREE) -> "Regularization":
        return cls(Kind.LER, alpha, epsilon, n)

    @classmethod
    def shift(cls, alpha: float, epsilon: float) -> "Regularization":
        return cls(Kind.SHIFT, alpha, epsilon)

    @classmethod
    def rational(cls, alpha: float, epsilon: float) -> "Regularization":
        return cls(Kind.RATIONAL, alpha, epsilon)

    @property
    def label(self) -> str:
        if self.kind is Kind.LER:
            return f"ler{self.n}"
        return self.kind.value

    def f(self, rho):
        return f_reg(rho, self)

    def F(self, rho):
        return F_reg(rho, self)


def _prep(rho):
    rho = np.asarray(rho, dtype=float)
    return np.maximum(rho, 0.0)


def _out(x, like):
    return float(x) if np.ndim(like) == 0 else x


def f_exact(rho, alpha: float):
    """``rho**alpha``; zero density raises :class:`DomainError` for ``alpha < 0``."""
    r = _prep(rho)
    if alpha < 0 and np.any(r == 0):
        idx = tuple(int(i) for i in np.argwhere(np.atleast_1d(r) == 0)[0])
        raise DomainError(f"singular nonlinearity evaluated at zero density (index {idx}); "
                          "use a regularization")
    return _out(r**alpha, rho)


def F_exact(rho, alpha: float):
    r = _prep(rho)
    return _out(r ** (alpha + 1) / (alpha + 1), rho)


def _taylor_terms(rho, eps: float, alpha: float, n: int):
    """Yield ``(k, c_k, s)`` with ``c_k = prod_{j<=k} (j - 1 - alpha)/j`` and ``s = 1 - rho/eps^2``."""
    s = 1.0 - rho / eps**2
    c = 1.0
    for k in range(1, n + 1):
        c *= (k - 1 - alpha) / k
        yield k, c, s


def ler_Q(rho, epsilon: float, alpha: float, n: int):
    """Degree-``n`` Taylor polynomial of ``rho^alpha/(alpha+1)`` about ``rho = eps^2``."""
    r = _prep(rho)
    acc = np.ones_like(r)
    for k, c, s in _taylor_terms(r, epsilon, alpha, n):
        acc = acc + c * s**k
    return _out(epsilon ** (2 * alpha) / (alpha + 1) * acc, rho)


def ler_q(rho, epsilon: float, alpha: float, n: int):
    """``d/drho [rho * Q_n(rho)]``, the LER nonlinearity below ``eps^2``."""
    r = _prep(rho)
    acc = np.ones_like(r)
    for k, c, s in _taylor_terms(r, epsilon, alpha, n):
        acc = acc + c * s ** (k - 1) * (1.0 - (k + 1) * r / epsilon**2)
    return _out(epsilon ** (2 * alpha) / (alpha + 1) * acc, rho)


def f_reg(rho, reg: Regularization):
    r = _prep(rho)
    a, eps = reg.alpha, reg.epsilon
    if reg.kind is Kind.EXACT:
        return f_exact(rho, a)
    if reg.kind is Kind.SHIFT:
        out = (r + eps**2) ** a
    elif reg.kind is Kind.RATIONAL:
        with np.errstate(divide="ignore"):
            out = 1.0 / (r ** (-a) + eps)
    else:
        out = np.empty_like(r)
        upper = r >= eps**2
        with np.errstate(divide="ignore"):
            np.power(r, a, out=out, where=upper)
        lower = ~upper
        if lower.any():
            out[lower] = ler_q(r[lower], eps, a, reg.n)
    return _out(out, rho)


# Quadrature cache for the rational antiderivative, keyed by (alpha, eps, rho).
_rational_cache: dict[tuple[float, float, float], float] = {}
_rational_lock = threading.Lock()


def rational_antiderivative(rho: float, alpha: float, epsilon: float) -> float:
    """``int_0^rho ds / (s^(-alpha) + eps)`` by adaptive quadrature (abs tol 1e-13)."""
    rho = max(float(rho), 0.0)
    if rho == 0.0:
        return 0.0
    key = (alpha, epsilon, rho)
    with _rational_lock:
        hit = _rational_cache.get(key)
    if hit is not None:
        return hit
    # s = u^p removes the derivative singularity of s^(-alpha) at the origin.
    p = 1.0 / (-alpha)
    val, _ = integrate.quad(
        lambda u: p * u ** (p - 1) / (u + epsilon), 0.0, rho ** (-alpha),
        epsabs=1e-13, epsrel=1e-13, limit=200)
    with _rational_lock:
        _rational_cache[key] = val
    return val


def F_reg(rho, reg: Regularization):
    """Energy density ``F_reg(rho) = int_0^rho f_reg``; ``F_reg(0) = 0`` for every kind."""
    r = _prep(rho)
    a, eps = reg.alpha, reg.epsilon
    if reg.kind is Kind.EXACT:
        return F_exact(rho, a)
    if reg.kind is Kind.SHIFT:
        # eps^(2a+2) * ((1 + rho/eps^2)^(a+1) - 1) / (a+1), free of cancellation near 0
        out = eps ** (2 * (a + 1)) * np.expm1((a + 1) * np.log1p(r / eps**2)) / (a + 1)
    elif reg.kind is Kind.LER:
        out = np.empty_like(r)
        upper = r >= eps**2
        out[upper] = r[upper] ** (a + 1) / (a + 1)
        lower = ~upper
        out[lower] = r[lower] * ler_Q(r[lower], eps, a, reg.n)
    else:
        flat = r.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.array([rational_antiderivative(x, a, eps) for x in uniq])
        out = vals[inv].reshape(r.shape)
    return _out(out, rho)
