"""Scalar activation functions with derivative and range metadata.

Builders consult the metadata to decide whether an activation meets their
preconditions (saturation, a sign change, the degree of ``ln(phi)``).
Evaluators accept any activation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import comb, expit

from .errors import UnsupportedActivationError

DerivativeFn = Callable[[int, float], float]

# central finite differences are only trusted up to this order
_MAX_FD_ORDER = 4


@dataclass(frozen=True, eq=False)
class Activation:
    """A named scalar function ``phi``.

    ``sign_change`` is a point ``x0`` where ``phi`` changes sign.  With
    ``sign_orientation = +1`` phi is positive just left of ``x0`` and negative
    just right of it; ``-1`` records the mirrored case.  ``sign_window`` is the
    half-width of the interval around ``x0`` on which both signs stay fixed.

    ``positive_domain`` is an open interval on which ``phi > 0``; it bounds the
    biases the general product-state builder may choose.

    ``log_degree`` is the degree of ``ln(phi)`` when that is a polynomial,
    ``None`` otherwise.
    """

    name: str
    func: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[DerivativeFn] = None
    limits: tuple[Optional[float], Optional[float]] = (None, None)
    unit_range: bool = False
    monotone: bool = False
    sign_change: Optional[float] = None
    sign_orientation: int = 1
    sign_window: float = 0.0
    positive_domain: tuple[float, float] = (-math.inf, math.inf)
    log_degree: Optional[int] = None
    is_log: bool = field(default=False, repr=False)
    _parent: Optional["Activation"] = field(default=None, repr=False)

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=np.float64))

    @property
    def saturates_to_one(self) -> bool:
        return self.unit_range and self.limits[1] == 1.0

    @property
    def saturating_sigmoidal(self) -> bool:
        """Tends to 0 at -inf and to 1 at +inf."""
        return self.limits == (0.0, 1.0)

    @property
    def changes_sign(self) -> bool:
        return self.sign_change is not None

    def nth_derivative(self, order: int, x: float) -> float:
        if order < 0:
            raise ValueError("derivative order must be non-negative")
        if order == 0:
            return float(self(x))
        if self.derivative is not None:
            return float(self.derivative(order, float(x)))
        if order > _MAX_FD_ORDER:
            raise UnsupportedActivationError(
                f"{self.name}: no closed-form derivative of order {order}"
            )
        return _central_difference(self, order, float(x))

    @property
    def log(self) -> "Activation":
        """``kappa = ln(phi)``; evaluates to NaN where ``phi <= 0``."""
        if self.is_log:
            raise ValueError("already a log-activation")
        return _log_activation(self)


def _central_difference(f: Callable, order: int, x: float) -> float:
    h = np.finfo(float).eps ** (1.0 / (order + 2)) * max(1.0, abs(x))
    k = np.arange(order + 1)
    pts = x + (order / 2.0 - k) * h
    weights = (-1.0) ** k * comb(order, k)
    return float(np.dot(weights, f(pts)) / h**order)


def log_derivatives(phi_derivs: Sequence[float]) -> list[float]:
    """Derivatives of ``ln(phi)`` from derivatives of ``phi`` at one point.

    Uses ``phi^(n) = sum_{j<n} C(n-1, j) phi^(j) kappa^(n-j)`` solved for
    ``kappa^(n)``.  Entry 0 of the result is ``ln(phi)``.
    """
    p0 = phi_derivs[0]
    if not p0 > 0:
        return [math.nan] * len(phi_derivs)
    out = [math.log(p0)]
    for n in range(1, len(phi_derivs)):
        acc = phi_derivs[n]
        for j in range(1, n):
            acc -= math.comb(n - 1, j) * phi_derivs[j] * out[n - j]
        out.append(acc / p0)
    return out


def _exp_from_log_derivatives(kappa_derivs: Sequence[float]) -> list[float]:
    out = [math.exp(kappa_derivs[0])]
    for n in range(1, len(kappa_derivs)):
        out.append(sum(math.comb(n - 1, j) * out[j] * kappa_derivs[n - j] for j in range(n)))
    return out


def _log_activation(parent: Activation) -> Activation:
    def func(x):
        with np.errstate(invalid="ignore", divide="ignore"):
            v = parent.func(x)
            return np.where(v > 0, np.log(np.where(v > 0, v, 1.0)), np.nan)

    if parent.log_degree is not None and parent.derivative is not None:
        # exp of a polynomial: the log derivatives come straight from the polynomial
        poly = getattr(parent.derivative, "poly", None)
    else:
        poly = None

    def derivative(order: int, x: float) -> float:
        if poly is not None:
            return float(poly.deriv(order)(x)) if order <= poly.degree() else 0.0
        derivs = [parent.nth_derivative(j, x) for j in range(order + 1)]
        return log_derivatives(derivs)[order]

    return Activation(
        name=f"log({parent.name})",
        func=func,
        derivative=derivative if (parent.derivative is not None or poly is not None) else None,
        positive_domain=parent.positive_domain,
        is_log=True,
        _parent=parent,
    )


@lru_cache(maxsize=None)
def _tanh_poly(order: int) -> Polynomial:
    p = Polynomial([0.0, 1.0])
    one_minus_t2 = Polynomial([1.0, 0.0, -1.0])
    for _ in range(order):
        p = p.deriv() * one_minus_t2
    return p


@lru_cache(maxsize=None)
def _sigmoid_poly(order: int) -> Polynomial:
    p = Polynomial([0.0, 1.0])
    s_one_minus_s = Polynomial([0.0, 1.0, -1.0])
    for _ in range(order):
        p = p.deriv() * s_one_minus_s
    return p


def _relu(x):
    return np.maximum(x, 0.0)


def _relu_derivative(order: int, x: float) -> float:
    if order == 1:
        return 1.0 if x > 0 else 0.0
    return 0.0


def sigmoid() -> Activation:
    return Activation(
        name="sigmoid",
        func=expit,
        derivative=lambda n, x: float(_sigmoid_poly(n)(expit(x))),
        limits=(0.0, 1.0),
        unit_range=True,
        monotone=True,
    )


def tanh() -> Activation:
    return Activation(
        name="tanh",
        func=np.tanh,
        derivative=lambda n, x: float(_tanh_poly(n)(math.tanh(x))),
        limits=(-1.0, 1.0),
        unit_range=True,
        monotone=True,
        sign_change=0.0,
        sign_orientation=-1,
        sign_window=math.inf,
        positive_domain=(0.0, math.inf),
    )


def cos() -> Activation:
    return Activation(
        name="cos",
        func=np.cos,
        derivative=lambda n, x: math.cos(x + n * math.pi / 2),
        sign_change=math.pi / 2,
        sign_orientation=1,
        sign_window=math.pi,
        positive_domain=(-math.pi / 2, math.pi / 2),
    )


def sin() -> Activation:
    return Activation(
        name="sin",
        func=np.sin,
        derivative=lambda n, x: math.sin(x + n * math.pi / 2),
        sign_change=math.pi,
        sign_orientation=1,
        sign_window=math.pi,
        positive_domain=(0.0, math.pi),
    )


def exp() -> Activation:
    return Activation(
        name="exp",
        func=np.exp,
        derivative=lambda n, x: math.exp(x),
        limits=(0.0, None),
        monotone=True,
        log_degree=1,
    )


def relu() -> Activation:
    return Activation(
        name="relu",
        func=_relu,
        derivative=_relu_derivative,
        limits=(0.0, None),
        positive_domain=(0.0, math.inf),
    )


def exp_poly(coeffs: Sequence[float], name: Optional[str] = None) -> Activation:
    """``phi(x) = exp(sum_i coeffs[i] x^i)``; its log is a polynomial."""
    poly = Polynomial(np.asarray(coeffs, dtype=np.float64)).trim()
    degree = poly.degree() if np.any(poly.coef != 0) else 0

    def derivative(n: int, x: float) -> float:
        kappa = [float(poly.deriv(j)(x)) if j else float(poly(x)) for j in range(n + 1)]
        return _exp_from_log_derivatives(kappa)[n]

    derivative.poly = poly
    if name is None:
        name = "exp-poly[" + ",".join(repr(float(c)) for c in coeffs) + "]"
    return Activation(
        name=name,
        func=lambda x: np.exp(poly(x)),
        derivative=derivative,
        monotone=degree == 1,
        log_degree=int(degree),
    )


def exp_poly_standard(degree: int) -> Activation:
    """``exp(x + x^2/2! + ... + x^d/d!)``; degree 0 gives the constant 1."""
    if degree < 0:
        raise ValueError("degree must be non-negative")
    coeffs = [0.0] + [1.0 / math.factorial(i) for i in range(1, degree + 1)]
    return exp_poly(coeffs, name=f"exp-poly:{degree}")


_BUILTINS = {
    "sigmoid": sigmoid,
    "tanh": tanh,
    "cos": cos,
    "sin": sin,
    "exp": exp,
    "relu": relu,
}


def get_activation(name: str) -> Activation:
    """Look up an activation by the name used in parameter files and the CLI."""
    if name in _BUILTINS:
        return _BUILTINS[name]()
    m = re.fullmatch(r"exp-poly:(\d+)", name)
    if m:
        return exp_poly_standard(int(m.group(1)))
    m = re.fullmatch(r"exp-poly\[(.*)\]", name)
    if m:
        return exp_poly([float(c) for c in m.group(1).split(",") if c.strip()], name=name)
    raise ValueError(f"unknown activation {name!r}")
