"""Arc cost families: value, derivative, marginal cost, integral, scaled and limit forms.

Every family is nonnegative and non-decreasing on ``[0, inf)``. Polynomial-like
families (BPR, Polynomial, Affine, Constant) all reduce to a sum of monomials
``sum_i coef_i * x**exp_i`` and share closed forms through :meth:`terms`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

EXPONENT_ATOL = 1e-12


class CostSpec:
    """Base class for cost families."""

    family: str = ""

    def value(self, x: float) -> float:
        raise NotImplementedError

    def derivative(self, x: float) -> float:
        raise NotImplementedError

    def integral(self, x: float) -> float:
        raise NotImplementedError

    def marginal(self, x: float) -> float:
        return self.value(x) + x * self.derivative(x)


def _power(x: float, p: float) -> float:
    # 0**0 == 1 keeps constant terms constant at the origin
    if p == 0.0:
        return 1.0
    if x == 0.0:
        return 0.0
    return x**p


class _MonomialSum(CostSpec):
    def terms(self) -> tuple[tuple[float, float], ...]:
        """``(coefficient, exponent)`` pairs whose sum is the cost."""
        raise NotImplementedError

    def value(self, x: float) -> float:
        return math.fsum(c * _power(x, p) for c, p in self.terms())

    def derivative(self, x: float) -> float:
        total = []
        for c, p in self.terms():
            if p == 0.0 or c == 0.0:
                continue
            if x == 0.0:
                # right derivative: infinite slope for 0 < p < 1
                if p < 1.0:
                    return math.inf
                total.append(c if p == 1.0 else 0.0)
            else:
                total.append(c * p * x ** (p - 1.0))
        return math.fsum(total)

    def marginal(self, x: float) -> float:
        return math.fsum(c * (1.0 + p) * _power(x, p) for c, p in self.terms())

    def integral(self, x: float) -> float:
        return math.fsum(c * _power(x, p + 1.0) / (p + 1.0) for c, p in self.terms())

    def degree(self) -> float:
        """Largest exponent carrying a nonzero coefficient (0 for the zero function)."""
        exps = [p for c, p in self.terms() if c != 0.0]
        return max(exps) if exps else 0.0


@dataclass(frozen=True)
class BPR(_MonomialSum):
    """``t0 * (1 + alpha * (x / capacity) ** beta)``."""

    t0: float
    capacity: float
    alpha: float = 0.15
    beta: float = 4.0
    family: str = field(default="bpr", init=False, repr=False)

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError(f"BPR free-flow time must be positive, got {self.t0}")
        if not self.capacity > 0:
            raise ValueError(f"BPR capacity must be positive, got {self.capacity}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("BPR alpha and beta must be nonnegative")

    @property
    def gamma(self) -> float:
        return self.alpha * self.t0 / self.capacity**self.beta

    def terms(self):
        return ((self.gamma, float(self.beta)), (self.t0, 0.0))

    def value(self, x: float) -> float:
        return self.t0 * (1.0 + self.alpha * _power(x / self.capacity, self.beta))


@dataclass(frozen=True)
class Polynomial(_MonomialSum):
    """Sum of ``coefficient * x ** exponent`` with nonnegative coefficients and exponents."""

    coefficients: tuple[tuple[float, float], ...]
    family: str = field(default="polynomial", init=False, repr=False)

    def __post_init__(self):
        terms = tuple((float(c), float(p)) for c, p in self.coefficients)
        if not terms:
            raise ValueError("polynomial needs at least one term")
        for c, p in terms:
            if c < 0 or p < 0:
                raise ValueError(f"polynomial term ({c}, {p}) has a negative entry")
        object.__setattr__(self, "coefficients", terms)

    def terms(self):
        return self.coefficients


@dataclass(frozen=True)
class Affine(_MonomialSum):
    slope: float
    intercept: float = 0.0
    family: str = field(default="affine", init=False, repr=False)

    def __post_init__(self):
        if self.slope < 0 or self.intercept < 0:
            raise ValueError("affine slope and intercept must be nonnegative")

    def terms(self):
        return ((self.slope, 1.0), (self.intercept, 0.0))

    def value(self, x: float) -> float:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class Constant(_MonomialSum):
    level: float
    family: str = field(default="constant", init=False, repr=False)

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("constant cost must be nonnegative")

    def terms(self):
        return ((self.level, 0.0),)

    def value(self, x: float) -> float:
        return self.level

    def derivative(self, x: float) -> float:
        return 0.0


@dataclass(frozen=True)
class RecursivePiecewise(CostSpec):
    """Continuous piecewise-linear cost alternating flat and rising pieces.

    ``tau = 1`` on ``[b0, b1)``; on odd pieces ``[b_{2i+1}, b_{2i+2})`` it rises
    with slope ``tau(b_{2i})``; on even pieces ``[b_{2i}, b_{2i+1})`` it is flat.
    Breakpoints beyond the stored prefix are generated by growing the last
    ratio ``b_{i+1}/b_i`` by one per step, up to ``max_index``.
    """

    breakpoints: tuple[float, ...]
    max_index: int = 64
    family: str = field(default="piecewise", init=False, repr=False)

    def __post_init__(self):
        b = tuple(float(v) for v in self.breakpoints)
        if len(b) < 3 or b[0] != 0.0:
            raise ValueError("need breakpoints (0, b1, b2, ...) with at least two positive entries")
        if any(b2 <= b1 for b1, b2 in zip(b, b[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        ratios = [b2 / b1 for b1, b2 in zip(b[1:], b[2:])]
        if any(r2 <= r1 for r1, r2 in zip(ratios, ratios[1:])):
            raise ValueError("breakpoint ratios b[i+1]/b[i] must be strictly increasing")
        if self.max_index < len(b) - 1:
            raise ValueError("max_index is smaller than the stored prefix")
        object.__setattr__(self, "breakpoints", b)

    def _table(self, x: float) -> tuple[list[float], list[float]]:
        """Breakpoints covering ``x`` and the cost value at each breakpoint."""
        b = list(self.breakpoints)
        ratio = b[-1] / b[-2]
        while b[-1] <= x:
            if len(b) - 1 >= self.max_index:
                raise ValueError(f"x={x} lies beyond breakpoint index {self.max_index}")
            ratio += 1.0
            b.append(b[-1] * ratio)
        vals = [1.0]
        for j in range(1, len(b)):
            if j % 2 == 1:
                vals.append(vals[j - 1])
            else:
                vals.append(vals[j - 2] * ((b[j] - b[j - 1]) + 1.0))
        return b, vals

    @staticmethod
    def _piece(b: list[float], x: float) -> int:
        j = 0
        while j + 1 < len(b) and b[j + 1] <= x:
            j += 1
        return j

    def value(self, x: float) -> float:
        b, vals = self._table(x)
        j = self._piece(b, x)
        if j % 2 == 1:
            return ((x - b[j]) + 1.0) * vals[j - 1]
        return vals[j]

    def derivative(self, x: float) -> float:
        b, vals = self._table(x)
        j = self._piece(b, x)
        return vals[j - 1] if j % 2 == 1 else 0.0

    def integral(self, x: float) -> float:
        b, vals = self._table(x)
        j_end = self._piece(b, x)
        parts = []
        for j in range(j_end + 1):
            hi = x if j == j_end else b[j + 1]
            w = hi - b[j]
            if j % 2 == 1:
                parts.append(vals[j - 1] * (0.5 * w * w + w))
            else:
                parts.append(vals[j] * w)
        return math.fsum(parts)


CostLike = Union[BPR, Polynomial, Affine, Constant, RecursivePiecewise]


def _check_x(x: float) -> None:
    if x < 0:
        raise ValueError(f"cost functions are defined for x >= 0, got {x}")


def evaluate(spec: CostSpec, x: float) -> float:
    _check_x(x)
    return spec.value(x)


def derivative(spec: CostSpec, x: float) -> float:
    """Right derivative at ``x``."""
    _check_x(x)
    return spec.derivative(x)


def marginal_cost(spec: CostSpec, x: float) -> float:
    """``tau(x) + x * tau'(x)``, the arc cost seen by the system-optimum subproblem."""
    _check_x(x)
    return spec.marginal(x)


def integral(spec: CostSpec, x: float) -> float:
    """``int_0^x tau(s) ds`` in closed form."""
    _check_x(x)
    return spec.integral(x)


def scaled_cost(spec: CostSpec, T: float, g: float, x: float) -> float:
    """Cost of the normalized game: ``tau(T * x) / g``."""
    if not g > 0:
        raise ValueError(f"scaling factor must be positive, got {g}")
    if T < 0:
        raise ValueError("total demand must be nonnegative")
    _check_x(x)
    return spec.value(T * x) / g


@dataclass(frozen=True)
class LimitCost:
    """Monomial ``gamma * x ** beta`` of the limit game."""

    gamma: float
    beta: float

    def as_spec(self) -> Polynomial:
        return Polynomial(((self.gamma, self.beta),))


class LimitMarker(enum.Enum):
    ZERO = "zero"
    INFINITE = "infinite"


def limit_cost(spec: CostSpec, beta_ref: float) -> LimitCost | LimitMarker:
    """Limit of ``tau(T x) / T**beta_ref`` as ``T -> inf``.

    Returns the leading monomial when the cost has degree ``beta_ref``,
    ``LimitMarker.ZERO`` for lower degree and ``LimitMarker.INFINITE`` for higher.
    """
    if isinstance(spec, RecursivePiecewise):
        raise TypeError("piecewise costs have no closed-form limit")
    if not isinstance(spec, _MonomialSum):
        raise TypeError(f"unsupported cost family {type(spec).__name__}")
    deg = spec.degree()
    if deg > beta_ref + EXPONENT_ATOL:
        return LimitMarker.INFINITE
    gamma = math.fsum(c for c, p in spec.terms() if abs(p - beta_ref) <= EXPONENT_ATOL)
    if deg < beta_ref - EXPONENT_ATOL or gamma == 0.0:
        return LimitMarker.ZERO
    return LimitCost(gamma=gamma, beta=float(beta_ref))
