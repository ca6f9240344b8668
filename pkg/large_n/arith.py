"""
Arbitrary-precision reals and truncated power series.

Every quantity is an ``mpf`` owned by the ``mpmath.MPContext`` of a
:class:`PrecisionContext`.  No code in this package touches the global
``mpmath.mp`` context, so runs at different precisions can coexist in one
process.
"""
import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

import mpmath

from large_n.errors import InvalidProblem, NonpositiveConstantTerm, ZeroConstantTerm

logger = logging.getLogger(__name__)

BigReal = mpmath.mpf

MIN_DIGITS = 30


@lru_cache(maxsize=None)
def _mp_context(dps: int) -> mpmath.ctx_mp.MPContext:
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


@dataclass(frozen=True)
class PrecisionContext:
    """
    Working precision: ``digits`` significant decimal digits are reported,
    ``digits + guard_digits`` are carried internally.
    """
    digits: int = 100
    guard_digits: int = 10

    def __post_init__(self):
        if self.digits < MIN_DIGITS:
            raise InvalidProblem(f"digits must be at least {MIN_DIGITS}, got {self.digits}")
        if self.guard_digits < 0:
            raise InvalidProblem("guard_digits must be non-negative")

    @property
    def mp(self) -> mpmath.ctx_mp.MPContext:
        return _mp_context(self.digits + self.guard_digits)

    def real(self, value) -> BigReal:
        """Convert an int, decimal string or mpf (from any context) to this context."""
        return self.mp.mpf(value)

    @property
    def zero(self) -> BigReal:
        return self.mp.mpf(0)

    @property
    def one(self) -> BigReal:
        return self.mp.mpf(1)

    def eps(self, margin: int = 0) -> BigReal:
        """``10^-(digits - margin)``, the threshold family used by every tolerance."""
        return self.mp.power(10, -(self.digits - margin))

    def doubled(self) -> "PrecisionContext":
        return PrecisionContext(2 * self.digits, self.guard_digits)

    def to_string(self, x: BigReal) -> str:
        """Scientific notation with exactly ``digits`` significant digits."""
        return self.mp.nstr(self.real(x), self.digits, strip_zeros=False,
                            min_fixed=0, max_fixed=0, show_zero_exponent=True)

    def from_string(self, text: str) -> BigReal:
        return self.mp.mpf(text)

    def format_number(self, x: BigReal, digits: int | None = None) -> str:
        """Shortest readable decimal, used when printing expressions."""
        text = self.mp.nstr(self.real(x), digits or self.digits)
        return re.sub(r"\.0(?=e|$)", "", text)


class PowerSeries:
    """
    Coefficients c_0..c_M of a series in one formal variable, truncated at
    ``trunc_order`` M.  Instances are immutable.
    """
    __slots__ = ("_coeffs", "context")

    def __init__(self, coeffs: Iterable, context: PrecisionContext):
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "_coeffs", tuple(context.real(c) for c in coeffs))
        if not self._coeffs:
            raise ValueError("a power series needs at least one coefficient")

    def __setattr__(self, key, value):
        raise AttributeError("PowerSeries is immutable")

    @classmethod
    def constant(cls, value, trunc_order: int, context: PrecisionContext) -> "PowerSeries":
        return cls([value] + [0] * trunc_order, context)

    @classmethod
    def variable(cls, center, trunc_order: int, context: PrecisionContext) -> "PowerSeries":
        """The series of ``center + u``."""
        coeffs = [center, 1] + [0] * (trunc_order - 1)
        return cls(coeffs[:trunc_order + 1], context)

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def trunc_order(self) -> int:
        return len(self._coeffs) - 1

    def __len__(self):
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __getitem__(self, item):
        return self._coeffs[item]

    def __repr__(self):
        return f"PowerSeries({[self.context.format_number(c, 12) for c in self._coeffs]})"

    def truncate(self, trunc_order: int) -> "PowerSeries":
        if trunc_order >= self.trunc_order:
            return self
        return PowerSeries(self._coeffs[:trunc_order + 1], self.context)

    def scale(self, factor) -> "PowerSeries":
        factor = self.context.real(factor)
        return PowerSeries([c * factor for c in self._coeffs], self.context)

    def derivative(self) -> "PowerSeries":
        if self.trunc_order == 0:
            return PowerSeries([0], self.context)
        return PowerSeries([j * self._coeffs[j] for j in range(1, len(self._coeffs))], self.context)

    def integral(self, constant=0) -> "PowerSeries":
        """Antiderivative, one order longer."""
        return PowerSeries([constant] + [c / (j + 1) for j, c in enumerate(self._coeffs)], self.context)

    def __add__(self, other):
        return series_add(self, other)

    def __sub__(self, other):
        return series_add(self, -other)

    def __neg__(self):
        return PowerSeries([-c for c in self._coeffs], self.context)

    def __mul__(self, other):
        return series_mul(self, other)

    def __truediv__(self, other):
        return series_mul(self, series_recip(other))


def _common_order(a: PowerSeries, b: PowerSeries) -> int:
    return min(a.trunc_order, b.trunc_order)


def series_add(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    m = _common_order(a, b)
    return PowerSeries([a[j] + b[j] for j in range(m + 1)], a.context)


def series_mul(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    m = _common_order(a, b)
    fdot = a.context.mp.fdot
    return PowerSeries([fdot(a[:j + 1], reversed(b[:j + 1])) for j in range(m + 1)], a.context)


def _check_constant_term(a: PowerSeries):
    scale = max(abs(c) for c in a) or a.context.one
    if abs(a[0]) <= a.context.eps() * scale:
        raise ZeroConstantTerm(f"constant term {a.context.format_number(a[0], 10)} is zero at working precision")


def series_recip(a: PowerSeries) -> PowerSeries:
    _check_constant_term(a)
    fdot = a.context.mp.fdot
    inv0 = 1 / a[0]
    r = [inv0]
    for n in range(1, len(a)):
        r.append(-inv0 * fdot(a[1:n + 1], reversed(r)))
    return PowerSeries(r, a.context)


def series_exp(a: PowerSeries) -> PowerSeries:
    mp = a.context.mp
    e = [mp.exp(a[0])]
    for n in range(1, len(a)):
        e.append(mp.fsum(j * a[j] * e[n - j] for j in range(1, n + 1)) / n)
    return PowerSeries(e, a.context)


def series_ln(a: PowerSeries) -> PowerSeries:
    if a[0] <= 0:
        raise NonpositiveConstantTerm(f"ln of a series with constant term {a.context.format_number(a[0], 10)}")
    if a.trunc_order == 0:
        return PowerSeries([a.context.mp.ln(a[0])], a.context)
    log_derivative = a.derivative() / a.truncate(a.trunc_order - 1)
    return log_derivative.integral(a.context.mp.ln(a[0]))


def series_pow_real(a: PowerSeries, p) -> PowerSeries:
    if a[0] <= 0:
        raise NonpositiveConstantTerm(f"real power of a series with constant term {a.context.format_number(a[0], 10)}")
    return series_exp(series_ln(a).scale(p))


def series_pow_int(a: PowerSeries, n: int) -> PowerSeries:
    """Integer power by binary exponentiation; any sign of the constant term is allowed."""
    if n < 0:
        return series_recip(series_pow_int(a, -n))
    result = PowerSeries.constant(1, a.trunc_order, a.context)
    base = a
    while n:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


def exact_decimal(x: BigReal) -> str:
    """Decimal text of an mpf from any context, with enough digits to read it back unchanged."""
    bits = x._mpf_[3] if x else 0
    return mpmath.libmp.to_str(x._mpf_, max(15, int(bits * 0.30103) + 3))
