"""Interval arithmetic on top of Arb ball arithmetic.

Every scalar in the package is a ``flint.arb`` ball.  A ball ``[m +/- r]``
is the interval ``[m - r, m + r]``; Arb rounds every operation outward, so
the result of any operation encloses the exact image of its operands.  This
module adds the thin layer the rest of the code relies on: constructors from
endpoints, endpoint access, domain checks that raise instead of returning
NaN balls, a precision context, and outward decimal rendering.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Iterator, Union

from flint import arb, ctx

from .errors import DomainViolation, PreconditionViolation

Interval = arb
Number = Union[int, float, str, Fraction, arb]

DEFAULT_DIGITS = 140
MIN_DIGITS = 30


@dataclass(frozen=True)
class Precision:
    decimal_digits: int = DEFAULT_DIGITS

    def __post_init__(self):
        if int(self.decimal_digits) < MIN_DIGITS:
            raise PreconditionViolation(
                f"precision of {self.decimal_digits} digits is below the minimum of {MIN_DIGITS}"
            )


@contextlib.contextmanager
def working_precision(precision: Precision | int) -> Iterator[Precision]:
    """Set the Arb working precision for the duration of a block."""
    if not isinstance(precision, Precision):
        precision = Precision(int(precision))
    saved = ctx.dps
    ctx.dps = precision.decimal_digits
    try:
        yield precision
    finally:
        ctx.dps = saved


def current_digits() -> int:
    return ctx.dps


def to_interval(value: Number) -> arb:
    """Enclosure of a single number.  Strings and fractions are enclosed, not rounded."""
    if isinstance(value, arb):
        return value
    if isinstance(value, Fraction):
        return arb(value.numerator) / value.denominator
    if isinstance(value, int):
        return arb(value)
    if isinstance(value, float):
        return arb(value)
    return arb(str(value))


def interval(lo: Number, hi: Number | None = None) -> arb:
    """Smallest convenient ball containing ``[lo, hi]``."""
    a = to_interval(lo)
    if hi is None:
        return a
    b = to_interval(hi)
    if lower(a) > upper(b):
        raise DomainViolation(f"empty interval: lo={lo} > hi={hi}")
    return a.union(b)


def lower(x: arb) -> arb:
    """Exact lower endpoint as a zero-radius ball."""
    return x.lower()


def upper(x: arb) -> arb:
    return x.upper()


def width(x: arb) -> arb:
    return upper(x) - lower(x)


def is_finite(x: arb) -> bool:
    return x.is_finite() and not x.is_nan()


def contains(outer: arb, value: Number) -> bool:
    return bool(outer.contains(to_interval(value)))


def intersects(x: arb, y: arb) -> bool:
    return bool(x.overlaps(y))


def hull(*xs: arb) -> arb:
    out = xs[0]
    for x in xs[1:]:
        out = out.union(x)
    return out


def nonnegative_upper(x: arb) -> arb:
    """Upper endpoint of ``x`` clipped below at zero; used for norm bounds."""
    u = upper(x)
    return u if u > 0 else arb(0)


def _check(result: arb, what: str) -> arb:
    if not is_finite(result):
        raise DomainViolation(f"{what} produced a non-finite enclosure")
    return result


def _corner_hull(x: arb, y: arb, f) -> arb:
    """Hull of f over the four endpoint pairs; tighter than the midpoint-radius
    product for wide boxes, valid because f is monotone in each argument on them."""
    if x.is_exact() and y.is_exact():
        return f(x, y)
    vals = [f(a, b) for a in (lower(x), upper(x)) for b in (lower(y), upper(y))]
    lo = min((lower(v) for v in vals), key=exact_fraction)
    hi = max((upper(v) for v in vals), key=exact_fraction)
    return lo.union(hi)


def arith(op: str, x: arb, y: arb | None = None) -> arb:
    """Apply ``op`` to the operand box with outward rounding."""
    x = to_interval(x)
    if y is not None:
        y = to_interval(y)
    if not is_finite(x) or (y is not None and not is_finite(y)):
        raise DomainViolation(f"{op}: operands must be finite")
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return _corner_hull(x, y, lambda a, b: a * b)
    if op == "div":
        if y.contains(0):
            raise DomainViolation("division by an interval containing 0")
        return _corner_hull(x, y, lambda a, b: a / b)
    if op == "sqrt":
        if lower(x) < 0:
            raise DomainViolation("sqrt of an interval with negative part")
        return _check(x.sqrt(), "sqrt")
    if op == "exp":
        return _check(x.exp(), "exp")
    if op == "log":
        if not lower(x) > 0:
            raise DomainViolation("log of a nonpositive interval")
        return _check(x.log(), "log")
    if op == "pow":
        if y.is_exact() and y.is_integer():
            return x ** int(y.unique_fmpz())
        if not lower(x) > 0:
            raise DomainViolation("real power of a nonpositive base")
        return (y * x.log()).exp()
    raise ValueError(f"unknown operation {op!r}")


def sqrt(x: Number) -> arb:
    return arith("sqrt", x)


def log(x: Number) -> arb:
    return arith("log", x)


def exp(x: Number) -> arb:
    return arith("exp", x)


def power(x: Number, y: Number) -> arb:
    return arith("pow", x, y)


def pi() -> arb:
    return arb.pi()


def euler_gamma() -> arb:
    return arb.const_euler()


def gamma_enclosure(x: Number) -> arb:
    x = to_interval(x)
    if not lower(x) > 0:
        raise DomainViolation("gamma_enclosure requires x.lo > 0")
    return _check(x.gamma(), "gamma")


def zeta_enclosure(s: Number) -> arb:
    s = to_interval(s)
    if not lower(s) > 1:
        raise DomainViolation("zeta_enclosure requires s.lo > 1")
    return _check(s.zeta(), "zeta")


# ---- exact endpoint access and outward decimal rendering -------------------

def exact_fraction(point: arb) -> Fraction:
    """Exact rational value of a zero-radius ball."""
    if not point.is_exact():
        raise ValueError("exact_fraction needs a zero-radius ball")
    if point.is_zero():
        return Fraction(0)
    man, e = point.man_exp()
    man, e = int(man), int(e)
    return Fraction(man * 2 ** e) if e >= 0 else Fraction(man, 2 ** (-e))


def _round_fraction(q: Fraction, places: int, up: bool) -> Decimal:
    scaled = q * 10 ** places
    n = -((-scaled.numerator) // scaled.denominator) if up else scaled.numerator // scaled.denominator
    sign = "-" if n < 0 else ""
    digits = str(abs(n)).rjust(places + 1, "0")
    return Decimal(f"{sign}{digits[:-places]}.{digits[-places:]}" if places else f"{sign}{digits}")


def render_lower(x: arb, places: int = 18) -> str:
    """Decimal string at ``places`` decimals that is <= the lower endpoint."""
    return str(_round_fraction(exact_fraction(lower(x)), places, up=False))


def render_upper(x: arb, places: int = 18) -> str:
    return str(_round_fraction(exact_fraction(upper(x)), places, up=True))


def endpoints_decimal(x: arb, places: int = 18) -> tuple[str, str]:
    return render_lower(x, places), render_upper(x, places)


def to_float_upper(x: arb) -> float:
    """A float that is >= every point of ``x``."""
    import math

    f = float(exact_fraction(upper(x)))
    return math.nextafter(f, math.inf)


def to_float_lower(x: arb) -> float:
    import math

    f = float(exact_fraction(lower(x)))
    return math.nextafter(f, -math.inf)
