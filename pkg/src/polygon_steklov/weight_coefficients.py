"""Fourier coefficients v_m of the polygonal boundary weight.

For ``alpha = 1/N`` the weight has Fourier support on multiples of ``N`` and

    v_m = Gamma(1-alpha) Gamma(m+alpha) / (Gamma(alpha) Gamma(m+1-alpha)),  v_{-m} = v_m,

with ``v_0 = 1``.  Consecutive coefficients satisfy
``v_{m+1} = v_m (m+alpha)/(m+1-alpha)``, which is how long tables are built.
The module also evaluates the uniform constants that control ``v_m`` in the
regime ``alpha <= 1/20`` and a Wendel-type power envelope used by the tail
bounds of the certification code.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from flint import arb

from . import interval_core as ic
from .errors import DomainViolation, PreconditionViolation

ALPHA0 = Fraction(1, 20)
EXACT_HARMONIC_LIMIT = 10_000


@dataclass(frozen=True)
class Alpha:
    """Exponent ``alpha = 1/N`` for an ``N``-gon, or a free value for analysis."""

    n_sides: int | None
    value: Fraction

    @classmethod
    def from_sides(cls, n_sides: int) -> "Alpha":
        if n_sides < 3:
            raise PreconditionViolation(f"need N >= 3, got {n_sides}")
        return cls(n_sides, Fraction(1, n_sides))

    @classmethod
    def from_value(cls, value: Fraction | int | str) -> "Alpha":
        value = Fraction(value)
        if not 0 < value < Fraction(1, 2):
            raise DomainViolation(f"alpha must lie in (0, 1/2), got {value}")
        return cls(None, value)

    @property
    def alpha(self) -> arb:
        return ic.to_interval(self.value)

    @property
    def alpha0(self) -> arb:
        return ic.to_interval(ALPHA0)

    @property
    def in_asymptotic_regime(self) -> bool:
        return self.value <= ALPHA0


def _as_alpha(a) -> Alpha:
    if isinstance(a, Alpha):
        return a
    if isinstance(a, int):
        return Alpha.from_sides(a)
    return Alpha.from_value(a)


@dataclass(frozen=True)
class WeightCoefficients:
    alpha: Alpha
    values: tuple = field(repr=False)

    @property
    def m_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, m: int) -> arb:
        return self.values[abs(m)]

    def squares(self) -> list[arb]:
        return [v * v for v in self.values]

    def midpoints(self) -> list[float]:
        return [float(v.mid()) for v in self.values]


def normalization_constant(a) -> arb:
    """C(alpha) = Gamma(1-alpha)^2 / Gamma(1-2alpha)."""
    al = _as_alpha(a).alpha
    if not ic.lower(1 - 2 * al) > 0:
        raise DomainViolation("normalization constant needs 1 - 2 alpha > 0")
    g = ic.gamma_enclosure(1 - al)
    return g * g / ic.gamma_enclosure(1 - 2 * al)


def prefactor(a) -> arb:
    """Gamma(1-alpha)/Gamma(alpha), the m-independent factor of v_m."""
    al = _as_alpha(a).alpha
    return ic.gamma_enclosure(1 - al) / ic.gamma_enclosure(al)


def coefficient_v(m: int, a) -> arb:
    """Direct Gamma-ratio enclosure of v_m."""
    if m < 0:
        raise PreconditionViolation("coefficient_v takes m >= 0; use evenness for negative modes")
    if m == 0:
        return arb(1)
    al = _as_alpha(a).alpha
    return prefactor(a) * ic.gamma_enclosure(m + al) / ic.gamma_enclosure(m + 1 - al)


def coefficient_v_recursive(m_max: int, a) -> WeightCoefficients:
    if m_max < 0:
        raise PreconditionViolation("m_max must be nonnegative")
    alpha = _as_alpha(a)
    al = alpha.alpha
    vals = [arb(1)]
    v = vals[0]
    for m in range(m_max):
        v = v * (m + al) / (m + 1 - al)
        vals.append(v)
    return WeightCoefficients(alpha, tuple(vals))


# ---- Taylor coefficients in alpha ------------------------------------------

@lru_cache(maxsize=None)
def _harmonic_exact(n: int, order: int) -> Fraction:
    return sum((Fraction(1, k ** order) for k in range(1, n + 1)), Fraction(0))


def harmonic(n: int, order: int = 1):
    """H_n^{(order)}; exact rational below the cached limit, an enclosure above it."""
    if n <= EXACT_HARMONIC_LIMIT:
        return _harmonic_exact(n, order)
    total = arb(0)
    for k in range(1, n + 1):
        total += arb(1) / arb(k) ** order
    return total


def taylor_coefficient(m: int, j: int):
    """Coefficient a_{m,j} of alpha^j in the expansion of v_m (m >= 1, 1 <= j <= 5)."""
    if m < 1 or not 1 <= j <= 5:
        raise PreconditionViolation("need m >= 1 and 1 <= j <= 5")
    h = harmonic(m - 1)
    h3 = harmonic(m - 1, 3)
    if j == 1:
        return Fraction(1, m)
    if j == 2:
        num = 1 + 2 * m * h
    elif j == 3:
        num = 1 + 2 * m * h + 2 * m**2 * h**2
    else:
        num = 3 + 6 * m * h + 6 * m**2 * h**2 + 4 * m**3 * h**3 + 2 * m**3 * h3
        if j == 5:
            num += 2 * m**4 * h**4 + 4 * m**4 * h * h3
    denom = m**j if j <= 3 else 3 * m**j
    return num / denom


def cubic_truncation(m: int, a) -> arb:
    """v_{m,<=3} = sum_{j<=3} a_{m,j} alpha^j."""
    al = _as_alpha(a).alpha
    return sum((ic.to_interval(taylor_coefficient(m, j)) * al**j for j in (1, 2, 3)), arb(0))


# ---- uniform constants at alpha0 = 1/20 -------------------------------------

@dataclass(frozen=True)
class VmConstants:
    L5: arb
    C_P: arb
    V_inf: arb
    L6: arb
    V1: arb
    V4: arb
    V2: arb
    D3: arb

    def as_dict(self) -> dict[str, arb]:
        return {k: getattr(self, k) for k in ("L5", "C_P", "V_inf", "L6", "V1", "V4", "V2", "D3")}


def vm_constants() -> VmConstants:
    a0 = ic.to_interval(ALPHA0)
    z = ic.zeta_enclosure
    L5 = arb(4) / 19 + arb(2) / 5 * z(5) + 4 * z(7) * a0**2 / (7 * (1 - a0**2))
    CP = 2 * ic.euler_gamma() + 1 + a0 / 2 + (arb(2) / 3 * z(3) + arb(1) / 3) * a0**2 + a0**3 / 4
    Vinf = ic.exp(CP * a0 + L5 * a0**5)
    L6 = Vinf * ((2 + CP) ** 5 / 120 + L5)
    V1 = Vinf * (2 + CP + L5 * a0**4)
    V4 = (arb(19) / 3 + arb(2) / 3 * z(3)) + a0 * (7 + 2 * z(3)) + 11 * L6 * a0**2
    D3 = 3 / (1 - a0) ** 4
    V2 = ic.sqrt(2) * Vinf * ic.sqrt(z(2 - 4 * a0))
    return VmConstants(L5, CP, Vinf, L6, V1, V4, V2, D3)


def _require_regime(a: Alpha) -> None:
    if not a.in_asymptotic_regime:
        raise PreconditionViolation(f"alpha = {a.value} exceeds alpha0 = 1/20")


def cubic_truncation_error(m: int, a) -> arb:
    """Bound V4 alpha^4 m^(2 alpha0 - 1) (1 + log m)^4 on |v_m - v_{m,<=3}|."""
    alpha = _as_alpha(a)
    _require_regime(alpha)
    c = vm_constants()
    a0 = alpha.alpha0
    return c.V4 * alpha.alpha**4 * ic.power(m, 2 * a0 - 1) * (1 + ic.log(m)) ** 4


def uniform_bound(m: int, a) -> arb:
    """V_inf alpha m^(2 alpha0 - 1), an upper bound for v_m when alpha <= alpha0."""
    alpha = _as_alpha(a)
    _require_regime(alpha)
    return vm_constants().V_inf * alpha.alpha * ic.power(m, 2 * alpha.alpha0 - 1)


def linear_control_bound(m: int, a) -> arb:
    """V1 alpha^2 m^(2 alpha0 - 1)(1 + log m), bounding |v_m - alpha/m|."""
    alpha = _as_alpha(a)
    _require_regime(alpha)
    return vm_constants().V1 * alpha.alpha**2 * ic.power(m, 2 * alpha.alpha0 - 1) * (1 + ic.log(m))


# ---- power envelope for tails -----------------------------------------------

def power_envelope(a, j0: int) -> arb:
    """Constant K with v_j <= K j^(2 alpha - 1) for every j >= j0 >= 1.

    Wendel's inequality Gamma(x+s) >= x^s Gamma(x) (x/(x+s))^(1-s), taken at
    x = j + alpha and s = 1 - 2 alpha, gives
    Gamma(j+alpha)/Gamma(j+1-alpha) <= (j+1-alpha)^(2 alpha)/(j+alpha)
    <= j^(2 alpha - 1) (1 + 1/j)^(2 alpha).
    """
    if j0 < 1:
        raise PreconditionViolation("envelope starts at j0 >= 1")
    al = _as_alpha(a).alpha
    return prefactor(a) * ic.power(1 + arb(1) / j0, 2 * al)


def parseval_target(a) -> arb:
    """Closed form of sum_{m in Z} v_m^2 (finite for alpha < 1/4)."""
    al = _as_alpha(a).alpha
    if not ic.lower(1 - 4 * al) > 0:
        raise DomainViolation("the squared weight is not integrable for alpha >= 1/4")
    g = ic.gamma_enclosure
    return g(1 - al) ** 4 * g(1 - 4 * al) / g(1 - 2 * al) ** 4


def parseval_sum(a, m_max: int) -> arb:
    """Enclosure of sum_{m in Z} v_m^2: exact partial sum plus a power-envelope tail."""
    alpha = _as_alpha(a)
    al = alpha.alpha
    q = 2 - 4 * al
    if not ic.lower(q) > 1:
        raise DomainViolation("the squared coefficients are not summable for alpha >= 1/4")
    coeffs = coefficient_v_recursive(m_max, alpha)
    partial = 1 + 2 * sum((v * v for v in coeffs.values[1:]), arb(0))
    k = power_envelope(alpha, m_max + 1)
    # sum_{j > J} j^{-q} <= J^{1-q}/(q-1)
    tail = 2 * k * k * ic.power(m_max, 1 - q) / (q - 1)
    return partial + ic.interval(0, ic.upper(tail))
