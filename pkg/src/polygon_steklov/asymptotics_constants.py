"""Five-term expansion of sigma_1, its remainder constants, and related checks.

For N >= 20 the first Steklov eigenvalue of the perimeter-normalised regular
N-gon satisfies

    sigma_1 = 1 - c3/N^3 - c4/N^4 - c5/N^5 + R_N,   |R_N| <= E_sigma / N^6,

with c3 = 2 zeta(3), c4 = 8 zeta(4), c5 = 26 zeta(5).  ``constant_closure``
rebuilds E_sigma from every component bound, all at alpha0 = 1/20, and
``check_ledger`` compares the results with the recorded bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from flint import arb

from . import interval_core as ic
from .errors import DomainViolation, GapViolation, LedgerViolation, WindowViolation
from .weight_coefficients import ALPHA0, vm_constants

CONSTANT_DIGITS = 50
EULER_TERMS = 200_000
RECORDED_BOUNDS = {
    "E0": Fraction(508),
    "E1": Fraction(475),
    "E2": Fraction(67),
    "B0": Fraction("2.834"),
    "K0": Fraction("1.921"),
    "window_part": Fraction("136.56"),
    "C6": Fraction(1187),
}
E0_REFERENCE = Fraction("507.61355685")
MARGIN_REFERENCE = Fraction("3167.61")


def _zeta(s) -> arb:
    return ic.zeta_enclosure(s)


def _digits() -> int:
    return max(ic.current_digits(), CONSTANT_DIGITS)


# ---- expansion coefficients ------------------------------------------------------

@dataclass(frozen=True)
class ExpansionCoeffs:
    c3: arb
    c4: arb
    c5: arb


def expansion_coeffs() -> ExpansionCoeffs:
    return ExpansionCoeffs(2 * _zeta(3), 8 * _zeta(4), 26 * _zeta(5))


# ---- logarithmic sums sum_m (1 + log m)^q / m^p ---------------------------------

def log_sum_threshold(p, q: int) -> int:
    """M(p, q) = max(2, ceil(exp(q/p - 1))); past it the summand decreases."""
    p = ic.to_interval(p)
    if not ic.lower(p) > 1:
        raise DomainViolation("logarithmic sums need p > 1")
    e = ic.exp(ic.to_interval(q) / p - 1)
    return max(2, int(math.ceil(float(ic.exact_fraction(ic.upper(e))))))


def log_sum_tail(p, q: int, M: int) -> arb:
    """Closed form of the integral of (1 + log x)^q x^-p over [M, inf)."""
    p = ic.to_interval(p)
    if not ic.lower(p) > 1:
        raise DomainViolation("logarithmic sums need p > 1")
    b = p - 1
    t = b * (1 + ic.log(M))
    poly = sum((t**k / math.factorial(k) for k in range(q + 1)), arb(0))
    return math.factorial(q) / b ** (q + 1) * ic.power(M, -b) * poly


def _head(p, q: int, M: int) -> arb:
    p = ic.to_interval(p)
    return sum(((1 + ic.log(m)) ** q / ic.power(m, p) for m in range(1, M + 1)), arb(0))


def log_sum_bound(p, q: int) -> arb:
    """S(p, q): head up to M(p, q) plus sum_j binom(q, j) j! / (p-1)^(j+1).

    The second part is the integral over [1, inf), so S(p, q) over-covers the
    tail; ``log_sum_refined`` starts the integral at M(p, q) instead.
    """
    M = log_sum_threshold(p, q)
    b = ic.to_interval(p) - 1
    closed = sum((math.comb(q, j) * math.factorial(j) / b ** (j + 1) for j in range(q + 1)), arb(0))
    return _head(p, q, M) + closed


def log_sum_refined(p, q: int) -> arb:
    M = log_sum_threshold(p, q)
    return _head(p, q, M) + log_sum_tail(p, q, M)


# ---- the constant ledger ---------------------------------------------------------

@dataclass(frozen=True)
class RemainderConstants:
    E0: arb
    E1: arb
    E2: arb
    B0: arb
    K0: arb
    window_part: arb
    E_theta: arb
    E_sigma: arb
    C6: arb
    sub: dict = field(repr=False)

    def headline(self) -> dict[str, arb]:
        keys = ("E0", "E1", "E2", "B0", "K0", "window_part", "E_theta", "E_sigma", "C6")
        return {k: getattr(self, k) for k in keys}


@dataclass(frozen=True)
class LedgerCheck:
    name: str
    value: arb
    bound: Fraction
    passed: bool


def _e0_parts(a0: arb, c) -> dict[str, arb]:
    ps = 3 - 4 * a0
    pre = 1 / (1 - a0**2)
    return {
        "E0_den": 2 * pre * c.V_inf**2 * a0 * _zeta(7 - 4 * a0),
        "E0_cr": 4 * pre * c.V_inf * c.V4 * log_sum_refined(ps, 4),
        "E0_sq": 2 * pre * c.V4**2 * a0**3 * log_sum_refined(ps, 8),
        "E0_poly": 60 * log_sum_refined(3, 3),
    }


def _e1_parts(a0: arb, c) -> dict[str, arb]:
    S = log_sum_bound
    ps = 3 - 4 * a0
    d2 = (1 - a0**2) ** 2
    out = {
        "E1_d_den2": 10 / d2 * c.V_inf**2 * a0**2 * _zeta(8 - 4 * a0),
        "E1_d_z6": 6 * c.V_inf**2 * _zeta(6 - 4 * a0),
        "E1_d_v": 4 * (1 + a0**2) / d2 * c.V_inf * c.V4 * a0 * S(4 - 4 * a0, 4)
        + 2 * (1 + a0**2) / d2 * c.V4**2 * a0**4 * S(4 - 4 * a0, 8),
    }
    # kernel constants with beta = 9/10, gamma = 19/10
    be, ga = 1 - 2 * a0, 2 - 2 * a0
    A = ic.power(2, be + ga + 1) * _zeta(ga)
    B = 4 * _zeta(ps)
    D = ic.power(2, be + ga + 2)
    E = ic.power(3, 2 * a0) / (2 * a0)

    def s_kernel(q: int) -> arb:
        return 2 * A * S(ps, q) + 2 * B * S(ga, q) + 2 * D * S(2 * ga, q) + 2 * D * E * S(2 * ga - 2 * a0, q)

    def t_kernel(q: int) -> arb:
        return (2 * A * S(ps + 1, q) + 2 * B * S(ga + 1, q) + 2 * D * S(2 * ga + 1, q)
                + 2 * D * E * S(2 * ga + 1 - 2 * a0, q))

    s = {q: s_kernel(q) for q in (0, 1, 2)}
    t = {q: t_kernel(q) for q in (0, 1)}
    w = 1 / (1 - a0) ** 2
    out.update({
        "kernel_A": A, "kernel_B": B, "kernel_D": D, "kernel_E": E,
        "S_0": s[0], "S_1": s[1], "S_2": s[2], "T_0": t[0], "T_1": t[1],
        "E1_o_v": 3 * w * c.V1 * s[1],
        "E1_o_d": 2 * w * t[0],
        "E1_o_2": w * (3 * c.V1**2 * s[2] + 2 * c.V1 * t[1]),
    })
    out["E1_d"] = out["E1_d_den2"] + out["E1_d_z6"] + out["E1_d_v"]
    out["E1_o"] = out["E1_o_v"] + out["E1_o_d"] + out["E1_o_2"]
    return out


def _e2_parts(a0: arb, c) -> dict[str, arb]:
    S = log_sum_bound
    w3 = 1 / (1 - a0) ** 3
    be, ga, b2 = 1 - 2 * a0, 2 - 2 * a0, 2 - 4 * a0
    u0 = 4 * _zeta(b2) + ic.power(2, b2 + 2) + ic.power(2, b2 + 2) / b2
    t0s = 4 * _zeta(ga + 1) * ic.sqrt(_zeta(2 * ga) * _zeta(2 * be))
    v0 = 8 * _zeta(ga) ** 2 * _zeta(2 * be)
    e2d = (2 * c.D3 * _zeta(6) + 4 * c.V1 * w3 * S(5 - 2 * a0, 1)
           + 2 * a0 * c.V1**2 * w3 * S(5 - 4 * a0, 2))
    e2o = (2 * c.V_inf**3 * w3 * t0s + 2 * a0 * c.V_inf**4 * w3 * u0 * S(5 - 4 * a0, 1)
           + a0 * c.V_inf**4 * w3 * v0)
    return {"U_0": u0, "T0_sharp": t0s, "V_0": v0, "E2_d": e2d, "E2_o": e2o}


@lru_cache(maxsize=4)
def _closure(digits: int) -> RemainderConstants:
    with ic.working_precision(digits):
        a0 = ic.to_interval(ALPHA0)
        c = vm_constants()
        sub: dict[str, arb] = {}
        sub.update(_e0_parts(a0, c))
        sub.update(_e1_parts(a0, c))
        sub.update(_e2_parts(a0, c))
        E0 = sub["E0_den"] + sub["E0_cr"] + sub["E0_sq"] + sub["E0_poly"]
        E1 = sub["E1_d"] + sub["E1_o"]
        E2 = sub["E2_d"] + sub["E2_o"]
        B0 = 2 * _zeta(3) + 6 * _zeta(4) * a0 + 16 * _zeta(5) * a0**2 + E0 * a0**3
        K0 = ic.sqrt(2 * _zeta(2)) / (1 - a0) * ic.sqrt(1 + c.V2**2 * a0**2)
        window = 12 * B0**2 + 2 * B0 * K0**3
        e_theta = E0 + E1 + E2 + 8 * B0**2 + 2 * B0 * K0**3
        e_sigma = e_theta + 4 * B0**2
        C6 = E0 + E1 + E2 + window
        return RemainderConstants(E0, E1, E2, B0, K0, window, e_theta, e_sigma, C6, sub)


def check_ledger(constants: RemainderConstants) -> list[LedgerCheck]:
    out = []
    for name, bound in RECORDED_BOUNDS.items():
        value = getattr(constants, name)
        out.append(LedgerCheck(name, value, bound, bool(ic.upper(value) <= ic.to_interval(bound))))
    return out


def constant_closure(strict: bool = False) -> RemainderConstants:
    """Rebuild every remainder constant; with ``strict`` a failed recorded bound raises."""
    constants = _closure(_digits())
    if strict:
        failed = [c.name for c in check_ledger(constants) if not c.passed]
        if failed:
            raise LedgerViolation("recorded bounds not reproduced: " + ", ".join(failed))
    return constants


# ---- expansion, margin, gaps ----------------------------------------------------

def expansion_value(n_sides: int, e_sigma: arb | None = None) -> tuple[arb, arb]:
    """(center, band) with band = center +- E_sigma / N^6."""
    if n_sides < 20:
        raise WindowViolation("the expansion remainder is certified for N >= 20")
    if e_sigma is None:
        e_sigma = constant_closure().E_sigma
    k = expansion_coeffs()
    n = arb(n_sides)
    center = 1 - k.c3 / n**3 - k.c4 / n**4 - k.c5 / n**5
    r = ic.upper(ic.to_interval(e_sigma) / n**6)
    return center, center + ic.interval(-r, r)


@dataclass(frozen=True)
class MonotonicityMargin:
    positive_part: arb
    e_sigma: arb
    margin: arb

    @property
    def certified_positive(self) -> bool:
        return bool(ic.lower(self.margin) > 0)


def monotonicity_margin(e_sigma: arb | None = None, strict: bool = False) -> MonotonicityMargin:
    """1200 c3 (20/21)^3 + 80 c4 (20/21)^4 + 5 c5 (20/21)^5 - 2 E_sigma."""
    with ic.working_precision(_digits()):
        if e_sigma is None:
            e_sigma = constant_closure().E_sigma
        k = expansion_coeffs()
        r = arb(20) / 21
        positive = 1200 * k.c3 * r**3 + 80 * k.c4 * r**4 + 5 * k.c5 * r**5
        out = MonotonicityMargin(positive, ic.to_interval(e_sigma), positive - 2 * ic.to_interval(e_sigma))
    if strict and not out.certified_positive:
        raise LedgerViolation("monotonicity margin is not certified positive")
    return out


@dataclass(frozen=True)
class GapRow:
    n_sides: int
    gap_lo: arb

    @property
    def positive(self) -> bool:
        return bool(self.gap_lo > 0)


def gap_verification(n_lo: int, n_hi: int, enclosures: Sequence, strict: bool = True) -> list[GapRow]:
    """Lower bounds sigma_lo(N+1) - sigma_hi(N) for n_lo <= N < n_hi."""
    by_n = {e.n_sides: e for e in enclosures}
    missing = [n for n in range(n_lo, n_hi + 1) if n not in by_n]
    if missing:
        raise DomainViolation(f"no enclosure for N = {missing}")
    rows = []
    for n in range(n_lo, n_hi):
        gap = ic.lower(by_n[n + 1].sigma_lo - by_n[n].sigma_hi)
        rows.append(GapRow(n, gap))
        if strict and not gap > 0:
            raise GapViolation(n, ic.render_lower(gap))
    return rows


# ---- Euler sums --------------------------------------------------------------

EULER_IDS = ("w4", "w5a", "w5b", "double5")


def _euler_closed(identity_id: str) -> arb:
    z = _zeta
    if identity_id == "w4":
        return z(4) / 4
    if identity_id == "w5a":
        return 2 * z(5) - z(2) * z(3)
    if identity_id == "w5b":
        return z(2) * z(3) - arb(3) / 2 * z(5)
    return 8 * z(2) * z(3) - 12 * z(5)


@lru_cache(maxsize=8)
def _euler_partial(terms: int) -> dict[str, arb]:
    """Partial sums over m <= terms of the four single-index series."""
    h1 = h2 = arb(0)  # H_{m-1}, H^{(2)}_{m-1}
    s3 = s4 = sq = s22 = s5 = arb(0)
    for m in range(1, terms + 1):
        inv = arb(1) / m
        i2 = inv * inv
        i3 = i2 * inv
        i4 = i2 * i2
        s3 += h1 * i3
        s4 += h1 * i4
        sq += h1 * h1 * i3
        s22 += h2 * i3
        s5 += i4 * inv
        h1 += inv
        h2 += i2
    return {"w4": s3, "w5a": s4, "w5b": sq, "double_h2": s22, "double_p5": s5}


def _euler_brute(identity_id: str, terms: int) -> arb:
    """Partial sum plus a one-sided tail bounded with H_{m-1} <= 1 + log m.

    The double sum over Z* x Z* (m != l) of 1/(m^2 l^2 |m-l|) is reduced by
    partial fractions to the single series
    2 sum_m [2 H^(2)_{m-1}/m^3 + 1/m^5 + 2 H_{m-1}/m^4].
    """
    p = _euler_partial(terms)
    tail = lambda pp, q: log_sum_tail(pp, q, terms)  # noqa: E731
    if identity_id == "w4":
        return p["w4"] + ic.interval(0, ic.upper(tail(3, 1)))
    if identity_id == "w5a":
        return p["w5a"] + ic.interval(0, ic.upper(tail(4, 1)))
    if identity_id == "w5b":
        return p["w5b"] + ic.interval(0, ic.upper(tail(3, 2)))
    partial = 2 * (2 * p["double_h2"] + p["double_p5"] + 2 * p["w5a"])
    # H^(2)_{m-1} <= zeta(2) <= 2
    t = 2 * (2 * 2 * tail(3, 0) + tail(5, 0) + 2 * tail(4, 1))
    return partial + ic.interval(0, ic.upper(t))


def euler_sum(identity_id: str, terms: int = EULER_TERMS) -> tuple[arb, arb]:
    """(closed-form enclosure, brute-force enclosure) of one Euler-sum identity."""
    if identity_id not in EULER_IDS:
        raise DomainViolation(f"unknown identity {identity_id!r}; expected one of {EULER_IDS}")
    with ic.working_precision(max(ic.current_digits(), 30)):
        return _euler_closed(identity_id), _euler_brute(identity_id, terms)
