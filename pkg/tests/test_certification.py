import math
from fractions import Fraction

import numpy as np
import pytest
from flint import arb
from hypothesis import given, settings
from hypothesis import strategies as st

from polygon_steklov import interval_core as ic
from polygon_steklov.block_operators import BlockIndex
from polygon_steklov.certification import (
    TailWorkspace,
    block_enclosure,
    collatz_wielandt_bounds,
    power_iteration_guess,
    sigma_enclosure,
    symmetric_bounds_zero_block,
    tail_hs_bounds,
    two_by_two_top,
)
from polygon_steklov.errors import NonpositiveVector, PreconditionViolation, ZeroVector

from conftest import REFERENCE_ENCLOSURES


def v_float(n, count):
    a = 1.0 / n
    c = math.lgamma(1 - a) - math.lgamma(a)
    return np.array([math.exp(c + math.lgamma(m + a) - math.lgamma(m + 1 - a)) for m in range(count)])


def float_section_top(n, r, M):
    """Top eigenvalue of a float64 section assembled from lgamma, independent of the library."""
    modes = np.arange(-M, M + 1)
    v = v_float(n, 2 * M + 1)
    s = 1 / np.sqrt(np.abs(r + modes * n))
    a = s[:, None] * v[np.abs(modes[:, None] - modes[None, :])] * s[None, :]
    return np.linalg.eigvalsh(a)[-1]


def frac(x):
    return ic.exact_fraction(x)


# ---- oracle tests -------------------------------------------------------------

@pytest.mark.parametrize("n", [4, 10])
def test_float_section_at_larger_m_lands_inside(enclosures, n):
    """Any section top is a lower bound for the block, and it grows with M."""
    enc = enclosures(n)
    r = n - 1
    lam = float_section_top(n, r, 1000)
    sigma = Fraction(1 / lam)
    assert frac(enc.sigma_lo) - Fraction(1, 10**12) <= sigma <= frac(enc.sigma_hi) + Fraction(1, 10**12)


def test_block_enclosure_contains_float_section_oracle():
    e = block_enclosure(6, 1, 60)
    lam = Fraction(float_section_top(6, 1, 60))
    assert frac(e.lambda_lo) - Fraction(1, 10**12) <= lam <= frac(e.lambda_hi)


# ---- Collatz-Wielandt and friends -------------------------------------------------

def test_collatz_wielandt_perron_vector():
    b = collatz_wielandt_bounds([[2, 1], [1, 2]], [1, 1])
    assert b.lam_lo == 3 and b.lam_hi == 3


def test_collatz_wielandt_off_vector():
    b = collatz_wielandt_bounds([[2, 1], [1, 2]], [1, 2])
    assert frac(b.lam_lo) <= Fraction(5, 2) <= frac(b.lam_lo) + Fraction(1, 10**30)
    assert b.lam_hi == 4


def test_collatz_wielandt_rejects_nonpositive():
    with pytest.raises(NonpositiveVector):
        collatz_wielandt_bounds([[2, 1], [1, 2]], [1, 0])


def test_power_iteration_examples():
    x = power_iteration_guess([[1, 0], [0, 1]], 3)
    assert (x > 0).all()
    y = power_iteration_guess([[2, 1], [1, 2]], 60, start=np.array([1.0, 0.2]))
    assert abs(y[0] / y[1] - 1) < 1e-6
    z = power_iteration_guess([[0, 0], [0, 0]], 5, epsilon=1e-30)
    assert np.all(z == 1e-30)
    with pytest.raises(PreconditionViolation):
        power_iteration_guess([[1]], 0)


@pytest.mark.parametrize("mat,x,lo,hi", [
    ([[1, 0], [0, 2]], [0, 1], 2, 2),
    ([[0, 1], [1, 0]], [1, 1], 1, 1),
    ([[1, -1], [-1, 1]], [1, -1], 2, 2),
])
def test_symmetric_bounds_examples(mat, x, lo, hi):
    b = symmetric_bounds_zero_block(mat, x)
    assert b.lam_lo == lo and b.lam_hi == hi


def test_symmetric_bounds_zero_vector():
    with pytest.raises(ZeroVector):
        symmetric_bounds_zero_block([[1, 0], [0, 1]], [0, 0])


@pytest.mark.parametrize("args,top", [((1, 0, 0), 1), ((0, 1, 0), 1), ((3, 0, 5), 5)])
def test_two_by_two_examples(args, top):
    assert two_by_two_top(*args).contains(top)


# ---- tail bounds -----------------------------------------------------------------

def test_tail_bounds_shrink_with_m():
    small = tail_hs_bounds(10, BlockIndex(10, 1), 40)
    large = tail_hs_bounds(10, BlockIndex(10, 1), 320)
    assert large.e_norm < small.e_norm and large.c_norm < small.c_norm


def test_tail_bounds_at_n20_are_small():
    t = tail_hs_bounds(20, BlockIndex(20, 1), 320)
    assert t.e_norm + t.c_norm <= arb("0.2")


def test_zero_block_rank_one_term_is_added():
    ws = TailWorkspace(7, 40)
    plain = ic.sqrt(ws.coupling_sq(0, skip_zero=True))
    t = tail_hs_bounds(7, BlockIndex(7, 0), 40, workspace=ws)
    assert t.coupling_tail is not None and ic.lower(t.coupling_tail) > 0
    assert t.e_norm > ic.upper(plain)


def test_coupling_bound_dominates_brute_force_hs():
    """||E||_HS^2 for the M=20 section against modes up to 80, summed directly in floats."""
    n, r, M, big = 5, 2, 20, 400
    v = v_float(n, 2 * big + 1)
    d = lambda m: abs(r + m * n)  # noqa: E731
    brute = sum(v[abs(m - l)] ** 2 / (d(m) * d(l))
                for m in range(-M, M + 1) for l in range(-big, big + 1) if abs(l) > M)
    bound = float(TailWorkspace(n, M).coupling_sq(r, skip_zero=False).mid())
    assert brute <= bound
    assert bound < 1.5 * brute + 1e-6


# ---- enclosures -------------------------------------------------------------------

def test_refinement_shrinks_block_width():
    coarse = block_enclosure(8, 1, 40)
    fine = block_enclosure(8, 1, 160)
    assert fine.width < coarse.width
    assert coarse.lambda_lo <= fine.lambda_hi and fine.lambda_lo <= coarse.lambda_hi


@pytest.mark.parametrize("n", [3, 10, 20])
def test_sigma_enclosure_intersects_reference_row(enclosures, n):
    enc = enclosures(n)
    lo, hi = (Fraction(s) for s in REFERENCE_ENCLOSURES[n])
    assert frac(enc.sigma_lo) <= hi and lo <= frac(enc.sigma_hi)
    assert 0 < enc.sigma_lo <= enc.sigma_hi < 1
    assert enc.argmax_block in (1, n - 1)
    assert len(enc.per_block) == n


def test_sigma_enclosure_default_precision():
    enc = sigma_enclosure(4, 20)
    assert enc.digits == 140


def test_sigma_enclosure_rejects_bad_input():
    with pytest.raises(PreconditionViolation):
        sigma_enclosure(2, 10)


@pytest.mark.parametrize("n", [5, 9, 17])
def test_conjugate_blocks_intersect(enclosures, n):
    blocks = enclosures(n).per_block
    for r in range(1, n):
        a, b = blocks[r], blocks[n - r]
        assert a.lambda_lo <= b.lambda_hi and b.lambda_lo <= a.lambda_hi


@settings(max_examples=20, deadline=None)
@given(n=st.integers(3, 12), data=st.data())
def test_block_containment_chain(n, data):
    r = data.draw(st.integers(0, n - 1))
    e = block_enclosure(n, r, 12)
    assert e.lambda_lo <= e.lambda_hi
    assert e.section.lam_lo == e.lambda_lo
    assert e.lambda_hi >= e.section.lam_lo
