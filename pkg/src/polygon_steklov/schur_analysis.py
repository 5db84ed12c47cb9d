"""Scalar Schur equation of the residue-1 block.

Splitting off the m = 0 mode, the residue-1 block reads [[1, b^T], [b, K]]
on C x l2(Z*), and its top eigenvalue is the unique root lambda* > 1 of

    F(lambda) = lambda - 1 - <(lambda - K)^{-1} b, b>.

Everything here works with the section |m| <= M of b and K plus certified
tail terms, so the root enclosure is an independent check on the
Collatz-Wielandt pipeline of ``certification``.

Truncation of the resolvent term.  With H = lambda - K on Z*, y = (x_M, 0)
and x_M = (lambda - K_M)^{-1} b_M, the variational identity

    <H^{-1} b, b> = <b_M, x_M> + <H^{-1} r, r>,   r = (0, b_T + E^T x_M),

gives f_M <= f <= f_M + (||b_T|| + e ||x_M||)^2 / (lambda - kappa).  The
section value f_M itself is enclosed from a float solve x~ and its residual
s = b_M - (lambda - K_M) x~ computed in ball arithmetic:
f_M = <x~, b_M> + <s, x~> + <(lambda - K_M)^{-1} s, s>.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from flint import arb, arb_mat

from . import interval_core as ic
from .block_operators import CriticalBlockData, critical_block_data
from .certification import TAIL_DIGITS, TailWorkspace
from .errors import PreconditionViolation, SpectrumProximity, WindowViolation
from .weight_coefficients import WeightCoefficients, coefficient_v_recursive

BISECTION_TOLERANCE = 1e-25
MAX_BISECTIONS = 200
END_REFINEMENTS = 14  # extra halvings per end once F no longer has a certified sign
NEUMANN_ORDER = 2


@dataclass
class SchurState:
    n_sides: int
    M: int
    data: CriticalBlockData = field(repr=False)
    beta: arb
    kappa: arb
    b_section_sq: arb = field(repr=False)
    b_tail: arb = field(repr=False)
    e_norm: arb = field(repr=False)
    c_norm: arb = field(repr=False)
    _eig: tuple | None = field(default=None, repr=False)

    def spectral_float(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Float eigendecomposition of the K section and the float b, for cheap solves."""
        if self._eig is None:
            k = self.data.k_section.midpoint_array()
            vals, vecs = np.linalg.eigh(k)
            b = np.array([float(x.mid()) for x in self.data.b])
            self._eig = (vals, vecs, vecs.T @ b)
        return self._eig

    def float_solve(self, lam: float) -> np.ndarray:
        vals, vecs, bq = self.spectral_float()
        return vecs @ (bq / (lam - vals))


@dataclass(frozen=True)
class SchurRoot:
    lambda_star: arb
    theta: arb
    a_priori: tuple[arb, arb]
    bisections: int


def _upper_sqrt(x: arb) -> arb:
    return ic.upper(ic.sqrt(ic.nonnegative_upper(x)))


def _dot(x, y) -> arb:
    return sum((a * b for a, b in zip(x, y)), arb(0))


def _section_hs_sq(data: CriticalBlockData, coeffs: WeightCoefficients) -> arb:
    """||K_M||_HS^2 = sum_ij v_|i-j|^2 / (d_i d_j) over the retained nonzero modes."""
    with ic.working_precision(TAIL_DIGITS):
        modes = data.modes
        w = [coeffs[k] ** 2 for k in range(2 * data.half_width + 1)]
        a = [arb(1) / abs(1 + m * data.n_sides) for m in modes]
        t = arb_mat([[w[abs(i - j)] for j in modes] for i in modes])
        z = t * arb_mat([[x] for x in a])
        return ic.upper(sum((a[i] * z[i, 0] for i in range(len(a))), arb(0)))


def beta_and_kappa(n_sides: int, M: int, coeffs: WeightCoefficients | None = None,
                   tails: TailWorkspace | None = None) -> SchurState:
    """beta = ||b||^2 over Z* (section plus tail); kappa >= ||K||_HS over Z*."""
    if n_sides < 3 or M < 1:
        raise PreconditionViolation("need N >= 3 and M >= 1")
    if coeffs is None or coeffs.m_max < 2 * M:
        coeffs = coefficient_v_recursive(2 * M, n_sides)
    data = critical_block_data(n_sides, M, coeffs)
    tails = tails if tails is not None else TailWorkspace(n_sides, M)
    b_sq = _dot(data.b, data.b)
    b_tail_sq = tails.vector_tail_sq(1)
    beta = b_sq + ic.interval(0, b_tail_sq)
    e_sq = tails.coupling_sq(1, skip_zero=True)
    c_sq = tails.discarded_sq(1)
    with ic.working_precision(TAIL_DIGITS):
        kappa = _upper_sqrt(_section_hs_sq(data, coeffs) + 2 * e_sq + c_sq)
    return SchurState(n_sides, M, data, beta, kappa, b_sq, _upper_sqrt(b_tail_sq),
                      _upper_sqrt(e_sq), _upper_sqrt(c_sq))


def zero_coupling_state(state: SchurState) -> SchurState:
    """Same K with b replaced by 0; the Schur term then vanishes."""
    data = state.data
    zero = CriticalBlockData(data.n_sides, data.half_width, data.modes, [arb(0)] * len(data.b), data.k_section)
    return SchurState(state.n_sides, state.M, zero, arb(0), state.kappa, arb(0), arb(0),
                      state.e_norm, state.c_norm)


def _resolvent_pieces(lam: arb, state: SchurState) -> tuple[arb, arb, list[arb], arb]:
    """(f_M enclosure, upper bound on ||x_M||, float solve as balls, ||s||)."""
    x_f = state.float_solve(float(lam.mid()))
    x = [arb(float(t)) for t in x_f]
    kx = state.data.k_section.matvec(x)
    s = [bi - lam * xi + ki for bi, xi, ki in zip(state.data.b, x, kx)]
    s_norm = _upper_sqrt(_dot(s, s))
    gap = lam - state.kappa
    base = _dot(x, state.data.b) + _dot(s, x)
    f_m = base + ic.interval(0, ic.upper(s_norm * s_norm / gap))
    x_norm = ic.upper(_upper_sqrt(_dot(x, x)) + s_norm / gap)
    return f_m, x_norm, x, s_norm


def schur_F(lam, state: SchurState) -> arb:
    lam = ic.to_interval(lam)
    if not ic.lower(lam) > ic.upper(state.kappa):
        raise SpectrumProximity("lambda must exceed the bound on ||K||")
    f_m, x_norm, _, _ = _resolvent_pieces(lam, state)
    gap = lam - state.kappa
    delta = (state.b_tail + state.e_norm * x_norm) ** 2 / gap
    f = f_m + ic.interval(0, ic.upper(delta))
    return lam - 1 - f


def a_priori_window(state: SchurState) -> tuple[arb, arb]:
    """[(1 + sqrt(1 + 4 beta_lo))/2, 1 + beta_hi/(1 - kappa_hi)]."""
    if not ic.upper(state.kappa) < 1:
        raise WindowViolation(f"kappa bound {ic.render_upper(state.kappa, 6)} is not below 1")
    lo = ic.lower((1 + ic.sqrt(1 + 4 * ic.lower(state.beta))) / 2)
    hi = ic.upper(1 + ic.upper(state.beta) / (1 - ic.upper(state.kappa)))
    return lo, hi


def _sign(lam: arb, state: SchurState) -> int:
    val = schur_F(lam, state)
    if ic.upper(val) < 0:
        return -1
    if ic.lower(val) > 0:
        return 1
    return 0


def schur_root(state: SchurState, tolerance: float = BISECTION_TOLERANCE) -> SchurRoot:
    """Bisection on certified signs of F inside the a-priori window.

    Bisection runs while the midpoint sign is certified.  Once F encloses 0
    at the midpoint, each end is refined separately for a fixed number of
    halvings; the remaining width is set by the tail term of F.
    """
    w_lo, w_hi = a_priori_window(state)
    lo, hi = w_lo, w_hi
    if _sign(lo, state) > 0 or _sign(hi, state) < 0:
        raise PreconditionViolation("F has no sign change on the a-priori window")
    steps = 0
    ambiguous = None
    while ic.upper(hi - lo) > tolerance and steps < MAX_BISECTIONS:
        mid = ic.lower((lo + hi) / 2)
        steps += 1
        s = _sign(mid, state)
        if s < 0:
            lo = mid
        elif s > 0:
            hi = mid
        else:
            ambiguous = mid
            break
    if ambiguous is not None:
        a, b = lo, ambiguous
        for _ in range(END_REFINEMENTS):
            mid = ic.lower((a + b) / 2)
            steps += 1
            if _sign(mid, state) < 0:
                a = mid
            else:
                b = mid
        lo = a
        a, b = ambiguous, hi
        for _ in range(END_REFINEMENTS):
            mid = ic.upper((a + b) / 2)
            steps += 1
            if _sign(mid, state) > 0:
                b = mid
            else:
                a = mid
        hi = b
    lam = ic.interval(lo, hi)
    return SchurRoot(lam, lam - 1, (w_lo, w_hi), steps)


@dataclass(frozen=True)
class SchurEigenvector:
    modes: list[int]
    values: list[arb] = field(repr=False)
    residual: arb

    def component(self, m: int) -> arb:
        return self.values[self.modes.index(m)]


def schur_eigenvector_section(root: SchurRoot, state: SchurState) -> SchurEigenvector:
    """x = (1, (lambda* - K_M)^{-1} b_M) with a componentwise enclosure.

    The solve at the midpoint of lambda* is widened by ||s||/(lambda - kappa)
    for its own residual and by width(lambda*) ||x||/(lambda - kappa) for the
    spread of lambda*.  ``residual`` bounds ||(A_M - lambda*) x||_inf over the
    full (2M+1)-mode section.
    """
    lam_mid = arb(root.lambda_star.mid())
    _, x_norm, x, s_norm = _resolvent_pieces(lam_mid, state)
    gap = ic.lower(root.lambda_star) - state.kappa
    if not ic.lower(gap) > 0:
        raise SpectrumProximity("lambda* is not separated from the bound on ||K||")
    spread = ic.upper(ic.width(root.lambda_star)) * x_norm
    slack = ic.upper((s_norm + spread) / gap)
    ys = [xi + ic.interval(-slack, slack) for xi in x]
    # residual of the full section at (1, y): row 0 and rows m != 0
    lam = root.lambda_star
    row0 = 1 + _dot(state.data.b, ys) - lam
    ky = state.data.k_section.matvec(ys)
    rows = [bi + ki - lam * yi for bi, ki, yi in zip(state.data.b, ky, ys)]
    res = max((ic.upper(abs(t)) for t in [row0] + rows), key=ic.exact_fraction)
    modes = [0] + list(state.data.modes)
    return SchurEigenvector(modes, [arb(1)] + ys, res)


# ---- Schur moments M_j = <K^j b, b> ------------------------------------------------

def moment(j: int, n_sides: int, M: int, coeffs: WeightCoefficients | None = None,
           state: SchurState | None = None) -> arb:
    """Section value plus a one-sided tail; every tail contribution is a sum of positives."""
    if j not in (0, 1, 2):
        raise PreconditionViolation("moments are available for j = 0, 1, 2")
    st = state if state is not None else beta_and_kappa(n_sides, M, coeffs)
    if j == 0:
        return st.beta
    b = st.data.b
    kb = st.data.k_section.matvec(b)
    bt, e, c = st.b_tail, st.e_norm, st.c_norm
    bm = _upper_sqrt(st.b_section_sq)
    if j == 1:
        sec = _dot(kb, b)
        tail = 2 * e * bt * bm + c * bt * bt
    else:
        sec = _dot(kb, kb)
        kbm = _upper_sqrt(sec)
        tail = 2 * kbm * e * bt + (e * bt) ** 2 + (e * bm + c * bt) ** 2
    return sec + ic.interval(0, ic.upper(tail))


def theta_via_moments(n_sides: int, M: int, state: SchurState | None = None) -> tuple[arb, arb]:
    """(theta enclosure, error radius) from M0 + M1 + M2 +- (8 beta^2 + 2 beta kappa^3)."""
    if n_sides < 20:
        raise WindowViolation("the moment expansion of theta is certified for N >= 20")
    st = state if state is not None else beta_and_kappa(n_sides, M)
    if not ic.upper(st.kappa) <= arb(1) / 2:
        raise WindowViolation("kappa bound exceeds 1/2")
    total = sum((moment(j, n_sides, M, state=st) for j in range(NEUMANN_ORDER + 1)), arb(0))
    beta = ic.upper(st.beta)
    err = ic.upper(8 * beta**2 + 2 * beta * st.kappa ** (NEUMANN_ORDER + 1))
    return total + ic.interval(-err, err), err
