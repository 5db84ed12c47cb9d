"""Certified enclosures of block top eigenvalues and of sigma_1.

Per block: a finite section gives a two-sided enclosure of its own top
eigenvalue (Collatz-Wielandt for the positive blocks, Rayleigh quotient and
maximal absolute row sum for the signed zero block).  The section's top
eigenvalue is a lower bound for the whole block.  For the upper bound, write
the block as [[B, E], [E^T, C]] with B the section; then

    lambda_max <= ((b + c) + sqrt((b - c)^2 + 4 e^2)) / 2

with b >= lambda_max(B), e >= ||E||, c >= ||C||.  Hilbert-Schmidt norms of E
and C are bounded below by explicit sums over a window of discarded modes
plus integral-comparison tails that use the power envelope of v_j.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from flint import arb, arb_mat

from . import interval_core as ic
from .block_operators import (
    BlockIndex,
    BlockSection,
    assemble_block_section,
    assemble_zero_block_section,
    diagonal_weight,
    section_modes,
    toeplitz_matrix,
)
from .errors import NonpositiveVector, PreconditionViolation, TailDivergence, ZeroVector
from .weight_coefficients import WeightCoefficients, coefficient_v_recursive, power_envelope

DEFAULT_M = 320
DEFAULT_DIGITS = 140
POWER_ITERATIONS = 25
POSITIVITY_FLOOR = 1e-30
WINDOW_FACTOR = 4  # discarded modes M < |m| <= WINDOW_FACTOR*M are summed explicitly
TAIL_DIGITS = 40


@dataclass(frozen=True)
class SectionBounds:
    lam_lo: arb
    lam_hi: arb

    def __post_init__(self):
        if self.lam_lo > self.lam_hi:
            raise PreconditionViolation("section lower bound exceeds upper bound")


@dataclass(frozen=True)
class TailBounds:
    c_norm: arb
    e_norm: arb
    coupling_tail: arb | None = None  # ||b0 tail|| for the zero block


@dataclass
class BlockEnclosure:
    block: BlockIndex
    lambda_lo: arb
    lambda_hi: arb
    section_half_width: int
    tail: TailBounds
    section: SectionBounds | None = None

    @property
    def width(self) -> arb:
        return self.lambda_hi - self.lambda_lo


@dataclass
class SigmaEnclosure:
    n_sides: int
    sigma_lo: arb
    sigma_hi: arb
    argmax_block: int
    per_block: list[BlockEnclosure] = field(repr=False)
    half_width: int = DEFAULT_M
    digits: int = DEFAULT_DIGITS

    @property
    def interval(self) -> arb:
        return ic.interval(self.sigma_lo, self.sigma_hi)

    @property
    def width(self) -> arb:
        return self.sigma_hi - self.sigma_lo


# ---- generic operators --------------------------------------------------------

class DenseOperator:
    """Small explicit interval matrix with the same interface as BlockSection."""

    def __init__(self, rows):
        if isinstance(rows, arb_mat):
            rows = [[rows[i, j] for j in range(rows.ncols())] for i in range(rows.nrows())]
        self.rows = [[ic.to_interval(x) for x in row] for row in rows]

    @property
    def dimension(self) -> int:
        return len(self.rows)

    def entry(self, i, j) -> arb:
        return self.rows[i][j]

    def matvec(self, x) -> list[arb]:
        xs = [ic.to_interval(t) for t in x]
        return [sum((a * b for a, b in zip(row, xs)), arb(0)) for row in self.rows]

    def midpoint_array(self) -> np.ndarray:
        return np.array([[float(a.mid()) for a in row] for row in self.rows])


def _as_operator(section):
    if hasattr(section, "matvec"):
        return section
    return DenseOperator(section)


def _entries_positive(op) -> bool:
    if isinstance(op, BlockSection):
        return op.rank_one is None
    n = op.dimension
    return all(ic.lower(op.entry(i, j)) >= 0 for i in range(n) for j in range(n))


# ---- section bounds -----------------------------------------------------------

def collatz_wielandt_bounds(section, x: Sequence) -> SectionBounds:
    op = _as_operator(section)
    xs = [ic.to_interval(t) for t in x]
    if len(xs) != op.dimension:
        raise PreconditionViolation("test vector has the wrong length")
    if any(not ic.lower(t) > 0 for t in xs):
        raise NonpositiveVector("Collatz-Wielandt needs a strictly positive vector")
    if not _entries_positive(op):
        raise PreconditionViolation("Collatz-Wielandt needs a nonnegative matrix")
    y = op.matvec(xs)
    ratios = [yi / xi for yi, xi in zip(y, xs)]
    lo = min((ic.lower(r) for r in ratios), key=lambda t: ic.exact_fraction(t))
    hi = max((ic.upper(r) for r in ratios), key=lambda t: ic.exact_fraction(t))
    return SectionBounds(lo, hi)


def power_iteration_guess(section, iters: int = POWER_ITERATIONS, epsilon: float = POSITIVITY_FLOOR,
                          start: np.ndarray | None = None, positive: bool = True) -> np.ndarray:
    """Midpoint power iterations; the result is only a test vector."""
    if iters < 1:
        raise PreconditionViolation("need at least one iteration")
    a = _as_operator(section).midpoint_array()
    x = np.ones(a.shape[0]) if start is None else np.asarray(start, dtype=float).copy()
    for _ in range(iters):
        y = a @ x
        nrm = np.linalg.norm(y)
        if nrm == 0:
            x = np.zeros_like(x)
            break
        x = y / nrm
    if positive:
        x = np.abs(x) + epsilon
    return x


def _eigen_start(section) -> np.ndarray:
    a = _as_operator(section).midpoint_array()
    _, vecs = np.linalg.eigh(a)
    return vecs[:, -1]


def symmetric_bounds_zero_block(section, x: Sequence) -> SectionBounds:
    """Rayleigh-quotient lower bound and maximal absolute row sum upper bound."""
    op = _as_operator(section)
    xs = [ic.to_interval(t) for t in x]
    if all(t.is_zero() for t in xs):
        raise ZeroVector("Rayleigh quotient needs a nonzero vector")
    y = op.matvec(xs)
    num = sum((a * b for a, b in zip(y, xs)), arb(0))
    den = sum((b * b for b in xs), arb(0))
    lo = ic.lower(num / den)
    hi = max((ic.upper(s) for s in _abs_row_sums(op)), key=ic.exact_fraction)
    return SectionBounds(lo, hi)


def _abs_row_sums(op) -> list[arb]:
    n = op.dimension
    if isinstance(op, BlockSection):
        v, s = op.coeffs.values, op.scale
        b = op.rank_one or [arb(0)] * n
        modes = op.modes
        sums = []
        for i in range(n):
            si, bi, mi = s[i], b[i], modes[i]
            sums.append(sum((abs(si * v[abs(mi - modes[j])] * s[j] - bi * b[j]) for j in range(n)), arb(0)))
        return sums
    return [sum((abs(op.entry(i, j)) for j in range(n)), arb(0)) for i in range(n)]


def two_by_two_top(lam_b_hi, e_norm, c_norm) -> arb:
    a, e, c = (ic.to_interval(t) for t in (lam_b_hi, e_norm, c_norm))
    if ic.lower(e) < 0 or ic.lower(c) < 0:
        raise PreconditionViolation("norm bounds must be nonnegative")
    return ((a + c) + ic.sqrt((a - c) ** 2 + 4 * e * e)) / 2


# ---- tail bounds ----------------------------------------------------------------

class TailWorkspace:
    """Quantities shared by the tail bounds of every block of one N.

    Modes with M < |m| <= L (L = window_factor * M) are summed exactly; for
    |m| > L only the envelope v_j <= K j^(2 alpha - 1) and d_m >= N|m|/theta
    are used, with theta = 1 / (1 - r / (N (M + 1))).  Tail quantities are
    upper bounds, so they are evaluated at a lower working precision.
    """

    def __init__(self, n_sides: int, M: int, coeffs: WeightCoefficients | None = None,
                 window_factor: int = WINDOW_FACTOR, digits: int = TAIL_DIGITS):
        if M < 1:
            raise PreconditionViolation("M must be at least 1")
        self.n = n_sides
        self.M = M
        self.L = window_factor * M
        self.digits = digits
        need = self.L + M
        with ic.working_precision(digits):
            self.coeffs = coefficient_v_recursive(need, n_sides)
            self.alpha = self.coeffs.alpha.alpha
            self.q = 2 - 4 * self.alpha  # decay exponent of v_j^2
            if not ic.lower(self.q) > 0:
                raise TailDivergence("squared coefficients do not decay")
            v = self.coeffs.values
            self.w = [x * x for x in v]
            self.sec_modes = section_modes(M, skip_zero=False)
            self.win_modes = [m for m in range(-self.L, self.L + 1) if abs(m) > M]
            self.cross_w = arb_mat([[self.w[abs(a - b)] for b in self.win_modes] for a in self.sec_modes])
            self.cross_v = arb_mat([[v[abs(a - b)] for b in self.win_modes] for a in self.sec_modes])
            self._c_core = self._discarded_core()
        vf = np.array(self.coeffs.midpoints())
        sec, win = np.array(self.sec_modes), np.array(self.win_modes)
        self.cross_v_float = vf[np.abs(sec[:, None] - win[None, :])]

    def theta(self, residue: int) -> arb:
        return 1 / (1 - arb(residue) / (self.n * (self.M + 1)))

    def _envelope_sq(self, j0: int) -> arb:
        k = power_envelope(self.coeffs.alpha, j0)
        return k * k

    def _discarded_core(self) -> arb:
        """Q with ||C||_HS^2 <= (theta/N)^2 Q, independent of the residue.

        Pairs of discarded modes at distance k >= 1 contribute
        4 (H_{M+k} - H_M)/k from equal signs and 4 (H_{k-M-1} - H_M)/k from
        opposite signs; beyond the tabulated k both are <= 8 log(2k/M)/k.
        """
        M, w, q = self.M, self.w, self.q
        K = len(w) - 1
        total = 2 * w[0] / M
        h = [arb(0)]
        for i in range(1, K + M + 1):
            h.append(h[-1] + arb(1) / i)
        for k in range(1, K + 1):
            term = 4 * (h[M + k] - h[M]) / k
            if k >= 2 * M + 2:
                term += 4 * (h[k - M - 1] - h[M]) / k
            total += w[k] * term
        cw = self._envelope_sq(K + 1)
        tail = 8 * cw * ic.power(K, -q) * (ic.log(arb(2 * K) / M) / q + 1 / (q * q))
        return total + tail

    def weights(self, residue: int, modes: Sequence[int], skip_zero: bool) -> list[arb]:
        blk = BlockIndex(self.n, residue)
        out = []
        for m in modes:
            if skip_zero and m == 0:
                out.append(arb(0))
            else:
                out.append(arb(1) / diagonal_weight(blk, m, reciprocal=True))
        return out

    def far_coupling(self, residue: int) -> arb:
        """Bound on sum_{|m'|>L} v_|m-m'| v_|l-m'| / d_m' for any |m|, |l| <= M."""
        cw = self._envelope_sq(self.L + 1 - self.M)
        return 2 * self.theta(residue) * cw / (self.n * self.q * ic.power(self.L - self.M, self.q))

    def coupling_sq(self, residue: int, skip_zero: bool) -> arb:
        """Upper bound for ||E||_HS^2 (section rows, discarded columns)."""
        with ic.working_precision(self.digits):
            a_sec = self.weights(residue, self.sec_modes, skip_zero)
            a_win = self.weights(residue, self.win_modes, False)
            inner = self.cross_w * arb_mat([[x] for x in a_win])
            explicit = sum((a_sec[i] * inner[i, 0] for i in range(len(a_sec))), arb(0))
            return ic.upper(explicit + sum(a_sec, arb(0)) * self.far_coupling(residue))

    def discarded_sq(self, residue: int) -> arb:
        with ic.working_precision(self.digits):
            return ic.upper((self.theta(residue) / self.n) ** 2 * self._c_core)

    def vector_tail_sq(self, residue: int) -> arb:
        """Upper bound for sum_{|m|>M} v_|m|^2 / d_m."""
        with ic.working_precision(self.digits):
            a_win = self.weights(residue, self.win_modes, False)
            explicit = sum((self.w[abs(m)] * a for m, a in zip(self.win_modes, a_win)), arb(0))
            cw = self._envelope_sq(self.L + 1)
            far = 2 * self.theta(residue) * cw / (self.n * self.q * ic.power(self.L, self.q))
            return ic.upper(explicit + far)

    def section_vector_sq(self, residue: int) -> arb:
        with ic.working_precision(self.digits):
            a = self.weights(residue, self.sec_modes, True)
            return ic.upper(sum((self.w[abs(m)] * x for m, x in zip(self.sec_modes, a)), arb(0)))

    # -- coupling Gram matrix G >= E E^T (entrywise) --------------------------

    def gram_float(self, section: BlockSection) -> np.ndarray:
        rows = [self.sec_modes.index(m) for m in section.modes]
        vf = self.cross_v_float[rows]
        blk = section.block
        a = np.array([1.0 / diagonal_weight(blk, m) for m in self.win_modes])
        s = np.array([float(x.mid()) for x in section.scale])
        left = s[:, None] * vf
        far = float(self.far_coupling(blk.residue).mid())
        return (left * a[None, :]) @ left.T + far * np.outer(s, s)

    def gram_apply(self, section: BlockSection, x: Sequence[arb]) -> list[arb]:
        """Enclosure-wise upper bound of (G x)_i for a positive vector x."""
        with ic.working_precision(self.digits):
            r = section.block.residue
            pos = {m: i for i, m in enumerate(section.modes)}
            sx = [section.scale[i] * x[i] for i in range(len(x))]
            row = arb_mat([[sx[pos[m]] if m in pos else arb(0) for m in self.sec_modes]])
            z = row * self.cross_v
            a_win = self.weights(r, self.win_modes, False)
            col = arb_mat([[z[0, j] * a_win[j]] for j in range(len(a_win))])
            u = self.cross_v * col
            far = self.far_coupling(r) * sum(sx, arb(0))
            idx = [self.sec_modes.index(m) for m in section.modes]
            return [ic.upper(section.scale[i] * (u[k, 0] + far)) for i, k in enumerate(idx)]


def _norm_from_sq(x: arb) -> arb:
    return ic.upper(ic.sqrt(ic.nonnegative_upper(x)))


def tail_hs_bounds(n_sides: int, block: BlockIndex, M: int, coeffs: WeightCoefficients | None = None,
                   workspace: TailWorkspace | None = None) -> TailBounds:
    ws = workspace if workspace is not None else TailWorkspace(n_sides, M, coeffs)
    r = block.residue
    e = _norm_from_sq(ws.coupling_sq(r, skip_zero=(r == 0)))
    c = _norm_from_sq(ws.discarded_sq(r))
    if r != 0:
        return TailBounds(c, e)
    # K0~ = K0 - b0 b0^T / v0: the coupling part changes by b0_sec b0_tail^T / v0,
    # while the discarded compression only decreases (it stays nonnegative).
    b_tail = _norm_from_sq(ws.vector_tail_sq(0))
    b_sec = _norm_from_sq(ws.section_vector_sq(0))
    v0 = ic.lower(ws.coeffs[0])
    e_total = ic.upper(e + b_sec * b_tail / v0)
    for val in (e_total, c):
        if not ic.is_finite(val):
            raise TailDivergence("non-finite tail bound")
    return TailBounds(c, e_total, b_tail)


# ---- sharper upper bound through the coupling Gram matrix -----------------------

def coupled_comparison_top(section: BlockSection, tails: TailWorkspace, c_norm: arb,
                           refinements: int = 3) -> arb | None:
    """Upper bound for the top eigenvalue of the full positive block.

    If lambda > c >= ||C|| then lambda <= lambda_max(B + G/(lambda - c)) for
    any entrywise G >= E E^T.  For a positive x and mu > c put
    beta_i = (Bx)_i/x_i and g_i = (Gx)_i/x_i; the larger root mu_i of
    (mu - beta_i)(mu - c) = g_i satisfies beta_i + g_i/(mu_i - c) = mu_i, so
    mu* = max_i mu_i bounds the Collatz-Wielandt ratio of B + G/(mu* - c) by
    mu*.  That ratio is decreasing in mu, hence lambda <= mu*.  Returns None
    when the float model puts the section top too close to c to be useful.
    """
    if section.rank_one is not None:
        raise PreconditionViolation("the comparison needs a section with positive entries")
    c_f = float(c_norm.mid())
    b_f = section.midpoint_array()
    g_f = tails.gram_float(section)
    vals, vecs = np.linalg.eigh(b_f)
    mu = vals[-1]
    if mu <= 1.01 * c_f:
        return None
    x_f = vecs[:, -1]
    for _ in range(refinements):
        vals, vecs = np.linalg.eigh(b_f + g_f / (mu - c_f))
        mu, x_f = vals[-1], vecs[:, -1]
    x_f = np.abs(x_f) + POSITIVITY_FLOOR
    xs = [arb(float(t)) for t in x_f]
    bx = section.matvec(xs)
    gx = tails.gram_apply(section, xs)
    best = None
    for bi, gi, xi in zip(bx, gx, xs):
        beta = ic.upper(bi / xi)
        g = ic.upper(gi / xi)
        root = ic.upper(((beta + c_norm) + ic.sqrt((beta - c_norm) ** 2 + 4 * g)) / 2)
        if best is None or root > best:
            best = root
    return best


# ---- block and sigma enclosures -------------------------------------------------

class SigmaWorkspace:
    """Sections and tail data shared across the residues of one N."""

    def __init__(self, n_sides: int, M: int, coeffs: WeightCoefficients | None = None):
        if coeffs is None or coeffs.m_max < 2 * M:
            coeffs = coefficient_v_recursive(2 * M, n_sides)
        self.coeffs = coeffs
        self.tails = TailWorkspace(n_sides, M)
        self.n = n_sides
        self.M = M
        self._t_full = None
        self._t_nonzero = None

    def toeplitz(self, skip_zero: bool) -> arb_mat:
        if skip_zero:
            if self._t_nonzero is None:
                self._t_nonzero = toeplitz_matrix(self.coeffs, section_modes(self.M, True))
            return self._t_nonzero
        if self._t_full is None:
            self._t_full = toeplitz_matrix(self.coeffs, section_modes(self.M, False))
        return self._t_full

    def section(self, residue: int) -> BlockSection:
        if residue == 0:
            return assemble_zero_block_section(self.n, self.M, self.coeffs, self.toeplitz(True))
        return assemble_block_section(BlockIndex(self.n, residue), self.M, self.coeffs, self.toeplitz(False))

    def unreduced_zero_section(self) -> BlockSection:
        """Section of K0 itself; K0 dominates the reduced zero block in Loewner order."""
        reduced = self.section(0)
        return BlockSection(reduced.block, self.M, reduced.modes, reduced.toeplitz, reduced.scale, self.coeffs)


def section_bounds(section: BlockSection) -> SectionBounds:
    start = _eigen_start(section)
    if section.rank_one is not None:
        x = power_iteration_guess(section, POWER_ITERATIONS, start=start, positive=False)
        return symmetric_bounds_zero_block(section, x)
    x = power_iteration_guess(section, POWER_ITERATIONS, POSITIVITY_FLOOR, start=np.abs(start))
    return collatz_wielandt_bounds(section, x)


def block_enclosure(n_sides: int, residue: int, M: int, coeffs: WeightCoefficients | None = None,
                    workspace: SigmaWorkspace | None = None) -> BlockEnclosure:
    """Lower end from the section; upper end the smaller of the 2x2 and coupled comparisons."""
    ws = workspace if workspace is not None else SigmaWorkspace(n_sides, M, coeffs)
    block = BlockIndex(n_sides, residue)
    sb = section_bounds(ws.section(residue))
    tail = tail_hs_bounds(n_sides, block, M, workspace=ws.tails)
    top = ic.upper(two_by_two_top(sb.lam_hi, tail.e_norm, tail.c_norm))
    if residue == 0:
        positive = ws.unreduced_zero_section()
        c0 = _norm_from_sq(ws.tails.discarded_sq(0))
    else:
        positive = ws.section(residue)
        c0 = tail.c_norm
    sharper = coupled_comparison_top(positive, ws.tails, c0)
    if sharper is not None and sharper < top:
        top = sharper
    if top < sb.lam_lo:
        raise PreconditionViolation("upper bound fell below the section lower bound")
    return BlockEnclosure(block, sb.lam_lo, top, M, tail, sb)


def _max_point(points: Sequence[arb]) -> tuple[int, arb]:
    idx = max(range(len(points)), key=lambda i: ic.exact_fraction(points[i]))
    return idx, points[idx]


def assemble_sigma(n_sides: int, blocks: list[BlockEnclosure], M: int) -> SigmaEnclosure:
    _, lam_lo = _max_point([b.lambda_lo for b in blocks])
    arg, lam_hi = _max_point([b.lambda_hi for b in blocks])
    sigma_lo = ic.lower(1 / lam_hi)
    sigma_hi = ic.upper(1 / lam_lo)
    return SigmaEnclosure(n_sides, sigma_lo, sigma_hi, blocks[arg].block.residue, blocks, M, ic.current_digits())


def sigma_enclosure(n_sides: int, M: int = DEFAULT_M, digits: int | None = None) -> SigmaEnclosure:
    if n_sides < 3 or M < 1:
        raise PreconditionViolation("need N >= 3 and M >= 1")
    with ic.working_precision(digits if digits is not None else DEFAULT_DIGITS):
        ws = SigmaWorkspace(n_sides, M)
        blocks = [block_enclosure(n_sides, r, M, workspace=ws) for r in range(n_sides)]
        return assemble_sigma(n_sides, blocks, M)
