"""Finite sections of the residue-class block operators.

For a residue ``r`` the block acts on modes ``m`` (frequency ``r + mN``) with
entries ``v_{m-m'} / sqrt(d_m d_m')`` where ``d_m = |r + mN|``.  A section
keeps ``|m| <= M``.  Sections are stored in factored form: a Toeplitz matrix
``T[i, j] = v_{|m_i - m_j|}`` (shared by every residue with the same mode
set), the diagonal scaling ``s_i = d_{m_i}^{-1/2}``, and for the zero block
the rank-one vector removed from it.  Products with a vector never form the
dense entrywise matrix.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from flint import arb, arb_mat

from . import interval_core as ic
from .errors import InsufficientCoefficients, PreconditionViolation, ZeroMode
from .weight_coefficients import WeightCoefficients, coefficient_v_recursive


@dataclass(frozen=True)
class BlockIndex:
    n_sides: int
    residue: int

    def __post_init__(self):
        if self.n_sides < 3:
            raise PreconditionViolation(f"need N >= 3, got {self.n_sides}")
        if not 0 <= self.residue < self.n_sides:
            raise PreconditionViolation(f"residue {self.residue} outside 0..{self.n_sides - 1}")


def diagonal_weight(block: BlockIndex, m: int, reciprocal: bool = False) -> int:
    """|r + mN|; raises ZeroMode for the zero mode of block 0 when a reciprocal is wanted."""
    d = abs(block.residue + m * block.n_sides)
    if d == 0 and reciprocal:
        raise ZeroMode("the zero mode of block 0 has no reciprocal weight")
    return d


def section_modes(M: int, skip_zero: bool) -> list[int]:
    return [m for m in range(-M, M + 1) if not (skip_zero and m == 0)]


def toeplitz_matrix(coeffs: WeightCoefficients, modes: Sequence[int]) -> arb_mat:
    span = max(modes) - min(modes)
    if coeffs.m_max < span:
        raise InsufficientCoefficients(f"need v_j up to j={span}, have {coeffs.m_max}")
    v = coeffs.values
    return arb_mat([[v[abs(a - b)] for b in modes] for a in modes])


@dataclass
class BlockSection:
    block: BlockIndex
    half_width: int
    modes: list[int]
    toeplitz: arb_mat = field(repr=False)
    scale: list[arb] = field(repr=False)
    coeffs: WeightCoefficients = field(repr=False)
    rank_one: list[arb] | None = field(default=None, repr=False)

    @property
    def zero_mode_excluded(self) -> bool:
        return 0 not in self.modes

    @property
    def dimension(self) -> int:
        return len(self.modes)

    def weights(self) -> list[int]:
        return [diagonal_weight(self.block, m) for m in self.modes]

    def entry(self, i: int, j: int) -> arb:
        val = self.scale[i] * self.toeplitz[i, j] * self.scale[j]
        if self.rank_one is not None:
            val -= self.rank_one[i] * self.rank_one[j]
        return val

    def matrix(self) -> arb_mat:
        """Dense entrywise enclosure, upper triangle mirrored so symmetry is exact."""
        n = self.dimension
        rows = [[arb(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                e = self.entry(i, j)
                rows[i][j] = e
                rows[j][i] = e
        return arb_mat(rows)

    def matvec(self, x: Sequence) -> list[arb]:
        n = self.dimension
        y = arb_mat([[self.scale[i] * ic.to_interval(x[i])] for i in range(n)])
        z = self.toeplitz * y
        out = [self.scale[i] * z[i, 0] for i in range(n)]
        if self.rank_one is not None:
            dot = sum((self.rank_one[i] * ic.to_interval(x[i]) for i in range(n)), arb(0))
            out = [out[i] - self.rank_one[i] * dot for i in range(n)]
        return out

    def midpoint_array(self) -> np.ndarray:
        """Float64 approximation of the section, for choosing test vectors only."""
        v = np.array(self.coeffs.midpoints())
        modes = np.array(self.modes)
        t = v[np.abs(modes[:, None] - modes[None, :])]
        s = np.array([float(x.mid()) for x in self.scale])
        out = s[:, None] * t * s[None, :]
        if self.rank_one is not None:
            b = np.array([float(x.mid()) for x in self.rank_one])
            out -= np.outer(b, b)
        return out


def ensure_coefficients(n_sides: int, needed: int, coeffs: WeightCoefficients | None) -> WeightCoefficients:
    if coeffs is None or coeffs.alpha.n_sides != n_sides:
        return coefficient_v_recursive(needed, n_sides)
    if coeffs.m_max < needed:
        raise InsufficientCoefficients(f"need v_j up to j={needed}, have {coeffs.m_max}")
    return coeffs


def _scales(block: BlockIndex, modes: Sequence[int]) -> list[arb]:
    return [1 / ic.sqrt(diagonal_weight(block, m, reciprocal=True)) for m in modes]


def assemble_block_section(
    block: BlockIndex,
    M: int,
    coeffs: WeightCoefficients,
    toeplitz: arb_mat | None = None,
) -> BlockSection:
    if block.residue == 0:
        raise PreconditionViolation("use assemble_zero_block_section for residue 0")
    if M < 0:
        raise PreconditionViolation("M must be nonnegative")
    if coeffs.m_max < 2 * M:
        raise InsufficientCoefficients(f"need v_j up to j={2 * M}, have {coeffs.m_max}")
    modes = section_modes(M, skip_zero=False)
    t = toeplitz if toeplitz is not None else toeplitz_matrix(coeffs, modes)
    return BlockSection(block, M, modes, t, _scales(block, modes), coeffs)


def zero_block_vector(n_sides: int, modes: Sequence[int], coeffs: WeightCoefficients) -> list[arb]:
    """b_0(m) = v_|m| / sqrt(|m| N)."""
    blk = BlockIndex(n_sides, 0)
    return [coeffs[m] / ic.sqrt(diagonal_weight(blk, m, reciprocal=True)) for m in modes]


def assemble_zero_block_section(
    n_sides: int,
    M: int,
    coeffs: WeightCoefficients,
    toeplitz: arb_mat | None = None,
) -> BlockSection:
    """Section of K0 - b0 b0^T / v0 over the nonzero modes |m| <= M."""
    if M < 1:
        raise PreconditionViolation("M must be at least 1")
    if coeffs.m_max < 2 * M:
        raise InsufficientCoefficients(f"need v_j up to j={2 * M}, have {coeffs.m_max}")
    block = BlockIndex(n_sides, 0)
    modes = section_modes(M, skip_zero=True)
    t = toeplitz if toeplitz is not None else toeplitz_matrix(coeffs, modes)
    b = zero_block_vector(n_sides, modes, coeffs)
    # v0 = 1, so dividing the rank-one term by v0 only rescales by sqrt(v0) = 1
    root_v0 = ic.sqrt(coeffs[0])
    return BlockSection(block, M, modes, t, _scales(block, modes), coeffs, [x / root_v0 for x in b])


@dataclass
class CriticalBlockData:
    """Coupling vector b and interaction section K of the residue-1 block."""

    n_sides: int
    half_width: int
    modes: list[int]
    b: list[arb] = field(repr=False)
    k_section: BlockSection = field(repr=False)


def critical_block_data(
    n_sides: int,
    M: int,
    coeffs: WeightCoefficients,
    toeplitz: arb_mat | None = None,
) -> CriticalBlockData:
    if M < 1:
        raise PreconditionViolation("M must be at least 1")
    if coeffs.m_max < 2 * M:
        raise InsufficientCoefficients(f"need v_j up to j={2 * M}, have {coeffs.m_max}")
    block = BlockIndex(n_sides, 1)
    modes = section_modes(M, skip_zero=True)
    t = toeplitz if toeplitz is not None else toeplitz_matrix(coeffs, modes)
    scale = _scales(block, modes)
    b = [coeffs[m] * scale[i] for i, m in enumerate(modes)]
    k = BlockSection(block, M, modes, t, scale, coeffs)
    return CriticalBlockData(n_sides, M, modes, b, k)


def dump_section_csv(section: BlockSection, path: str | Path) -> Path:
    """Write (row, col, lo, hi) for every entry, using mode labels for row and col."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "lo", "hi"])
        for i, mi in enumerate(section.modes):
            for j, mj in enumerate(section.modes):
                lo, hi = ic.endpoints_decimal(section.entry(i, j), 30)
                w.writerow([mi, mj, lo, hi])
    return path
