"""Choosing and exploiting the eigenbasis of the unperturbed matrix.

Given ``A = U diag(lam) U*`` and a Hermitian perturbation ``E``, everything
downstream works with the conjugated perturbation ``E_hat = U* E U``.  This
module groups eigenvalues into degeneracy blocks, rotates ``U`` inside each
block so ``E_hat`` becomes block-wise diagonal with non-increasing in-block
diagonal, builds the inverse-gap matrix ``M``, and decides membership in the
cone of perturbation directions along which every block stays diagonal and
well separated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import jacobi
from .errors import GapTooSmallError, ModeError
from .matrices import as_readonly, hermitian

__all__ = [
    "DEFAULT_REL_GAP_TOL",
    "MODE_RAW",
    "MODE_BLOCKWISE",
    "BlockStructure",
    "AlignedPerturbation",
    "VcReport",
    "group_eigenvalues",
    "conjugate_to_eigenbasis",
    "blockwise_diagonalize",
    "scaled",
    "m_matrix",
    "vc_membership",
    "align_columns",
    "aligned_perturbation",
]

# Relative gap below which adjacent eigenvalues share a degeneracy block.
DEFAULT_REL_GAP_TOL = 1e-8

# Same-block diagonal entries of E_hat closer than this (relative to ||E||)
# are flagged as tied; derivative formulas that need strict decrease refuse them.
TIED_DIAGONAL_TOL = 1e-10

MODE_RAW = "raw"
MODE_BLOCKWISE = "blockwise_diagonal"


@dataclass(frozen=True)
class BlockStructure:
    """Contiguous degeneracy groups of a non-increasing eigenvalue vector.

    ``groups`` holds half-open ``(start, stop)`` index ranges; ``rep_values``
    holds one representative (mean) eigenvalue per group.
    """

    groups: tuple[tuple[int, int], ...]
    rep_values: tuple[float, ...]

    @property
    def n(self) -> int:
        return self.groups[-1][1]

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(stop - start for start, stop in self.groups)

    def block_id(self) -> np.ndarray:
        """Per-index group number, as an int array of length n."""
        out = np.empty(self.n, dtype=np.intp)
        for g, (start, stop) in enumerate(self.groups):
            out[start:stop] = g
        return out

    def min_gap(self) -> float:
        """Smallest gap between representative values of adjacent groups."""
        if len(self.rep_values) < 2:
            return math.inf
        reps = self.rep_values
        return min(reps[g] - reps[g + 1] for g in range(len(reps) - 1))


def group_eigenvalues(lam, rel_gap_tol: float = DEFAULT_REL_GAP_TOL) -> BlockStructure:
    """Split a non-increasing eigenvalue vector into degeneracy groups.

    Adjacent values belong to one group when their gap is at most
    ``rel_gap_tol * max(1, max|lam|)``; a gap exactly at the tolerance still
    joins (the boundary tie goes to the earlier, larger-eigenvalue group).
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.ndim != 1 or lam.size == 0:
        raise ValueError("expected a nonempty 1-d eigenvalue vector")
    if np.any(np.diff(lam) > 0):
        raise ValueError("eigenvalues must be non-increasing")
    tol = rel_gap_tol * max(1.0, float(np.abs(lam).max()))
    groups = []
    start = 0
    for i in range(1, lam.size):
        if lam[i - 1] - lam[i] > tol:
            groups.append((start, i))
            start = i
    groups.append((start, lam.size))
    reps = tuple(float(np.mean(lam[s:e])) for s, e in groups)
    return BlockStructure(groups=tuple(groups), rep_values=reps)


@dataclass(frozen=True)
class AlignedPerturbation:
    """A Hermitian perturbation expressed in the eigenbasis of the base matrix.

    ``e_hat = base.u* @ e @ base.u``; ``e_hat_diag`` is its real diagonal and
    ``e_hat_off`` the complementary zero-diagonal part, so that
    ``diag(e_hat_diag) + e_hat_off == e_hat`` exactly.  ``mode`` records
    whether the basis has been rotated to make ``e_hat`` block-wise diagonal.
    """

    base: jacobi.SpectralDecomposition
    blocks: BlockStructure
    e: np.ndarray
    e_hat: np.ndarray
    e_hat_diag: np.ndarray
    e_hat_off: np.ndarray
    mode: str
    e_norm: float
    tied_block_diagonals: bool = False

    @property
    def n(self) -> int:
        return int(self.base.lam.size)


def _split_parts(e_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diag = np.diag(e_hat).real.copy()
    off = e_hat - np.diag(diag)
    return diag, off


def _tied_diagonals(diag: np.ndarray, blocks: BlockStructure, e_norm: float) -> bool:
    thr = TIED_DIAGONAL_TOL * e_norm
    for start, stop in blocks.groups:
        if stop - start < 2:
            continue
        gaps = diag[start : stop - 1] - diag[start + 1 : stop]
        if gaps.size and float(gaps.min()) <= thr:
            return True
    return False


def conjugate_to_eigenbasis(
    base: jacobi.SpectralDecomposition,
    e,
    blocks: BlockStructure | None = None,
    rel_gap_tol: float = DEFAULT_REL_GAP_TOL,
) -> AlignedPerturbation:
    """Express a Hermitian perturbation in the eigenbasis of ``base`` (raw mode)."""
    e = hermitian(e)
    if e.shape != base.u.shape:
        raise ValueError(f"perturbation shape {e.shape} does not match base {base.u.shape}")
    if blocks is None:
        blocks = group_eigenvalues(base.lam, rel_gap_tol=rel_gap_tol)
    if blocks.n != base.lam.size:
        raise ValueError("block structure does not cover the eigenvalue vector")
    e_hat = base.u.conj().T @ e @ base.u
    e_hat = 0.5 * (e_hat + e_hat.conj().T)
    diag, off = _split_parts(e_hat)
    # ||E|| equals max |eigenvalue of E_hat|; one oracle call, reused downstream.
    e_norm = float(np.abs(jacobi.eigh(e_hat).lam).max())
    return AlignedPerturbation(
        base=base,
        blocks=blocks,
        e=as_readonly(e),
        e_hat=as_readonly(e_hat),
        e_hat_diag=as_readonly(diag),
        e_hat_off=as_readonly(off),
        mode=MODE_RAW,
        e_norm=e_norm,
    )


def blockwise_diagonalize(ap: AlignedPerturbation) -> AlignedPerturbation:
    """Rotate the base inside each degeneracy block so ``e_hat`` is block-wise
    diagonal with non-increasing in-block diagonal entries.

    The eigenvalue vector is untouched and the rotated basis still
    diagonalizes the base matrix.  Applying this to input that is already
    block-wise diagonal only re-imposes the column phase convention.
    """
    u_new = np.array(ap.base.u, copy=True)
    for start, stop in ap.blocks.groups:
        if stop - start < 2:
            continue
        block = np.array(ap.e_hat[start:stop, start:stop], copy=True)
        rot = jacobi.eigh(block)
        u_new[:, start:stop] = u_new[:, start:stop] @ rot.u
    u_new = jacobi.normalize_column_phases(u_new)
    base = jacobi.SpectralDecomposition(u=as_readonly(u_new), lam=ap.base.lam)
    e_hat = base.u.conj().T @ ap.e @ base.u
    e_hat = 0.5 * (e_hat + e_hat.conj().T)
    diag, off = _split_parts(e_hat)
    return AlignedPerturbation(
        base=base,
        blocks=ap.blocks,
        e=ap.e,
        e_hat=as_readonly(e_hat),
        e_hat_diag=as_readonly(diag),
        e_hat_off=as_readonly(off),
        mode=MODE_BLOCKWISE,
        e_norm=ap.e_norm,
        tied_block_diagonals=_tied_diagonals(diag, ap.blocks, ap.e_norm),
    )


def scaled(ap: AlignedPerturbation, t: float) -> AlignedPerturbation:
    """The same aligned perturbation with ``E`` replaced by ``t E`` (t > 0).

    Positive scaling preserves block-wise diagonality and the in-block
    ordering, so the mode carries over.
    """
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise ValueError(f"scale factor must be positive and finite, got {t}")
    return replace(
        ap,
        e=as_readonly(t * ap.e),
        e_hat=as_readonly(t * ap.e_hat),
        e_hat_diag=as_readonly(t * ap.e_hat_diag),
        e_hat_off=as_readonly(t * ap.e_hat_off),
        e_norm=t * ap.e_norm,
    )


def aligned_perturbation(
    a,
    e,
    rel_gap_tol: float = DEFAULT_REL_GAP_TOL,
    blockwise: bool = True,
) -> AlignedPerturbation:
    """One-call pipeline: decompose ``a``, conjugate ``e``, optionally rotate
    block-wise.  Convenience entry point used by the CLI and the demos."""
    base = jacobi.eigh(hermitian(a))
    ap = conjugate_to_eigenbasis(base, e, rel_gap_tol=rel_gap_tol)
    return blockwise_diagonalize(ap) if blockwise else ap


def m_matrix(base: jacobi.SpectralDecomposition, blocks: BlockStructure) -> np.ndarray:
    """Inverse-gap matrix: ``M[i, j] = 1 / (lam[i] - lam[j])`` across blocks,
    zero inside blocks and on the diagonal.  Real and exactly antisymmetric."""
    lam = base.lam
    if blocks.n != lam.size:
        raise ValueError("block structure does not cover the eigenvalue vector")
    bid = blocks.block_id()
    cross = bid[:, None] != bid[None, :]
    out = np.zeros((lam.size, lam.size), dtype=np.float64)
    diff = lam[:, None] - lam[None, :]
    out[cross] = 1.0 / diff[cross]
    return out


@dataclass(frozen=True)
class VcReport:
    """Witnesses for the diagonal-cone membership test."""

    member: bool
    per_block_off_diagonal: tuple[float, ...]
    worst_gap_ratio: float
    degenerate_zero: bool


def vc_membership(ap: AlignedPerturbation, c: float, diag_tol: float) -> VcReport:
    """Test whether ``E`` points into the cone where, for every eigenvalue
    block, the block's Schur complement is diagonal (off-diagonal entries at
    most ``diag_tol * ||E||``) and its eigenvalues are pairwise separated by
    at least ``c * ||E||``.

    ``E = 0`` with a repeated eigenvalue present is reported as a non-member
    with the ``degenerate_zero`` flag set: the separation requirement reads
    strictly and all-zero Schur eigenvalues cannot satisfy it.
    """
    from .schur import schur_data  # deferred; schur consumes this module's types

    if c < 0.0 or diag_tol < 0.0:
        raise ValueError("c and diag_tol must be nonnegative")
    gap = ap.blocks.min_gap()
    if not (ap.e_norm < 0.5 * gap):
        raise GapTooSmallError(
            f"perturbation norm {ap.e_norm:.3e} is not below half the smallest "
            f"inter-block gap {gap:.3e}"
        )
    has_multi = any(stop - start >= 2 for start, stop in ap.blocks.groups)
    if ap.e_norm == 0.0:
        return VcReport(
            member=not has_multi,
            per_block_off_diagonal=tuple(0.0 for _ in ap.blocks.groups),
            worst_gap_ratio=math.inf,
            degenerate_zero=has_multi,
        )
    off_witness = []
    worst_ratio = math.inf
    member = True
    for g, (start, stop) in enumerate(ap.blocks.groups):
        sd = schur_data(ap, g)
        size = stop - start
        if size >= 2:
            off = np.abs(sd.b - np.diag(np.diag(sd.b)))
            worst_off = float(off.max())
            beta = sd.beta
            pair_gap = min(
                abs(float(beta[i] - beta[j]))
                for i in range(size)
                for j in range(i + 1, size)
            )
            ratio = pair_gap / (c * ap.e_norm) if c > 0.0 else math.inf
            worst_ratio = min(worst_ratio, ratio)
            if worst_off > diag_tol * ap.e_norm or pair_gap < c * ap.e_norm:
                member = False
        else:
            worst_off = 0.0
        off_witness.append(worst_off)
    return VcReport(
        member=member,
        per_block_off_diagonal=tuple(off_witness),
        worst_gap_ratio=worst_ratio,
        degenerate_zero=False,
    )


def align_columns(candidate: np.ndarray, reference: np.ndarray, groups) -> np.ndarray:
    """Permute and phase the columns of ``candidate`` to best match ``reference``.

    Within each index group (a :class:`BlockStructure` or an iterable of
    ``(start, stop)`` ranges) the columns of ``candidate`` are greedily
    assigned to reference columns by largest inner-product modulus (ties go
    to the smallest candidate index), then each assigned column is rotated by
    a unit phase so its inner product with the reference column is real
    nonnegative.  Eigenvector matrices from different solvers agree only up
    to exactly these gauge freedoms, so comparisons go through this map.
    """
    if isinstance(groups, BlockStructure):
        groups = groups.groups
    candidate = np.asarray(candidate, dtype=np.complex128)
    reference = np.asarray(reference, dtype=np.complex128)
    if candidate.shape != reference.shape:
        raise ValueError("candidate and reference shapes differ")
    out = np.array(candidate, copy=True)
    for start, stop in groups:
        available = list(range(start, stop))
        for j in range(start, stop):
            overlaps = [abs(np.vdot(candidate[:, k], reference[:, j])) for k in available]
            k = available.pop(int(np.argmax(overlaps)))
            z = np.vdot(candidate[:, k], reference[:, j])
            phase = z / abs(z) if abs(z) > 0.0 else 1.0
            out[:, j] = candidate[:, k] * phase
    return out
