"""First-order eigenvalue and eigenvector predictions.

With ``E_hat`` block-wise diagonal, the perturbed eigenvalues are
``lam_j + E_hat[j, j]`` up to ``O(||E||^2)``, and
``U (I - M * E_hat)`` (entrywise product) is a near-orthonormal approximate
eigenvector matrix whose reconstruction misses ``A + E`` by ``O(||E||^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import MODE_BLOCKWISE, AlignedPerturbation, BlockStructure
from .errors import ModeError
from .matrices import as_readonly, operator_norm

__all__ = [
    "FirstOrderPrediction",
    "first_order_eigenvalues",
    "gershgorin_intervals",
    "u_approx",
    "approx_decomposition_residual",
    "first_order_prediction",
]


def _require_blockwise(ap: AlignedPerturbation, what: str) -> None:
    if ap.mode != MODE_BLOCKWISE:
        raise ModeError(
            f"{what} needs a block-wise diagonal perturbation; "
            f"apply blockwise_diagonalize first (mode is {ap.mode!r})"
        )


def first_order_eigenvalues(ap: AlignedPerturbation) -> np.ndarray:
    """Predicted eigenvalues ``lam_j + E_hat[j, j]``, accurate to O(||E||^2)."""
    _require_blockwise(ap, "the first-order eigenvalue formula")
    return ap.base.lam + ap.e_hat_diag


def gershgorin_intervals(ap: AlignedPerturbation) -> list[tuple[float, float]]:
    """Per-index enclosing intervals ``(center, radius)`` for the exact
    perturbed eigenvalues: centers are the first-order predictions, radii the
    off-diagonal row sums of ``E_hat``.

    The discs of ``diag(lam) + E_hat`` are real intervals since both center
    matrices are Hermitian; each perturbed eigenvalue lies in the union.
    """
    _require_blockwise(ap, "Gershgorin enclosure")
    centers = first_order_eigenvalues(ap)
    radii = np.abs(ap.e_hat_off).sum(axis=1)
    return [(float(c), float(r)) for c, r in zip(centers, radii)]


def u_approx(ap: AlignedPerturbation, mmat: np.ndarray) -> np.ndarray:
    """First-order eigenvector matrix ``U (I - M * E_hat)``.

    ``M * E_hat`` is skew-Hermitian, so the result is orthonormal up to
    ``||M * E_hat||^2`` exactly, not merely to first order.
    """
    _require_blockwise(ap, "the first-order eigenvector formula")
    n = ap.n
    correction = np.eye(n, dtype=np.complex128) - mmat * ap.e_hat
    return ap.base.u @ correction


def approx_decomposition_residual(ap: AlignedPerturbation, mmat: np.ndarray) -> float:
    """Operator-norm gap between ``A + E`` and its first-order reconstruction
    ``U_ap diag(lam + E_hat_diag) U_ap*``.  Decays quadratically in ``||E||``."""
    _require_blockwise(ap, "the first-order reconstruction")
    u_ap = u_approx(ap, mmat)
    target = ap.base.u @ np.diag(ap.base.lam).astype(np.complex128) @ ap.base.u.conj().T + ap.e
    rebuilt = u_ap @ np.diag(first_order_eigenvalues(ap)).astype(np.complex128) @ u_ap.conj().T
    return operator_norm(rebuilt - target)


@dataclass(frozen=True)
class FirstOrderPrediction:
    """Bundle of the first-order eigenvalue vector and eigenvector matrix."""

    xi_hat: np.ndarray
    u_ap: np.ndarray
    blocks: BlockStructure


def first_order_prediction(ap: AlignedPerturbation, mmat: np.ndarray) -> FirstOrderPrediction:
    return FirstOrderPrediction(
        xi_hat=as_readonly(first_order_eigenvalues(ap)),
        u_ap=as_readonly(u_approx(ap, mmat)),
        blocks=ap.blocks,
    )
