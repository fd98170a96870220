"""Ground-truth Hermitian eigensolver: cyclic-by-rows Jacobi with complex
plane rotations.

Every prediction formula in this package is measured against this solver, so
it deliberately shares no code with those formulas.  It is pure and
deterministic: identical input always produces the identical decomposition,
with eigenvalues sorted non-increasingly (stable under ties) and each
eigenvector column phased so its largest-modulus entry is real nonnegative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .matrices import as_readonly, hermitian, operator_norm

__all__ = [
    "DEFAULT_MAX_SWEEPS",
    "SpectralDecomposition",
    "eigh",
    "residual",
    "normalize_column_phases",
]

DEFAULT_MAX_SWEEPS = 64


@dataclass(frozen=True)
class SpectralDecomposition:
    """Unitary eigenvector matrix ``u`` and non-increasing real eigenvalues ``lam``."""

    u: np.ndarray
    lam: np.ndarray

    @property
    def n(self) -> int:
        return int(self.lam.size)


def normalize_column_phases(u: np.ndarray) -> np.ndarray:
    """Phase each column so its largest-modulus entry is real and nonnegative.

    Ties in modulus resolve to the smallest row index, which keeps the
    convention deterministic.
    """
    out = np.array(u, copy=True)
    for j in range(out.shape[1]):
        k = int(np.argmax(np.abs(out[:, j])))
        z = out[k, j]
        az = abs(z)
        if az > 0.0:
            out[:, j] *= z.conjugate() / az
            out[k, j] = out[k, j].real  # drop the round-off imaginary residue
    return out


def _off_mass(a: np.ndarray) -> float:
    # Summed directly over off-diagonal entries: subtracting the diagonal
    # mass from the total cannot resolve below sqrt(eps) * ||a||_F.
    off = np.array(a, copy=True)
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _rotate(a: np.ndarray, u: np.ndarray, p: int, q: int) -> None:
    """Annihilate a[p, q] with a unitary plane rotation, updating a and u in place."""
    b = a[p, q]
    absb = abs(b)
    app = a[p, p].real
    aqq = a[q, q].real
    tau = (aqq - app) / (2.0 * absb)
    sign = 1.0 if tau >= 0.0 else -1.0
    # Smaller-modulus root of t^2 - 2*tau*t - 1 = 0 keeps the angle below 45 deg.
    t = -sign / (abs(tau) + math.hypot(tau, 1.0))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = (t * c) * (b.conjugate() / absb)

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p + s * col_q
    a[:, q] = -np.conj(s) * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p + np.conj(s) * row_q
    a[q, :] = -s * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    ucol_p = u[:, p].copy()
    ucol_q = u[:, q].copy()
    u[:, p] = c * ucol_p + s * ucol_q
    u[:, q] = -np.conj(s) * ucol_p + c * ucol_q


def eigh(h, tol: float | None = None, max_sweeps: int = DEFAULT_MAX_SWEEPS) -> SpectralDecomposition:
    """Diagonalize a Hermitian matrix by cyclic-by-rows Jacobi rotations.

    Parameters
    ----------
    h : array_like
        Square Hermitian matrix (validated and symmetrized on entry).
    tol : float, optional
        Termination tolerance, at least 1e-15.  Defaults to ``1e-13 * n``.
        Sweeping stops once the off-diagonal Frobenius mass falls below
        ``tol`` times a lower bound on the spectral norm of ``h`` (its
        largest entry modulus), so the mass is below ``tol * ||h||`` at
        termination.
    max_sweeps : int
        Sweep budget; exceeding it raises :class:`ConvergenceError` carrying
        the final off-diagonal mass.
    """
    a = hermitian(h)
    n = a.shape[0]
    if tol is None:
        tol = 1e-13 * n
    if tol < 1e-15:
        raise ValueError(f"tol must be at least 1e-15, got {tol}")
    u = np.eye(n, dtype=np.complex128)
    scale = float(np.abs(a).max())
    if n > 1 and scale > 0.0:
        target = tol * scale
        # Entries below this floor cannot push the off mass back over target.
        pivot_floor = target / (2.0 * n)
        off = _off_mass(a)
        for _sweep in range(max_sweeps):
            if off <= target:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    if abs(a[p, q]) > pivot_floor:
                        _rotate(a, u, p, q)
            a = 0.5 * (a + a.conj().T)  # keep round-off drift Hermitian
            off = _off_mass(a)
        else:
            if off > target:
                raise ConvergenceError(
                    f"Jacobi sweep limit {max_sweeps} reached with off-diagonal "
                    f"mass {off:.3e} (target {target:.3e})",
                    off_mass=off,
                )
    lam = np.diag(a).real.copy()
    order = np.argsort(-lam, kind="stable")
    lam = lam[order]
    u = normalize_column_phases(u[:, order])
    return SpectralDecomposition(u=as_readonly(u), lam=as_readonly(lam))


def residual(h, d: SpectralDecomposition) -> float:
    """Operator-norm reconstruction error ``||u diag(lam) u* - h||``."""
    h = hermitian(h)
    if d.u.shape != h.shape or d.lam.size != h.shape[0]:
        raise ValueError(
            f"decomposition of size {d.lam.size} does not match matrix {h.shape}"
        )
    return operator_norm(d.u @ np.diag(d.lam) @ d.u.conj().T - h)
