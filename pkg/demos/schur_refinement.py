"""Refining eigenvalue predictions near a degenerate block.

A double eigenvalue reacts to a perturbation in two ways: the perturbation
splits it at first order, and the rest of the spectrum pushes back at second
order.  The Schur complement

    B = E11 - C (diag(tau - rho) + D)^{-1} C*

captures both.  This demo compares, on a matrix with a triple and a double
eigenvalue, the first-order prediction, the full Schur refinement, and the
cheaper variant that replaces the middle factor by a reciprocal of the
eigenvalue gaps.  The refinement error decays like t^3 instead of t^2.

The similarity diagnostic at the end shows why the refinement works: after a
block-triangular change of basis, the perturbed matrix contains B + rho I as
its leading corner, and the coupling blocks it ignores have norms O(||E||)
and O(||E||^2).
"""

import numpy as np

from eigpert import (
    EnsembleConfig,
    aligned_perturbation,
    eigh,
    first_order_eigenvalues,
    generate_instance,
    hermitian,
    operator_norm,
    refined_eigenvalues,
    scaled,
    schur_data,
    schur_similarity_diagnostic,
)

cfg = EnsembleConfig(seed=23, n=5, block_spec=(3, 2), trials=1, predictor="schur_full")
a, f = generate_instance(cfg, 0)
ap = aligned_perturbation(a, f)
print("eigenvalues of A:", np.round(ap.base.lam, 6), "(blocks of size 3 and 2)")
print()

print(" t        first-order      schur (full)     schur (simple)")
for t in (1e-1, 1e-2, 1e-3):
    ap_t = scaled(ap, t)
    exact = eigh(hermitian(a + t * f)).lam
    e1 = np.abs(first_order_eigenvalues(ap_t) - exact).max()
    e2 = np.abs(refined_eigenvalues(ap_t, "full") - exact).max()
    e3 = np.abs(refined_eigenvalues(ap_t, "simplified") - exact).max()
    print(f" {t:<8g} {e1:<16.3e} {e2:<16.3e} {e3:<16.3e}")
print()
print("each column drops by the promised power of 10 per decade of t: 2, 3, 3.")
print()

t = 1e-2
ap_t = scaled(ap, t)
sd = schur_data(ap_t, 0)
print(f"block 0 at t = {t:g}: rho = {sd.rho:.6f}, l = {sd.l}, m = {sd.m}")
print("Schur complement B (Hermitian l x l):")
print(np.array_str(sd.b.real, precision=3, suppress_small=True))
print("its eigenvalues beta refine the block:", np.round(sd.rho + sd.beta, 8))
print()

diag = schur_similarity_diagnostic(ap_t, 0)
print("similarity diagnostic: the conjugated matrix has B + rho I in its corner;")
print(f"  coupling norms: ||C|| = {diag.q2_norm:.3e} (order t),"
      f"  ||K^-1 C* B|| = {diag.q3_norm:.3e} (order t^2)")
corner = diag.transformed[: sd.l, : sd.l] - sd.rho * np.eye(sd.l)
print(f"  corner matches B to {operator_norm(corner - sd.b):.1e}")
