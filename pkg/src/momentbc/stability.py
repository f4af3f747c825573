"""Energy stability test for wall boundary operators.

A boundary operator is admissible when the kernel of the wall-normal flux
lies in its kernel and the boundary quadratic form is nonnegative on the
reflected incoming characteristics.  Both conditions are evaluated
numerically from the characteristic decomposition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .system import CharacteristicDecomposition, MomentSystem


@dataclass(frozen=True)
class StabilityReport:
    verdict: str                  # 'stable', 'unstable' or 'degenerate'
    kernel_ok: bool
    kernel_residual: float
    min_schur_eig: float
    schur: np.ndarray
    reflection_cond: float
    details: dict = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def check_stability(dec: CharacteristicDecomposition, B: np.ndarray,
                    kernel_tol: float = 1e-9,
                    psd_tol: float = 1e-9,
                    margin: float = 1e-10) -> StabilityReport:
    """Evaluate the two admissibility conditions for boundary rows B.

    B must have one row per incoming characteristic.  The first condition
    is that the zero-speed block ||B X0|| vanishes relative to the scaled
    operator norm; the second is positive semi-definiteness of the
    reflection form R+^T Lam- R+ + Lam+ with R+ = -inv(B-) B+.

    A zero eigenvalue of the reflection form is a neutral, perfectly
    reflected mode: outgoing energy exactly balances incoming energy.
    The no-penetration row of a wall operator always produces one such
    mode, and since that row carries no wall data the mode cannot be
    forced.  The verdict therefore accepts eigenvalues down to -psd_tol;
    the strict reading (min eigenvalue > margin) is reported in
    details["strictly_positive"].
    """
    B = np.asarray(B, dtype=float)
    if B.shape[0] != dec.n_neg:
        raise ValueError(f"expected {dec.n_neg} boundary rows, got {B.shape[0]}")
    Bt = B @ dec.S_half_inv
    B_minus = Bt @ dec.X_minus
    B_zero = Bt @ dec.X_zero
    B_plus = Bt @ dec.X_plus

    # Relative residual keeps the verdict invariant under B -> c*B.
    scale_B = float(np.abs(Bt).max()) if Bt.size else 1.0
    raw_residual = float(np.abs(B_zero).max()) if B_zero.size else 0.0
    kernel_residual = raw_residual / scale_B if scale_B > 0 else raw_residual
    kernel_ok = kernel_residual < kernel_tol

    sv = np.linalg.svd(B_minus, compute_uv=False)
    cond = float(sv.max() / sv.min()) if sv.min() > 0 else np.inf
    details = {"n_neg": dec.n_neg, "n_zero": dec.n_zero, "n_pos": dec.n_pos,
               "kernel_residual_raw": raw_residual}
    if not np.isfinite(cond) or sv.min() < 1e-12 * max(sv.max(), 1.0):
        return StabilityReport(verdict="degenerate", kernel_ok=kernel_ok,
                               kernel_residual=kernel_residual,
                               min_schur_eig=float("nan"),
                               schur=np.empty((0, 0)),
                               reflection_cond=cond, details=details)

    R_plus = -np.linalg.solve(B_minus, B_plus)
    schur = R_plus.T @ np.diag(dec.lam_minus) @ R_plus + np.diag(dec.lam_plus)
    schur = 0.5 * (schur + schur.T)
    eigs = np.linalg.eigvalsh(schur)
    min_eig = float(eigs.min()) if eigs.size else float("inf")
    scale = max(float(dec.lam_plus.max()) if dec.lam_plus.size else 1.0, 1.0)
    psd_ok = min_eig >= -psd_tol * scale
    details["strictly_positive"] = bool(min_eig > margin * scale)
    details["n_schur_zero"] = int(np.sum(np.abs(eigs) <= psd_tol * scale))
    verdict = "stable" if (kernel_ok and psd_ok) else "unstable"
    return StabilityReport(verdict=verdict, kernel_ok=kernel_ok,
                           kernel_residual=kernel_residual,
                           min_schur_eig=min_eig, schur=schur,
                           reflection_cond=cond, details=details)


def quadratic_form_H(sys: MomentSystem, alpha, orientation: int = +1) -> float:
    """Boundary quadratic form alpha^T S A^(n) alpha computed directly.

    The characteristic-variable evaluation of the same quantity lives on
    CharacteristicDecomposition.quadratic_form; the two must agree.
    """
    if orientation not in (+1, -1):
        raise ValueError("orientation must be +1 or -1")
    alpha = np.asarray(alpha, dtype=float)
    A = sys.A_normal
    if orientation < 0:
        signs = sys.basis.parity_signs(sys.normal_axis)
        A = (A * signs[None, :]) * signs[:, None]
    return float(alpha @ (sys.S @ A) @ alpha)
