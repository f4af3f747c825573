"""Assembly of symmetric hyperbolic moment systems.

A theory is fixed by its maximal tensor rank and the number of radial
(Laguerre) indices per rank.  The flux matrices are moment projections of
the free streaming operator; the symmetrizer follows from the quadratic
entropy over all tensor components, which makes every S A^(k) exactly
symmetric and splits the wall-normal flux into odd/even blocks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .tensor import (FULL3D, PLANAR, REDUCTIONS, multiplicity, multisets,
                     trace_expansion)
from .basis import (BasisSet, Polynomial3, basis_polynomial, build_basis_set,
                    inner_full)


@dataclass(frozen=True)
class MomentTheory:
    """Basis selection: maximal rank and radial count per rank."""

    max_rank: int
    radial_counts: tuple
    reduction: str = PLANAR
    name: str = ""

    def __post_init__(self):
        if self.reduction not in REDUCTIONS:
            raise ValueError(f"unknown reduction {self.reduction!r}")
        if self.max_rank < 0 or len(self.radial_counts) != self.max_rank + 1:
            raise ValueError("radial_counts must list one entry per rank 0..max_rank")
        if any(c < 1 for c in self.radial_counts):
            raise ValueError("each rank needs at least one radial index")
        if not self.name:
            object.__setattr__(self, "name", f"G{self.full3d_count}")

    @property
    def full3d_count(self) -> int:
        return sum((2 * n + 1) * c for n, c in enumerate(self.radial_counts))

    @property
    def moment_count(self) -> int:
        per_rank = (lambda n: 2 * n + 1) if self.reduction == FULL3D else (lambda n: n + 1)
        return sum(per_rank(n) * c for n, c in enumerate(self.radial_counts))


def grad_theory(max_degree: int, reduction: str = PLANAR) -> MomentTheory:
    """Theory containing every basis function of total degree <= max_degree."""
    if max_degree < 2:
        raise ValueError("need max_degree >= 2 to include stress moments")
    counts = tuple((max_degree - n) // 2 + 1 for n in range(max_degree + 1))
    return MomentTheory(max_rank=max_degree, radial_counts=counts, reduction=reduction)


def theory_from_name(name: str, reduction: str = PLANAR) -> MomentTheory:
    """Resolve names like 'G20' within the full-degree family."""
    for lam in range(2, 30):
        th = grad_theory(lam, reduction)
        if th.name.lower() == name.lower():
            return th
    raise ValueError(f"unknown theory name {name!r}")


def assemble_symmetrizer(bs: BasisSet) -> np.ndarray:
    """Entropy symmetrizer: half the Gram matrix of the expansion columns.

    S_ab = 1/2 sum_t E_ta E_tb over all ordered tuples t, evaluated per
    (rank, radial) block with multiplicity weights.  Entries are exact
    half-integers.
    """
    m = bs.size
    S = np.zeros((m, m))
    reduction = bs.theory.reduction
    for (n, s), cols in bs.blocks().items():
        expand = trace_expansion(n, reduction)
        comp_of = {bs.entries[i].component: i for i in cols}
        for ms in multisets(n):
            w = 0.5 * multiplicity(ms)
            row = expand[ms]
            for ca, va in row.items():
                for cb, vb in row.items():
                    S[comp_of[ca], comp_of[cb]] += w * float(va) * float(vb)
    return S


def assemble_flux(bs: BasisSet, axis: str = "x") -> np.ndarray:
    """Flux matrix A^(axis): moments of xi_axis times the reconstruction."""
    m = bs.size
    xi = Polynomial3.axis(axis)
    A = np.empty((m, m))
    for j in range(m):
        flux = xi * bs.expanded[j]
        for i, bf in enumerate(bs.entries):
            A[i, j] = inner_full(bf.poly, flux)
    return A


def bgk_projector(bs: BasisSet) -> np.ndarray:
    """Diagonal relaxation projector: zero on the collision invariants
    (density, velocity, temperature), identity elsewhere."""
    invariants = {(0, 0), (1, 0), (0, 1)}
    diag = np.array([0.0 if (bf.rank, bf.radial) in invariants else 1.0
                     for bf in bs.entries])
    return np.diag(diag)


@dataclass(frozen=True)
class SymmetryReport:
    axis: str
    max_asymmetry: float
    max_odd_odd: float

    @property
    def ok(self) -> bool:
        return self.max_asymmetry < 1e-10


def verify_full_symmetry(bs: BasisSet, axis: str = "x") -> SymmetryReport:
    """Cross-check of the raw flux integrals over all component pairs.

    Computes <psi_a, xi psi_b> on the multiset level for every pair of the
    theory's basis functions and reports the worst asymmetry, plus the
    largest odd-odd entry for the wall normal (exact zero by parity).
    """
    funcs = []
    reduction = bs.theory.reduction
    zmax = 1 if reduction == FULL3D else 0
    for (n, s) in bs.blocks():
        for ms in multisets(n):
            if reduction == PLANAR and ms.count("z") % 2:
                continue
            funcs.append((ms, basis_polynomial(n, s, ms)))
    xi = Polynomial3.axis(axis)
    k = len(funcs)
    C = np.empty((k, k))
    for i, (_, p) in enumerate(funcs):
        for j, (_, q) in enumerate(funcs):
            C[i, j] = inner_full(p, xi * q)
    asym = float(np.abs(C - C.T).max())
    odd = np.array([ms.count(axis) % 2 == 1 for ms, _ in funcs])
    max_oo = float(np.abs(C[np.ix_(odd, odd)]).max()) if odd.any() else 0.0
    return SymmetryReport(axis=axis, max_asymmetry=asym, max_odd_odd=max_oo)


@dataclass(frozen=True)
class MomentSystem:
    """Assembled first-order system: d_t alpha + A^(k) d_k alpha = rhs."""

    basis: BasisSet
    A: dict
    S: np.ndarray
    P_bgk: np.ndarray

    @property
    def size(self) -> int:
        return self.basis.size

    @property
    def n_o(self) -> int:
        return self.basis.n_o

    @property
    def n_e(self) -> int:
        return self.basis.n_e

    @property
    def normal_axis(self) -> str:
        return self.basis.normal_axis

    @property
    def A_normal(self) -> np.ndarray:
        return self.A[self.basis.normal_axis]

    def flux_odd_even(self) -> np.ndarray:
        """Odd-even block of S A^(normal); the full matrix is
        [[0, Aoe], [Aoe^T, 0]] in the odd-first ordering."""
        SA = self.S @ self.A_normal
        return SA[: self.n_o, self.n_o:]


def parity_reflection(bs: BasisSet, axis: str = None) -> np.ndarray:
    """State-space reflection matrix (diagonal +-1) for one axis."""
    return np.diag(bs.parity_signs(axis or bs.normal_axis))


def assemble_system(theory: MomentTheory, normal_axis: str = "x",
                    axes=("x", "y", "z")) -> MomentSystem:
    """Build basis, flux matrices, symmetrizer and relaxation projector."""
    bs = build_basis_set(theory, normal_axis)
    if normal_axis not in axes:
        axes = tuple(axes) + (normal_axis,)
    A = {ax: assemble_flux(bs, ax) for ax in axes}
    return MomentSystem(basis=bs, A=A, S=assemble_symmetrizer(bs),
                        P_bgk=bgk_projector(bs))


@dataclass(frozen=True)
class CharacteristicDecomposition:
    """Eigenstructure of S^1/2 A^(n) S^-1/2 split by eigenvalue sign.

    Columns of X are orthonormal; lam_minus is ascending (most negative
    first), lam_plus ascending.  The zero block spans the kernel image.
    """

    normal_axis: str
    orientation: int
    S_half: np.ndarray
    S_half_inv: np.ndarray
    X_minus: np.ndarray
    X_zero: np.ndarray
    X_plus: np.ndarray
    lam_minus: np.ndarray
    lam_plus: np.ndarray

    @property
    def n_neg(self) -> int:
        return len(self.lam_minus)

    @property
    def n_pos(self) -> int:
        return len(self.lam_plus)

    @property
    def n_zero(self) -> int:
        return self.X_zero.shape[1]

    @property
    def X(self) -> np.ndarray:
        return np.hstack([self.X_minus, self.X_zero, self.X_plus])

    @property
    def max_speed(self) -> float:
        speeds = np.concatenate([np.abs(self.lam_minus), np.abs(self.lam_plus)])
        return float(speeds.max()) if speeds.size else 0.0

    def characteristic_variables(self, alpha) -> np.ndarray:
        return self.X.T @ (self.S_half @ np.asarray(alpha, dtype=float))

    def quadratic_form(self, alpha) -> float:
        """Boundary quadratic form via characteristic variables."""
        W = self.characteristic_variables(alpha)
        lam = np.concatenate([self.lam_minus, np.zeros(self.n_zero), self.lam_plus])
        return float(np.sum(lam * W ** 2))

    def split_fluxes(self, A: np.ndarray):
        """Upwind splitting A = A+ + A- mapped back to moment space."""
        up = self.S_half_inv @ self.X_plus @ np.diag(self.lam_plus) \
            @ self.X_plus.T @ self.S_half
        dn = self.S_half_inv @ self.X_minus @ np.diag(self.lam_minus) \
            @ self.X_minus.T @ self.S_half
        return up, dn


def characteristic_decomposition(sys: MomentSystem, orientation: int = +1,
                                 zero_tol: float = 1e-10) -> CharacteristicDecomposition:
    """Orthogonal eigendecomposition of the scaled wall-normal flux.

    orientation -1 selects the wall whose outward normal points along the
    negative axis; its flux is the parity-reflected conjugate of the +1 one.
    """
    if orientation not in (+1, -1):
        raise ValueError("orientation must be +1 or -1")
    S = sys.S
    w, Q = np.linalg.eigh(S)
    if w.min() <= 0:
        raise ValueError("symmetrizer is not positive definite")
    S_half = (Q * np.sqrt(w)) @ Q.T
    S_half_inv = (Q / np.sqrt(w)) @ Q.T
    A = sys.A_normal
    if orientation < 0:
        signs = sys.basis.parity_signs(sys.normal_axis)
        A = (A * signs[None, :]) * signs[:, None]
    M = S_half @ A @ S_half_inv
    asym = np.abs(M - M.T).max()
    if asym > 1e-8:
        raise ValueError(f"scaled flux not symmetric (deviation {asym:.3e})")
    lam, X = np.linalg.eigh(0.5 * (M + M.T))
    cut = zero_tol * max(np.abs(lam).max(), 1.0)
    neg = lam < -cut
    pos = lam > cut
    zero = ~(neg | pos)
    return CharacteristicDecomposition(
        normal_axis=sys.normal_axis, orientation=orientation,
        S_half=S_half, S_half_inv=S_half_inv,
        X_minus=X[:, neg], X_zero=X[:, zero], X_plus=X[:, pos],
        lam_minus=lam[neg], lam_plus=lam[pos])
