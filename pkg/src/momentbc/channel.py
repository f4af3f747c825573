"""Heated-channel benchmark between parallel walls.

Steady heat conduction in a slab y in [-1/2, 1/2] driven by the quadratic
volumetric heating r(y) = a y^2 with isothermal walls.  In reference units
the steady balance forces zero normal velocity and a heat-flux difference
across the channel equal to the integrated heating a/12.  The steady solver
uses second-order collocation with boundary rows replacing the odd-moment
equations at the walls; the time marcher integrates the same system with
upwind characteristic splitting and a three-stage strong stability
preserving scheme.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import BasisSet
from .boundary import WallData, make_boundary_operator
from .system import (MomentSystem, MomentTheory, assemble_system,
                     characteristic_decomposition, grad_theory)

SOURCE_AMPLITUDE = math.sqrt(2.0 / 3.0)
WALL_TEMP_COEFF = -math.sqrt(3.0 / 2.0)

# moment-to-field conversion factors in reference units
_FIELD_DEFS = (
    ("rho", (0, 0, ()), 1.0),
    ("v_y", (1, 0, ("y",)), 1.0),
    ("theta", (0, 1, ()), -math.sqrt(2.0 / 3.0)),
    ("sigma_yy", (2, 0, ("y", "y")), math.sqrt(2.0)),
    ("q_y", (1, 1, ("y",)), -math.sqrt(5.0 / 2.0)),
)


@dataclass(frozen=True)
class ChannelConfig:
    """Parameters of one channel run."""

    theory: MomentTheory
    kn: float = 0.3
    chi: float = 1.0
    bc_kind: str = "obc"
    n_grid: int = 512
    wall_temp: float = WALL_TEMP_COEFF
    source_amplitude: float = SOURCE_AMPLITUDE

    def __post_init__(self):
        if self.kn <= 0:
            raise ValueError("Knudsen number must be positive")
        if self.n_grid < 16:
            raise ValueError("need at least 16 grid nodes")
        if self.bc_kind not in ("mbc", "obc"):
            raise ValueError("bc_kind must be 'mbc' or 'obc'")

    def grid(self) -> np.ndarray:
        return np.linspace(-0.5, 0.5, self.n_grid)

    def wall_data(self) -> WallData:
        return WallData(temp=self.wall_temp, velocity={}, chi=self.chi)


def source_vector(bs: BasisSet, amplitude: float, y) -> np.ndarray:
    """Moment projection of the heating at position y (scalar or array).

    The heating enters the temperature moment only, with coefficient
    -sqrt(2/3) r(y) and r(y) = amplitude * y^2.
    """
    i_temp = bs.index_of(0, 1, ())
    y = np.asarray(y, dtype=float)
    coeff = -math.sqrt(2.0 / 3.0) * amplitude * y ** 2
    if y.ndim == 0:
        out = np.zeros(bs.size)
        out[i_temp] = coeff
        return out
    out = np.zeros((y.size, bs.size))
    out[:, i_temp] = coeff
    return out


def extract_fields(bs: BasisSet, alpha: np.ndarray) -> dict:
    """Physical field profiles from the moment state (N x m).

    Fields whose moment is absent from the theory (heat flux below 20
    moments) are omitted.
    """
    fields = {}
    for name, key, factor in _FIELD_DEFS:
        try:
            idx = bs.index_of(*key)
        except KeyError:
            continue
        fields[name] = factor * alpha[:, idx]
    return fields


@dataclass(frozen=True)
class ChannelSolution:
    config: ChannelConfig
    y: np.ndarray
    alpha: np.ndarray          # (N, m); None for averaged reference fields
    fields: dict
    diagnostics: dict = field(default_factory=dict)

    def __getattr__(self, name):
        fields = object.__getattribute__(self, "fields")
        if name in fields:
            return fields[name]
        raise AttributeError(name)


@dataclass(frozen=True)
class ErrorProfile:
    y: np.ndarray
    e_theta: np.ndarray
    e_sigma: np.ndarray

    @property
    def max_theta(self) -> float:
        return float(self.e_theta.max())

    @property
    def max_sigma(self) -> float:
        return float(self.e_sigma.max())


def _symmetry_error(fields: dict) -> float:
    """Deviation from the even/odd reflection symmetry of the solution."""
    worst = 0.0
    odd = {"v_y", "q_y"}
    for name, prof in fields.items():
        sign = -1.0 if name in odd else 1.0
        worst = max(worst, float(np.abs(prof - sign * prof[::-1]).max()))
    return worst


def _stack_index(i, idx, m):
    return i * m + np.asarray(idx)


def solve_steady(cfg: ChannelConfig, sys: MomentSystem = None,
                 bc_upper=None, bc_lower=None) -> ChannelSolution:
    """Steady channel solve on cfg.n_grid collocation nodes.

    Interior rows use central differences; at the walls the odd-moment rows
    are replaced by the boundary conditions and the even-moment rows by
    one-sided second-order differences.  The density column only enters
    through its derivative, so the plain system is singular up to a uniform
    density shift; a zero-total-density gauge closes it through a bordered
    augmentation.
    """
    if sys is None:
        sys = assemble_system(cfg.theory, normal_axis="y", axes=("y",))
    if bc_upper is None:
        bc_upper = make_boundary_operator(sys, cfg.bc_kind, cfg.chi, sign=+1)
    if bc_lower is None:
        bc_lower = make_boundary_operator(sys, cfg.bc_kind, cfg.chi, sign=-1)

    m = sys.size
    n_o = sys.n_o
    N = cfg.n_grid
    y = cfg.grid()
    h = y[1] - y[0]
    A = sys.A["y"]
    P = np.diag(sys.P_bgk) / cfg.kn
    bs = sys.basis
    wall = cfg.wall_data()
    size = N * m

    rows, cols, vals = [], [], []

    def add_block(r0, c0, M):
        nz = np.nonzero(M)
        rows.append(r0 + nz[0])
        cols.append(c0 + nz[1])
        vals.append(M[nz])

    def add_nodes(nodes, M, shift, w):
        nz = np.nonzero(M)
        if not nz[0].size:
            return
        nodes = np.asarray(nodes)
        rows.append((nodes[:, None] * m + nz[0][None, :]).ravel())
        cols.append(((nodes[:, None] + shift) * m + nz[1][None, :]).ravel())
        vals.append(np.tile(w * M[nz], nodes.size))

    # d/dy through characteristic-biased third-order stencils; a pure
    # central scheme leaves sawtooth modes of the non-relaxing moments
    # undetermined
    dec = characteristic_decomposition(sys)
    A_up, A_dn = dec.split_fluxes(A)
    core = np.arange(2, N - 1)
    add_nodes(core, A_up, -2, 1.0 / (6 * h))
    add_nodes(core, A_up, -1, -6.0 / (6 * h))
    add_nodes(core, A_up, 0, 3.0 / (6 * h))
    add_nodes(core, A_up, +1, 2.0 / (6 * h))
    add_nodes([1], A_up, -1, -1.0 / (2 * h))
    add_nodes([1], A_up, +1, 1.0 / (2 * h))
    core = np.arange(1, N - 2)
    add_nodes(core, A_dn, -1, -2.0 / (6 * h))
    add_nodes(core, A_dn, 0, -3.0 / (6 * h))
    add_nodes(core, A_dn, +1, 6.0 / (6 * h))
    add_nodes(core, A_dn, +2, -1.0 / (6 * h))
    add_nodes([N - 2], A_dn, -1, -1.0 / (2 * h))
    add_nodes([N - 2], A_dn, +1, 1.0 / (2 * h))
    # relaxation on the diagonal
    interior = np.arange(1, N - 1)
    pa = np.nonzero(P)[0]
    rows.append((interior[:, None] * m + pa[None, :]).ravel())
    cols.append((interior[:, None] * m + pa[None, :]).ravel())
    vals.append(np.tile(P[pa], interior.size))

    even = np.arange(n_o, m)
    Ae = A[even, :]
    # lower wall: boundary rows then one-sided (forward) even rows
    add_block(0, 0, bc_lower.B)
    for node, w in ((0, -11.0 / (6 * h)), (1, 18.0 / (6 * h)),
                    (2, -9.0 / (6 * h)), (3, 2.0 / (6 * h))):
        add_block(0 * m + n_o, node * m, w * Ae)
    rows.append(even)
    cols.append(even)
    vals.append(P[even])
    # upper wall: one-sided (backward) even rows then boundary rows
    top = (N - 1) * m
    add_block(top, top, bc_upper.B)
    for node, w in ((N - 1, 11.0 / (6 * h)), (N - 2, -18.0 / (6 * h)),
                    (N - 3, 9.0 / (6 * h)), (N - 4, -2.0 / (6 * h))):
        add_block(top + n_o, node * m, w * Ae)
    rows.append(top + even)
    cols.append(top + even)
    vals.append(P[even])

    rhs = np.zeros(size + 1)
    F = source_vector(bs, cfg.source_amplitude, y)
    rhs[:size] = F.ravel()
    rhs[0:n_o] = bc_lower.rhs(wall)
    rhs[top:top + n_o] = bc_upper.rhs(wall)

    # zero-total-density gauge via a bordered system
    i_rho = bs.index_of(0, 0, ())
    rho_slots = np.arange(N) * m + i_rho
    rows.append(np.full(N, size))
    cols.append(rho_slots)
    vals.append(np.ones(N))
    rows.append(rho_slots)
    cols.append(np.full(N, size))
    vals.append(np.ones(N))

    K = sp.csr_matrix((np.concatenate(vals),
                       (np.concatenate(rows), np.concatenate(cols))),
                      shape=(size + 1, size + 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spla.MatrixRankWarning)
        x = spla.spsolve(K, rhs)
    if not np.all(np.isfinite(x)):
        raise RuntimeError(
            "steady system is singular; the theory lacks a moment needed to "
            "balance the heating (fewer than 20 moments) or boundary rows are "
            "deficient")
    residual = float(np.abs((K @ x - rhs)[:size]).max())
    scale = max(float(np.abs(rhs).max()), 1e-30)
    if residual > 1e-8 * scale:
        raise RuntimeError(f"steady solve residual {residual:.3e} exceeds tolerance")

    alpha = x[:size].reshape(N, m)
    fields = extract_fields(bs, alpha)
    target = cfg.source_amplitude / 12.0
    diagnostics = {
        "residual": residual,
        "gauge_multiplier": float(x[size]),
        "max_v_y": float(np.abs(fields["v_y"]).max()),
        "flux_balance_target": target,
        "symmetry_error": _symmetry_error(fields),
    }
    if "q_y" in fields:
        diagnostics["flux_balance"] = float(fields["q_y"][-1] - fields["q_y"][0])
    return ChannelSolution(config=cfg, y=y, alpha=alpha, fields=fields,
                           diagnostics=diagnostics)


REFERENCE_DEGREES = (5, 6, 7)


def reference_solution(cfg: ChannelConfig, theories=None) -> ChannelSolution:
    """Mean of the converged-family solutions on the same grid.

    By default averages the three largest full-degree theories of the
    supported family (56, 84 and 120 moments in 3D counting).
    """
    if theories is None:
        theories = tuple(grad_theory(d, cfg.theory.reduction)
                         for d in REFERENCE_DEGREES)
    sols = [solve_steady(replace(cfg, theory=th)) for th in theories]
    fields = {}
    for name in sols[0].fields:
        fields[name] = np.mean([s.fields[name] for s in sols], axis=0)
    diagnostics = {
        "theories": [th.name for th in theories],
        "component_diagnostics": [s.diagnostics for s in sols],
    }
    return ChannelSolution(config=cfg, y=sols[0].y, alpha=None,
                           fields=fields, diagnostics=diagnostics)


def error_profile(sol: ChannelSolution, ref: ChannelSolution) -> ErrorProfile:
    """Pointwise absolute differences of temperature and normal stress."""
    if sol.y.shape != ref.y.shape or not np.allclose(sol.y, ref.y):
        raise ValueError("solutions live on different grids")
    return ErrorProfile(y=sol.y.copy(),
                        e_theta=np.abs(sol.fields["theta"] - ref.fields["theta"]),
                        e_sigma=np.abs(sol.fields["sigma_yy"] - ref.fields["sigma_yy"]))


@dataclass(frozen=True)
class MarchResult:
    config: ChannelConfig
    y: np.ndarray
    times: np.ndarray
    energy: np.ndarray
    alpha: np.ndarray
    fields: dict
    dt: float
    blowup: bool

    @property
    def max_energy_growth(self) -> float:
        """Largest rise of the energy trace above its running minimum."""
        running = np.minimum.accumulate(self.energy)
        return float((self.energy - running).max())


def _march_operator(cfg, sys, bc_upper, bc_lower, dec):
    """Semi-discrete operator d alpha/dt = M alpha + b with boundary
    conditions built into the wall rows."""
    m = sys.size
    n_o = sys.n_o
    N = cfg.n_grid
    y = cfg.grid()
    h = y[1] - y[0]
    A = sys.A["y"]
    P = sys.P_bgk / cfg.kn
    A_up, A_dn = dec.split_fluxes(A)

    rows, cols, vals = [], [], []

    def add(r0, c0, M):
        nz = np.nonzero(M)
        if nz[0].size:
            rows.append(r0 + nz[0])
            cols.append(c0 + nz[1])
            vals.append(M[nz])

    def add_nodes(nodes, M, shift, w):
        nz = np.nonzero(M)
        if not nz[0].size:
            return
        nodes = np.asarray(nodes)
        rows.append((nodes[:, None] * m + nz[0][None, :]).ravel())
        cols.append(((nodes[:, None] + shift) * m + nz[1][None, :]).ravel())
        vals.append(np.tile(w * M[nz], nodes.size))

    # upwind part (information from the left): second order where possible
    core = np.arange(2, N - 1)
    add_nodes(core, A_up, 0, -3.0 / (2 * h))
    add_nodes(core, A_up, -1, 4.0 / (2 * h))
    add_nodes(core, A_up, -2, -1.0 / (2 * h))
    add_nodes([1], A_up, 0, -1.0 / h)
    add_nodes([1], A_up, -1, 1.0 / h)
    # downwind part (information from the right)
    core = np.arange(1, N - 2)
    add_nodes(core, A_dn, 0, 3.0 / (2 * h))
    add_nodes(core, A_dn, +1, -4.0 / (2 * h))
    add_nodes(core, A_dn, +2, 1.0 / (2 * h))
    add_nodes([N - 2], A_dn, 0, 1.0 / h)
    add_nodes([N - 2], A_dn, +1, -1.0 / h)
    # relaxation at all interior nodes
    interior = np.arange(1, N - 1)
    add_nodes(interior, -P, 0, 1.0)

    b = np.zeros(N * m)
    F = source_vector(sys.basis, cfg.source_amplitude, y)
    b[:] = F.ravel()
    b[0:m] = 0.0
    b[(N - 1) * m:] = 0.0

    # wall even rows: one-sided full flux, then relaxation and source
    even = np.arange(n_o, m)
    Ae = A[even, :]
    Pe = P[even, :]
    lower_even = np.zeros((m - n_o, 3 * m))
    for node, w in ((0, 3.0 / (2 * h)), (1, -4.0 / (2 * h)), (2, 1.0 / (2 * h))):
        lower_even[:, node * m:(node + 1) * m] += w * Ae
    lower_even[:, 0:m] -= Pe
    upper_even = np.zeros((m - n_o, 3 * m))
    for node, w in ((2, -3.0 / (2 * h)), (1, 4.0 / (2 * h)), (0, -1.0 / (2 * h))):
        upper_even[:, node * m:(node + 1) * m] += w * Ae
    upper_even[:, 2 * m:] -= Pe
    b_lower_even = F[0, even]
    b_upper_even = F[N - 1, even]

    # wall odd rows are slaved to the even rows through the gain
    lower_odd = bc_lower.gain() @ lower_even
    upper_odd = bc_upper.gain() @ upper_even
    add(0, 0, lower_odd)
    add(n_o, 0, lower_even)
    add((N - 1) * m, (N - 3) * m, upper_odd)
    add((N - 1) * m + n_o, (N - 3) * m, upper_even)
    b[0:n_o] = bc_lower.gain() @ b_lower_even
    b[n_o:m] = b_lower_even
    b[(N - 1) * m:(N - 1) * m + n_o] = bc_upper.gain() @ b_upper_even
    b[(N - 1) * m + n_o:] = b_upper_even

    M_op = sp.csr_matrix((np.concatenate(vals),
                          (np.concatenate(rows), np.concatenate(cols))),
                         shape=(N * m, N * m))
    return M_op, b


def _apply_wall_state(alpha, bc_upper, bc_lower, wall, n_o):
    """Overwrite the wall-node odd moments with the boundary relation."""
    alpha[0, :n_o] = bc_lower.gain() @ alpha[0, n_o:] + bc_lower.rhs(wall)
    alpha[-1, :n_o] = bc_upper.gain() @ alpha[-1, n_o:] + bc_upper.rhs(wall)
    return alpha


def time_march_energy(cfg: ChannelConfig, t_final: float = 10.0,
                      cfl: float = 0.4, init="zero", seed: int = 0,
                      sys: MomentSystem = None, record_every: int = 1,
                      blowup_factor: float = 1e6) -> MarchResult:
    """Explicit march of the channel system recording the entropy energy.

    init is 'zero', 'random' (seeded nodal noise) or an (N, m) array; wall
    odd moments are made consistent with the boundary relation before the
    march.  The energy is E(t) = dy * sum_nodes alpha^T S alpha.
    """
    if sys is None:
        sys = assemble_system(cfg.theory, normal_axis="y", axes=("y",))
    bc_upper = make_boundary_operator(sys, cfg.bc_kind, cfg.chi, sign=+1)
    bc_lower = make_boundary_operator(sys, cfg.bc_kind, cfg.chi, sign=-1)
    dec = characteristic_decomposition(sys)
    M_op, b = _march_operator(cfg, sys, bc_upper, bc_lower, dec)

    m = sys.size
    N = cfg.n_grid
    y = cfg.grid()
    h = y[1] - y[0]
    wall = cfg.wall_data()
    if isinstance(init, str):
        if init == "zero":
            alpha = np.zeros((N, m))
        elif init == "random":
            alpha = np.random.default_rng(seed).standard_normal((N, m))
        else:
            raise ValueError(f"unknown initializer {init!r}")
    else:
        alpha = np.array(init, dtype=float).reshape(N, m)
    alpha = _apply_wall_state(alpha, bc_upper, bc_lower, wall, sys.n_o)

    dt = cfl * h / max(dec.max_speed, 1e-12)
    dt = min(dt, 1.5 * cfg.kn)
    steps = max(1, int(math.ceil(t_final / dt)))
    dt = t_final / steps

    S = sys.S

    def energy(u):
        a = u.reshape(N, m)
        return h * float(np.einsum("ij,jk,ik->", a, S, a))

    u = alpha.ravel()
    times = [0.0]
    energies = [energy(u)]
    e_scale = max(energies[0], float(np.abs(b).max()) ** 2, 1.0)
    blowup = False
    for k in range(steps):
        f0 = M_op @ u + b
        u1 = u + dt * f0
        u2 = 0.75 * u + 0.25 * (u1 + dt * (M_op @ u1 + b))
        u = u / 3.0 + (2.0 / 3.0) * (u2 + dt * (M_op @ u2 + b))
        if (k + 1) % record_every == 0 or k == steps - 1:
            e = energy(u)
            times.append((k + 1) * dt)
            energies.append(e)
            if not np.isfinite(e) or e > blowup_factor * e_scale:
                blowup = True
                break

    alpha = u.reshape(N, m)
    return MarchResult(config=cfg, y=y, times=np.array(times),
                       energy=np.array(energies), alpha=alpha,
                       fields=extract_fields(sys.basis, alpha), dt=dt,
                       blowup=blowup)
