"""Time evolution of a small system against discrete-mode surrogates.

Three integrators share a fixed-step classical Runge-Kutta core: a Lindblad
master equation for pseudomode surrogates, Hamiltonian state-vector
evolution for chain surrogates, and an exact Volterra integro-differential
oracle for single-excitation problems.  All comparisons are made on the
reduced system density matrix in trace norm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .chainmap import ChainModel
from .errors import ConfigError, DimensionCapError
from .pseudomode import PseudomodeModel
from .spectral import CouplingSpec, memory_kernel_grid

DEFAULT_DIM_CAP = 4096
DEFAULT_LEAK_THRESHOLD = 1e-6


@dataclass
class SystemModel:
    """Finite system: piecewise-constant H_S schedule and coupling operator L.

    The schedule is a list of (t_k, H_k); H_k applies on [t_k, t_{k+1}) and
    the first entry must start at t=0.
    """

    dim: int
    h_schedule: tuple
    L: np.ndarray

    def __post_init__(self):
        self.L = np.asarray(self.L, dtype=complex)
        if self.L.shape != (self.dim, self.dim):
            raise ConfigError("coupling operator shape must match the system dimension")
        sched = []
        for t_k, h_k in self.h_schedule:
            h_k = np.asarray(h_k, dtype=complex)
            if h_k.shape != (self.dim, self.dim):
                raise ConfigError("schedule Hamiltonian shape mismatch")
            if np.max(np.abs(h_k - h_k.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(h_k))):
                raise ConfigError("schedule Hamiltonian not Hermitian")
            sched.append((float(t_k), h_k))
        if not sched or sched[0][0] != 0.0:
            raise ConfigError("schedule must start at t=0")
        times = [t for t, _ in sched]
        if any(t2 <= t1 for t1, t2 in zip(times[:-1], times[1:])):
            raise ConfigError("schedule times must be strictly increasing")
        self.h_schedule = tuple(sched)

    @property
    def norm_L(self) -> float:
        return float(np.linalg.norm(self.L, 2))

    def hamiltonian_at(self, t: float) -> np.ndarray:
        idx = 0
        for i, (t_k, _) in enumerate(self.h_schedule):
            if t_k <= t + 1e-15:
                idx = i
        return self.h_schedule[idx][1]


@dataclass
class TrajectoryResult:
    times: np.ndarray
    states: np.ndarray  # (T, D, D) reduced density matrices
    leakage: np.ndarray
    metadata: dict = field(default_factory=dict)


def validate_density(rho: np.ndarray, tol_herm=1e-10, tol_trace=1e-10, tol_pos=-1e-10):
    rho = np.asarray(rho, dtype=complex)
    if np.max(np.abs(rho - rho.conj().T)) > tol_herm:
        raise ConfigError("density matrix not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol_trace or abs(np.trace(rho).imag) > tol_trace:
        raise ConfigError("density matrix trace is not 1")
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < tol_pos:
        raise ConfigError("density matrix has a negative eigenvalue")
    return rho


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """Trace norm of the difference: sum of singular values."""
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape != rho2.shape:
        raise ConfigError("trace distance needs equal dimensions")
    return float(np.sum(np.linalg.svd(rho1 - rho2, compute_uv=False)))


def partial_trace(joint, dim_sys: int, dim_env: int) -> np.ndarray:
    """Reduce a joint state (vector or density matrix) over the environment
    factor; the system is the first tensor factor."""
    joint = np.asarray(joint)
    if joint.ndim == 1:
        if joint.size != dim_sys * dim_env:
            raise ConfigError("joint state size does not factorize as requested")
        psi = joint.reshape(dim_sys, dim_env)
        return psi @ psi.conj().T
    if joint.shape != (dim_sys * dim_env, dim_sys * dim_env):
        raise ConfigError("joint matrix shape does not factorize as requested")
    r = joint.reshape(dim_sys, dim_env, dim_sys, dim_env)
    return np.einsum("ikjk->ij", r)


def _mode_operators(dims: list[int]):
    """Sparse annihilation and top-level projectors for each mode in the
    tensor product of the given Fock spaces."""
    ops = []
    tops = []
    for i, d in enumerate(dims):
        a = sp.diags(np.sqrt(np.arange(1, d)), 1, format="csr")
        top = sp.diags(np.eye(d)[-1], 0, format="csr")
        left = sp.identity(int(np.prod(dims[:i], dtype=np.int64)), format="csr")
        right = sp.identity(int(np.prod(dims[i + 1:], dtype=np.int64)), format="csr")
        ops.append(sp.kron(sp.kron(left, a), right, format="csr"))
        tops.append(sp.kron(sp.kron(left, top), right, format="csr").diagonal().real)
    return ops, tops


def _n_steps(t_end: float, h: float) -> int:
    if t_end < 0 or h <= 0:
        raise ConfigError("need t_end >= 0 and h > 0")
    n = int(round(t_end / h)) if t_end > 0 else 0
    if t_end > 0 and abs(n * h - t_end) > 1e-9 * max(t_end, 1.0):
        n = int(np.ceil(t_end / h))
    return n


def _single_excitation_structure(sys: SystemModel, init: np.ndarray):
    """Detect L = lambda |g><e| with diagonal constant H_S and an initial
    state supported on the {g, e} block; return (g, e, lam, E_g, E_e)."""
    if len(sys.h_schedule) != 1:
        return None
    H = sys.h_schedule[0][1]
    if np.max(np.abs(H - np.diag(np.diag(H)))) > 1e-14 * max(1.0, np.max(np.abs(H))):
        return None
    nz = np.argwhere(np.abs(sys.L) > 1e-15 * max(1.0, np.max(np.abs(sys.L))))
    if len(nz) != 1:
        return None
    g, e = int(nz[0][0]), int(nz[0][1])
    if g == e:
        return None
    mask = np.ones((sys.dim, sys.dim), dtype=bool)
    mask[np.ix_([g, e], [g, e])] = False
    if mask.any() and np.max(np.abs(init[mask])) > 1e-14:
        return None
    lam = complex(sys.L[g, e])
    return g, e, lam, float(H[g, g].real), float(H[e, e].real)


def _assemble_block_states(
    sys, init, g, e, times, u, E_g
) -> np.ndarray:
    """Reduced density matrices from the excited-amplitude factor u(t)."""
    D = sys.dim
    states = np.zeros((len(times), D, D), dtype=complex)
    states[:] = init[None, :, :]
    p_e0 = init[e, e].real
    states[:, e, e] = p_e0 * np.abs(u) ** 2
    states[:, g, g] = init[g, g].real + p_e0 * (1.0 - np.abs(u) ** 2)
    phase = np.exp(-1j * E_g * times)
    states[:, g, e] = init[g, e] * phase * np.conj(u)
    states[:, e, g] = np.conj(states[:, g, e])
    return states


def _reduced_lindblad(sys, pm, init, t_end, h, struct) -> TrajectoryResult:
    """Exact single-excitation Lindblad dynamics: one amplitude per mode."""
    g, e, lam, E_g, E_e = struct
    M = pm.n_modes
    omegas = np.asarray(pm.omegas)
    gs = np.asarray(pm.couplings)
    kappas = np.asarray(pm.decays)
    n = _n_steps(t_end, h)
    times = h * np.arange(n + 1)

    # y = (u, m_1..m_M): u excited-system amplitude, m_i one-photon amplitudes
    def rhs(y):
        u, m = y[0], y[1:]
        du = -1j * E_e * u - 1j * np.conj(lam) * np.dot(gs, m)
        dm = -(1j * omegas + 0.5 * kappas) * m - 1j * lam * gs * u
        return np.concatenate(([du], dm))

    y = np.zeros(M + 1, dtype=complex)
    y[0] = 1.0
    us = np.empty(n + 1, dtype=complex)
    leak = np.empty(n + 1)
    us[0] = 1.0
    leak[0] = 0.0
    p_e0 = init[e, e].real
    for k in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        us[k + 1] = y[0]
        leak[k + 1] = p_e0 * float(np.max(np.abs(y[1:]) ** 2)) if M else 0.0

    states = _assemble_block_states(sys, init, g, e, times, us, E_g)
    meta = {"surrogate": "pseudomode", "path": "single_excitation", "n_modes": M, "h": h}
    return TrajectoryResult(times, states, leak, meta)


def lindblad_evolve(
    sys: SystemModel,
    pm: PseudomodeModel,
    init: np.ndarray,
    t_end: float,
    h: float,
    dim_cap: int = DEFAULT_DIM_CAP,
    leak_threshold: float = DEFAULT_LEAK_THRESHOLD,
) -> TrajectoryResult:
    """Evolve init (system density matrix) against the damped modes.

    Joint dimensions up to ``dim_cap`` use the dense vectorized master
    equation.  Above the cap, problems with single-excitation structure
    (one-entry lowering L, diagonal H_S, vacuum modes) are solved exactly in
    the one-excitation sector instead; anything else is rejected.
    """
    init = validate_density(init)
    if init.shape != (sys.dim, sys.dim):
        raise ConfigError("initial density matrix dimension mismatch")
    d_mode = pm.n_max + 1
    joint_dim = sys.dim * d_mode**pm.n_modes
    if joint_dim > dim_cap:
        struct = _single_excitation_structure(sys, init)
        if struct is None:
            raise DimensionCapError(
                f"joint dimension {joint_dim} exceeds the cap {dim_cap}"
            )
        result = _reduced_lindblad(sys, pm, init, t_end, h, struct)
        _flag_leakage(result, leak_threshold)
        return result

    dims = [d_mode] * pm.n_modes
    d_env = d_mode**pm.n_modes
    a_ops, top_masks = _mode_operators(dims)
    ident_env = sp.identity(d_env, format="csr")
    h_static = sp.csr_matrix((joint_dim, joint_dim), dtype=complex)
    n_ops = []
    for w, g_i, a in zip(pm.omegas, pm.couplings, a_ops):
        a_joint = sp.kron(sp.identity(sys.dim, format="csr"), a, format="csr")
        n_joint = (a_joint.conj().T @ a_joint).tocsr()
        n_ops.append(n_joint)
        h_static = h_static + w * n_joint
        h_static = h_static + g_i * (
            sp.kron(sp.csr_matrix(sys.L.conj().T), a, format="csr")
            + sp.kron(sp.csr_matrix(sys.L), a.conj().T, format="csr")
        )
    a_joints = [sp.kron(sp.identity(sys.dim, format="csr"), a, format="csr") for a in a_ops]
    a_dags = [a.conj().T.tocsr() for a in a_joints]
    seg_h = [
        (t_k, (sp.kron(sp.csr_matrix(h_k), ident_env, format="csr") + h_static).tocsr())
        for t_k, h_k in sys.h_schedule
    ]
    # sparse operator algebra only pays off at larger sizes
    if joint_dim <= 128:
        a_joints = [a.toarray() for a in a_joints]
        a_dags = [a.toarray() for a in a_dags]
        n_ops = [nn.toarray() for nn in n_ops]
        seg_h = [(t_k, mat.toarray()) for t_k, mat in seg_h]

    def h_at(t):
        cur = seg_h[0][1]
        for t_k, mat in seg_h:
            if t_k <= t + 1e-15:
                cur = mat
        return cur

    kappas = pm.decays

    def rhs(t, rho):
        H = h_at(t)
        out = -1j * (H @ rho - rho @ H)
        for kap, a, ad, nn in zip(kappas, a_joints, a_dags, n_ops):
            out += kap * ((a @ rho) @ ad - 0.5 * (nn @ rho + rho @ nn))
        return out

    n = _n_steps(t_end, h)
    times = h * np.arange(n + 1)
    vac = np.zeros(d_env)
    vac[0] = 1.0
    rho = np.kron(init, np.outer(vac, vac)).astype(complex)
    states = np.empty((n + 1, sys.dim, sys.dim), dtype=complex)
    leak = np.empty(n + 1)
    top = np.stack(top_masks) if top_masks else np.zeros((0, d_env))

    def record(k, rho_k):
        states[k] = partial_trace(rho_k, sys.dim, d_env)
        if top.shape[0]:
            diag = np.real(np.diagonal(rho_k)).reshape(sys.dim, d_env).sum(axis=0)
            leak[k] = float(np.max(top @ diag))
        else:
            leak[k] = 0.0

    record(0, rho)
    for k in range(n):
        t = times[k]
        k1 = rhs(t, rho)
        k2 = rhs(t + 0.5 * h, rho + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, rho + 0.5 * h * k2)
        k4 = rhs(t + h, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        record(k + 1, rho)

    meta = {"surrogate": "pseudomode", "path": "dense", "n_modes": pm.n_modes, "h": h}
    result = TrajectoryResult(times, states, leak, meta)
    _flag_leakage(result, leak_threshold)
    return result


def chain_evolve(
    sys: SystemModel,
    cm: ChainModel,
    init_state: np.ndarray,
    t_end: float,
    h: float,
    dim_cap: int = DEFAULT_DIM_CAP,
    leak_threshold: float = DEFAULT_LEAK_THRESHOLD,
) -> TrajectoryResult:
    """Hamiltonian evolution of a pure system state coupled to the chain.

    The chain starts in its vacuum; the system couples to site 0 with
    strength eta.
    """
    init_state = np.asarray(init_state, dtype=complex).ravel()
    if init_state.size != sys.dim:
        raise ConfigError("initial state dimension mismatch")
    nrm = np.linalg.norm(init_state)
    if abs(nrm - 1.0) > 1e-10:
        raise ConfigError("initial state must be normalized")
    d_mode = cm.n_max + 1
    N = cm.n_sites
    d_env = d_mode**N
    joint_dim = sys.dim * d_env
    if joint_dim > dim_cap:
        raise DimensionCapError(f"joint dimension {joint_dim} exceeds the cap {dim_cap}")

    a_ops, top_masks = _mode_operators([d_mode] * N)
    h_env = sp.csr_matrix((d_env, d_env), dtype=complex)
    for i in range(N):
        h_env = h_env + cm.alpha[i] * (a_ops[i].conj().T @ a_ops[i])
    for i in range(N - 1):
        hop = a_ops[i] @ a_ops[i + 1].conj().T
        h_env = h_env + cm.b[i] * (hop + hop.conj().T)
    ident_env = sp.identity(d_env, format="csr")
    coupling = cm.eta * (
        sp.kron(sp.csr_matrix(sys.L.conj().T), a_ops[0], format="csr")
        + sp.kron(sp.csr_matrix(sys.L), a_ops[0].conj().T, format="csr")
    )
    h_static = sp.kron(sp.identity(sys.dim, format="csr"), h_env, format="csr") + coupling
    seg_h = [
        (t_k, (sp.kron(sp.csr_matrix(h_k), ident_env, format="csr") + h_static).tocsr())
        for t_k, h_k in sys.h_schedule
    ]

    def h_at(t):
        cur = seg_h[0][1]
        for t_k, mat in seg_h:
            if t_k <= t + 1e-15:
                cur = mat
        return cur

    def rhs(t, psi):
        return -1j * (h_at(t) @ psi)

    n = _n_steps(t_end, h)
    times = h * np.arange(n + 1)
    vac = np.zeros(d_env)
    vac[0] = 1.0
    psi = np.kron(init_state, vac)
    states = np.empty((n + 1, sys.dim, sys.dim), dtype=complex)
    leak = np.empty(n + 1)
    top = np.stack(top_masks)

    def record(k, psi_k):
        states[k] = partial_trace(psi_k, sys.dim, d_env)
        pops = (np.abs(psi_k) ** 2).reshape(sys.dim, d_env).sum(axis=0)
        leak[k] = float(np.max(top @ pops))

    record(0, psi)
    for k in range(n):
        t = times[k]
        k1 = rhs(t, psi)
        k2 = rhs(t + 0.5 * h, psi + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, psi + 0.5 * h * k2)
        k4 = rhs(t + h, psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        record(k + 1, psi)

    meta = {"surrogate": "chain", "path": "state_vector", "n_sites": N, "h": h}
    result = TrajectoryResult(times, states, leak, meta)
    _flag_leakage(result, leak_threshold)
    return result


def volterra_oracle(
    sys: SystemModel,
    spec: CouplingSpec,
    t_end: float,
    h: float,
    init: Optional[np.ndarray] = None,
) -> TrajectoryResult:
    """Exact reference dynamics in the single-excitation sector.

    Solves the memory-kernel equation for the excited amplitude,

        u'(t) = -i E_e u(t) - |lam|^2 int_0^t K(t - s) u(s) ds,

    with the implicit trapezoidal scheme, where K is the Fourier transform
    of Gamma.  Requires L = lam |g><e| with diagonal constant H_S.
    """
    if init is None:
        init = np.zeros((sys.dim, sys.dim), dtype=complex)
        # default: fully excited state of the lowering transition
        nz = np.argwhere(np.abs(sys.L) > 0)
        if len(nz) != 1:
            raise ConfigError("oracle requires a single-entry lowering operator")
        init[nz[0][1], nz[0][1]] = 1.0
    init = validate_density(np.asarray(init, dtype=complex))
    if init.shape != (sys.dim, sys.dim):
        raise ConfigError("initial density matrix dimension mismatch")
    struct = _single_excitation_structure(sys, init)
    if struct is None:
        raise ConfigError(
            "oracle requires L = lam|g><e|, diagonal constant H_S, and an "
            "initial state supported on the {g, e} block"
        )
    g, e, lam, E_g, E_e = struct
    lam2 = abs(lam) ** 2

    n = _n_steps(t_end, h)
    times = h * np.arange(n + 1)
    K = lam2 * np.asarray(memory_kernel_grid(spec, times), dtype=complex)

    u = np.empty(n + 1, dtype=complex)
    u[0] = 1.0
    denom = 1.0 + (h / 2.0) * (1j * E_e + (h / 2.0) * K[0])
    for k in range(n):
        if k == 0:
            mem_k = 0.0
        else:
            mem_k = h * (0.5 * K[k] * u[0] + np.dot(K[k - 1:0:-1], u[1:k]) + 0.5 * K[0] * u[k])
        f_k = -1j * E_e * u[k] - mem_k
        known = h * (0.5 * K[k + 1] * u[0] + np.dot(K[k:0:-1], u[1:k + 1]))
        u[k + 1] = (u[k] + (h / 2.0) * (f_k - known)) / denom

    states = _assemble_block_states(sys, init, g, e, times, u, E_g)
    leak = np.zeros(n + 1)
    meta = {"surrogate": "oracle", "path": "volterra_trapezoid", "h": h}
    return TrajectoryResult(times, states, leak, meta)


def _flag_leakage(result: TrajectoryResult, threshold: float):
    peak = float(np.max(result.leakage)) if result.leakage.size else 0.0
    result.metadata["leakage_peak"] = peak
    if peak > threshold:
        result.metadata["warning"] = (
            f"top Fock level population reached {peak:.3e}; "
            "consider raising n_max"
        )
