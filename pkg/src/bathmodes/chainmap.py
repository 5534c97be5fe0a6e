"""Star-to-chain transformation of a windowed spectral measure.

Orthogonal polynomials of the measure Gamma(w) dw on [-omega_c, omega_c]
give a tridiagonal (nearest-neighbor) environment Hamiltonian whose first
site carries the entire system coupling.  The Jacobi matrix of the
recurrence also yields the Gauss quadrature rule of the measure, which is
what makes the truncation error decay superfactorially in the chain length.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import BreakdownError, ConfigError
from .quadrature import adaptive_quad, composite_gauss_rule
from .spectral import (
    CouplingSpec,
    FrequencyWindow,
    eval_gamma,
    quadrature_breakpoints,
    window_integral,
)


@dataclass(frozen=True)
class ChainModel:
    """Tridiagonal environment: on-site alpha[i], hopping b[i], injection eta."""

    omega_c: float
    alpha: tuple[float, ...]
    b: tuple[float, ...]
    eta: float
    n_max: int

    def __post_init__(self):
        if len(self.b) != len(self.alpha) - 1:
            raise ConfigError("need one hopping per adjacent site pair")
        if self.n_max < 1:
            raise ConfigError("fock truncation must be at least 1")

    @property
    def n_sites(self) -> int:
        return len(self.alpha)


@dataclass(frozen=True)
class GaussRule:
    """Nodes and normalized weights of the measure's Gauss quadrature."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]


def _discrete_stieltjes(x: np.ndarray, w: np.ndarray, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients of monic polynomials orthogonal w.r.t. the
    discrete measure sum_q w_q delta(x - x_q)."""
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    norm_prev = 0.0
    norm = float(np.sum(w))
    if norm <= 0.0:
        raise BreakdownError("measure has zero mass on the window")
    alpha = np.zeros(N)
    beta = np.zeros(N)  # beta[0] unused downstream
    scale = norm
    for i in range(N):
        alpha[i] = float(np.sum(w * x * p * p)) / norm
        if i == N - 1:
            break
        p_next = (x - alpha[i]) * p - (beta[i] if i > 0 else 0.0) * p_prev
        norm_next = float(np.sum(w * p_next * p_next))
        if norm_next <= 1e-14 * scale:
            raise BreakdownError(
                f"recurrence broke down at step {i + 1}; measure support too small"
            )
        beta[i + 1] = norm_next / norm
        p_prev, p = p, p_next
        norm_prev, norm = norm, norm_next
    return alpha, beta


def recurrence_coefficients(
    spec: CouplingSpec, omega_c: float, N: int
) -> tuple[np.ndarray, np.ndarray]:
    """Monic three-term recurrence coefficients (alpha[0..N-1], b[1..N-1])
    for the measure Gamma(w) dw on [-omega_c, omega_c].

    Computed by the discretized Stieltjes procedure on an auxiliary composite
    Gauss rule, refined until the coefficients stabilize.
    """
    if N < 1:
        raise ConfigError("need at least one chain site")
    window = FrequencyWindow(omega_c)
    if window_integral(spec, window) <= 0.0:
        raise BreakdownError("Gamma vanishes on the window; no chain exists")
    breakpoints = [x for x in quadrature_breakpoints(spec) if -omega_c < x < omega_c]
    n_points = max(40 * N, 200)
    prev = None
    for _ in range(12):
        x, wq = composite_gauss_rule(-omega_c, omega_c, n_points, breakpoints)
        w = wq * np.asarray(eval_gamma(spec, x))
        alpha, beta = _discrete_stieltjes(x, w, N)
        if prev is not None:
            da = np.max(np.abs(alpha - prev[0]))
            db = np.max(np.abs(beta - prev[1]))
            if max(da, db) < 1e-11 * max(1.0, omega_c):
                break
        prev = (alpha, beta)
        n_points *= 2
    b = np.sqrt(beta[1:])
    return alpha, b


def gauss_rule(alpha: np.ndarray, b: np.ndarray) -> GaussRule:
    """Gauss nodes and weights from the Jacobi matrix (Golub-Welsch)."""
    alpha = np.asarray(alpha, dtype=float)
    b = np.asarray(b, dtype=float)
    if alpha.size == 1:
        return GaussRule((float(alpha[0]),), (1.0,))
    evals, evecs = eigh_tridiagonal(alpha, b)
    gaps = np.diff(evals)
    if np.any(gaps <= 1e-13 * max(1.0, float(np.max(np.abs(evals))))):
        raise BreakdownError("degenerate Jacobi spectrum; Gauss weights undefined")
    weights = evecs[0, :] ** 2
    weights = weights / np.sum(weights)
    return GaussRule(tuple(evals), tuple(weights))


def build_chain(spec: CouplingSpec, omega_c: float, N: int, n_max: int = 1) -> ChainModel:
    """Assemble the N-site chain with injection strength eta."""
    window = FrequencyWindow(omega_c)
    mass = window_integral(spec, window)
    if mass <= 0.0:
        raise BreakdownError("Gamma vanishes on the window; no chain exists")
    alpha, b = recurrence_coefficients(spec, omega_c, N)
    return ChainModel(omega_c, tuple(alpha), tuple(b), float(np.sqrt(mass)), n_max)


def _orthonormal_polys(
    x: np.ndarray, alpha: np.ndarray, b: np.ndarray, N: int
) -> np.ndarray:
    """Values q_i(x), i=0..N-1, of polynomials orthonormal w.r.t. the
    normalized measure, from the monic recurrence coefficients."""
    out = np.empty((N,) + x.shape)
    out[0] = 1.0
    if N > 1:
        out[1] = (x - alpha[0]) / b[0]
    for i in range(2, N):
        out[i] = ((x - alpha[i - 1]) * out[i - 1] - b[i - 2] * out[i - 2]) / b[i - 1]
    return out


def commutator_delta_b(spec: CouplingSpec, omega_c: float, N: int, s: float) -> float:
    """Exact commutator of the injection-mode mismatch at delay s.

    delta B(s) is the difference between the continuum evolution of the
    injection mode and its N-site chain evolution.  The commutator
    [delta B(s), delta B(s)^dagger] equals the positive quadratic form

        int_{-omega_c}^{omega_c} Gamma(w) |D(w, s)|^2 dw,

    with D(w, s) = e^{-iws} - sum_j w_j K_N(w, W_j) e^{-iW_j s} the residual
    after filtering through the rank-N Christoffel-Darboux kernel K_N and the
    N-point Gauss rule (W_j, w_j).  Evaluating the positive form avoids the
    catastrophic cancellation of the expanded difference of large terms.
    """
    if s < 0:
        raise ConfigError("commutator defined for s >= 0")
    alpha, b = recurrence_coefficients(spec, omega_c, N)
    return commutator_delta_b_given(spec, omega_c, alpha, b, s)


def commutator_delta_b_given(
    spec: CouplingSpec, omega_c: float, alpha: np.ndarray, b: np.ndarray, s: float
) -> float:
    """Same as :func:`commutator_delta_b` with precomputed recurrence
    coefficients, for sweeps over many delays."""
    N = len(alpha)
    rule = gauss_rule(alpha, b)
    nodes = np.asarray(rule.nodes)
    weights = np.asarray(rule.weights)
    q_nodes = _orthonormal_polys(nodes, alpha, b, N)  # (N, N)
    # coefficients of the chain-filtered phase: c_i = sum_j w_j q_i(W_j) e^{-i W_j s}
    coeff = q_nodes @ (weights * np.exp(-1j * nodes * s))  # (N,)

    def integrand(w):
        q = _orthonormal_polys(w, alpha, b, N)  # (N, len(w))
        filtered = np.tensordot(coeff, q, axes=(0, 0))
        d = np.exp(-1j * w * s) - filtered
        return np.asarray(eval_gamma(spec, w)) * np.abs(d) ** 2

    breakpoints = [x for x in quadrature_breakpoints(spec) if -omega_c < x < omega_c]
    # Oscillation scale ~ max(s, N)/omega_c; seed panels accordingly.
    n_seed = int(8 * max(2.0, s * omega_c, N))
    seed = list(np.linspace(-omega_c, omega_c, n_seed)[1:-1])
    val = adaptive_quad(
        integrand, -omega_c, omega_c,
        rel_tol=1e-10, abs_tol=1e-15, breakpoints=breakpoints + seed, max_panels=16384,
    )
    return float(np.real(val))


def commutator_grid(
    spec: CouplingSpec,
    omega_c: float,
    N: int,
    s_values: np.ndarray,
    n_points: int = 8000,
) -> np.ndarray:
    """Truncation commutator on a grid of delays, via one shared fixed
    composite rule.  Much faster than per-delay adaptive quadrature; used
    for sup-over-s certificate evaluation."""
    s_values = np.asarray(s_values, dtype=float)
    alpha, b = recurrence_coefficients(spec, omega_c, N)
    rule = gauss_rule(alpha, b)
    nodes = np.asarray(rule.nodes)
    weights = np.asarray(rule.weights)
    q_nodes = _orthonormal_polys(nodes, alpha, b, N)  # (N, N)
    phases = np.exp(-1j * np.outer(nodes, s_values))  # (N, S)
    coeff = q_nodes @ (weights[:, None] * phases)  # (N, S)

    breakpoints = [x for x in quadrature_breakpoints(spec) if -omega_c < x < omega_c]
    x, wq = composite_gauss_rule(-omega_c, omega_c, n_points, breakpoints)
    gam = wq * np.asarray(eval_gamma(spec, x))
    q_x = _orthonormal_polys(x, alpha, b, N)  # (N, Q)
    direct = np.exp(-1j * np.outer(x, s_values))  # (Q, S)
    d = direct - q_x.T @ coeff
    return gam @ (np.abs(d) ** 2)


# --- JSON serialization -----------------------------------------------------

def chain_to_json(cm: ChainModel) -> dict:
    return {
        "omega_c": cm.omega_c,
        "alpha": list(cm.alpha),
        "b": list(cm.b),
        "eta": cm.eta,
        "n_max": cm.n_max,
    }


def chain_from_json(data: dict) -> ChainModel:
    return ChainModel(
        float(data["omega_c"]),
        tuple(data["alpha"]),
        tuple(data["b"]),
        float(data["eta"]),
        int(data["n_max"]),
    )


def gauss_rule_to_json(rule: GaussRule) -> dict:
    return {"nodes": list(rule.nodes), "weights": list(rule.weights)}


def gauss_rule_from_json(data: dict) -> GaussRule:
    return GaussRule(tuple(data["nodes"]), tuple(data["weights"]))
