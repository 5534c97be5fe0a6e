"""Pseudomode surrogates: Lorentzian-comb fits of a windowed spectral density
and their damped-mode Lindblad realization.

The fit places M equispaced Lorentzians of half-width kappa on the window
[-omega_c, omega_c], with heights sampled from Gamma.  Each Lorentzian maps
to one damped bosonic mode, so the surrogate environment is Markovian.  An
explicit a-priori bound on the L1 distance between Gamma restricted to the
window and the fit is available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, ConfigError
from .quadrature import adaptive_quad
from .spectral import (
    CouplingSpec,
    FrequencyWindow,
    LorentzianSum,
    eval_gamma,
    full_integral,
    gamma_derivative_max,
    quadrature_breakpoints,
    sup_v,
    window_integral,
)


@dataclass(frozen=True)
class LorentzianFit:
    """Equispaced Lorentzian comb approximating Gamma on [-omega_c, omega_c].

    The induced density is Gammahat(w) = sum_n h_n / ((w - w_n)^2 + kappa^2)
    with nodes w_n = -omega_c + (n-1) delta, delta = 2 omega_c / (M-1).
    """

    omega_c: float
    kappa: float
    nodes: tuple[float, ...]
    heights: tuple[float, ...]

    @property
    def n_modes(self) -> int:
        return len(self.nodes)

    @property
    def spacing(self) -> float:
        return 2.0 * self.omega_c / (len(self.nodes) - 1)


@dataclass(frozen=True)
class PseudomodeModel:
    """Damped bosonic modes (omega_i, g_i, kappa_i) with a Fock cap."""

    omegas: tuple[float, ...]
    couplings: tuple[float, ...]
    decays: tuple[float, ...]
    n_max: int

    def __post_init__(self):
        if not len(self.omegas) == len(self.couplings) == len(self.decays):
            raise ConfigError("pseudomode parameter lists must have equal length")
        if any(k <= 0 for k in self.decays):
            raise ConfigError("pseudomode decay rates must be positive")
        if self.n_max < 1:
            raise ConfigError("fock truncation must be at least 1")

    @property
    def n_modes(self) -> int:
        return len(self.omegas)


def fit_lorentzians(spec: CouplingSpec, omega_c: float, kappa: float, M: int) -> LorentzianFit:
    """Sample Gamma at M equispaced nodes spanning the window."""
    if M < 2:
        raise ConfigError("need at least 2 Lorentzians; the node spacing is undefined for M=1")
    if kappa <= 0 or omega_c <= 0:
        raise ConfigError("kappa and omega_c must be positive")
    delta = 2.0 * omega_c / (M - 1)
    nodes = -omega_c + delta * np.arange(M)
    heights = (kappa * delta / np.pi) * np.asarray(eval_gamma(spec, nodes))
    return LorentzianFit(omega_c, kappa, tuple(nodes), tuple(heights))


def fit_to_spec(fit: LorentzianFit) -> LorentzianSum:
    """The comb as a coupling spec; h/((w-w_n)^2 + kappa^2) has width 2 kappa."""
    return LorentzianSum(fit.heights, fit.nodes, (2.0 * fit.kappa,) * fit.n_modes)


def select_parameters(spec: CouplingSpec, M: int) -> tuple[float, float]:
    """Width and window schedule: kappa = M^(-1/4) and omega_c solving
    omega_c^3 * sup|Gamma'| = M^(1/5), with the flat-density fallback
    omega_c^3 = M^(1/5) when Gamma has no slope anywhere."""
    if M < 2:
        raise ConfigError("schedule needs M >= 2")
    kappa = float(M) ** -0.25
    target = float(M) ** 0.2

    def f5(wc: float) -> float:
        return wc**3 * gamma_derivative_max(spec, FrequencyWindow(wc))

    if f5(1.0) == 0.0 and f5(8.0) == 0.0:
        return kappa, target ** (1.0 / 3.0)

    lo, hi = 0.5, 1.0
    for _ in range(200):
        if f5(hi) >= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise BracketError("f5 never reaches the target; Gamma slope decays too fast")
    for _ in range(200):
        if f5(lo) <= target:
            break
        hi, lo = lo, 0.5 * lo
    else:
        raise BracketError("f5 exceeds the target at arbitrarily small windows")
    omega_c = brentq(lambda wc: f5(wc) - target, lo, hi, xtol=1e-12)
    return kappa, float(omega_c)


def _xi(x: np.ndarray | float) -> np.ndarray | float:
    """Window-edge smoothing loss of the Cauchy kernel, per unit window."""
    return (4.0 / np.pi) * np.arctan(x / 2.0) + (x / np.pi) * np.log1p(4.0 / x**2)


def _xi_d(x: np.ndarray | float) -> np.ndarray | float:
    """Slope-weighted smoothing loss of the Cauchy kernel."""
    return 4.0 * x * np.log1p(4.0 / x**2) - 4.0 * x + 4.0 * x * np.arctan(2.0 / x)


def lorentz_l1_error_bound(
    spec: CouplingSpec, omega_c: float, kappa: float, M: int
) -> tuple[float, float, float]:
    """A-priori bound components (smoothing, discretization, tails) on the L1
    distance between Gamma restricted to the window and the comb fit."""
    if M < 2:
        raise ConfigError("bound defined for M >= 2")
    window = FrequencyWindow(omega_c)
    gamma_max = sup_v(spec, window) ** 2
    gamma_d_max = gamma_derivative_max(spec, window)
    x = kappa / omega_c
    smoothing = omega_c * gamma_max * _xi(x) + omega_c**2 * gamma_d_max * _xi_d(x)
    discretization = (2.0 * omega_c**3 / (np.pi * (M - 1))) * (
        gamma_d_max / kappa + (3.0 * np.sqrt(3.0) / 8.0) * gamma_max / kappa**2
    )
    delta = 2.0 * omega_c / (M - 1)
    n = np.arange(1, M)
    tails = delta * gamma_max + (2.0 * delta * gamma_max / np.pi) * float(
        np.sum(np.arctan(kappa / (n * delta)))
    )
    return float(smoothing), float(discretization), float(tails)


def fit_l1_error(spec: CouplingSpec, fit: LorentzianFit, rel_tol: float = 1e-8) -> float:
    """Measured integral of |Gamma rect - Gammahat| over the whole line.

    Inside the window the difference is integrated adaptively with sign
    brackets; outside, Gamma rect vanishes so the contribution is the comb's
    own tail mass, known in closed form.
    """
    hat = fit_to_spec(fit)
    wc = fit.omega_c

    def diff(w):
        return eval_gamma(spec, w) - eval_gamma(hat, w)

    scan = np.linspace(-wc, wc, 8193)
    vals = diff(scan)
    roots = []
    flips = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in flips:
        roots.append(brentq(lambda x: diff(np.asarray(x)), scan[i], scan[i + 1]))
    breakpoints = list(fit.nodes) + quadrature_breakpoints(spec) + roots
    inside = adaptive_quad(
        lambda w: np.abs(diff(w)), -wc, wc,
        rel_tol=rel_tol, abs_tol=1e-14, breakpoints=breakpoints, max_panels=16384,
    )
    hat_tail = full_integral(hat) - window_integral(hat, FrequencyWindow(wc))
    return float(np.real(inside)) + max(float(hat_tail), 0.0)


def to_pseudomode(fit: LorentzianFit, n_max: int = 1) -> PseudomodeModel:
    """One damped mode per comb node.

    The comb term h/((w-w_n)^2 + kappa^2) equals a mode of decay rate
    2 kappa and coupling sqrt(2 pi h / (2 kappa)), since a damped mode of
    decay kappa_i contributes (kappa_i/2pi) g^2 / ((w-w_i)^2 + kappa_i^2/4).
    """
    decays = np.full(fit.n_modes, 2.0 * fit.kappa)
    couplings = np.sqrt(2.0 * np.pi * np.asarray(fit.heights) / decays)
    return PseudomodeModel(tuple(fit.nodes), tuple(couplings), tuple(decays), n_max)


def pseudomode_to_spec(pm: PseudomodeModel) -> LorentzianSum:
    """Effective spectral density of the damped modes."""
    strengths = tuple(
        (k / (2.0 * np.pi)) * g * g for g, k in zip(pm.couplings, pm.decays)
    )
    return LorentzianSum(strengths, pm.omegas, pm.decays)


# --- JSON serialization -----------------------------------------------------

def pseudomode_to_json(pm: PseudomodeModel) -> dict:
    return {
        "modes": [
            {"omega": w, "g": g, "kappa": k}
            for w, g, k in zip(pm.omegas, pm.couplings, pm.decays)
        ],
        "n_max": pm.n_max,
    }


def pseudomode_from_json(data: dict) -> PseudomodeModel:
    modes = data["modes"]
    return PseudomodeModel(
        tuple(m["omega"] for m in modes),
        tuple(m["g"] for m in modes),
        tuple(m["kappa"] for m in modes),
        int(data["n_max"]),
    )


def fit_to_json(fit: LorentzianFit) -> dict:
    return {
        "omega_c": fit.omega_c,
        "kappa": fit.kappa,
        "nodes": list(fit.nodes),
        "heights": list(fit.heights),
    }


def fit_from_json(data: dict) -> LorentzianFit:
    return LorentzianFit(
        float(data["omega_c"]),
        float(data["kappa"]),
        tuple(data["nodes"]),
        tuple(data["heights"]),
    )
