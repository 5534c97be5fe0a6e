"""Spectral densities Gamma(omega) = |v(omega)|^2 of bosonic environments.

Four coupling families are supported: sums of Lorentzians, flat (frequency
independent) couplings, finite sums of harmonics (retardation models), and
tabulated data with linear interpolation and zero extension.  Only Gamma
matters for the reduced dynamics of a vacuum-start environment, so Gamma is
the stored object everywhere except for the harmonic family, whose
modulus-square has cross terms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import (
    ConfigError,
    DivergentIntegralError,
    MarkovianKernelError,
    UnsupportedKernelError,
)
from .quadrature import adaptive_quad, adaptive_quad_infinite


@dataclass(frozen=True)
class FrequencyWindow:
    """Symmetric frequency window [-omega_c, omega_c]."""

    omega_c: float

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ConfigError(f"omega_c must be positive, got {self.omega_c}")


@dataclass(frozen=True)
class LorentzianSum:
    """Gamma(w) = sum_i V_i / ((w - w_i)^2 + kappa_i^2 / 4)."""

    strengths: tuple[float, ...]
    centers: tuple[float, ...]
    widths: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "strengths", tuple(float(x) for x in self.strengths))
        object.__setattr__(self, "centers", tuple(float(x) for x in self.centers))
        object.__setattr__(self, "widths", tuple(float(x) for x in self.widths))
        if not len(self.strengths) == len(self.centers) == len(self.widths):
            raise ConfigError("lorentzian parameter lists must have equal length")
        if any(v < 0 for v in self.strengths):
            raise ConfigError("lorentzian strengths must be nonnegative")
        if any(k <= 0 for k in self.widths):
            raise ConfigError("lorentzian widths must be positive")


@dataclass(frozen=True)
class Flat:
    """Frequency-independent coupling v(w) = v0; Gamma = |v0|^2 everywhere."""

    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "amplitude", float(self.amplitude))


@dataclass(frozen=True)
class HarmonicSum:
    """v(w) = sum_i V_i exp(i w tau_i); stores v itself, Gamma has cross terms."""

    amplitudes: tuple[complex, ...]
    delays: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(complex(x) for x in self.amplitudes))
        object.__setattr__(self, "delays", tuple(float(x) for x in self.delays))
        if len(self.amplitudes) != len(self.delays):
            raise ConfigError("harmonic amplitude/delay lists must have equal length")


@dataclass(frozen=True)
class Tabulated:
    """Linear interpolation of sampled Gamma values, zero outside the grid."""

    omega: tuple[float, ...]
    gamma: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "omega", tuple(float(x) for x in self.omega))
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        if len(self.omega) != len(self.gamma):
            raise ConfigError("tabulated grids and values must have equal length")
        if len(self.omega) < 2:
            raise ConfigError("tabulated spec needs at least two grid points")
        grid = np.asarray(self.omega)
        if not np.all(np.diff(grid) > 0):
            raise ConfigError("tabulated grid must be strictly increasing")
        if any(g < 0 for g in self.gamma):
            raise ConfigError("tabulated Gamma values must be nonnegative")
        # cache array views; rebuilding them per evaluation dominates runtime
        object.__setattr__(self, "_grid", grid)
        object.__setattr__(self, "_vals", np.asarray(self.gamma))

    @property
    def grid_array(self) -> np.ndarray:
        return self._grid

    @property
    def values_array(self) -> np.ndarray:
        return self._vals


CouplingSpec = Union[LorentzianSum, Flat, HarmonicSum, Tabulated]


def is_square_integrable(spec: CouplingSpec) -> bool:
    if isinstance(spec, Flat):
        return spec.amplitude == 0.0
    if isinstance(spec, HarmonicSum):
        return all(a == 0 for a in spec.amplitudes)
    return isinstance(spec, (LorentzianSum, Tabulated))


def eval_gamma(spec: CouplingSpec, omega) -> np.ndarray:
    """Evaluate Gamma(omega); accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    if isinstance(spec, LorentzianSum):
        out = np.zeros_like(w)
        for v, c, k in zip(spec.strengths, spec.centers, spec.widths):
            out = out + v / ((w - c) ** 2 + k * k / 4.0)
        return out if out.shape else float(out)
    if isinstance(spec, Flat):
        out = np.full_like(w, abs(spec.amplitude) ** 2)
        return out if out.shape else float(out)
    if isinstance(spec, HarmonicSum):
        acc = np.zeros(w.shape, dtype=complex)
        for amp, tau in zip(spec.amplitudes, spec.delays):
            acc = acc + amp * np.exp(1j * w * tau)
        out = np.abs(acc) ** 2
        return out if out.shape else float(out)
    if isinstance(spec, Tabulated):
        out = np.interp(w, spec.grid_array, spec.values_array, left=0.0, right=0.0)
        return out if out.shape else float(out)
    raise TypeError(f"unknown coupling spec {type(spec)!r}")


def _gamma_derivative(spec: CouplingSpec, omega) -> np.ndarray:
    """dGamma/domega, analytic except for the tabulated interpolant."""
    w = np.asarray(omega, dtype=float)
    if isinstance(spec, LorentzianSum):
        out = np.zeros_like(w)
        for v, c, k in zip(spec.strengths, spec.centers, spec.widths):
            out = out - 2.0 * v * (w - c) / ((w - c) ** 2 + k * k / 4.0) ** 2
        return out
    if isinstance(spec, Flat):
        return np.zeros_like(w)
    if isinstance(spec, HarmonicSum):
        # Gamma = sum_ij V_i V_j* exp(i w (tau_i - tau_j))
        acc = np.zeros(w.shape, dtype=complex)
        for ai, ti in zip(spec.amplitudes, spec.delays):
            for aj, tj in zip(spec.amplitudes, spec.delays):
                acc = acc + 1j * (ti - tj) * ai * np.conj(aj) * np.exp(1j * w * (ti - tj))
        return acc.real
    if isinstance(spec, Tabulated):
        grid = spec.grid_array
        vals = spec.values_array
        slopes = np.diff(vals) / np.diff(grid)
        idx = np.clip(np.searchsorted(grid, w) - 1, 0, len(slopes) - 1)
        out = slopes[idx]
        out = np.where((w < grid[0]) | (w > grid[-1]), 0.0, out)
        return out
    raise TypeError(f"unknown coupling spec {type(spec)!r}")


def quadrature_breakpoints(spec: CouplingSpec) -> list[float]:
    """Frequencies where the integrand needs panel edges (peak structure)."""
    if isinstance(spec, LorentzianSum):
        pts = []
        for c, k in zip(spec.centers, spec.widths):
            pts.extend([c - 2 * k, c - k / 2, c, c + k / 2, c + 2 * k])
        return pts
    if isinstance(spec, Tabulated):
        # dense grids would explode the panel count; thin to a coarse skeleton
        # and let adaptive splitting resolve the rest
        if len(spec.omega) <= 65:
            return list(spec.omega)
        idx = np.unique(np.linspace(0, len(spec.omega) - 1, 65).astype(int))
        return [spec.omega[i] for i in idx]
    return []


def _scan_and_refine(f, lo: float, hi: float, n_grid: int = 2048) -> float:
    """Maximize f over [lo, hi]: dense scan followed by local refinement."""
    grid = np.linspace(lo, hi, n_grid)
    vals = f(grid)
    best = float(np.max(vals))
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, n_grid - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -f(np.asarray(x)), bounds=(a, b), method="bounded")
        best = max(best, float(-res.fun))
    return best


def sup_v(spec: CouplingSpec, window: FrequencyWindow | None = None) -> float:
    """sup of |v| = sqrt(Gamma) over the window (or the whole line)."""
    if window is None:
        if isinstance(spec, Flat):
            return abs(spec.amplitude)
        if isinstance(spec, LorentzianSum):
            # Peak lies near the centers; scan a window covering all terms.
            span = max(
                (abs(c) + 3 * k for c, k in zip(spec.centers, spec.widths)), default=1.0
            )
            return float(np.sqrt(_scan_and_refine(lambda w: eval_gamma(spec, w), -span, span)))
        if isinstance(spec, HarmonicSum):
            # |v| is (quasi-)periodic; scan several beat periods.
            taus = [t for t in spec.delays if t != 0.0]
            span = 8 * max((2 * np.pi / abs(t) for t in taus), default=1.0)
            return float(
                np.sqrt(_scan_and_refine(lambda w: eval_gamma(spec, w), -span, span, 8192))
            )
        if isinstance(spec, Tabulated):
            raise ConfigError("unbounded sup_v undefined for tabulated specs; pass a window")
    wc = window.omega_c
    if isinstance(spec, Flat):
        return abs(spec.amplitude)
    if isinstance(spec, Tabulated):
        # Extremes of the interpolant sit on grid points inside the window.
        grid = np.asarray(spec.omega)
        candidates = [eval_gamma(spec, -wc), eval_gamma(spec, wc)]
        inside = grid[(grid >= -wc) & (grid <= wc)]
        if inside.size:
            candidates.append(float(np.max(eval_gamma(spec, inside))))
        return float(np.sqrt(max(candidates)))
    return float(np.sqrt(_scan_and_refine(lambda w: eval_gamma(spec, w), -wc, wc)))


def gamma_derivative_max(spec: CouplingSpec, window: FrequencyWindow) -> float:
    """sup over the window of |dGamma/domega|."""
    wc = window.omega_c
    if isinstance(spec, Flat):
        return 0.0
    if isinstance(spec, Tabulated):
        grid = np.asarray(spec.omega)
        slopes = np.abs(np.diff(np.asarray(spec.gamma)) / np.diff(grid))
        mask = (grid[1:] > -wc) & (grid[:-1] < wc)
        return float(np.max(slopes[mask])) if np.any(mask) else 0.0
    return _scan_and_refine(lambda w: np.abs(_gamma_derivative(spec, w)), -wc, wc, 4096)


def window_integral(spec: CouplingSpec, window: FrequencyWindow) -> float:
    """Integral of Gamma over [-omega_c, omega_c]."""
    wc = window.omega_c
    if isinstance(spec, LorentzianSum):
        total = 0.0
        for v, c, k in zip(spec.strengths, spec.centers, spec.widths):
            total += (2.0 * v / k) * (
                np.arctan((wc - c) / (k / 2)) + np.arctan((wc + c) / (k / 2))
            )
        return total
    if isinstance(spec, Flat):
        return 2.0 * wc * abs(spec.amplitude) ** 2
    val = adaptive_quad(
        lambda w: eval_gamma(spec, w), -wc, wc,
        rel_tol=1e-12, breakpoints=quadrature_breakpoints(spec),
    )
    return float(np.real(val))


def full_integral(spec: CouplingSpec) -> float:
    """Integral of Gamma over the whole line; raises if divergent."""
    if isinstance(spec, LorentzianSum):
        return sum(2.0 * np.pi * v / k for v, k in zip(spec.strengths, spec.widths))
    if isinstance(spec, Tabulated):
        return float(np.trapezoid(spec.gamma, spec.omega))
    raise DivergentIntegralError(f"{type(spec).__name__} coupling is not square integrable")


def tail_integral(spec: CouplingSpec, window: FrequencyWindow) -> float:
    """Integral of Gamma over |omega| >= omega_c; raises DivergentIntegralError
    for flat and harmonic couplings."""
    wc = window.omega_c
    if isinstance(spec, LorentzianSum):
        return max(full_integral(spec) - window_integral(spec, window), 0.0)
    if isinstance(spec, Tabulated):
        grid = np.asarray(spec.omega)
        if wc >= grid[-1] and -wc <= grid[0]:
            return 0.0
        # Clip the interpolant to the tails and integrate the trapezoids.
        pts = np.unique(np.concatenate([grid, [-wc, wc]]))
        pts = pts[(pts <= -wc) | (pts >= wc)]
        left = pts[pts <= -wc]
        right = pts[pts >= wc]
        total = 0.0
        for seg in (left, right):
            if seg.size >= 2:
                total += float(np.trapezoid(eval_gamma(spec, seg), seg))
        return total
    raise DivergentIntegralError(
        f"{type(spec).__name__} coupling has a divergent tail; use the harmonic-class bound"
    )


def l1_gamma_distance(
    spec1: CouplingSpec,
    spec2: CouplingSpec,
    window: FrequencyWindow | None = None,
) -> float:
    """Integral of |Gamma_1 - Gamma_2|, over a window or the whole line."""
    if spec1 == spec2:
        return 0.0
    if window is None:
        if not (is_square_integrable(spec1) and is_square_integrable(spec2)):
            raise DivergentIntegralError(
                "unbounded L1 distance requires both couplings square integrable"
            )

    def diff(w):
        return eval_gamma(spec1, w) - eval_gamma(spec2, w)

    breakpoints = quadrature_breakpoints(spec1) + quadrature_breakpoints(spec2)
    if window is not None:
        wc = window.omega_c
        lo, hi = -wc, wc
    else:
        spans = [abs(x) for x in breakpoints] + [1.0]
        lo, hi = -max(spans) - 1.0, max(spans) + 1.0

    # Bracket sign changes of the difference so |.| stays smooth per panel.
    scan = np.linspace(lo, hi, 4097)
    vals = diff(scan)
    roots = []
    sign_flip = np.where(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    for i in sign_flip:
        roots.append(brentq(lambda x: diff(np.asarray(x)), scan[i], scan[i + 1]))
    breakpoints = breakpoints + roots

    if window is not None:
        val = adaptive_quad(
            lambda w: np.abs(diff(w)), lo, hi, rel_tol=1e-10, breakpoints=breakpoints
        )
    else:
        val = adaptive_quad_infinite(
            lambda w: np.abs(diff(w)), rel_tol=1e-10, breakpoints=breakpoints
        )
    return float(np.real(val))


def memory_kernel(spec: CouplingSpec, tau: float) -> complex:
    """K(tau) = integral of Gamma(omega) exp(-i omega tau) domega, tau >= 0.

    Closed form for Lorentzian sums, exact piecewise-linear Fourier sum for
    tabulated specs.  Flat couplings have a delta kernel and raise
    MarkovianKernelError; harmonic sums are distributional and unsupported.
    """
    if tau < 0:
        raise ConfigError("memory kernel defined for tau >= 0")
    if isinstance(spec, Flat):
        raise MarkovianKernelError("flat coupling has K proportional to delta(tau)")
    if isinstance(spec, HarmonicSum):
        raise UnsupportedKernelError("harmonic-sum kernel is distributional")
    if isinstance(spec, LorentzianSum):
        total = 0.0 + 0.0j
        for v, c, k in zip(spec.strengths, spec.centers, spec.widths):
            total += (2.0 * np.pi * v / k) * np.exp(-1j * c * tau) * np.exp(-k * tau / 2.0)
        return total
    if isinstance(spec, Tabulated):
        return _tabulated_kernel(spec, np.asarray([tau]))[0]
    raise TypeError(f"unknown coupling spec {type(spec)!r}")


def memory_kernel_grid(spec: CouplingSpec, taus: np.ndarray) -> np.ndarray:
    """Vectorized memory kernel on a grid of nonnegative delays."""
    taus = np.asarray(taus, dtype=float)
    if isinstance(spec, LorentzianSum):
        out = np.zeros(taus.shape, dtype=complex)
        for v, c, k in zip(spec.strengths, spec.centers, spec.widths):
            out += (2.0 * np.pi * v / k) * np.exp(-(1j * c + k / 2.0) * taus)
        return out
    if isinstance(spec, Tabulated):
        return _tabulated_kernel(spec, taus)
    raise UnsupportedKernelError(f"no pointwise kernel for {type(spec).__name__}")


def _sinc_pair(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Stable evaluation of sin(x)/x and (x cos x - sin x)/x^2."""
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    s0 = np.where(small, 1.0 - x * x / 6.0, np.sin(xs) / xs)
    s1 = np.where(small, -x / 3.0 + x**3 / 30.0, (xs * np.cos(xs) - np.sin(xs)) / xs**2)
    return s0, s1


def _tabulated_kernel(spec: Tabulated, taus: np.ndarray) -> np.ndarray:
    """Exact Fourier transform of the piecewise-linear interpolant."""
    grid = spec.grid_array
    vals = spec.values_array
    mid = 0.5 * (grid[1:] + grid[:-1])  # (S,)
    half = 0.5 * np.diff(grid)
    gmid = 0.5 * (vals[1:] + vals[:-1])
    slope = np.diff(vals) / np.diff(grid)
    t = taus[:, None]  # (T, 1)
    x = t * half[None, :]
    s0, s1 = _sinc_pair(x)
    # integral over segment: e^{-i mid t} * [2 h g s0(x) + 2 i h^2 slope s1(x)]
    seg = np.exp(-1j * mid[None, :] * t) * (
        2.0 * half[None, :] * gmid[None, :] * s0
        + 2.0j * half[None, :] ** 2 * slope[None, :] * s1
    )
    return np.sum(seg, axis=1)


def windowed_tabulated(
    spec: CouplingSpec, window: FrequencyWindow, n_points: int = 4097
) -> Tabulated:
    """Sample Gamma * rect_{omega_c} onto a dense tabulated spec."""
    grid = np.linspace(-window.omega_c, window.omega_c, n_points)
    return Tabulated(tuple(grid), tuple(np.maximum(eval_gamma(spec, grid), 0.0)))


# --- JSON serialization -----------------------------------------------------

def spec_to_json(spec: CouplingSpec) -> dict:
    if isinstance(spec, LorentzianSum):
        return {
            "type": "lorentzian_sum",
            "strengths": list(spec.strengths),
            "centers": list(spec.centers),
            "widths": list(spec.widths),
        }
    if isinstance(spec, Flat):
        return {"type": "flat", "amplitude": spec.amplitude}
    if isinstance(spec, HarmonicSum):
        return {
            "type": "harmonic_sum",
            "amplitudes": [[a.real, a.imag] for a in spec.amplitudes],
            "delays": list(spec.delays),
        }
    if isinstance(spec, Tabulated):
        return {"type": "tabulated", "omega": list(spec.omega), "gamma": list(spec.gamma)}
    raise TypeError(f"unknown coupling spec {type(spec)!r}")


def spec_from_json(data: dict) -> CouplingSpec:
    try:
        kind = data["type"]
    except (KeyError, TypeError):
        raise ConfigError("coupling spec must carry a 'type' field")
    if kind == "lorentzian_sum":
        return LorentzianSum(
            tuple(data["strengths"]), tuple(data["centers"]), tuple(data["widths"])
        )
    if kind == "flat":
        return Flat(data["amplitude"])
    if kind == "harmonic_sum":
        amps = tuple(complex(re, im) for re, im in data["amplitudes"])
        return HarmonicSum(amps, tuple(data["delays"]))
    if kind == "tabulated":
        return Tabulated(tuple(data["omega"]), tuple(data["gamma"]))
    raise ConfigError(f"unknown coupling spec type {kind!r}")
