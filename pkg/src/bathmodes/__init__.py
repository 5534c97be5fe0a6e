"""Discrete-mode surrogates for non-Markovian bosonic Gaussian environments.

Build pseudomode (Lindblad) or chain (Hamiltonian) surrogates from a
spectral density, simulate the reduced system dynamics, and evaluate
explicit a-priori error certificates.
"""

from .bounds import (
    BoundContext,
    chain_truncation_bound,
    coupling_replacement_bound,
    cutoff_error_sq_int,
    g_factor,
    harmonic_cutoff_V,
    xi_bound,
)
from .chainmap import (
    ChainModel,
    GaussRule,
    build_chain,
    commutator_delta_b,
    gauss_rule,
    recurrence_coefficients,
)
from .dynamics import (
    SystemModel,
    TrajectoryResult,
    chain_evolve,
    lindblad_evolve,
    partial_trace,
    trace_distance,
    volterra_oracle,
)
from .errors import (
    BathmodesError,
    BracketError,
    BreakdownError,
    ConfigError,
    DimensionCapError,
    DivergentIntegralError,
    MarkovianKernelError,
    UnsupportedKernelError,
)
from .pseudomode import (
    LorentzianFit,
    PseudomodeModel,
    fit_l1_error,
    fit_lorentzians,
    lorentz_l1_error_bound,
    select_parameters,
    to_pseudomode,
)
from .spectral import (
    CouplingSpec,
    Flat,
    FrequencyWindow,
    HarmonicSum,
    LorentzianSum,
    Tabulated,
    eval_gamma,
    gamma_derivative_max,
    l1_gamma_distance,
    memory_kernel,
    sup_v,
    tail_integral,
    window_integral,
)

__version__ = "0.1.0"
