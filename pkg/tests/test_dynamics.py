import numpy as np
import pytest

from bathmodes.chainmap import build_chain
from bathmodes.dynamics import (
    SystemModel,
    chain_evolve,
    lindblad_evolve,
    partial_trace,
    trace_distance,
    validate_density,
    volterra_oracle,
)
from bathmodes.errors import ConfigError, DimensionCapError
from bathmodes.pseudomode import PseudomodeModel
from bathmodes.spectral import FrequencyWindow, LorentzianSum, windowed_tabulated


def _qubit(lam=1.0):
    L = np.zeros((2, 2), dtype=complex)
    L[0, 1] = lam
    return SystemModel(2, ((0.0, np.zeros((2, 2))),), L)


def _excited():
    rho = np.zeros((2, 2), dtype=complex)
    rho[1, 1] = 1.0
    return rho


def test_trace_distance_basics():
    rho1 = np.diag([1.0, 0.0]).astype(complex)
    rho2 = np.diag([0.0, 1.0]).astype(complex)
    assert abs(trace_distance(rho1, rho2) - 2.0) < 1e-14
    assert trace_distance(rho1, rho1) == 0.0
    with pytest.raises(ConfigError):
        trace_distance(rho1, np.eye(3))


def test_partial_trace_product_state():
    rho_s = np.array([[0.75, 0.1j], [-0.1j, 0.25]])
    env = np.diag([0.5, 0.5]).astype(complex)
    joint = np.kron(rho_s, env)
    assert np.allclose(partial_trace(joint, 2, 2), rho_s)
    psi = np.kron(np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    red = partial_trace(psi, 2, 2)
    assert np.allclose(red, np.diag([1.0, 0.0]))
    with pytest.raises(ConfigError):
        partial_trace(psi, 3, 2)


def test_validate_density():
    with pytest.raises(ConfigError):
        validate_density(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ConfigError):
        validate_density(np.diag([0.7, 0.7]))
    with pytest.raises(ConfigError):
        validate_density(np.diag([1.5, -0.5]))
    validate_density(np.diag([0.5, 0.5]))


def test_system_model_validation():
    with pytest.raises(ConfigError):
        SystemModel(2, ((0.0, np.array([[0.0, 1.0], [0.0, 0.0]])),), np.zeros((2, 2)))
    with pytest.raises(ConfigError):
        SystemModel(2, ((1.0, np.zeros((2, 2))),), np.zeros((2, 2)))
    with pytest.raises(ConfigError):
        SystemModel(2, ((0.0, np.zeros((2, 2))),), np.zeros((3, 3)))
    sm = SystemModel(
        2, ((0.0, np.zeros((2, 2))), (1.0, np.eye(2))), np.zeros((2, 2))
    )
    assert np.allclose(sm.hamiltonian_at(0.5), 0.0)
    assert np.allclose(sm.hamiltonian_at(1.5), np.eye(2))


def test_single_damped_mode_matches_closed_form():
    # one resonant mode: u(t) solves u'' + (kappa/2) u' + g^2 u = 0
    g, kappa = 0.8, 1.4
    pm = PseudomodeModel((0.0,), (g,), (kappa,), 1)
    traj = lindblad_evolve(_qubit(), pm, _excited(), 4.0, 1e-3)
    # underdamped closed form for the excited amplitude
    mu = kappa / 4.0
    nu = np.sqrt(g * g - mu * mu)
    t = traj.times
    u = np.exp(-mu * t) * (np.cos(nu * t) + (mu / nu) * np.sin(nu * t))
    assert np.max(np.abs(traj.states[:, 1, 1].real - u**2)) < 1e-6


def test_dense_and_reduced_paths_agree():
    pm = PseudomodeModel((0.3, -0.5), (0.6, 0.4), (1.0, 0.7), 1)
    dense = lindblad_evolve(_qubit(), pm, _excited(), 2.0, 1e-3)
    reduced = lindblad_evolve(_qubit(), pm, _excited(), 2.0, 1e-3, dim_cap=4)
    assert dense.metadata["path"] == "dense"
    assert reduced.metadata["path"] == "single_excitation"
    worst = max(
        trace_distance(a, b) for a, b in zip(dense.states, reduced.states)
    )
    assert worst < 1e-9


def test_dimension_cap_rejection():
    pm = PseudomodeModel((0.0,), (0.5,), (1.0,), 3)
    H = np.diag([0.0, 1.0, 2.0])
    L = np.zeros((3, 3), dtype=complex)
    L[0, 1] = 1.0
    L[1, 2] = 1.0  # two entries: no single-excitation structure
    sm = SystemModel(3, ((0.0, H),), L)
    rho = np.zeros((3, 3), dtype=complex)
    rho[2, 2] = 1.0
    with pytest.raises(DimensionCapError):
        lindblad_evolve(sm, pm, rho, 1.0, 0.01, dim_cap=4)


def test_leakage_warning_on_tight_fock_cap():
    # strong drive into a single mode with n_max=1 must flag the top level
    pm = PseudomodeModel((0.0,), (2.0,), (0.1,), 1)
    traj = lindblad_evolve(_qubit(), pm, _excited(), 3.0, 1e-3)
    assert traj.metadata["leakage_peak"] > 1e-6
    assert "warning" in traj.metadata


def test_chain_evolution_preserves_norm_and_coherences():
    spec = LorentzianSum((0.5,), (0.0,), (2.0,))
    cm = build_chain(spec, 2.0, 3)
    init = np.array([1.0, 1.0]) / np.sqrt(2.0)
    traj = chain_evolve(_qubit(), cm, init, 2.0, 1e-3)
    norms = np.array([np.trace(r).real for r in traj.states])
    assert np.max(np.abs(norms - 1.0)) < 1e-10
    herm = max(float(np.max(np.abs(r - r.conj().T))) for r in traj.states)
    assert herm < 1e-12
    with pytest.raises(ConfigError):
        chain_evolve(_qubit(), cm, np.array([1.0, 1.0]), 1.0, 0.01)


def test_chain_matches_oracle_on_windowed_density():
    # with the density supported entirely inside the window, a deep enough
    # chain reproduces the exact reduced dynamics to integrator accuracy
    spec = windowed_tabulated(
        LorentzianSum((0.5,), (0.0,), (2.0,)), FrequencyWindow(4.0), 2049
    )
    cm = build_chain(spec, 4.0, 8)
    traj = chain_evolve(_qubit(), cm, np.array([0.0, 1.0]), 1.0, 5e-4)
    oracle = volterra_oracle(_qubit(), spec, 1.0, 1e-4)
    assert trace_distance(traj.states[-1], oracle.states[-1]) < 1e-4


def test_oracle_preconditions():
    sm = _qubit()
    spec = LorentzianSum((0.5,), (0.0,), (2.0,))
    bad_init = np.diag([0.0, 0.0, 1.0]).astype(complex)
    with pytest.raises(ConfigError):
        volterra_oracle(sm, spec, 1.0, 0.01, bad_init)
    L2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    sm2 = SystemModel(2, ((0.0, np.zeros((2, 2))),), L2)
    with pytest.raises(ConfigError):
        volterra_oracle(sm2, spec, 1.0, 0.01)
    # default initial state is the fully excited one
    traj = volterra_oracle(sm, spec, 0.5, 0.01)
    assert abs(traj.states[0][1, 1] - 1.0) < 1e-14


def test_step_validation():
    pm = PseudomodeModel((0.0,), (0.5,), (1.0,), 1)
    with pytest.raises(ConfigError):
        lindblad_evolve(_qubit(), pm, _excited(), -1.0, 0.01)
    with pytest.raises(ConfigError):
        lindblad_evolve(_qubit(), pm, _excited(), 1.0, 0.0)
