import numpy as np
import pytest

from bathmodes.errors import ConfigError
from bathmodes.pseudomode import (
    PseudomodeModel,
    _xi,
    _xi_d,
    fit_from_json,
    fit_l1_error,
    fit_lorentzians,
    fit_to_json,
    fit_to_spec,
    lorentz_l1_error_bound,
    pseudomode_from_json,
    pseudomode_to_json,
    pseudomode_to_spec,
    select_parameters,
    to_pseudomode,
)
from bathmodes.spectral import (
    Flat,
    FrequencyWindow,
    LorentzianSum,
    Tabulated,
    eval_gamma,
)

LOR = LorentzianSum((1.0,), (0.0,), (2.0,))


def test_fit_geometry():
    fit = fit_lorentzians(LOR, 2.0, 0.1, 5)
    assert fit.n_modes == 5
    assert fit.spacing == 1.0
    assert np.allclose(fit.nodes, [-2.0, -1.0, 0.0, 1.0, 2.0])
    expected = (0.1 * 1.0 / np.pi) * np.asarray(eval_gamma(LOR, np.asarray(fit.nodes)))
    assert np.allclose(fit.heights, expected)
    with pytest.raises(ConfigError):
        fit_lorentzians(LOR, 2.0, 0.1, 1)
    with pytest.raises(ConfigError):
        fit_lorentzians(LOR, 2.0, -0.1, 4)


def test_fit_spec_and_mode_density_agree():
    fit = fit_lorentzians(LOR, 2.0, 0.1, 5)
    hat = fit_to_spec(fit)
    pm = to_pseudomode(fit, 1)
    # the comb density and the damped-mode density are the same object
    back = pseudomode_to_spec(pm)
    w = np.linspace(-3.0, 3.0, 101)
    assert np.allclose(eval_gamma(hat, w), eval_gamma(back, w))
    assert all(k == 2 * fit.kappa for k in pm.decays)


def test_pseudomode_validation():
    with pytest.raises(ConfigError):
        PseudomodeModel((0.0,), (1.0,), (0.0,), 1)
    with pytest.raises(ConfigError):
        PseudomodeModel((0.0,), (1.0, 2.0), (1.0,), 1)
    with pytest.raises(ConfigError):
        PseudomodeModel((0.0,), (1.0,), (1.0,), 0)


def test_xi_values_and_monotonicity():
    xs = np.array([1e-1, 1e-2, 1e-3])
    vals = _xi(xs)
    assert np.allclose(vals, [0.254378, 0.040110, 0.005476], rtol=1e-3)
    assert vals[0] > vals[1] > vals[2] > 0
    assert np.all(_xi_d(xs) > 0)
    assert _xi_d(1e-2) < _xi_d(1e-1)


def test_schedule_flat_fallback():
    kappa, omega_c = select_parameters(Flat(1.0), 32)
    assert abs(kappa - 32.0**-0.25) < 1e-14
    assert abs(omega_c - (32.0**0.2) ** (1.0 / 3.0)) < 1e-12


def test_schedule_root_for_linear_slope():
    # Gamma = w^2/2 tabulated densely: sup |Gamma'| over [-wc, wc] is wc, so
    # the window equation wc^4 = M^(1/5) gives wc = 2 at M = 16^5
    grid = np.linspace(-4.0, 4.0, 8193)
    spec = Tabulated(tuple(grid), tuple(grid**2 / 2.0))
    kappa, omega_c = select_parameters(spec, 16**5)
    assert abs(omega_c - 2.0) < 1e-3
    assert abs(kappa - float(16**5) ** -0.25) < 1e-14
    with pytest.raises(ConfigError):
        select_parameters(spec, 1)


def test_l1_bound_parts_positive_and_kappa_monotone():
    parts = lorentz_l1_error_bound(LOR, 2.0, 0.1, 21)
    assert all(p > 0 for p in parts)
    # more modes shrink the discretization term only
    finer = lorentz_l1_error_bound(LOR, 2.0, 0.1, 41)
    assert finer[1] < parts[1]
    assert finer[0] == parts[0]


def test_measured_error_decreases_with_m():
    errs = []
    for M in (11, 41):
        fit = fit_lorentzians(LOR, 2.0, 0.05, M)
        errs.append(fit_l1_error(LOR, fit))
    assert errs[1] < errs[0]


def test_json_round_trips():
    fit = fit_lorentzians(LOR, 2.0, 0.1, 5)
    assert fit_from_json(fit_to_json(fit)) == fit
    pm = to_pseudomode(fit, 2)
    assert pseudomode_from_json(pseudomode_to_json(pm)) == pm
