import numpy as np

from bathmodes.quadrature import (
    adaptive_quad,
    adaptive_quad_infinite,
    composite_gauss_rule,
)


def test_polynomial_exactness():
    # degree-15 polynomial is exact for the 20-point panels
    coeffs = np.arange(1.0, 17.0)
    val = adaptive_quad(lambda x: np.polyval(coeffs, x), -1.0, 3.0)
    exact = np.polyval(np.polyint(coeffs), 3.0) - np.polyval(np.polyint(coeffs), -1.0)
    assert abs(val - exact) < 1e-12 * abs(exact)


def test_kink_with_breakpoint():
    val = adaptive_quad(np.abs, -1.0, 2.0, breakpoints=[0.0])
    assert abs(val - 2.5) < 1e-12


def test_oscillatory_integrand():
    val = adaptive_quad(lambda x: np.cos(40.0 * x), 0.0, np.pi)
    assert abs(val - np.sin(40.0 * np.pi) / 40.0) < 1e-10


def test_infinite_gaussian():
    val = adaptive_quad_infinite(lambda x: np.exp(-(x**2)))
    assert abs(val - np.sqrt(np.pi)) < 1e-10


def test_infinite_lorentzian_with_breakpoints():
    val = adaptive_quad_infinite(
        lambda x: 1.0 / ((x - 3.0) ** 2 + 1.0), breakpoints=[2.0, 3.0, 4.0]
    )
    assert abs(val - np.pi) < 1e-9


def test_composite_rule_mass_and_moments():
    x, w = composite_gauss_rule(-2.0, 5.0, 300, breakpoints=[0.0, 1.0])
    assert abs(np.sum(w) - 7.0) < 1e-12
    assert abs(np.dot(w, x**7) - (5.0**8 - 2.0**8) / 8.0) < 1e-9
    assert x.size >= 300
