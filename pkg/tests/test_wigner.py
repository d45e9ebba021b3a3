import numpy as np
import pytest
from sympy import Rational
from sympy.physics.wigner import wigner_3j as sympy_3j

from srumetrology import spin
from srumetrology.errors import RangeError
from srumetrology.wigner import (
    SphericalGrid,
    multipole_coefficients,
    multipole_operator,
    wigner3j,
    wigner_at,
    wigner_function,
    wigner_multipole,
    wigner_raw,
)


def _sym(x):
    return Rational(int(round(2 * x)), 2)


def _random_symbols(seed, n, j=40):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        k = int(rng.integers(0, 2 * j + 1))
        m1 = int(rng.integers(-j, j + 1))
        q = int(rng.integers(-k, k + 1))
        m3 = -m1 - q
        if abs(m3) <= j:
            out.append((j, k, j, m1, q, m3))
    return out


@pytest.mark.parametrize("args", [(1, 1, 1, 1, -1, 0), (0.5, 0.5, 1, 0.5, -0.5, 0), (2, 3, 1, 1, -2, 1),
                                  (1.5, 2.5, 3, -0.5, 1.5, -1)])
def test_3j_small(args):
    ref = float(sympy_3j(*[_sym(a) for a in args]))
    assert wigner3j(*args) == pytest.approx(ref, abs=1e-15)


@pytest.mark.parametrize("args", _random_symbols(7, 3) + [(40, 60, 40, -10, 0, 10)])
def test_3j_at_spin_40_matches_exact(args):
    ref = float(sympy_3j(*args))
    assert wigner3j(*args) == pytest.approx(ref, rel=1e-14, abs=1e-300)


def test_3j_log_path_is_close_but_less_accurate():
    for args in _random_symbols(8, 5):
        exact = wigner3j(*args)
        assert wigner3j(*args, exact=False) == pytest.approx(exact, rel=1e-6, abs=1e-12)
    assert wigner3j(3, 2, 1, 1, 0, -1, exact=False) == pytest.approx(wigner3j(3, 2, 1, 1, 0, -1), rel=1e-12)


def test_3j_selection_rules():
    assert wigner3j(1, 1, 1, 1, 1, 0) == 0.0
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0  # odd sum with all m = 0
    with pytest.raises(ValueError):
        wigner3j(1, 1, 1, 0.3, 0, -0.3)


@pytest.mark.parametrize("S", [0.5, 1.5, 2])
def test_multipoles_orthonormal(S):
    d = int(2 * S + 1)
    ops = [multipole_operator(S, k, q) for k in range(d) for q in range(-k, k + 1)]
    G = np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])
    np.testing.assert_allclose(G, np.eye(d * d), atol=1e-12)


def test_multipole_operator_range():
    with pytest.raises(RangeError):
        multipole_operator(1, 3, 0)
    with pytest.raises(RangeError):
        multipole_operator(1, 1, 2)


def _random_state(S, seed):
    rng = np.random.default_rng(seed)
    d = int(2 * S + 1)
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def test_multipole_completeness():
    psi = _random_state(2.5, 1)
    rebuilt = sum(c * multipole_operator(2.5, k, q) for (k, q), c in multipole_coefficients(psi, 2.5).items())
    np.testing.assert_allclose(rebuilt, np.outer(psi, psi.conj()), atol=1e-12)


@pytest.mark.parametrize("S", [1, 2.5, 4])
def test_kernel_form_matches_multipole_sum(S):
    psi = _random_state(S, 2)
    rng = np.random.default_rng(3)
    th, ph = rng.uniform(0, np.pi, 30), rng.uniform(0, 2 * np.pi, 30)
    direct = wigner_multipole(psi, S, th, ph)
    assert np.max(np.abs(direct.imag)) < 1e-12
    raw = np.array([wigner_raw(psi, S, t, f)[0, 0] for t, f in zip(th, ph)])
    np.testing.assert_allclose(raw, direct.real, atol=1e-12)


def test_mixed_state_is_weighted_sum():
    a, b = _random_state(2, 4), _random_state(2, 5)
    rho = 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj())
    w = wigner_raw(rho, 2, [0.4, 1.2], [0.1, 2.0])
    np.testing.assert_allclose(w, 0.3 * wigner_raw(a, 2, [0.4, 1.2], [0.1, 2.0]) + 0.7 * wigner_raw(b, 2, [0.4, 1.2], [0.1, 2.0]),
                               atol=1e-12)


def test_grid_weights_and_integral():
    g = SphericalGrid(41, 80)
    assert g.weights.sum() == pytest.approx(4 * np.pi)
    assert np.all(np.diff(g.theta) > 0)
    _, _, w, _ = wigner_function(_random_state(3, 6), 3, g)
    assert g.integrate(w) == pytest.approx(1, abs=1e-10)
    with pytest.raises(RangeError):
        SphericalGrid(1, 10)


def test_coherent_state_peak_location():
    g = SphericalGrid(61, 120)
    th, ph, w, _ = wigner_function(spin.coherent_state(6, np.pi / 3, np.pi / 2), 6, g)
    i, j = np.unravel_index(np.argmax(w), w.shape)
    assert abs(th[i] - np.pi / 3) <= np.pi / 60
    assert abs(ph[j] - np.pi / 2) <= 2 * np.pi / 120


def test_wigner_at_matches_grid():
    psi = _random_state(2, 9)
    g = SphericalGrid(7, 8)
    th, ph, w, _ = wigner_function(psi, 2, g)
    assert wigner_at(psi, 2, [th[3]], [ph[5]])[0] == pytest.approx(w[3, 5])


def test_dimension_mismatch():
    with pytest.raises(RangeError):
        wigner_raw(np.ones(4), 2, [0.1], [0.1])
