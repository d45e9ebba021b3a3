from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srumetrology import protocols, spin
from srumetrology.errors import (
    AxisMismatch,
    FiniteDifferenceInconsistent,
    GammaTooSmall,
    PhaseAlignmentFailed,
    SingularFisherMatrix,
)
from srumetrology.metrology import bounds, closed, compat, qfi
from srumetrology.metrology.superchannel import superchannel_max, superchannel_qfi, superchannel_qfi_general


# --- finite-difference engine ---------------------------------------------------

def test_fd_derivative_of_phase_rotation():
    S = 3
    v0 = spin.scs_x(S).vec
    sz = spin.sz_operator(S)
    fam = lambda t: np.exp(1j * t * np.diag(sz).real) * v0
    d = qfi.derivative_fd(fam, 0.3)
    psi = fam(0.3)
    # parallel gauge: <psi|d> = 0 and d is the projected i Sz psi
    assert abs(np.vdot(psi, d)) < 1e-10
    ref = 1j * sz @ psi
    ref -= np.vdot(psi, ref) * psi
    np.testing.assert_allclose(d, ref, atol=1e-9)


def test_fd_rejects_bad_step():
    with pytest.raises(ValueError):
        qfi.derivative_fd(lambda t: spin.scs_x(1).vec, 0.0, h=0.5)


def test_fd_detects_inconsistent_family():
    rng = np.random.default_rng(0)
    noise = lambda t: np.array([1.0, 1e-3 * rng.normal()], complex) / np.hypot(1, 1e-3)
    with pytest.raises(FiniteDifferenceInconsistent):
        qfi.derivative_fd(noise, 0.0)


def test_fd_detects_phase_alignment_failure():
    w = np.pi / 2 / 1e-3  # orthogonal to the reference one step away
    fam = lambda t: np.array([np.cos(w * t), np.sin(w * t)], complex)
    with pytest.raises(PhaseAlignmentFailed):
        qfi.derivative_fd(fam, 0.0, h=1e-3, check=False)


def test_gauge_invariance():
    fam = lambda g: protocols.sru1_state(2, g, 0.0, 1.0)
    dressed = lambda g: np.exp(1j * 3.7 * g ** 2) * fam(g).vec
    assert qfi.numeric_qfi(fam, 0.4) == pytest.approx(qfi.numeric_qfi(dressed, 0.4), abs=1e-8)


def test_sld_normalization_and_matrix_verify():
    fam = lambda t: protocols.sru2_two_rotations(1.5, 1, t[0], 0.3, t[1], 0.9, 0.8)
    Q = qfi.numeric_qfi_matrix(fam, [0.2, 0.1], labels=("g1", "g2"), verify=True)
    psi = fam(np.array([0.2, 0.1])).vec
    d = qfi.partial_derivatives(fam, [0.2, 0.1])
    L = qfi.sld_pure(psi, d[0])
    rho = np.outer(psi, psi.conj())
    assert np.trace(rho @ L @ L).real == pytest.approx(Q.I[0, 0], rel=1e-10)
    assert Q.labels == ("g1", "g2") and Q.det == pytest.approx(np.linalg.det(Q.I))
    assert np.all(np.linalg.eigvalsh(Q.I) > -1e-10)


# --- derivative oracle from the amplitude expansion ----------------------------------

def _amplitudes(SM, SP, g, P, mu, deriv=False):
    """Explicit two-spin amplitudes and their gamma-derivative, formula angle P."""
    out = []
    c, s = np.cos(g / 2), np.sin(g / 2)
    for j2 in range(int(2 * SM), -int(2 * SM) - 1, -2):
        j = j2 / 2
        for k2 in range(int(2 * SP), -int(2 * SP) - 1, -2):
            k = k2 / 2
            t = P - k * mu
            w = np.sqrt(comb(int(2 * SM), int(SM - j)) * comb(int(2 * SP), int(SP - k))) / 2 ** (SM + SP)
            w *= (c + np.exp(1j * t) * s) ** (SM + j) * (c - np.exp(-1j * t) * s) ** (SM - j)
            if deriv:
                w *= (j * np.cos(k * mu - P) - SM * (np.sin(g) + 1j * np.cos(g) * np.sin(k * mu - P))) / (
                    np.cos(g) - 1j * np.sin(g) * np.sin(k * mu - P))
            out.append(w)
    return np.array(out)


@pytest.mark.parametrize("P, mu", [(0.3, 0.4), (1.1, 2.0), (2.5, 5.1)])
def test_derivative_matches_amplitude_expansion(P, mu):
    SM, SP, g = 2, 1.5, 0.3
    gen = closed.to_formula_axis("sru2_gamma", P)
    fam = lambda x: protocols.sru2_state(SM, SP, x, gen, mu)
    a, da = _amplitudes(SM, SP, g, P, mu), _amplitudes(SM, SP, g, P, mu, deriv=True)
    psi = fam(g).vec
    assert abs(np.vdot(a, psi)) == pytest.approx(1, abs=1e-12)
    d = qfi.derivative_fd(fam, g)
    # the FD result is the parallel-gauge projection of the analytic derivative
    np.testing.assert_allclose(d, da - np.vdot(psi, da) * psi, atol=1e-7)
    assert qfi.qfi_pure(a, da) == pytest.approx(qfi.qfi_pure(psi, d), rel=1e-7)


# --- closed forms -----------------------------------------------------------------------

def test_axis_convention_is_pinned():
    assert closed.AXIS_CONVENTION == {
        "sru2_gamma": "reflect",
        "sru1_gamma": "identity",
        "axis": "reflect",
        "offdiag": "identity",
        "sru2_amplitudes": "reflect",
    }
    assert closed.to_formula_axis("sru2_gamma", 0.2) == pytest.approx(np.pi / 2 - 0.2)
    assert closed.to_formula_axis("offdiag", 0.2) == 0.2


def test_convention_fit_recovers_pinned_maps():
    rng = np.random.default_rng(11)
    pts = [(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)) for _ in range(8)]
    fits = {
        "sru2_gamma": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_sru2_gamma(2, 1.5, p, m),
                                                 lambda p, m: closed.numeric_qfi_sru2_gamma(2, 1.5, p, m), pts),
        "sru1_gamma": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_sru1_gamma(2.5, p, m),
                                                 lambda p, m: closed.numeric_qfi_sru1_gamma(2.5, p, m), pts),
        "axis": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_axis(2, 1.5, p, m),
                                           lambda p, m: closed.numeric_qfi_axis(2, 1.5, p, m), pts),
    }
    for kind, (winner, resid) in fits.items():
        assert winner == closed.AXIS_CONVENTION[kind]
        assert resid[winner] < 1e-7


def test_printed_single_spin_formula_fits_no_map():
    rng = np.random.default_rng(12)
    pts = [(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)) for _ in range(8)]
    _, resid = closed.fit_axis_convention(lambda p, m: closed.closed_qfi_sru1_gamma_printed(2.5, p, m),
                                          lambda p, m: closed.numeric_qfi_sru1_gamma(2.5, p, m), pts)
    assert min(resid.values()) > 1.0


@given(st.integers(1, 6), st.integers(1, 6), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
@settings(max_examples=25, deadline=None)
def test_two_spin_closed_vs_numeric(tm, tp, phi, mu):
    c = closed.closed_qfi_sru2_gamma(tm / 2, tp / 2, closed.to_formula_axis("sru2_gamma", phi), mu)
    assert c == pytest.approx(closed.numeric_qfi_sru2_gamma(tm / 2, tp / 2, phi, mu), rel=1e-7, abs=1e-7)


@given(st.integers(1, 16), st.floats(0, np.pi), st.floats(0, 2 * np.pi))
@settings(max_examples=25, deadline=None)
def test_single_spin_closed_vs_numeric(tw, phi, mu):
    c = closed.closed_qfi_sru1_gamma(tw / 2, phi, mu)
    assert c == pytest.approx(closed.numeric_qfi_sru1_gamma(tw / 2, phi, mu), rel=1e-7, abs=1e-7)


def test_physical_matrix_matches_numeric():
    rng = np.random.default_rng(5)
    for _ in range(5):
        SM, SP = rng.integers(1, 6, 2) / 2
        p1, p2, mu = rng.uniform(0, np.pi), rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        N = closed.numeric_qfi_two_rotations(SM, SP, p1, p2, mu)
        C = closed.closed_qfi_matrix(SM, SP, p1, p2, mu, physical=True)
        np.testing.assert_allclose(C.I, N.I, atol=1e-7 * max(1, np.max(np.abs(C.I))))


def test_half_turn_axis_qfi():
    assert closed.closed_qfi_axis_half_turn(2.5) == 20
    assert closed.numeric_qfi_axis(2.5, 1, 0.3, 1.2, gamma=np.pi) == pytest.approx(20, abs=1e-7)


@pytest.mark.parametrize("S", [0.5, 1, 1.5, 2, 3, 5])
def test_mu_max_is_dense_grid_maximum(S):
    locs, val = closed.mu_max(S)
    grid = np.linspace(0, 2 * np.pi, 400001)
    f = np.sin(grid / 2) ** 2 * np.cos(grid / 2) ** (4 * S - 2)
    assert val == pytest.approx(f.max(), abs=1e-9)
    assert min(abs(np.asarray(locs) - grid[np.argmax(f)])) < 1e-4


def test_mu_max_half_spin():
    locs, val = closed.mu_max(0.5)
    assert list(locs) == pytest.approx([np.pi]) and val == pytest.approx(1)


# --- bounds -------------------------------------------------------------------------------

def test_variance_bounds_are_inverse_diagonal():
    I = np.array([[3.0, 1.0], [1.0, 2.0]])
    vb = bounds.variance_bounds(I)
    inv = np.linalg.inv(I)
    assert vb.var_g1 == pytest.approx(inv[0, 0]) and vb.var_g2 == pytest.approx(inv[1, 1])
    assert vb.info_g1 == pytest.approx(1 / inv[0, 0])


def test_singular_and_mismatch():
    with pytest.raises(SingularFisherMatrix):
        bounds.variance_bounds(np.array([[2.0, 2.0], [2.0, 2.0]]))
    with pytest.raises(AxisMismatch):
        bounds.rot_diff_bounds(np.eye(2), 0.1, 0.2)


def test_rot_diff_never_exceeds_saturation():
    for S1, S2 in [(1, 2), (1.5, 2.5), (2, 2)]:  # same parity: both optimal on one axis
        best = max(bounds.rot_diff_bounds(closed.closed_qfi_matrix(S1, S2, p, p, np.pi, physical=True))[0]
                   for p in (0.0, np.pi / 2))
        assert best <= 4 * S1 * S2 + 1e-9
        assert best == pytest.approx(8 * S1 ** 2 * S2 ** 2 / (S1 ** 2 + S2 ** 2), rel=1e-9)


# --- SLD compatibility ----------------------------------------------------------------------

def test_b_operators_generate_rotation_derivative():
    S, g, phi = 2, 0.7, 0.4
    Bx, By = compat.b_operators(S, g, phi)
    sx, sy, _ = spin.spin_operators(S)
    from scipy.linalg import expm

    U = lambda gx, gy: expm(1j * (gx * sx + gy * sy))
    gx, gy, h = g * np.cos(phi), g * np.sin(phi), 1e-6
    dUx = (U(gx + h, gy) - U(gx - h, gy)) / (2 * h)
    np.testing.assert_allclose(dUx, 1j * Bx @ U(gx, gy), atol=1e-8)
    comm = Bx @ By - By @ Bx
    b = compat.b_comm(g, phi, S, 0.3)
    _, _, sz = spin.spin_operators(S)
    np.testing.assert_allclose(comm, b.a_x * sx + b.a_y * sy + b.a_z * sz, atol=1e-12)


def test_b_comm_limit_and_guard():
    S = 1.5
    comm = lambda g: (lambda B: B[0] @ B[1] - B[1] @ B[0])(compat.b_operators(S, g, 0.3))
    np.testing.assert_allclose(comm(1e-6), compat.b_comm_limit(S), atol=1e-5)
    with pytest.raises(GammaTooSmall):
        compat.b_comm(1e-10, 0.3, S, 0.2)


def test_sign_map_has_both_signs():
    m = compat.sld_sign_map(1, np.pi / 2, np.linspace(0.2, 3, 5), np.linspace(0, 2 * np.pi, 12, endpoint=False))
    assert m.shape == (5, 12)
    for row in m:
        assert (row > 0).any() and (row < 0).any()


# --- superchannel -----------------------------------------------------------------------------

def test_superchannel_ansatz_and_general_agree():
    a = superchannel_qfi(4, 0.3, 0.2, 0.5)
    psi2 = np.array([1, np.exp(0.2j)]) / np.sqrt(2)
    u2 = np.array([[0, np.exp(-0.5j)], [np.exp(0.5j), 0]])
    assert superchannel_qfi_general(4, 0.3, psi2, u2) == pytest.approx(a)
    assert a == pytest.approx(64)


def test_superchannel_search_is_bounded():
    r = superchannel_max(2, restarts=4, seed=1)
    assert r.bound == 16 and r.best_search <= 16 + 1e-6 and r.ansatz_qfi == pytest.approx(16)
