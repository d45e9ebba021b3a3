"""Invariant suite behind ``srumetro validate``."""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import fock, protocols, spin, sweeps
from .spin import oat_phases
from .metrology import bounds, closed, compat, qfi
from .metrology.superchannel import superchannel_qfi
from .wigner import SphericalGrid, multipole_coefficients, multipole_operator, wigner_function, wigner_multipole


@dataclass(frozen=True)
class Check:
    name: str
    tol: float
    measured: float
    passed: bool
    counted: bool = True


class _Suite:
    def __init__(self):
        self.checks: List[Check] = []

    def upto(self, name: str, measured: float, tol: float):
        """Pass when measured deviation <= tol."""
        m = float(measured)
        self.checks.append(Check(name, tol, m, bool(m <= tol)))

    def note(self, name: str, measured: float):
        self.checks.append(Check(name, math.nan, float(measured), True, counted=False))

    def run(self, name: str, fn: Callable[[], None]):
        try:
            fn()
        except Exception as exc:  # a crashing check is a failing check
            self.checks.append(Check(f"{name}: raised {type(exc).__name__}: {exc}", math.nan, math.nan, False))


@contextmanager
def _flipped_convention(kind: str):
    saved = closed.AXIS_CONVENTION[kind]
    closed.AXIS_CONVENTION[kind] = "identity" if saved != "identity" else "reflect"
    try:
        yield
    finally:
        closed.AXIS_CONVENTION[kind] = saved


def run_checks(seed: int = 0, inject: Optional[str] = None) -> List[Check]:
    """Run every invariant at desk scale; ``inject='convention'`` flips one axis map."""
    if inject not in (None, "convention"):
        raise ValueError(f"unknown fault injection {inject!r}")
    rng = np.random.default_rng(seed)
    suite = _Suite()
    if inject == "convention":
        with _flipped_convention("sru2_gamma"):
            _all(suite, rng)
    else:
        _all(suite, rng)
    return suite.checks


def _all(suite: _Suite, rng: np.random.Generator):
    for name, fn in [("output", _output), ("spin", _spin), ("protocols", _protocols), ("metrology", _metrology),
                     ("bounds", _bounds), ("compat", _compat), ("fock", _fock), ("wigner", _wigner)]:
        suite.run(name, lambda fn=fn: fn(suite, rng))


def _output(s: _Suite, rng):
    from .cli import render

    args = (2, 1, np.linspace(0, 2 * np.pi, 5), np.linspace(0, np.pi, 3))
    h, serial = sweeps.qfi_surface_rows(*args, jobs=1)
    _, parallel = sweeps.qfi_surface_rows(*args, jobs=2)
    _, again = sweeps.qfi_surface_rows(*args, jobs=1)
    a, b, c = (render(h, rows, "csv") for rows in (serial, parallel, again))
    s.upto("output: serial, parallel and repeated sweeps are byte-identical (mismatches)",
           int(a != b) + int(a != c), 0)


def _spin(s: _Suite, rng):
    worst_h = worst_u = 0.0
    for S in (0.5, 1, 2.5, 7):
        A = spin.spin_axis_operator(S, rng.uniform(0, 2 * np.pi))
        worst_h = max(worst_h, np.max(np.abs(A - A.conj().T)))
        for U in (spin.rotation(S, rng.uniform(0, 6), rng.uniform(0, 6)), spin.oat_squeeze(S, rng.uniform(0, 6))):
            worst_u = max(worst_u, np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    U2 = spin.two_spin_squeeze(5, 3, rng.uniform(0, 6))
    worst_u = max(worst_u, np.max(np.abs(U2.conj().T @ U2 - np.eye(U2.shape[0]))))
    s.upto("spin: S(phi) hermitian", worst_h, 1e-12)
    states = [spin.coherent_state(2.5, 0.3, 1.1), spin.scs_x(7), spin.basis_state(3, -1),
              protocols.sru1_state(4, 0.3, 0.2, 0.9), protocols.sru2_state(2, 1.5, 0.4, 0.1, 2.2),
              protocols.sru2_two_rotations(1, 2, 0.3, 0.2, 0.5, 1.0, 0.7), protocols.sru1_two_axis(3, 0.4, 0.5, 0.6)]
    s.upto("spin: constructors give unit-norm states", max(abs(np.linalg.norm(v.vec) - 1) for v in states), 1e-12)
    s.upto("spin: rotations and squeezers unitary", worst_u, 1e-12)

    worst = 0.0
    for _ in range(20):
        S = rng.integers(1, 13) / 2
        th, ph = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        sx, sy, sz = spin.spin_operators(S)
        n_op = np.sin(th) * (np.cos(ph) * sx + np.sin(ph) * sy) + np.cos(th) * sz
        v = spin.coherent_state(S, th, ph).vec
        worst = max(worst, np.linalg.norm(n_op @ v - S * v))
    s.upto("spin: coherent state is top eigenvector of n.S", worst, 1e-10)

    worst1 = worst2 = 0.0
    for S in (1, 1.5, 3, 4.5):
        for _ in range(3):
            mu, phi = rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
            v = spin.oat_phases(S, mu) * spin.scs_x(S).vec
            A = spin.spin_axis_operator(S, phi)
            e1 = spin.expectation(A, v)
            e2 = spin.expectation(A @ A, v)
            worst1 = max(worst1, abs(e1 - S * np.cos(phi) * np.cos(mu) ** (2 * S - 1)))
            ref2 = S * (2 * S - 1) / 4 * np.cos(2 * phi) * np.cos(2 * mu) ** (2 * S - 2) + S * (2 * S + 1) / 4
            worst2 = max(worst2, abs(e2 - ref2))
    s.upto("spin: <S(phi)> on squeezed X state", worst1, 1e-10)
    s.upto("spin: <S(phi)^2> on squeezed X state", worst2, 1e-10)


def _protocols(s: _Suite, rng):
    worst = 0.0
    for SM, SP in ((1, 1), (1.5, 2), (3, 0.5)):
        mu = rng.uniform(0, 4 * np.pi)
        v = protocols.sru2_state(SM, SP, 0.0, rng.uniform(0, np.pi), mu)
        worst = max(worst, 1 - spin.fidelity(v, protocols.double_scs_x(SM, SP)))
    s.upto("protocols: gamma = 0 is the identity", worst, 1e-12)

    worst = 0.0
    for SM, SP, period in ((2, 1, 2 * np.pi), (1.5, 1, 4 * np.pi), (2, 1.5, 4 * np.pi)):
        g, p, mu = rng.uniform(0, 3, 3)
        a = protocols.sru2_state(SM, SP, g, p, mu)
        b = protocols.sru2_state(SM, SP, g, p, mu + period)
        worst = max(worst, 1 - spin.fidelity(a, b))
    s.upto("protocols: mu periodicity (2pi integer, 4pi one half-integer)", worst, 1e-10)

    worst = 0.0
    for SM in (2, 2.5):
        hi = closed.numeric_qfi_sru2_gamma(SM, 1, 0.0, np.pi)
        lo = closed.numeric_qfi_sru2_gamma(SM, 1, np.pi / 2, np.pi)
        worst = max(worst, abs(hi - 4 * SM ** 2), abs(lo - 2 * SM))
    s.upto("protocols: mu = pi, X axis 4S_M^2 and Y axis 2S_M (generator angles)", worst, 1e-8)

    worst = 0.0
    for S in (2, 3, 1.5, 2.5):
        for phi in (0.0, np.pi / 2):
            g = rng.uniform(0, 2)
            b = protocols.branches_to_state(S, protocols.sru1_max_closed(S, g, phi))
            worst = max(worst, abs(1 - spin.fidelity(b, protocols.sru1_state(S, g, phi, np.pi / 2))))
    s.upto("protocols: mu = pi/2 branch decompositions", worst, 1e-10)

    worst = 0.0
    for S in (2, 3, 2.5):
        qx = qfi.numeric_qfi(lambda g: protocols.sru1_state(S, g, 0.0, np.pi / 2), 0.3)
        qy = qfi.numeric_qfi(lambda g: protocols.sru1_state(S, g, np.pi / 2, np.pi / 2), 0.3)
        hi, lo = (qx, qy) if float(S).is_integer() else (qy, qx)
        worst = max(worst, abs(hi - 4 * S * S), abs(lo - 2 * S))
    s.upto("protocols: single spin at mu = pi/2 has one enhanced and one plain axis", worst, 1e-8)

    worst = 0.0
    for _ in range(5):
        g, p, mu = rng.uniform(0, 2 * np.pi, 3)
        a = protocols.sru2_closed_amplitudes(2, 1.5, g, p, mu).ravel()
        worst = max(worst, np.max(np.abs(a - protocols.sru2_state(2, 1.5, g, p, mu).vec)))
    s.upto("protocols: closed amplitude expansion", worst, 1e-12)


def _metrology(s: _Suite, rng):
    def rel(c, n):
        return abs(c - n) / max(1.0, abs(c))

    worst = 0.0
    for _ in range(12):
        SM, SP = rng.integers(1, 9, 2) / 2
        phi, mu = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        c = closed.closed_qfi_sru2_gamma(SM, SP, closed.to_formula_axis("sru2_gamma", phi), mu)
        worst = max(worst, rel(c, closed.numeric_qfi_sru2_gamma(SM, SP, phi, mu)))
    s.upto("phi-convention: two-spin gamma QFI closed vs numeric", worst, 1e-7)

    worst = 0.0
    for _ in range(12):
        S = rng.integers(1, 17) / 2
        phi, mu = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        c = closed.closed_qfi_sru1_gamma(S, closed.to_formula_axis("sru1_gamma", phi), mu)
        worst = max(worst, rel(c, closed.numeric_qfi_sru1_gamma(S, phi, mu)))
    s.upto("phi-convention: single-spin gamma QFI closed vs numeric", worst, 1e-7)

    worst = 0.0
    for _ in range(8):
        SM, SP = rng.integers(1, 9, 2) / 2
        phi, mu = rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        c = closed.closed_qfi_axis(SM, SP, closed.to_formula_axis("axis", phi), mu)
        worst = max(worst, rel(c, closed.numeric_qfi_axis(SM, SP, phi, mu)))
    s.upto("phi-convention: axis QFI closed vs numeric", worst, 1e-7)

    worst = worst_psd = 0.0
    for _ in range(6):
        SM, SP = rng.integers(1, 7, 2) / 2
        p1, p2, mu = rng.uniform(0, np.pi), rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        N = closed.numeric_qfi_two_rotations(SM, SP, p1, p2, mu)
        C = closed.closed_qfi_matrix(SM, SP, p1, p2, mu, physical=True)
        worst = max(worst, np.max(np.abs(N.I - C.I)) / max(1.0, np.max(np.abs(C.I))))
        worst_psd = max(worst_psd, -np.linalg.eigvalsh(N.I).min())
    s.upto("phi-convention: two-rotation QFI matrix closed vs numeric", worst, 1e-7)
    s.upto("metrology: QFI matrix positive semidefinite", worst_psd, 1e-9)

    pts = [(rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)) for _ in range(6)]
    fitted = {
        "sru2_gamma": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_sru2_gamma(2, 1.5, p, m),
                                                 lambda p, m: closed.numeric_qfi_sru2_gamma(2, 1.5, p, m), pts)[0],
        "sru1_gamma": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_sru1_gamma(2.5, p, m),
                                                 lambda p, m: closed.numeric_qfi_sru1_gamma(2.5, p, m), pts)[0],
        "axis": closed.fit_axis_convention(lambda p, m: closed.closed_qfi_axis(2, 1.5, p, m),
                                           lambda p, m: closed.numeric_qfi_axis(2, 1.5, p, m), pts)[0],
    }
    mismatches = sum(fitted[k] != closed.AXIS_CONVENTION[k] for k in fitted)
    s.upto("phi-convention: refitted maps equal the pinned maps (mismatch count)", mismatches, 0)

    worst_c = worst_n = 0.0
    for mu in np.linspace(0, 2 * np.pi, 5):
        for phi in np.linspace(0, np.pi, 4, endpoint=False):
            f = closed.to_formula_axis("axis", phi)
            tot = closed.closed_qfi_axis(3, 2, f, mu) + closed.closed_qfi_sru2_gamma(3, 2, f, mu)
            worst_c = max(worst_c, abs(tot - closed.sum_rule(3, 2, mu)))
    for mu in np.linspace(0.1, 2 * np.pi, 3):
        phi = rng.uniform(0, np.pi)
        tot = closed.numeric_qfi_axis(3, 2, phi, mu) + closed.numeric_qfi_sru2_gamma(3, 2, phi, mu)
        worst_n = max(worst_n, abs(tot - closed.sum_rule(3, 2, mu)))
    s.upto("metrology: sum rule, closed forms", worst_c, 1e-10)
    s.upto("metrology: sum rule, numeric", worst_n, 1e-6)

    fam = lambda g: protocols.sru1_state(2, g, 0.0, 1.0)
    dressed = lambda g: np.exp(1j * 3.7 * g ** 2) * fam(g).vec
    s.upto("metrology: gauge invariance of numeric QFI",
           abs(qfi.numeric_qfi(fam, 0.4) - qfi.numeric_qfi(dressed, 0.4)), 1e-8)

    worst = 0.0
    for SP in (2, 3):
        vals = [closed.numeric_qfi_sru2_gamma(5, SP, p, np.pi / 2) for p in np.linspace(0, np.pi, 5)]
        worst = max(worst, max(abs(v - 55) for v in vals) / (100 * 4.0 ** -SP + 1e-9))
    s.upto("metrology: mu = pi/2 plateau within 100*4^-S_P of 55 (ratio)", worst, 1.0)

    worst = 0.0
    grid = np.linspace(0, 2 * np.pi, 200001)
    for S in (1, 1.5, 2, 3):
        locs, val = closed.mu_max(S)
        f = np.sin(grid / 2) ** 2 * np.cos(grid / 2) ** (4 * S - 2)
        worst = max(worst, abs(val - f.max()), abs(min(locs) - grid[np.argmax(f)]) * 1e-3)
    s.upto("metrology: mu_max against dense grid", worst, 1e-6)

    worst = max(abs(superchannel_qfi(n, 0.3, 0.1, 0.0) - 4 * n * n) for n in (2, 4, 6))
    s.upto("metrology: superchannel Ansatz reaches 4N^2", worst, 1e-8)

    s.note("errata: printed single-spin QFI value at S=1, phi=0, mu=0 (true 0)",
           closed.closed_qfi_sru1_gamma_printed(1, 0.0, 0.0))


def _bounds(s: _Suite, rng):
    I = closed.closed_qfi_matrix(1, 1, 0.0, np.pi / 2, np.pi / 2)
    J = closed.closed_qfi_matrix(1, 1, 0.0, 0.0, np.pi / 2)
    s.upto("bounds: multiparameter anchors 3 and 8/3",
           max(abs(bounds.variance_bounds(I).info_g1 - 3), abs(bounds.variance_bounds(J).info_g1 - 8 / 3)), 1e-6)
    worst = 0.0
    for S in (1, 1.5):
        best = max(bounds.rot_diff_bounds(closed.closed_qfi_matrix(S, S, p, p, np.pi, physical=True))[0]
                   for p in (0.0, np.pi / 2))
        worst = max(worst, abs(best - 4 * S * S))
    s.upto("bounds: rotation difference reaches 4 S1 S2", worst, 1e-7)
    worst = 0.0
    for S in (1, 2):
        eps = 4 * S * S * 4.0 ** -S
        band = eps + eps ** 2 / (2 * S * S + S - eps) + 1e-9
        for p in np.linspace(0, np.pi, 5):
            un, _ = bounds.rot_diff_bounds(closed.numeric_qfi_two_rotations(S, S, p, p, np.pi / 2))
            worst = max(worst, abs(un - (2 * S * S + S)) / band)
    s.upto("bounds: rotation-difference plateau within the 4^-S band (ratio)", worst, 1.0)


def _compat(s: _Suite, rng):
    worst = 0.0
    for _ in range(4):
        S = rng.integers(2, 5) / 2
        g, p, mu = rng.uniform(0.2, 3), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
        worst = max(worst, abs(compat.numeric_xy_commutator(S, S, g, p, mu) - 4 * compat.b_comm(g, p, S, mu).expectation))
    s.upto("compat: C_xy = 4<[B_x,B_y]> closed vs numeric", worst, 1e-6)
    small = abs(compat.numeric_xy_commutator(1, 1, 1e-3, 0.7, 0.5))
    big = abs(compat.numeric_xy_commutator(1, 1, 0.5, 0.7, 0.5))
    s.upto("compat: C_xy vanishes linearly (ratio gamma=1e-3 vs 0.5)", small / big, 1e-2)
    worst = 0.0
    for _ in range(4):
        g, p, mu = rng.uniform(0.2, 3), rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi)
        worst = max(worst, abs(compat.sld_commutator_gamma_phi(1, 1, g, p, mu)
                               - compat.closed_sld_commutator_gamma_phi(1, 1, g, p, mu)))
    s.upto("compat: (gamma, phi) commutator closed vs numeric", worst, 1e-6)
    ratio = compat.b_comm_printed(0.8, 0.6, 1, 0.7).expectation * 8 / compat.numeric_xy_commutator(1, 1, 0.8, 0.6, 0.7)
    s.note("errata: printed 8<[B_x,B_y]> over numeric C_xy", abs(ratio))


def _sdu_matrix(builder, a, b, r):
    n = fock.auto_cutoff(builder, a, b, r)
    return n, qfi.numeric_qfi_matrix(lambda t: builder(t[0], t[1], r, n).vec, [a, b])


def _fock(s: _Suite, rng):
    worst = 0.0
    for r in (0.0, 0.25, 0.5, 1.0):
        _, Q = _sdu_matrix(fock.sdu1_state, 0.1, 0.1, r)
        worst = max(worst, abs(Q.I[0, 0] / (4 * np.exp(2 * r)) - 1), abs(Q.I[1, 1] / (4 * np.exp(-2 * r)) - 1))
    s.upto("fock: single-mode SDU QFI diag(4e^2r, 4e^-2r) (relative)", worst, 1e-3)

    worst = worst_note = 0.0
    for a in (-0.2, -0.1, 0.0, 0.1, 0.2):
        for b in (-0.2, -0.1, 0.0, 0.1, 0.2):
            _, Q = _sdu_matrix(fock.sdu1_state, a, b, 0.5)
            worst = max(worst, abs(Q.C[0, 1] - 8j))
            worst_note = max(worst_note, abs(Q.C[0, 1] - 8j * a * b))
    s.upto("fock: single-mode mean SLD commutator is 8i on the (alpha, beta) grid", worst, 1e-3)
    s.note("errata: max |C - 8i alpha beta| on the same grid", worst_note)

    worst = 0.0
    for r in (0.25, 0.5):
        n, Q = _sdu_matrix(fock.sdu2_state, 0.1, 0.1, r)
        for x in (0.0, np.pi / 6, np.pi / 4, np.pi / 2):
            u = np.array([np.cos(x), np.sin(x)])
            worst = max(worst, abs(u @ Q.I @ u / (8 * np.cosh(2 * r)) - 1))
        worst = max(worst, abs(Q.C[0, 1].imag / 16 - 1))
    s.upto("fock: two-mode SDU QFI isotropic 8cosh2r, C = 16i (relative)", worst, 1e-3)

    tails = []
    for r in (0.25, 0.5, 1.0):
        n = fock.auto_cutoff(fock.sdu2_state, 0.1, 0.1, r)
        tails.append(fock.sdu2_state(0.1, 0.1, r, n).tail)
    s.upto("fock: accepted points keep the tail norm below 1e-10", max(tails), 1e-10)

    r = 0.5
    n1 = fock.auto_cutoff(fock.sdu1_state, 0.2, 0.1, r)
    v = fock.sdu1_state(0.2, 0.1, r, n1).vec
    c = fock.coherent(0.2 * np.exp(r) + 0.1j * np.exp(-r), n1)
    s.upto("fock: single-mode SDU is a coherent state (infidelity)", 1 - abs(np.vdot(c, v)) ** 2, 1e-8)
    n2 = fock.auto_cutoff(fock.sdu2_state, 0.2, 0.1, r)
    w = fock.sdu2_product_form(0.2, 0.1, r, n2)
    s.upto("fock: two-mode SDU equals beamsplitter product form (infidelity)",
           1 - abs(np.vdot(w, fock.sdu2_state(0.2, 0.1, r, n2).vec)) ** 2, 1e-8)


def _wigner(s: _Suite, rng):
    S = 4
    d = 2 * S + 1
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    th, ph = rng.uniform(0, np.pi, 50), rng.uniform(0, 2 * np.pi, 50)
    direct = wigner_multipole(psi, S, th, ph)
    s.upto("wigner: realness of the multipole sum", np.max(np.abs(direct.imag)), 1e-10)
    grid = SphericalGrid(61, 120)
    _, _, w, _ = wigner_function(psi, S, grid)
    s.upto("wigner: unit sphere integral", abs(grid.integrate(w) - 1), 1e-8)
    coeffs = multipole_coefficients(psi, S)
    rebuilt = sum(c * multipole_operator(S, k, q) for (k, q), c in coeffs.items())
    s.upto("wigner: multipole completeness", np.max(np.abs(rebuilt - np.outer(psi, psi.conj()))), 1e-10)
    a, b = psi, spin.scs_x(S).vec
    rho = 0.3 * np.outer(a, a.conj()) + 0.7 * np.outer(b, b.conj())
    th0, ph0 = rng.uniform(0, np.pi, 5), rng.uniform(0, 2 * np.pi, 5)
    lin = wigner_multipole(rho, S, th0, ph0) - 0.3 * wigner_multipole(a, S, th0, ph0) - 0.7 * wigner_multipole(b, S, th0, ph0)
    s.upto("wigner: linear in rho", np.max(np.abs(lin)), 1e-12)
    big = SphericalGrid(91, 180)
    mins = [wigner_function(oat_phases(40, mu) * spin.scs_x(40).vec, 40, big)[2].min() for mu in (np.pi / 4, np.pi / 2)]
    s.upto("wigner: S=40 squeezed states at mu = pi/4, pi/2 have negative minimum", max(mins), -1e-6)
    th, ph, w, _ = wigner_function(spin.scs_x(10).vec, 10, grid)
    i, j = np.unravel_index(np.argmax(w), w.shape)
    s.upto("wigner: coherent state peaks on its axis (grid steps)",
           max(abs(th[i] - np.pi / 2) / (np.pi / 60), min(ph[j], 2 * np.pi - ph[j]) / (2 * np.pi / 120)), 1.0)
