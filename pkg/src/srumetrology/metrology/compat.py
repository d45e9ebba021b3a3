"""Average SLD commutators: (gamma, phi) sign maps and (gamma_x, gamma_y) rotations."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import GammaTooSmall
from ..protocols import sru2_generic_rotation, sru2_state
from ..spin import as_spin, spin_operators
from .qfi import numeric_qfi_matrix

GAMMA_MIN = 1e-8


def sld_commutator_gamma_phi(S_M, S_P, gamma, phi, mu, **kw) -> float:
    """Tr(rho [L_gamma, L_phi]) / i for the two-spin SRU state."""
    fam = lambda t: sru2_state(S_M, S_P, t[0], t[1], mu)
    Q = numeric_qfi_matrix(fam, [gamma, phi], labels=("gamma", "phi"), **kw)
    return float(Q.C[0, 1].imag)


def closed_sld_commutator_gamma_phi(S_M, S_P, gamma, phi, mu) -> float:
    """8 S_M cos^{2 S_P}(mu/2) sin^2(gamma/2) sin(phi), generator angle phi."""
    sm, sp = as_spin(S_M).value, as_spin(S_P).value
    return 8 * sm * np.cos(mu / 2) ** (2 * sp) * np.sin(gamma / 2) ** 2 * np.sin(phi)


def sld_sign_map(J, mu, gammas, phis, **kw) -> np.ndarray:
    """Tr(rho [L_gamma, L_phi]) / i on a (gamma, phi) grid, S_M = S_P = J.

    Rows follow ``gammas`` and columns ``phis``.
    """
    return np.array([[sld_commutator_gamma_phi(J, J, g, p, mu, **kw) for p in phis] for g in gammas])


# --- rotations about x and y ---------------------------------------------------

def _xy_generator(S, gx, gy):
    sx, sy, _ = spin_operators(S)
    return gx * sx + gy * sy


def numeric_xy_commutator(S_M, S_P, gamma, phi, mu, **kw) -> complex:
    """C_xy = Tr(rho [L_x, L_y]) for gamma_x = gamma cos(phi), gamma_y = gamma sin(phi)."""
    fam = lambda t: sru2_generic_rotation(S_M, S_P, _xy_generator(S_M, t[0], t[1]), mu)
    Q = numeric_qfi_matrix(fam, [gamma * np.cos(phi), gamma * np.sin(phi)], labels=("gx", "gy"), **kw)
    return complex(Q.C[0, 1])


class BCommutator(NamedTuple):
    a_x: complex
    a_y: complex
    a_z: complex
    expectation: complex


def b_matrix(gamma, phi) -> np.ndarray:
    """M with B_i = sum_j M_ij S_j, where d/d gamma_i exp(i gamma n.S) = i B_i exp(i gamma n.S)."""
    n = np.array([np.cos(phi), np.sin(phi), 0.0])
    cross = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    sinc = np.sin(gamma) / gamma
    return sinc * np.eye(3) + (1 - np.cos(gamma)) / gamma * cross + (1 - sinc) * np.outer(n, n)


def b_operators(S, gamma, phi):
    """(B_x, B_y) on the main spin."""
    if abs(gamma) < GAMMA_MIN:
        raise GammaTooSmall(f"|gamma| = {abs(gamma):g} < {GAMMA_MIN:g}; use b_comm_limit")
    M = b_matrix(gamma, phi)
    ops = spin_operators(S)
    return tuple(sum(M[i, j] * ops[j] for j in range(3)) for i in range(2))


def b_comm(gamma, phi, S_M, mu, S_P=None) -> BCommutator:
    """[B_x, B_y] = a_x S_x + a_y S_y + a_z S_z and its mean.

    The mean is taken in the rotated, not yet unsqueezed, state; the average
    SLD commutator is C_xy = 4 <[B_x, B_y]>.
    """
    if abs(gamma) < GAMMA_MIN:
        raise GammaTooSmall(f"|gamma| = {abs(gamma):g} < {GAMMA_MIN:g}; use b_comm_limit")
    sp = as_spin(S_M if S_P is None else S_P).value
    sm = as_spin(S_M).value
    c = 1 - np.cos(gamma)
    a = 1j * np.array([-c * np.sin(phi) / gamma, c * np.cos(phi) / gamma, np.sin(gamma) / gamma])
    mean = 1j * sm * np.cos(mu / 2) ** (2 * sp) * c * np.sin(phi) / gamma
    return BCommutator(a[0], a[1], a[2], complex(mean))


def b_comm_limit(S) -> np.ndarray:
    """Limit of [B_x, B_y] as gamma -> 0, i S_z."""
    return 1j * spin_operators(S)[2]


def b_comm_printed(gamma, phi, S_M, mu) -> BCommutator:
    """Coefficients and mean as printed in the source derivation.

    Kept for the record; they do not match the numeric commutator.
    """
    r = np.sqrt(2)
    sg, cg = np.sin(gamma), np.cos(gamma)
    sr, cr = np.sin(gamma / r), np.cos(gamma / r)
    sp_, cp = np.sin(phi), np.cos(phi)
    ax = 2j * sg * sr * sp_ * (r * sr * cp ** 2 + gamma * cr * sp_ ** 2) / gamma ** 2
    ay = 2j * sg * sr ** 2 * (r - gamma * cr / sr) * sp_ ** 2 * cp / gamma ** 2
    az = -2j * sr ** 2 * (sg * cp ** 2 + cg * cr / sr) / gamma
    h = gamma / 2
    sm = as_spin(S_M).value
    mean = (4 * sm * 1j * np.sin(h) ** 2 * np.cos(h) * np.cos(mu / 2) ** (2 * sm) * sp_
            * (2 * np.sin(h) * cp ** 2 + gamma * np.cos(h) * sp_ ** 2) / gamma ** 2)
    return BCommutator(ax, ay, az, complex(mean))
