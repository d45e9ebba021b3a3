"""Squeeze-rotate-unsqueeze (SRU) protocol states.

Axis angles passed to the state builders are generator angles: the rotation
is exp(i gamma S(phi)) with S(phi) = cos(phi) S_x + sin(phi) S_y. Closed
forms that were written for a different axis labelling say so explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidAxis, InvalidSpin
from .spin import (
    SpinLike,
    SpinState,
    apply_local,
    as_spin,
    coherent_state,
    expm_hermitian,
    ladder_operators,
    log_binomial,
    oat_phases,
    rotation,
    scs_x,
    tensor,
    two_spin_phases,
)


@dataclass(frozen=True)
class ProtocolParams:
    gamma: float
    phi: float
    mu: float
    gamma2: Optional[float] = None
    phi2: Optional[float] = None

    def __post_init__(self):
        vals = [self.gamma, self.phi, self.mu, self.gamma2, self.phi2]
        if not all(v is None or np.isfinite(v) for v in vals):
            raise ValueError(f"non-finite protocol parameter in {self}")


def sru1_state(S: SpinLike, gamma: float, phi: float, mu: float) -> SpinState:
    """exp(-i mu Sz^2) exp(i gamma S(phi)) exp(i mu Sz^2) |SCS_X>."""
    spin = as_spin(S)
    q = oat_phases(spin, mu)
    vec = q.conj() * (rotation(spin, gamma, phi) @ (q * scs_x(spin).vec))
    return SpinState(vec, (spin,))


def sru2_state(S_M: SpinLike, S_P: SpinLike, gamma: float, phi: float, mu: float) -> SpinState:
    """Two-spin SRU: rotation on the main spin between exp(+-i mu Sz x Sz)."""
    return sru2_two_rotations(S_M, S_P, gamma, phi, 0.0, 0.0, mu)


def sru2_two_rotations(S_M: SpinLike, S_P: SpinLike, gamma1: float, phi1: float,
                       gamma2: float, phi2: float, mu: float) -> SpinState:
    """Two-spin SRU with rotation (gamma1, phi1) on main and (gamma2, phi2) on probe."""
    sm, sp = as_spin(S_M), as_spin(S_P)
    q = two_spin_phases(sm, sp, mu)
    v = q * np.kron(scs_x(sm).vec, scs_x(sp).vec)
    dims = [sm.dim, sp.dim]
    v = apply_local(rotation(sm, gamma1, phi1), v, dims, 0)
    if gamma2 != 0.0:
        v = apply_local(rotation(sp, gamma2, phi2), v, dims, 1)
    return SpinState(q.conj() * v, (sm, sp))


def sru2_generic_rotation(S_M: SpinLike, S_P: SpinLike, generator: np.ndarray, mu: float) -> SpinState:
    """Two-spin SRU where the main spin is rotated by exp(i G) for Hermitian G."""
    sm, sp = as_spin(S_M), as_spin(S_P)
    q = two_spin_phases(sm, sp, mu)
    v = q * np.kron(scs_x(sm).vec, scs_x(sp).vec)
    v = apply_local(expm_hermitian(generator), v, [sm.dim, sp.dim], 0)
    return SpinState(q.conj() * v, (sm, sp))


def sru2_closed_amplitudes(S_M: SpinLike, S_P: SpinLike, gamma: float, phi: float, mu: float) -> np.ndarray:
    """Amplitudes of the two-spin SRU state from the product-form expansion.

    The expansion is written for the reflected axis angle pi/2 - phi, so the
    result reproduces ``sru2_state(S_M, S_P, gamma, phi, mu)`` exactly.
    Returned as a (2S_M+1, 2S_P+1) table indexed by (j, k), M descending.
    """
    sm, sp = as_spin(S_M), as_spin(S_P)
    a = np.pi / 2 - phi
    j = sm.m[:, None]
    k = sp.m[None, :]
    SM, SP = sm.value, sp.value
    c, s = np.cos(gamma / 2), np.sin(gamma / 2)
    z = np.exp(1j * (a - k * mu))
    plus = c + z * s
    minus = c - z.conj() * s
    weight = np.exp(0.5 * (log_binomial(2 * SM, SM - j) + log_binomial(2 * SP, SP - k)) - (SM + SP) * np.log(2))
    return weight * plus ** (SM + j) * minus ** (SM - j)


def sru1_two_axis(S: SpinLike, gamma: float, phi: float, mu: float) -> SpinState:
    """Two-axis twisting SRU on the Z-pole coherent state.

    exp(-mu (S_-^2 - S_+^2)) exp(i gamma S(phi)) exp(mu (S_-^2 - S_+^2)) |S,S>.
    """
    spin = as_spin(S)
    squeeze = expm_hermitian(two_axis_generator(spin), mu)
    pole = coherent_state(spin, 0.0, 0.0).vec
    vec = squeeze.conj().T @ (rotation(spin, gamma, phi) @ (squeeze @ pole))
    return SpinState(vec, (spin,))


def two_axis_generator(S: SpinLike) -> np.ndarray:
    """Hermitian H with exp(i mu H) = exp(mu (S_-^2 - S_+^2))."""
    sp, sm = ladder_operators(S)
    return 1j * (sp @ sp - sm @ sm)


# --- closed branch decompositions at mu = pi/2 --------------------------------

class Branch(NamedTuple):
    """coefficient * |S,S>_{theta,phi}"""

    coefficient: complex
    theta: float
    phi: float


def sru1_max_closed(S: SpinLike, gamma: float, phi: float) -> list:
    """Coherent-state branches of the single-spin SRU state at mu = pi/2.

    ``phi`` must be 0 or pi/2 (generator convention). The rotation either
    transfers gamma to the amplitudes of |X> and |-X> with rate S (two
    branches) or tilts four coherent components in polar angle.
    """
    spin = as_spin(S)
    s = spin.value
    if np.isclose(phi, 0.0, atol=1e-12):
        axis = 0
    elif np.isclose(phi, np.pi / 2, atol=1e-12):
        axis = 1
    else:
        raise InvalidAxis(f"closed branches exist only for phi in {{0, pi/2}}, got {phi}")
    h = np.pi / 2
    if spin.is_integer:
        sign = (-1) ** (spin.twice // 2)
        if axis == 0:
            return [Branch(np.cos(s * gamma), h, 0.0), Branch(-sign * np.sin(s * gamma), h, np.pi)]
        return [
            Branch(0.5, h - gamma, 0.0),
            Branch(-0.5j * sign, h + gamma, np.pi),
            Branch(0.5, h + gamma, 0.0),
            Branch(0.5j * sign, h - gamma, np.pi),
        ]
    if axis == 1:
        sign = (-1) ** ((spin.twice - 1) // 2)
        return [Branch(np.cos(s * gamma), h, 0.0), Branch(sign * np.sin(s * gamma), h, np.pi)]
    return [
        Branch(0.5, h + gamma, 0.0),
        Branch(-0.5 * np.exp(-1j * np.pi * s), h - gamma, np.pi),
        Branch(0.5, h - gamma, 0.0),
        Branch(-0.5 * np.exp(1j * np.pi * s), h + gamma, np.pi),
    ]


def branches_to_state(S: SpinLike, branches) -> SpinState:
    spin = as_spin(S)
    # polar angles outside [0, pi] are kept as analytic continuations of the
    # amplitude formula, which is what the branch phases assume
    vec = sum(b.coefficient * coherent_state(spin, b.theta, b.phi).vec for b in branches)
    return SpinState(vec, (spin,))


def optimal_measurement_basis(S: SpinLike, gamma: float = 0.0):
    """Two-outcome basis that saturates the QFI of the integer-spin NOON branch.

    Returns (|X> + |-X>)/sqrt(2) and (|X> - |-X>)/sqrt(2); ``gamma`` is
    accepted for symmetry with the state builders and does not enter.
    """
    spin = as_spin(S)
    if not spin.is_integer:
        raise InvalidSpin(f"optimal basis is defined for integer spin, got {spin}")
    x = coherent_state(spin, np.pi / 2, 0.0).vec
    mx = coherent_state(spin, np.pi / 2, np.pi).vec
    return SpinState((x + mx) / np.sqrt(2), (spin,)), SpinState((x - mx) / np.sqrt(2), (spin,))


def double_scs_x(S_M: SpinLike, S_P: SpinLike) -> SpinState:
    return tensor(scs_x(S_M), scs_x(S_P))
