"""Closed-form QFI expressions for SRU protocols and their axis conventions.

The closed forms are written in a *formula* axis angle that is not always the
generator angle phi of exp(i gamma S(phi)). ``AXIS_CONVENTION`` records, per
expression, the map from generator angle to formula angle. The map was fitted
against finite-difference QFI (see ``fit_axis_convention``) and is pinned by a
regression test.
"""
from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from ..protocols import sru1_state, sru2_state, sru2_two_rotations
from ..spin import SpinLike, as_spin
from .qfi import QfiMatrix, numeric_qfi, numeric_qfi_matrix

CONVENTION_MAPS: dict[str, Callable[[float], float]] = {
    "identity": lambda phi: phi,
    "reflect": lambda phi: np.pi / 2 - phi,
    "shift": lambda phi: phi + np.pi / 2,
}

AXIS_CONVENTION = {
    "sru2_gamma": "reflect",
    "sru1_gamma": "identity",
    "axis": "reflect",
    "offdiag": "identity",
    "sru2_amplitudes": "reflect",
}


def to_formula_axis(kind: str, phi):
    """Formula angle corresponding to generator angle ``phi``.

    The maps in use (identity, reflect) are involutions, so the same call
    converts back.
    """
    return CONVENTION_MAPS[AXIS_CONVENTION[kind]](phi)


def _v(S: SpinLike) -> float:
    return as_spin(S).value


# --- formulas (formula-convention angles) ------------------------------------

def closed_qfi_sru2_gamma(S_M, S_P, phi, mu):
    """QFI of gamma for the two-spin SRU state, any equatorial axis."""
    sm, sp = _v(S_M), _v(S_P)
    return sm * (2 * sm + 1 - (2 * sm - 1) * np.cos(2 * phi) * np.cos(mu) ** (2 * sp)
                 - 4 * sm * np.sin(phi) ** 2 * np.cos(mu / 2) ** (4 * sp))


def closed_qfi_sru1_gamma(S, phi, mu):
    """QFI of gamma for the single-spin SRU state (generator angle).

    Follows from <S(phi)> = S cos(phi) cos^{2S-1}(mu) and
    <S(phi)^2> = S(2S-1)/4 cos(2 phi) cos^{2S-2}(2 mu) + S(2S+1)/4
    on the squeezed X coherent state.
    """
    s = _v(S)
    return s * (2 * s + 1 + (2 * s - 1) * np.cos(2 * phi) * np.cos(2 * mu) ** (2 * s - 2)
                - 4 * s * np.cos(phi) ** 2 * np.cos(mu) ** (4 * s - 2))


def closed_qfi_sru1_gamma_printed(S, phi, mu):
    """Single-spin expression with a minus sign on the cos(2 phi) term.

    Kept only to document that it is not a valid QFI (it goes negative).
    """
    s = _v(S)
    return s * (2 * s + 1 - (2 * s - 1) * np.cos(2 * phi) * np.cos(2 * mu) ** (2 * s - 2)
                - 4 * s * np.cos(phi) ** 2 * np.cos(mu) ** (4 * s - 2))


def closed_qfi_axis(S_M, S_P, phi, mu):
    """QFI of the axis angle at gamma = pi/2 (quarter turn)."""
    sm, sp = _v(S_M), _v(S_P)
    return sm * (2 * sm + 3 + (2 * sm - 1) * np.cos(2 * phi) * np.cos(mu) ** (2 * sp)
                 - 4 * sm * np.cos(phi) ** 2 * np.cos(mu / 2) ** (4 * sp))


def closed_qfi_axis_half_turn(S_M):
    """QFI of the axis angle at gamma = pi, independent of phi and mu."""
    return 8 * _v(S_M)


def sum_rule(S_M, S_P, mu):
    """Axis QFI (gamma = pi/2) plus gamma QFI at the same axis."""
    sm, sp = _v(S_M), _v(S_P)
    return 4 * sm * (sm + 1 - sm * np.cos(mu / 2) ** (4 * sp))


def closed_offdiag(S_M, S_P, phi1, phi2, mu):
    """Off-diagonal QFI entry between main and probe rotation angles."""
    sm, sp = _v(S_M), _v(S_P)
    return (4 * sp * sm * np.cos(phi1) * np.cos(phi2)
            * np.cos(mu / 2) ** (2 * (sp + sm - 1)) * np.sin(mu / 2) ** 2)


def closed_qfi_matrix(S_M, S_P, phi1, phi2, mu, physical: bool = False) -> QfiMatrix:
    """2x2 QFI matrix of (gamma1, gamma2) for the two-rotation protocol.

    With ``physical=False`` each entry is evaluated at the given angles as
    they appear in the formulas, mixing the per-entry conventions.
    With ``physical=True`` the angles are generator angles and each entry is
    mapped through ``AXIS_CONVENTION`` so the matrix describes one state.
    """
    if physical:
        a1 = to_formula_axis("sru2_gamma", phi1)
        a2 = to_formula_axis("sru2_gamma", phi2)
        o1, o2 = to_formula_axis("offdiag", phi1), to_formula_axis("offdiag", phi2)
    else:
        a1, a2, o1, o2 = phi1, phi2, phi1, phi2
    i11 = closed_qfi_sru2_gamma(S_M, S_P, a1, mu)
    i22 = closed_qfi_sru2_gamma(S_P, S_M, a2, mu)
    i12 = closed_offdiag(S_M, S_P, o1, o2, mu)
    return QfiMatrix(("gamma1", "gamma2"), np.array([[i11, i12], [i12, i22]], dtype=float))


def mu_max(S):
    """Maxima of sin^2(mu/2) cos^{4S-2}(mu/2) on (0, 2 pi) and the attained value.

    Setting the derivative to zero gives tan^2(mu/2) = 1/(2S-1).
    """
    s = _v(S)
    n = 2 * s - 1
    if n == 0:
        return [np.pi], 1.0
    m1 = 2 * np.arctan(1 / np.sqrt(n))
    value = n ** n / (n + 1) ** (n + 1)
    return [m1, 2 * np.pi - m1], value


# --- numeric counterparts (generator angles) ---------------------------------

def numeric_qfi_sru2_gamma(S_M, S_P, phi, mu, gamma=0.3, **kw) -> float:
    return numeric_qfi(lambda g: sru2_state(S_M, S_P, g, phi, mu), gamma, **kw)


def numeric_qfi_sru1_gamma(S, phi, mu, gamma=0.3, **kw) -> float:
    return numeric_qfi(lambda g: sru1_state(S, g, phi, mu), gamma, **kw)


def numeric_qfi_axis(S_M, S_P, phi, mu, gamma=np.pi / 2, **kw) -> float:
    return numeric_qfi(lambda p: sru2_state(S_M, S_P, gamma, p, mu), phi, **kw)


def numeric_qfi_two_rotations(S_M, S_P, phi1, phi2, mu, gamma1=0.3, gamma2=0.2, **kw) -> QfiMatrix:
    fam = lambda t: sru2_two_rotations(S_M, S_P, t[0], phi1, t[1], phi2, mu)
    return numeric_qfi_matrix(fam, [gamma1, gamma2], labels=("gamma1", "gamma2"), **kw)


# --- convention fitting --------------------------------------------------------

def fit_axis_convention(closed: Callable[[float, float], float], numeric: Callable[[float, float], float],
                        points: Iterable) -> tuple[str, dict]:
    """Pick the axis map that best reconciles ``closed`` with ``numeric``.

    ``closed(formula_phi, mu)`` and ``numeric(generator_phi, mu)``; returns
    the winning map name and the RMS residual of every candidate.
    """
    points = list(points)
    ref = np.array([numeric(p, m) for p, m in points])
    resid = {}
    for name, f in CONVENTION_MAPS.items():
        vals = np.array([closed(f(p), m) for p, m in points])
        resid[name] = float(np.sqrt(np.mean((vals - ref) ** 2)))
    best = min(resid.values())
    # reflect and shift coincide for expressions even in phi; prefer the
    # earlier entry so the choice is stable
    tol = 1e-9 * max(1.0, float(np.max(np.abs(ref))))
    winner = next(n for n in CONVENTION_MAPS if resid[n] <= best + tol)
    return winner, resid
