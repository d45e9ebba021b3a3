"""Finite-difference QFI engine for pure-state families."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import FiniteDifferenceInconsistent, PhaseAlignmentFailed

DEFAULT_STEP = 1e-4
RICHARDSON_RTOL = 1e-6
_STENCIL = ((-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0))


def _as_vec(state) -> np.ndarray:
    return np.asarray(getattr(state, "vec", state), dtype=complex)


def _stencil(family: Callable, theta0: float, h: float, ref: np.ndarray) -> np.ndarray:
    out = np.zeros_like(ref)
    for k, w in _STENCIL:
        p = _as_vec(family(theta0 + k * h))
        ov = np.vdot(ref, p)
        if abs(ov) < 0.1:
            raise PhaseAlignmentFailed(
                f"overlap {abs(ov):.3g} with reference at offset {k}h (h={h:g}) is below 0.1"
            )
        out += w * p * (np.conj(ov) / abs(ov))
    return out / (12 * h)


def derivative_fd(family: Callable, theta0: float, h: float = DEFAULT_STEP, check: bool = True) -> np.ndarray:
    """Four-point central derivative of ``family`` at ``theta0``.

    Each sample is phase-aligned to the reference state before differencing,
    which puts the result in the parallel-transport gauge (<psi|dpsi> ~ 0).
    With ``check`` the estimate is repeated at h/2 and must agree to
    ``RICHARDSON_RTOL`` relative.
    """
    if not 1e-6 <= h <= 1e-2:
        raise ValueError(f"step h={h} outside [1e-6, 1e-2]")
    ref = _as_vec(family(theta0))
    d = _stencil(family, theta0, h, ref)
    if check:
        d2 = _stencil(family, theta0, h / 2, ref)
        scale = max(np.linalg.norm(d), 1.0)
        err = np.linalg.norm(d - d2)
        if err > RICHARDSON_RTOL * scale:
            raise FiniteDifferenceInconsistent(
                f"derivative at h={h:g} and h/2 differ by {err:.3g} (scale {scale:.3g})"
            )
    return d


def partial_derivatives(family: Callable, theta0: Sequence[float], h: float = DEFAULT_STEP,
                        check: bool = True) -> list:
    """Derivatives of a multi-parameter family along each coordinate."""
    theta0 = np.asarray(theta0, dtype=float)
    out = []
    for i in range(theta0.size):
        def line(t, i=i):
            th = theta0.copy()
            th[i] = t
            return family(th)
        out.append(derivative_fd(line, theta0[i], h, check))
    return out


def qfi_pure(psi, dpsi) -> float:
    """4(<dpsi|dpsi> - |<psi|dpsi>|^2) for a normalized pure state."""
    v, d = _as_vec(psi), _as_vec(dpsi)
    return float(4 * (np.vdot(d, d).real - abs(np.vdot(v, d)) ** 2))


def sld_pure(psi, dpsi) -> np.ndarray:
    """Symmetric logarithmic derivative L = 2 d(rho) of a pure-state family."""
    v, d = _as_vec(psi), _as_vec(dpsi)
    a = np.outer(d, v.conj())
    return 2 * (a + a.conj().T)


@dataclass(frozen=True)
class QfiMatrix:
    """QFI matrix and mean SLD commutators C_ij = Tr(rho [L_i, L_j])."""

    labels: tuple
    I: np.ndarray
    C: Optional[np.ndarray] = None

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.I))

    def __getitem__(self, ij):
        return self.I[ij]


def qfi_matrix(psi, dpsis: Sequence, labels: Optional[Sequence[str]] = None,
               verify: bool = False) -> QfiMatrix:
    """QFI matrix from derivative vectors.

    I_ij = 4 Re <d_i|(1-P)|d_j>, C_ij = 8i Im <d_i|(1-P)|d_j>. With
    ``verify`` both are recomputed from explicit SLD traces.
    """
    v = _as_vec(psi)
    D = np.array([_as_vec(d) for d in dpsis])
    proj = D.conj() @ v  # <d_i|psi>
    Q = D.conj() @ D.T - np.outer(proj, proj.conj())
    I = 4 * Q.real
    I = (I + I.T) / 2
    C = 8j * Q.imag
    labels = tuple(labels) if labels is not None else tuple(f"theta{i}" for i in range(len(D)))
    if verify:
        L = [sld_pure(v, d) for d in D]
        rho = np.outer(v, v.conj())
        n = len(L)
        It = np.array([[0.5 * np.trace(rho @ (L[i] @ L[j] + L[j] @ L[i])).real for j in range(n)] for i in range(n)])
        Ct = np.array([[np.trace(rho @ (L[i] @ L[j] - L[j] @ L[i])) for j in range(n)] for i in range(n)])
        scale = max(1.0, float(np.max(np.abs(I))))
        if np.max(np.abs(It - I)) > 1e-9 * scale or np.max(np.abs(Ct - C)) > 1e-9 * scale:
            raise ArithmeticError("QFI matrix disagrees with explicit SLD traces")
    return QfiMatrix(labels, I, C)


def numeric_qfi(family: Callable, theta0: float, h: float = DEFAULT_STEP, check: bool = True) -> float:
    psi = _as_vec(family(theta0))
    return qfi_pure(psi, derivative_fd(family, theta0, h, check))


def numeric_qfi_matrix(family: Callable, theta0: Sequence[float], labels=None,
                       h: float = DEFAULT_STEP, check: bool = True, verify: bool = False) -> QfiMatrix:
    psi = _as_vec(family(np.asarray(theta0, dtype=float)))
    return qfi_matrix(psi, partial_derivatives(family, theta0, h, check), labels, verify)
