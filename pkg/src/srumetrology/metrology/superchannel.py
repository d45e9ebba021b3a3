"""Superchannel estimation: gamma imprinted as exp(i gamma H0) U1 exp(-i gamma H0)."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from ..spin import as_spin, expm_hermitian, sz_operator
from .qfi import qfi_pure


def _h0_diag(N: int) -> np.ndarray:
    if N < 2 or N % 2:
        raise ValueError(f"N must be a positive even integer, got {N}")
    return np.real(np.diag(sz_operator(as_spin(N // 2)))).copy()


def _embed(N: int, u2: np.ndarray) -> np.ndarray:
    """Place a 2x2 block on span{|lambda_+>, |lambda_->}, identity elsewhere."""
    d = N + 1
    U = np.eye(d, dtype=complex)
    idx = [0, d - 1]
    U[np.ix_(idx, idx)] = u2
    return U


def _qfi(N: int, gamma: float, psi0: np.ndarray, U1: np.ndarray) -> float:
    h = _h0_diag(N)
    ph = np.exp(1j * gamma * h)
    # psi = P U1 P^* psi0 with P = diag(exp(i gamma h)); derivative is exact
    inner = U1 @ (ph.conj() * psi0)
    psi = ph * inner
    dpsi = 1j * h * psi - ph * (U1 @ (1j * h * ph.conj() * psi0))
    return qfi_pure(psi, dpsi)


def ansatz(N: int, alpha: float, chi: float):
    """(psi0, U1) with psi0 = (|+> + e^{i alpha}|->)/sqrt(2), U1 = cos(chi) X + sin(chi) Y."""
    d = N + 1
    psi0 = np.zeros(d, complex)
    psi0[0], psi0[-1] = 1 / np.sqrt(2), np.exp(1j * alpha) / np.sqrt(2)
    u2 = np.array([[0, np.exp(-1j * chi)], [np.exp(1j * chi), 0]])
    return psi0, _embed(N, u2)


def superchannel_qfi(N: int, gamma: float, alpha: float, chi: float) -> float:
    """QFI of gamma for the superchannel Ansatz."""
    return _qfi(N, gamma, *ansatz(N, alpha, chi))


def superchannel_qfi_general(N: int, gamma: float, psi2: np.ndarray, u2: np.ndarray) -> float:
    """QFI for an arbitrary state and unitary on the extremal two-level subspace."""
    d = N + 1
    psi0 = np.zeros(d, complex)
    psi0[0], psi0[-1] = psi2
    return _qfi(N, gamma, psi0 / np.linalg.norm(psi0), _embed(N, u2))


class SuperchannelResult(NamedTuple):
    bound: float
    ansatz_qfi: float
    best_search: float


def _random_search(N: int, restarts: int, rng: np.random.Generator, gamma: float) -> float:
    def neg(x):
        a, b = x[0], x[1]
        psi2 = np.array([np.cos(a), np.exp(1j * b) * np.sin(a)])
        H = np.array([[x[2], x[3] + 1j * x[4]], [x[3] - 1j * x[4], x[5]]])
        return -superchannel_qfi_general(N, gamma, psi2, expm_hermitian(H))

    best = 0.0
    for _ in range(restarts):
        x0 = rng.uniform(-np.pi, np.pi, 6)
        res = minimize(neg, x0, method="BFGS")
        best = max(best, -float(res.fun))
    return best


def superchannel_max(N: int, restarts: int = 8, seed: int = 0, gamma: float = 0.37) -> SuperchannelResult:
    """4 N^2 ceiling, the Ansatz value, and a random-restart search on the same subspace."""
    rng = np.random.default_rng(seed)
    return SuperchannelResult(4.0 * N * N, superchannel_qfi(N, gamma, 0.0, 0.0),
                              _random_search(N, restarts, rng, gamma))
