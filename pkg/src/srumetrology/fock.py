"""Truncated Fock-space bosonic operators and the squeeze-displace-unsqueeze states.

Two-mode vectors are ordered |n_a, n_b> with the first mode slow. Generators
that conserve a photon-number combination are exponentiated sector by sector
and returned as sparse matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sps
from scipy.special import gammaln

from .errors import TailNormExceeded
from .spin import expm_hermitian

TAIL_TOL = 1e-10
CUTOFF_LADDER = (40, 60, 80, 100, 120, 160)


@dataclass(frozen=True)
class FockCutoff:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 8:
            raise ValueError(f"cutoff must be an integer >= 8, got {self.n_max}")

    @property
    def dim(self) -> int:
        return self.n_max + 1


def _n(cutoff) -> int:
    return cutoff.n_max if isinstance(cutoff, FockCutoff) else FockCutoff(int(cutoff)).n_max


@dataclass(frozen=True)
class ModeState:
    vec: np.ndarray
    n_max: int
    modes: int
    tail: float

    def __array__(self, dtype=None, copy=None):
        return self.vec if dtype is None else self.vec.astype(dtype)


@lru_cache(maxsize=None)
def _annihilation(n: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, n + 1, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(cutoff) -> np.ndarray:
    return _annihilation(_n(cutoff))


def number_operator(cutoff) -> np.ndarray:
    return np.diag(np.arange(_n(cutoff) + 1, dtype=float)).astype(complex)


def tail_norm(vec: np.ndarray, n_max: int, modes: int = 1) -> float:
    """Weight on states where any mode has n > n_max - 2."""
    p = np.abs(np.asarray(vec)) ** 2
    if modes == 1:
        return float(p[n_max - 1:].sum())
    p = p.reshape(n_max + 1, n_max + 1)
    inner = p[: n_max - 1, : n_max - 1].sum()
    return float(p.sum() - inner)


def _checked(vec: np.ndarray, n_max: int, modes: int, what: str) -> np.ndarray:
    t = tail_norm(vec, n_max, modes)
    if t > TAIL_TOL:
        raise TailNormExceeded(f"{what}: tail weight {t:.3g} above 1e-10 at cutoff {n_max}")
    return vec


# --- single mode -----------------------------------------------------------------

def displacement(gamma: complex, cutoff) -> np.ndarray:
    """exp(gamma a^dag - gamma^* a)."""
    a = annihilation(cutoff)
    H = 1j * (gamma * a.conj().T - np.conj(gamma) * a)
    return expm_hermitian(H, -1.0)


def single_mode_squeeze(r: float, cutoff) -> np.ndarray:
    """exp(r (a^2 - a^dag^2) / 2)."""
    a = annihilation(cutoff)
    a2 = a @ a
    H = -0.5j * r * (a2 - a2.conj().T)
    return expm_hermitian(H)


def vacuum(cutoff, modes: int = 1) -> np.ndarray:
    v = np.zeros((_n(cutoff) + 1) ** modes, complex)
    v[0] = 1.0
    return v


def coherent(alpha: complex, cutoff) -> np.ndarray:
    """Truncated, renormalized coherent state."""
    n = _n(cutoff)
    k = np.arange(n + 1)
    logmag = k * np.log(abs(alpha)) - 0.5 * gammaln(k + 1) if alpha != 0 else np.where(k == 0, 0.0, -np.inf)
    v = np.exp(logmag) * np.exp(1j * k * np.angle(alpha))
    return v / np.linalg.norm(v)


# --- two modes -------------------------------------------------------------------

def _two_mode_ops(n: int):
    a = annihilation(n)
    eye = np.eye(n + 1)
    return sps.csr_matrix(np.kron(a, eye)), sps.csr_matrix(np.kron(eye, a))


def _sector_expm(H: sps.spmatrix, labels: np.ndarray, t: float = 1.0) -> sps.csr_matrix:
    """exp(i t H) for Hermitian H that is block diagonal in ``labels``."""
    H = H.tocsr()
    dim = H.shape[0]
    rows, cols, vals = [], [], []
    for lab in np.unique(labels):
        idx = np.flatnonzero(labels == lab)
        block = H[idx][:, idx].toarray()
        U = expm_hermitian(block, t)
        r, c = np.meshgrid(idx, idx, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(U.ravel())
    return sps.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))


def _occupations(n: int):
    na, nb = np.divmod(np.arange((n + 1) ** 2), n + 1)
    return na, nb


@lru_cache(maxsize=16)
def _two_mode_squeeze(r: float, n: int) -> sps.csr_matrix:
    A, B = _two_mode_ops(n)
    K2 = -0.5j * (A.conj().T @ B.conj().T - B @ A)
    na, nb = _occupations(n)
    return _sector_expm(-2 * r * K2, na - nb)


def two_mode_squeeze(r: float, cutoff) -> sps.csr_matrix:
    """exp(-2 i r K2), K2 = -(i/2)(a^dag b^dag - b a); sparse."""
    return _two_mode_squeeze(float(r), _n(cutoff))


@lru_cache(maxsize=4)
def _beamsplitter(n: int) -> sps.csr_matrix:
    A, B = _two_mode_ops(n)
    J2 = -0.5j * (A.conj().T @ B - B.conj().T @ A)
    na, nb = _occupations(n)
    return _sector_expm(J2, na + nb, np.pi / 2)


def beamsplitter(cutoff) -> sps.csr_matrix:
    """exp(i J2 pi/2), J2 = -(i/2)(a^dag b - b^dag a); sparse."""
    return _beamsplitter(_n(cutoff))


def apply_mode_a(U: np.ndarray, vec: np.ndarray, n: int) -> np.ndarray:
    return (U @ vec.reshape(n + 1, n + 1)).reshape(-1)


# --- SDU protocols -----------------------------------------------------------------

def sdu1_state(alpha: float, beta: float, r: float, cutoff) -> ModeState:
    """S1(r)^dag D(alpha + i beta) S1(r) |0>."""
    n = _n(cutoff)
    S = single_mode_squeeze(r, n)
    v = _checked(S @ vacuum(n), n, 1, "squeeze")
    v = _checked(displacement(alpha + 1j * beta, n) @ v, n, 1, "displace")
    v = _checked(S.conj().T @ v, n, 1, "unsqueeze")
    return ModeState(v, n, 1, tail_norm(v, n))


def sdu2_state(alpha: float, beta: float, r: float, cutoff) -> ModeState:
    """S2(r)^dag (D(sqrt(2) gamma) x 1) S2(r) |0,0>, gamma = alpha + i beta.

    The sqrt(2) makes this the beamsplitter image of two independent
    single-mode SDU outputs, see ``sdu2_product_form``. With D(gamma) on the
    arm instead, every QFI entry is halved.
    """
    n = _n(cutoff)
    S = two_mode_squeeze(r, n)
    v = _checked(S @ vacuum(n, 2), n, 2, "squeeze")
    gamma = np.sqrt(2) * (alpha + 1j * beta)
    v = _checked(apply_mode_a(displacement(gamma, n), v, n), n, 2, "displace")
    v = _checked(S.conj().T @ v, n, 2, "unsqueeze")
    return ModeState(v, n, 2, tail_norm(v, n, 2))


def sdu2_product_form(alpha: float, beta: float, r: float, cutoff) -> np.ndarray:
    """B (|alpha e^{-r} + i beta e^r> x |alpha e^r + i beta e^{-r}>)."""
    n = _n(cutoff)
    z_amp = alpha * np.exp(r) + 1j * beta * np.exp(-r)
    z_att = alpha * np.exp(-r) + 1j * beta * np.exp(r)
    return beamsplitter(n) @ np.kron(coherent(z_att, n), coherent(z_amp, n))


def auto_cutoff(builder, *args, ladder=CUTOFF_LADDER, probe=None) -> int:
    """Smallest cutoff on the ladder at which ``builder(*args, cutoff)`` passes the tail gate.

    ``probe`` is a list of extra argument tuples that must pass too (e.g. the
    finite-difference stencil points).
    """
    points = [args] + list(probe or [])
    for n in ladder:
        try:
            for p in points:
                builder(*p, n)
        except TailNormExceeded:
            continue
        return n
    raise TailNormExceeded(f"no cutoff in {ladder} keeps the tail below 1e-10")
