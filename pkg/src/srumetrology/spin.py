"""Spin-S operators and states in the |S,M> basis (M descending from S to -S).

Spins are stored as twice-spin integers so that half-integer parity is decided
by integer arithmetic. Bipartite states use the ordering |j,k> with the main
spin index slow and the probe index fast, i.e. ``np.kron(main, probe)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from .errors import InvalidSpin

MAX_TWICE_SPIN = 128  # S <= 64

SpinLike = Union["SpinLabel", int, float, Fraction, str]


@dataclass(frozen=True, order=True)
class SpinLabel:
    """Spin quantum number S stored as the integer 2S."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise InvalidSpin(f"twice-spin must be an integer, got {self.twice!r}")
        if not 1 <= self.twice <= MAX_TWICE_SPIN:
            raise InvalidSpin(f"spin must lie in [1/2, {MAX_TWICE_SPIN // 2}], got {self.twice}/2")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value: SpinLike) -> "SpinLabel":
        """Coerce an int, float, Fraction or string like ``"3/2"`` to a label."""
        if isinstance(value, SpinLabel):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except ValueError as exc:
                raise InvalidSpin(f"cannot parse spin {value!r}") from exc
        if isinstance(value, Fraction):
            if (2 * value).denominator != 1:
                raise InvalidSpin(f"spin must be a multiple of 1/2, got {value}")
            return cls(int(2 * value))
        twice = 2.0 * float(value)
        if not np.isfinite(twice) or abs(twice - round(twice)) > 1e-9:
            raise InvalidSpin(f"spin must be a multiple of 1/2, got {value!r}")
        return cls(int(round(twice)))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def dim(self) -> int:
        return self.twice + 1

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    @property
    def m(self) -> np.ndarray:
        """Magnetic quantum numbers S, S-1, ..., -S."""
        return _m_values(self.twice)

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"


def as_spin(value: SpinLike) -> SpinLabel:
    return SpinLabel.of(value)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def _m_values(twice: int) -> np.ndarray:
    return _readonly(twice / 2 - np.arange(twice + 1, dtype=float))


@dataclass(frozen=True)
class SpinState:
    """State vector of one spin or of a (main, probe) pair."""

    vec: np.ndarray
    spins: tuple = field(default=())

    def __post_init__(self):
        vec = np.array(self.vec, dtype=complex)
        spins = tuple(as_spin(s) for s in self.spins)
        if not spins:
            raise InvalidSpin("a SpinState needs at least one spin label")
        expected = int(np.prod([s.dim for s in spins]))
        if vec.shape != (expected,):
            raise ValueError(f"vector of shape {vec.shape} does not match spins {[str(s) for s in spins]}")
        object.__setattr__(self, "vec", _readonly(vec))
        object.__setattr__(self, "spins", spins)

    @property
    def dim(self) -> int:
        return self.vec.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.vec if not copy else self.vec.copy()
        return self.vec.astype(dtype)

    def __len__(self):
        return self.dim


def _vec(psi) -> np.ndarray:
    return psi.vec if isinstance(psi, SpinState) else np.asarray(psi)


# --- operators ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _sz(twice: int) -> np.ndarray:
    return _readonly(np.diag(_m_values(twice)).astype(complex))


@lru_cache(maxsize=None)
def _ladder(twice: int):
    s = twice / 2
    m = _m_values(twice)
    # S_+|S,M> lands one row up, since rows run M = S..-S
    up = np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1))
    sp = np.diag(up, k=1).astype(complex)
    return _readonly(sp), _readonly(sp.conj().T.copy())


def sz_operator(S: SpinLike) -> np.ndarray:
    return _sz(as_spin(S).twice)


def ladder_operators(S: SpinLike):
    """Return (S_+, S_-)."""
    return _ladder(as_spin(S).twice)


def spin_operators(S: SpinLike):
    """Return (S_x, S_y, S_z)."""
    sp, sm = ladder_operators(S)
    return (sp + sm) / 2, (sp - sm) / 2j, sz_operator(S)


def spin_axis_operator(S: SpinLike, phi: float) -> np.ndarray:
    """S(phi) = cos(phi) S_x + sin(phi) S_y."""
    sx, sy, _ = spin_operators(S)
    return np.cos(phi) * sx + np.sin(phi) * sy


def expm_hermitian(H: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(i t H) for Hermitian H, via eigendecomposition."""
    w, v = np.linalg.eigh(H)
    return (v * np.exp(1j * t * w)) @ v.conj().T


def rotation(S: SpinLike, gamma: float, phi: float) -> np.ndarray:
    """exp(i gamma S(phi))."""
    return expm_hermitian(spin_axis_operator(S, phi), gamma)


def oat_squeeze(S: SpinLike, mu: float) -> np.ndarray:
    """One-axis twisting exp(i mu S_z^2), diagonal."""
    return np.diag(oat_phases(S, mu))


def oat_phases(S: SpinLike, mu: float) -> np.ndarray:
    m = as_spin(S).m
    return np.exp(1j * mu * m * m)


def two_spin_squeeze(S_M: SpinLike, S_P: SpinLike, mu: float) -> np.ndarray:
    """exp(i mu S_z x S_z) on the bipartite basis, diagonal."""
    return np.diag(two_spin_phases(S_M, S_P, mu))


def two_spin_phases(S_M: SpinLike, S_P: SpinLike, mu: float) -> np.ndarray:
    jk = np.multiply.outer(as_spin(S_M).m, as_spin(S_P).m).ravel()
    return np.exp(1j * mu * jk)


# --- states ------------------------------------------------------------------

def log_binomial(n, k):
    return gammaln(np.asarray(n) + 1.0) - gammaln(np.asarray(k) + 1.0) - gammaln(np.asarray(n) - k + 1.0)


def coherent_state(S: SpinLike, theta: float, phi: float) -> SpinState:
    """Spin coherent state |S,S>_{theta,phi} pointing along (theta, phi)."""
    spin = as_spin(S)
    s, m = spin.value, spin.m
    up = s + m
    down = s - m
    amp = np.exp(0.5 * log_binomial(2 * s, up))
    amp = amp * np.power(np.cos(theta / 2), up) * np.power(np.sin(theta / 2), down)
    vec = amp * np.exp(1j * down * phi)
    return SpinState(vec / np.linalg.norm(vec), (spin,))


def scs_x(S: SpinLike) -> SpinState:
    """Coherent state along +X."""
    return coherent_state(S, np.pi / 2, 0.0)


def basis_state(S: SpinLike, M) -> SpinState:
    spin = as_spin(S)
    idx = int(round(spin.value - float(M)))
    if not 0 <= idx < spin.dim or abs(spin.value - float(M) - idx) > 1e-9:
        raise InvalidSpin(f"M={M} is not a projection of S={spin}")
    vec = np.zeros(spin.dim, complex)
    vec[idx] = 1.0
    return SpinState(vec, (spin,))


def tensor(a: SpinState, b: SpinState) -> SpinState:
    return SpinState(np.kron(a.vec, b.vec), a.spins + b.spins)


def rotate(psi: SpinState, gamma: float, phi: float, target: int = 0) -> SpinState:
    """Apply exp(i gamma S(phi)) to subsystem ``target`` of ``psi``."""
    if not 0 <= target < len(psi.spins):
        raise ValueError(f"target {target} out of range for {len(psi.spins)} subsystem(s)")
    U = rotation(psi.spins[target], gamma, phi)
    return SpinState(apply_local(U, psi.vec, [s.dim for s in psi.spins], target), psi.spins)


def apply_local(U: np.ndarray, vec: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """Apply ``U`` on one tensor factor of ``vec``."""
    if U.shape != (dims[target], dims[target]):
        raise ValueError(f"operator shape {U.shape} does not match subsystem dimension {dims[target]}")
    t = np.asarray(vec).reshape(dims)
    t = np.moveaxis(np.tensordot(U, t, axes=([1], [target])), 0, target)
    return t.reshape(-1)


def expectation(A: np.ndarray, psi) -> complex:
    v = _vec(psi)
    if A.shape != (v.shape[0], v.shape[0]):
        raise ValueError(f"operator shape {A.shape} does not match state dimension {v.shape[0]}")
    return complex(np.vdot(v, A @ v))


def overlap(a, b) -> complex:
    """<a|b>."""
    va, vb = _vec(a), _vec(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch {va.shape} vs {vb.shape}")
    return complex(np.vdot(va, vb))


def fidelity(a, b) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(overlap(a, b)) ** 2


def is_hermitian(A: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(A - A.conj().T), initial=0.0) <= tol)


def is_unitary(U: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])), initial=0.0) <= tol)
