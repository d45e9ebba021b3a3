"""Squeezing-rotation-unsqueezing (SRU) spin metrology.

Submodules: ``spin`` (operators and states), ``protocols`` (SRU states),
``metrology`` (QFI, closed forms, bounds), ``fock`` (bosonic SDU),
``wigner`` (spherical Wigner function), ``cli``.
"""
from . import errors, fock, metrology, protocols, spin, wigner
from .spin import SpinLabel, SpinState

__version__ = "0.1.0"

__all__ = ["errors", "fock", "metrology", "protocols", "spin", "wigner", "SpinLabel", "SpinState"]
