"""Cramer-Rao bounds from a 2x2 QFI matrix."""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from ..errors import AxisMismatch, SingularFisherMatrix
from .qfi import QfiMatrix

DET_TOL = 1e-12


class VarianceBounds(NamedTuple):
    var_g1: float
    var_g2: float
    info_g1: float  # I_11 - I_12^2 / I_22, the inverse of var_g1


def _matrix(I) -> np.ndarray:
    M = np.asarray(I.I if isinstance(I, QfiMatrix) else I, dtype=float)
    if M.shape != (2, 2):
        raise ValueError(f"expected a 2x2 QFI matrix, got shape {M.shape}")
    return M


def _det(M: np.ndarray) -> float:
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if det <= DET_TOL * max(1.0, float(np.max(np.abs(M))) ** 2):
        raise SingularFisherMatrix(f"det I = {det:.3g} is not positive")
    return det


def variance_bounds(I) -> VarianceBounds:
    """Lower bounds on Var(gamma1) and Var(gamma2) from the inverse QFI."""
    M = _matrix(I)
    det = _det(M)
    return VarianceBounds(M[1, 1] / det, M[0, 0] / det, det / M[1, 1])


def rot_diff_bounds(I, phi1: Optional[float] = None, phi2: Optional[float] = None):
    """Effective QFI for the rotation difference (gamma2 - gamma1)/sqrt(2).

    Returns (uncorrelated, correlated) = (2 det/(I11+I22), 2 det/(I11+I22+2 I12)).
    The difference is normalized so that equal spins at the optimal point
    reach 4 S1 S2. Both rotations must share an axis.
    """
    if phi1 is not None and phi2 is not None and not np.isclose(phi1, phi2, rtol=0, atol=1e-12):
        raise AxisMismatch(f"rotation-difference bounds need phi1 == phi2, got {phi1} and {phi2}")
    M = _matrix(I)
    det = _det(M)
    tr = M[0, 0] + M[1, 1]
    return 2 * det / tr, 2 * det / (tr + 2 * M[0, 1])
