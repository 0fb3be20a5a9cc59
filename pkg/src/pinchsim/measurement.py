"""Threshold detection with per-photon basis rotation and post-selection.

Each photon carries a Jones vector (b_H, b_V).  Measuring in a basis applies
the basis unitary first; a photon then registers +1 when only channel 1
strictly exceeds the threshold, -1 when only channel 2 does, and the event
survives post-selection only if every photon registered exactly one result.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

_SQ2 = 1.0 / np.sqrt(2.0)

#: channel 1 always carries the +1 eigenstate of the measured observable
BASIS_UNITARIES = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "Y": np.array([[_SQ2, -1j * _SQ2], [_SQ2, 1j * _SQ2]], dtype=complex),
}


class Outcome(Enum):
    PLUS = 1
    MINUS = -1
    NONE = 0
    BOTH = 2


def basis_unitary(setting, tol: float = 1e-10) -> np.ndarray:
    """Resolve 'X'/'Y'/'Z' or an explicit 2x2 unitary (validated)."""
    if isinstance(setting, str):
        try:
            return BASIS_UNITARIES[setting]
        except KeyError:
            raise ValueError(f"unknown basis {setting!r}; use X, Y, Z or a matrix")
    u = np.asarray(setting, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError(f"basis matrix must be 2x2, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > tol:
        raise ValueError("basis matrix is not unitary within tolerance")
    return u


def rotate(jones, unitary) -> np.ndarray:
    """Apply the basis unitary to a Jones vector (b_H, b_V)."""
    u = basis_unitary(unitary)
    return u @ np.asarray(jones, dtype=complex)


def detect(pair, gamma: float) -> Outcome:
    """Threshold rule on a rotated pair: strict exceedance, exclusive result."""
    if gamma <= 0:
        raise ValueError(f"threshold must be > 0, got {gamma}")
    h1 = abs(pair[0]) > gamma
    h2 = abs(pair[1]) > gamma
    if h1 and not h2:
        return Outcome.PLUS
    if h2 and not h1:
        return Outcome.MINUS
    return Outcome.BOTH if h1 else Outcome.NONE


def coincidence(outcomes):
    """Signs tuple when every photon fired exclusively, else None."""
    signs = []
    for out in outcomes:
        if out is Outcome.PLUS:
            signs.append(+1)
        elif out is Outcome.MINUS:
            signs.append(-1)
        else:
            return None
    return tuple(signs)


def measure_photon(jones, setting, gamma: float) -> Outcome:
    """rotate -> detect for one photon."""
    return detect(rotate(jones, setting), gamma)


def measure_realization(b, settings, gamma: float):
    """Outcome per photon for one realization of 2n mode amplitudes."""
    b = np.asarray(b, dtype=complex)
    n = b.size // 2
    if len(settings) != n:
        raise ValueError(f"need {n} settings, got {len(settings)}")
    return tuple(
        measure_photon(b[2 * i: 2 * i + 2], settings[i], gamma) for i in range(n)
    )


def measure_block(b_block, settings, gamma: float):
    """Vectorized rotate -> detect -> post-select over a block of realizations.

    Returns (signs, coincident): signs is (count, n) int8 (+1 for channel 1,
    -1 otherwise; meaningful only where coincident), coincident a boolean mask
    of events in which every photon fired exactly one channel.
    """
    b_block = np.asarray(b_block, dtype=complex)
    count, width = b_block.shape
    n = width // 2
    if len(settings) != n:
        raise ValueError(f"need {n} settings, got {len(settings)}")
    signs = np.empty((count, n), dtype=np.int8)
    coincident = np.ones(count, dtype=bool)
    for i in range(n):
        u = basis_unitary(settings[i])
        ch1 = u[0, 0] * b_block[:, 2 * i] + u[0, 1] * b_block[:, 2 * i + 1]
        ch2 = u[1, 0] * b_block[:, 2 * i] + u[1, 1] * b_block[:, 2 * i + 1]
        h1 = np.abs(ch1) > gamma
        h2 = np.abs(ch2) > gamma
        coincident &= h1 ^ h2
        signs[:, i] = np.where(h1 & ~h2, 1, -1).astype(np.int8)
    return signs, coincident


__all__ = [
    "Outcome",
    "BASIS_UNITARIES",
    "basis_unitary",
    "rotate",
    "detect",
    "coincidence",
    "measure_photon",
    "measure_realization",
    "measure_block",
]
