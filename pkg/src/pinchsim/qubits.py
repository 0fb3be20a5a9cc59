"""Exact n-qubit state utilities: Pauli strings, GHZ/W amplitudes, correlations.

Qubit k of n maps to bit position n-k of the integer basis index, so photon 1
is the most significant bit and H encodes 0.
"""

from __future__ import annotations

import cmath
import math
from functools import reduce
from itertools import product

import numpy as np

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli_string_matrix(label) -> np.ndarray:
    """Kronecker product sigma_{mu_1} x ... x sigma_{mu_n} for a label string/tuple."""
    return reduce(np.kron, (PAULI[c] for c in label))


def pauli_labels(n: int):
    """All 4^n labels over {I,X,Y,Z} in lexicographic (I<X<Y<Z) order."""
    return product("IXYZ", repeat=n)


def ghz_amplitudes(n: int, theta: float = 0.0) -> np.ndarray:
    """(|H..H> + e^{i theta}|V..V>)/sqrt(2) in the integer basis."""
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = 1 / math.sqrt(2)
    amps[-1] = cmath.exp(1j * theta) / math.sqrt(2)
    return amps


def w_amplitudes(n: int, thetas=None) -> np.ndarray:
    """Equal-weight single-V superposition; V on the last photon carries phase 0.

    V on photon i carries thetas[n-i-1], matching the W tensor constructor.
    """
    thetas = [0.0] * (n - 1) if thetas is None else list(thetas)
    if len(thetas) != n - 1:
        raise ValueError(f"expected {n - 1} phase angles, got {len(thetas)}")
    amps = np.zeros(2**n, dtype=complex)
    for photon in range(1, n + 1):
        idx = n - photon  # phase angle number; 0 for the last photon
        phase = 0.0 if idx == 0 else thetas[idx - 1]
        amps[1 << (n - photon)] = cmath.exp(1j * phase) / math.sqrt(n)
    return amps


def exact_correlation(amplitudes, label) -> float:
    """<psi| sigma_label |psi> for a normalized pure state (real by Hermiticity)."""
    psi = np.asarray(amplitudes, dtype=complex)
    return float(np.real(psi.conj() @ pauli_string_matrix(label) @ psi))


def exact_correlation_table(amplitudes) -> dict:
    """All 4^n Pauli correlations of a pure state."""
    psi = np.asarray(amplitudes, dtype=complex)
    n = psi.size.bit_length() - 1
    return {label: exact_correlation(psi, label) for label in pauli_labels(n)}


def pure_density(amplitudes) -> np.ndarray:
    psi = np.asarray(amplitudes, dtype=complex)
    return np.outer(psi, psi.conj())


__all__ = [
    "PAULI",
    "pauli_string_matrix",
    "pauli_labels",
    "ghz_amplitudes",
    "w_amplitudes",
    "exact_correlation",
    "exact_correlation_table",
    "pure_density",
]
