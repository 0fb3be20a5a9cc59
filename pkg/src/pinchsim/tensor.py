"""Symmetric pinching tensors and the standard multiphoton state constructors.

A rank-n pinching tensor over nd modes is fully symmetric under index
permutations, so it is stored sparsely as a map from the *sorted* index
multiset to a complex value.  Indices are 1-based to match the usual mode
labelling (photon 1 horizontal = mode 1, photon 1 vertical = mode 2, ...).
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, field


def distinct_element_count(n: int, d: int) -> int:
    """Maximum number of distinct entries of a rank-n symmetric tensor on n*d modes.

    Counts index multisets with k distinct indices for k = 1..n, i.e.
    sum_k C(nd, k).  Exact integer arithmetic (Python ints do not overflow).
    """
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return sum(math.comb(n * d, k) for k in range(1, n + 1))


@dataclass(frozen=True)
class ModeLabel:
    """Photon/polarization label for the d=2 convention.

    Photon k occupies flat modes 2k-1 (H) and 2k (V).
    """

    photon: int
    polarization: str  # 'H' or 'V'

    def __post_init__(self):
        if self.photon < 1:
            raise ValueError(f"photon index must be >= 1, got {self.photon}")
        if self.polarization not in ("H", "V"):
            raise ValueError(f"polarization must be 'H' or 'V', got {self.polarization!r}")

    @property
    def flat(self) -> int:
        return 2 * (self.photon - 1) + (1 if self.polarization == "H" else 2)

    @classmethod
    def from_flat(cls, index: int) -> "ModeLabel":
        if index < 1:
            raise ValueError(f"flat mode index must be >= 1, got {index}")
        return cls(photon=(index - 1) // 2 + 1, polarization="H" if index % 2 == 1 else "V")

    def __str__(self):
        return f"{self.photon}{self.polarization}"


def mode_index(photon: int, polarization: str) -> int:
    """Flat 1-based mode index of (photon, 'H'|'V')."""
    return ModeLabel(photon, polarization).flat


@dataclass(frozen=True)
class SymmetricTensor:
    """Sparse symmetric rank-n tensor keyed by sorted index multisets.

    `entries` maps a sorted tuple of n indices (each in 1..n*d) to a complex
    value.  Permutation symmetry is structural: every lookup canonicalizes the
    index order first.  Instances are immutable after construction; do not
    mutate the entry map.
    """

    n: int
    d: int
    entries: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError(f"need n >= 1 and d >= 1, got n={self.n}, d={self.d}")
        nd = self.n * self.d
        canonical = {}
        for key, value in self.entries.items():
            key = tuple(sorted(key))
            if len(key) != self.n:
                raise ValueError(f"index tuple {key} does not have rank {self.n}")
            if key[0] < 1 or key[-1] > nd:
                raise ValueError(f"index tuple {key} outside 1..{nd}")
            if key in canonical and canonical[key] != complex(value):
                raise ValueError(f"conflicting values for index multiset {key}")
            canonical[key] = complex(value)
        object.__setattr__(self, "entries", canonical)

    @property
    def modes(self) -> int:
        return self.n * self.d

    def value(self, *indices: int) -> complex:
        """Tensor entry for any index order; zero when not stored."""
        if len(indices) != self.n:
            raise ValueError(f"expected {self.n} indices, got {len(indices)}")
        return self.entries.get(tuple(sorted(indices)), 0.0 + 0.0j)

    def items(self):
        """(sorted index tuple, value) pairs in deterministic key order."""
        return sorted(self.entries.items())

    def norm_squared(self) -> float:
        """Sum of |value|^2 over distinct multisets."""
        return sum(abs(v) ** 2 for v in self.entries.values())

    def as_matrix(self):
        """Dense (nd x nd) matrix view; rank-2 tensors only."""
        import numpy as np

        if self.n != 2:
            raise ValueError("matrix view is defined for rank-2 tensors only")
        nd = self.modes
        xi = np.zeros((nd, nd), dtype=complex)
        for (i, j), v in self.entries.items():
            xi[i - 1, j - 1] = v
            xi[j - 1, i - 1] = v
        return xi


def ghz_tensor(n: int, r: float, theta: float = 0.0) -> SymmetricTensor:
    """Pinching tensor of the n-photon GHZ state (|H..H> + e^{i theta}|V..V>)/sqrt(2).

    Value r on the all-H multiset (odd flat indices), r*e^{i theta} on the
    all-V multiset (even flat indices), zero elsewhere.
    """
    if n < 2:
        raise ValueError(f"GHZ tensor needs n >= 2, got {n}")
    if r < 0:
        raise ValueError(f"pinching strength must be >= 0, got {r}")
    entries = {}
    if r > 0:
        entries[tuple(2 * k + 1 for k in range(n))] = complex(r)
        entries[tuple(2 * k + 2 for k in range(n))] = r * cmath.exp(1j * theta)
    return SymmetricTensor(n=n, d=2, entries=entries)


def w_phase_index(n: int, photon: int) -> int:
    """Position of the phase angle attached to the V-excitation of `photon`.

    The term with V on the last photon is listed first and carries phase 0;
    V on photon i carries angle number n - i (1-based into `thetas`).
    """
    return n - photon


def w_tensor(n: int, r: float, thetas=None) -> SymmetricTensor:
    """Pinching tensor of the n-photon W state.

    One entry per photon j: the multiset with V on photon j and H on the
    others holds sqrt(2/n) * r * e^{i theta}, where the term with V on the
    last photon carries phase 0 and V on photon j carries thetas[n-j-1].
    """
    if n < 2:
        raise ValueError(f"W tensor needs n >= 2, got {n}")
    if r < 0:
        raise ValueError(f"pinching strength must be >= 0, got {r}")
    thetas = [0.0] * (n - 1) if thetas is None else list(thetas)
    if len(thetas) != n - 1:
        raise ValueError(f"expected {n - 1} phase angles, got {len(thetas)}")
    amp = math.sqrt(2.0 / n) * r
    entries = {}
    if r > 0:
        for photon in range(1, n + 1):
            key = tuple(
                mode_index(k, "V" if k == photon else "H") for k in range(1, n + 1)
            )
            idx = w_phase_index(n, photon)
            phase = 0.0 if idx == 0 else thetas[idx - 1]
            entries[tuple(sorted(key))] = amp * cmath.exp(1j * phase)
    return SymmetricTensor(n=n, d=2, entries=entries)


def qubit_state_tensor(amplitudes, r: float, norm_tol: float = 1e-12) -> SymmetricTensor:
    """Pinching tensor encoding an arbitrary n-qubit state.

    `amplitudes` has length 2^n and unit Euclidean norm; bit (n-k) of the
    integer index is qubit k (photon 1 = most significant bit, 0 = H).  Each
    bitstring s puts r*amplitudes[s] on the multiset that gives photon k mode
    H or V according to s.  With unit-norm amplitudes the pinched state is
    |0> + (r/sqrt(2)) * sqrt(2)|psi>, so feeding r = sqrt(2)*r0 reproduces the
    GHZ/W constructors at strength r0 exactly.
    """
    amplitudes = [complex(a) for a in amplitudes]
    size = len(amplitudes)
    n = size.bit_length() - 1
    if size != 2**n or n < 1:
        raise ValueError(f"amplitude vector length {size} is not a power of two")
    norm = math.fsum(abs(a) ** 2 for a in amplitudes)
    if abs(norm - 1.0) > norm_tol:
        raise ValueError(f"amplitude vector norm^2 = {norm!r} is not 1 within {norm_tol}")
    entries = {}
    for s, a in enumerate(amplitudes):
        if a == 0:
            continue
        key = tuple(
            mode_index(k, "V" if (s >> (n - k)) & 1 else "H") for k in range(1, n + 1)
        )
        entries[tuple(sorted(key))] = r * a
    return SymmetricTensor(n=n, d=2, entries=entries)


def distinct_index_histogram(tensor: SymmetricTensor) -> Counter:
    """Number of stored multisets per count of distinct indices."""
    return Counter(len(set(key)) for key in tensor.entries)


def multiset_multiplicity_factor(key) -> int:
    """Product of factorials of index multiplicities of a sorted multiset."""
    return math.prod(math.factorial(m) for m in Counter(key).values())


# --- text serialization -----------------------------------------------------

_HEADER = "pinch-tensor v1"


def to_text(tensor: SymmetricTensor) -> str:
    """Serialize to the line-oriented text format (17 significant digits)."""
    lines = [f"{_HEADER} n={tensor.n} d={tensor.d}"]
    for key, value in tensor.items():
        idx = ",".join(str(i) for i in key)
        lines.append(f"{idx} {value.real:.17g} {value.imag:.17g}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> SymmetricTensor:
    """Parse the text format written by `to_text`; bit-exact round trip."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith(_HEADER):
        raise ValueError(f"missing '{_HEADER}' header")
    fields = dict(part.split("=") for part in lines[0][len(_HEADER):].split())
    n, d = int(fields["n"]), int(fields["d"])
    entries = {}
    for ln in lines[1:]:
        idx_part, re_part, im_part = ln.split()
        key = tuple(int(i) for i in idx_part.split(","))
        entries[key] = complex(float(re_part), float(im_part))
    return SymmetricTensor(n=n, d=d, entries=entries)


def write_text(tensor: SymmetricTensor, path) -> None:
    with open(path, "w") as fh:
        fh.write(to_text(tensor))


def read_text(path) -> SymmetricTensor:
    with open(path) as fh:
        return from_text(fh.read())


def max_keys_with_k_distinct(n: int, d: int, k: int) -> int:
    """Upper bound C(nd, k) on stored multisets using exactly k distinct indices."""
    return math.comb(n * d, k) if 1 <= k <= n else 0


def all_multisets(n: int, d: int):
    """All sorted index multisets of rank n over n*d modes (small n*d only)."""
    from itertools import combinations_with_replacement

    return combinations_with_replacement(range(1, n * d + 1), n)


__all__ = [
    "SymmetricTensor",
    "ModeLabel",
    "mode_index",
    "distinct_element_count",
    "ghz_tensor",
    "w_tensor",
    "w_phase_index",
    "qubit_state_tensor",
    "distinct_index_histogram",
    "multiset_multiplicity_factor",
    "to_text",
    "from_text",
    "write_text",
    "read_text",
    "max_keys_with_k_distinct",
    "all_multisets",
]
