"""Mermin operator terms, bounds, and the sampled Mermin statistic.

M_n expands into 2^(n-1) X/Y correlation terms with an even number of Y
factors; a term acquires a minus sign when its Y count is an odd multiple of
two.  Each term is measured as its own setting on its own post-selected
subensemble, which is what lets the threshold-detector model exceed the
noncontextual bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .measurement import measure_block
from .sampling import GenericTransform, SampleStream
from .tensor import SymmetricTensor


@dataclass(frozen=True)
class MerminTerm:
    sign: int
    bases: str  # e.g. "XYY"


def mermin_terms(n: int):
    """All 2^(n-1) even-Y terms in lexicographic order with pair-parity signs."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    terms = []
    for combo in product("XY", repeat=n):
        n_y = combo.count("Y")
        if n_y % 2 == 0:
            sign = 1 if (n_y // 2) % 2 == 0 else -1
            terms.append(MerminTerm(sign=sign, bases="".join(combo)))
    return terms


def classical_bound(n: int) -> float:
    """Noncontextual hidden-variable bound: 2^(n/2) even n, 2^((n-1)/2) odd."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 2.0 ** (n / 2) if n % 2 == 0 else 2.0 ** ((n - 1) / 2)


def quantum_bound(n: int) -> float:
    """GHZ expectation 2^(n-1), the quantum maximum."""
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    return 2.0 ** (n - 1)


@dataclass
class TermEstimate:
    bases: str
    sign: int
    expectation: float  # nan when the subensemble is empty
    coincidences: int


@dataclass
class MerminResult:
    n: int
    statistic: float  # nan when any term had zero coincidences
    terms: list
    samples_per_setting: int

    @property
    def available(self) -> bool:
        return not math.isnan(self.statistic)


def term_expectation(tensor: SymmetricTensor, bases: str, gamma: float,
                     samples: int, stream: SampleStream,
                     block_size: int = 1 << 17):
    """Post-selected product expectation of one X/Y setting.

    Returns (sum of sign products, coincidence count).
    """
    transform = GenericTransform(tensor)
    nd = tensor.modes
    total = 0
    count = 0
    done = 0
    while done < samples:
        chunk = min(block_size, samples - done)
        a = stream.vacuum_block(nd, done, chunk)
        signs, ok = measure_block(transform(a), bases, gamma)
        kept = signs[ok]
        count += kept.shape[0]
        if kept.shape[0]:
            total += int(np.prod(kept, axis=1, dtype=np.int64).sum())
        done += chunk
    return total, count


def mermin_statistic(tensor: SymmetricTensor, gamma: float, samples_per_setting: int,
                     stream: SampleStream, block_size: int = 1 << 17) -> MerminResult:
    """Estimate M_n: per-term post-selected expectations combined with signs."""
    n = tensor.n
    estimates = []
    total = 0.0
    missing = False
    for k, term in enumerate(mermin_terms(n)):
        sub = stream.substream(k)
        tot, cnt = term_expectation(tensor, term.bases, gamma, samples_per_setting,
                                    sub, block_size)
        expectation = tot / cnt if cnt else math.nan
        estimates.append(TermEstimate(term.bases, term.sign, expectation, cnt))
        if cnt == 0:
            missing = True
        else:
            total += term.sign * expectation
    return MerminResult(
        n=n,
        statistic=math.nan if missing else total,
        terms=estimates,
        samples_per_setting=samples_per_setting,
    )


def mermin_scan(tensor_family, gamma: float, grid, samples_per_setting: int,
                stream: SampleStream):
    """Evaluate the Mermin statistic over a pinching-strength grid.

    `tensor_family` maps r to a SymmetricTensor.  Per-point failures (no
    coincidences) are recorded as nan statistics and the scan continues.
    Returns a list of (r, MerminResult).
    """
    rows = []
    for k, r in enumerate(grid):
        sub = stream.substream(10_000 + k)
        rows.append((r, mermin_statistic(tensor_family(r), gamma,
                                         samples_per_setting, sub)))
    return rows


__all__ = [
    "MerminTerm",
    "TermEstimate",
    "MerminResult",
    "mermin_terms",
    "classical_bound",
    "quantum_bound",
    "term_expectation",
    "mermin_statistic",
    "mermin_scan",
]
