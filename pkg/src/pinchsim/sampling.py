"""Monte Carlo realizations of pinched vacuum states.

Each realization draws one circularly-symmetric complex Gaussian amplitude
per mode (mean zero, E|a|^2 = 1/2) and maps it through the first-order
pinched transform b_i = a_i + sum xi_{i,..} conj(a)...conj(a).

Reproducibility contract: realization `index` of stream (seed, lane) occupies
a fixed range of Philox counter blocks, and the Gaussians come from a
fixed-consumption Box-Muller map, so any chunking / worker layout yields
bitwise-identical amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from .tensor import SymmetricTensor, mode_index, multiset_multiplicity_factor, w_phase_index

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """SplitMix64 finalizer; bijective on 64-bit ints."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass
class SampleStream:
    """Counter-based random stream: (seed, lane) keys a Philox generator.

    `counter` tracks the next realization index for the convenience draw
    methods; block draws take explicit start indices and leave it untouched,
    which is what parallel workers use.
    """

    seed: int
    lane: int = 0
    counter: int = 0

    def substream(self, k: int) -> "SampleStream":
        """Independent child stream; collision probability is 2^-64-scale."""
        return SampleStream(self.seed, _splitmix64((self.lane << 1) ^ _splitmix64(k)))

    def vacuum_block(self, nd: int, start: int, count: int) -> np.ndarray:
        """Realizations [start, start+count) as a (count, nd) complex array.

        Realization i consumes uniform doubles at absolute positions
        [i*2*nd, (i+1)*2*nd) of the (seed, lane) Philox stream, rounded up to
        whole 4-word counter blocks; Box-Muller consumes exactly two uniforms
        per complex amplitude, so the layout never depends on chunking.
        """
        if nd < 1:
            raise ValueError(f"need nd >= 1, got {nd}")
        per = 2 * nd
        blocks_per = (per + 3) // 4
        bits = Philox(key=[self.seed & _MASK64, self.lane & _MASK64])
        bits.advance(start * blocks_per)
        u = Generator(bits).random((count, blocks_per * 4))[:, :per]
        u1 = 1.0 - u[:, 0::2]  # (0, 1]: keeps log finite
        u2 = u[:, 1::2]
        radius = np.sqrt(-2.0 * np.log(u1))
        phase = 2.0 * np.pi * u2
        return 0.5 * radius * (np.cos(phase) + 1j * np.sin(phase))

    def draw(self, nd: int) -> np.ndarray:
        """Next single realization (advances the stream counter)."""
        out = self.vacuum_block(nd, self.counter, 1)[0]
        self.counter += 1
        return out


def draw_vacuum(stream: SampleStream, nd: int) -> np.ndarray:
    """One vector of nd independent complex Gaussians with E|a|^2 = 1/2."""
    return stream.draw(nd)


def first_order_terms(tensor: SymmetricTensor):
    """Per-output-mode contraction lists [(coefficient, conjugated indices)].

    Mode i receives xi_M / prod(multiplicity!) times the conjugated product
    over M minus one copy of i, for every stored multiset M containing i.
    """
    terms = [[] for _ in range(tensor.modes)]
    for key, value in tensor.items():
        for i in sorted(set(key)):
            rest = list(key)
            rest.remove(i)
            rest = tuple(rest)
            coeff = value / multiset_multiplicity_factor(rest)
            terms[i - 1].append((coeff, rest))
    return terms


class GenericTransform:
    """Precompiled first-order transform; apply to single draws or blocks."""

    def __init__(self, tensor: SymmetricTensor):
        self.nd = tensor.modes
        self.terms = first_order_terms(tensor)

    def __call__(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        single = a.ndim == 1
        block = a[None, :] if single else a
        if block.shape[1] != self.nd:
            raise ValueError(f"expected {self.nd} modes, got {block.shape[1]}")
        conj = np.conj(block)
        b = block.copy()
        for i, entries in enumerate(self.terms):
            for coeff, idx in entries:
                prod = np.full(block.shape[0], coeff, dtype=complex)
                for m in idx:
                    prod = prod * conj[:, m - 1]
                b[:, i] += prod
        return b[0] if single else b


def transform_generic(tensor: SymmetricTensor, a: np.ndarray) -> np.ndarray:
    """b_i = a_i + (1/(n-1)!) sum xi_{i,i2..in} conj(a_{i2})...conj(a_{in})."""
    return GenericTransform(tensor)(a)


def transform_ghz(n: int, r: float, theta: float, a: np.ndarray) -> np.ndarray:
    """Product-form GHZ transform: H modes couple to the other H modes.

    b_{iH} = a_{iH} + r prod_{j != i} conj(a_{jH}) and the V row carries
    r e^{i theta}; matches `transform_generic` on `ghz_tensor(n, r, theta)`.
    """
    a = np.asarray(a, dtype=complex)
    single = a.ndim == 1
    block = a[None, :] if single else a
    if block.shape[1] != 2 * n:
        raise ValueError(f"expected {2 * n} modes, got {block.shape[1]}")
    conj = np.conj(block)
    b = block.copy()
    phase = r * np.exp(1j * theta)
    for i in range(n):
        prod_h = np.ones(block.shape[0], dtype=complex)
        prod_v = np.ones(block.shape[0], dtype=complex)
        for j in range(n):
            if j != i:
                prod_h = prod_h * conj[:, 2 * j]
                prod_v = prod_v * conj[:, 2 * j + 1]
        b[:, 2 * i] += r * prod_h
        b[:, 2 * i + 1] += phase * prod_v
    return b[0] if single else b


def transform_w(n: int, r: float, thetas, a: np.ndarray) -> np.ndarray:
    """Product-form W transform with the sqrt(2/n) r prefactor on both rows.

    b_{iH} picks up sum_{j != i} e^{i theta} conj(a_{jV}) prod_{k not in
    {i,j}} conj(a_{kH}); b_{iV} picks up the all-H product with photon i's
    phase.  Matches `transform_generic` on `w_tensor(n, r, thetas)`.
    """
    a = np.asarray(a, dtype=complex)
    single = a.ndim == 1
    block = a[None, :] if single else a
    if block.shape[1] != 2 * n:
        raise ValueError(f"expected {2 * n} modes, got {block.shape[1]}")
    thetas = [0.0] * (n - 1) if thetas is None else list(thetas)
    if len(thetas) != n - 1:
        raise ValueError(f"expected {n - 1} phase angles, got {len(thetas)}")

    def phase_of(photon):
        idx = w_phase_index(n, photon)
        return 1.0 if idx == 0 else np.exp(1j * thetas[idx - 1])

    amp = math.sqrt(2.0 / n) * r
    conj = np.conj(block)
    b = block.copy()
    for i in range(1, n + 1):
        acc_h = np.zeros(block.shape[0], dtype=complex)
        for j in range(1, n + 1):
            if j == i:
                continue
            prod = np.full(block.shape[0], phase_of(j), dtype=complex)
            prod = prod * conj[:, mode_index(j, "V") - 1]
            for k in range(1, n + 1):
                if k != i and k != j:
                    prod = prod * conj[:, mode_index(k, "H") - 1]
            acc_h += prod
        prod_v = np.full(block.shape[0], phase_of(i), dtype=complex)
        for j in range(1, n + 1):
            if j != i:
                prod_v = prod_v * conj[:, mode_index(j, "H") - 1]
        b[:, mode_index(i, "H") - 1] += amp * acc_h
        b[:, mode_index(i, "V") - 1] += amp * prod_v
    return b[0] if single else b


@dataclass
class Realization:
    """One Monte Carlo draw: vacuum amplitudes and their pinched image."""

    a: np.ndarray
    b: np.ndarray


def realize(tensor: SymmetricTensor, stream: SampleStream) -> Realization:
    a = stream.draw(tensor.modes)
    return Realization(a=a, b=transform_generic(tensor, a))


# --- optional raw dump (debugging aid) --------------------------------------

_DUMP_MAGIC = b"PNCHRAW1"


def dump_realizations(path, blocks) -> None:
    """Binary dump: 16-byte header (magic, nd, count), then little-endian
    float64 (re, im) pairs per mode per realization."""
    blocks = [np.asarray(b) for b in blocks]
    nd = blocks[0].shape[1]
    count = sum(b.shape[0] for b in blocks)
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(np.array([nd, count], dtype="<u4").tobytes())
        for block in blocks:
            inter = np.empty((block.shape[0], 2 * nd), dtype="<f8")
            inter[:, 0::2] = block.real
            inter[:, 1::2] = block.imag
            fh.write(inter.tobytes())


def load_realizations(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _DUMP_MAGIC:
            raise ValueError("not a realization dump")
        nd, count = np.frombuffer(fh.read(8), dtype="<u4")
        flat = np.frombuffer(fh.read(), dtype="<f8").reshape(int(count), 2 * int(nd))
    return flat[:, 0::2] + 1j * flat[:, 1::2]


__all__ = [
    "SampleStream",
    "Realization",
    "draw_vacuum",
    "realize",
    "first_order_terms",
    "GenericTransform",
    "transform_generic",
    "transform_ghz",
    "transform_w",
    "dump_realizations",
    "load_realizations",
]
