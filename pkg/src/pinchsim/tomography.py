"""Linear quantum state tomography from post-selected threshold counts.

All 3^n fully non-identity settings are measured; labels with identity
positions are estimated within the same post-selected subensemble by
averaging the sign product over the non-identity positions only.  Labels
reachable from several settings are combined with coincidence-count weights.
The reconstruction rho = 2^-n sum T(mu) sigma_mu is linear: no positivity
constraint, so finite-sample fidelities may exceed one, as expected of this
estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .measurement import measure_block
from .qubits import pauli_labels, pauli_string_matrix
from .sampling import GenericTransform, SampleStream
from .tensor import SymmetricTensor


class MissingLabelsError(RuntimeError):
    """Reconstruction was attempted with unmeasured Pauli labels."""


@dataclass
class CorrelationTable:
    """Estimated Pauli correlations plus per-setting coincidence counts."""

    n: int
    values: dict = field(default_factory=dict)        # label tuple -> estimate
    label_counts: dict = field(default_factory=dict)  # label tuple -> coincidences
    setting_counts: dict = field(default_factory=dict)  # setting tuple -> coincidences
    samples_per_setting: int = 0

    def value(self, label) -> float:
        return self.values[tuple(label)]

    @property
    def missing_labels(self):
        return [lab for lab in pauli_labels(self.n) if lab not in self.values]

    @property
    def total_coincidences(self) -> int:
        return sum(self.setting_counts.values())


def measurement_settings(n: int):
    """The 3^n all-non-identity settings in lexicographic (X<Y<Z) order."""
    return list(product("XYZ", repeat=n))


def _accumulate_setting(tensor, setting, gamma, samples, stream, block_size):
    """Sums of sign products for every identity mask of one setting.

    Returns (mask -> signed sum, coincidence count); mask bit i selects
    photon i (0-based) as a non-identity position.
    """
    transform = GenericTransform(tensor)
    n = tensor.n
    nd = tensor.modes
    sums = np.zeros(1 << n, dtype=np.int64)
    count = 0
    done = 0
    while done < samples:
        chunk = min(block_size, samples - done)
        a = stream.vacuum_block(nd, done, chunk)
        signs, ok = measure_block(transform(a), setting, gamma)
        kept = signs[ok].astype(np.int64)
        count += kept.shape[0]
        if kept.shape[0]:
            prods = [np.ones(kept.shape[0], dtype=np.int64)]
            for mask in range(1, 1 << n):
                low = mask & -mask
                prods.append(prods[mask ^ low] * kept[:, low.bit_length() - 1])
                sums[mask] += prods[mask].sum()
        done += chunk
    sums[0] = count  # empty product
    return sums, count


def run_tomography(tensor: SymmetricTensor, gamma: float, samples_per_setting: int,
                   stream: SampleStream, block_size: int = 1 << 17,
                   workers: int = 1) -> CorrelationTable:
    """Measure all 3^n settings and assemble the 4^n correlation table.

    Each setting draws its own fresh realizations from a dedicated substream;
    merging is deterministic and independent of worker count.  A label is
    missing only if every contributing setting had zero coincidences;
    T(I,...,I) is pinned to 1 exactly.
    """
    if samples_per_setting < 1:
        raise ValueError(f"need samples_per_setting >= 1, got {samples_per_setting}")
    n = tensor.n
    settings = measurement_settings(n)
    tasks = [
        (tensor, setting, gamma, samples_per_setting, stream.substream(k), block_size)
        for k, setting in enumerate(settings)
    ]
    results = _map_tasks(_accumulate_setting, tasks, workers)

    numerators = {}
    denominators = {}
    setting_counts = {}
    for setting, (sums, count) in zip(settings, results):
        setting_counts[setting] = count
        for mask in range(1 << n):
            label = tuple(setting[i] if (mask >> i) & 1 else "I" for i in range(n))
            numerators[label] = numerators.get(label, 0) + int(sums[mask])
            denominators[label] = denominators.get(label, 0) + count

    table = CorrelationTable(n=n, samples_per_setting=samples_per_setting,
                             setting_counts=setting_counts)
    for label, num in numerators.items():
        den = denominators[label]
        if den > 0:
            table.values[label] = num / den
            table.label_counts[label] = den
    table.values[("I",) * n] = 1.0
    table.label_counts[("I",) * n] = denominators.get(("I",) * n, 0)
    return table


def _map_tasks(fn, tasks, workers):
    """Ordered map over argument tuples, optionally across processes."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    import concurrent.futures as cf

    with cf.ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *t) for t in tasks]
        return [f.result() for f in futures]


def reconstruct(table: CorrelationTable) -> np.ndarray:
    """Linear inversion rho = 2^-n sum_mu T(mu) sigma_mu, then Hermitize."""
    missing = table.missing_labels
    if missing:
        raise MissingLabelsError(
            f"{len(missing)} Pauli labels unmeasured (zero coincidences), "
            f"first few: {missing[:4]}"
        )
    n = table.n
    rho = np.zeros((2**n, 2**n), dtype=complex)
    for label in pauli_labels(n):
        rho += table.values[label] * pauli_string_matrix(label)
    rho /= 2**n
    return (rho + rho.conj().T) / 2


def fidelity(rho: np.ndarray, target) -> float:
    """Re <target| rho |target> for a normalized target state."""
    target = np.asarray(target, dtype=complex)
    return float(np.real(target.conj() @ rho @ target))


def fidelity_standard_error(table: CorrelationTable, target) -> float:
    """Propagated single-run standard error of the fidelity estimate.

    Treats label estimates as independent binomial-like means with variance
    (1 - T^2)/N; covariances between labels sharing subensembles are ignored,
    so this is a scale indicator, not a rigorous interval.
    """
    target = np.asarray(target, dtype=complex)
    n = table.n
    var = 0.0
    for label in pauli_labels(n):
        weight = float(np.real(target.conj() @ pauli_string_matrix(label) @ target))
        if weight == 0.0 or all(c == "I" for c in label):
            continue
        t_hat = table.values.get(label)
        count = table.label_counts.get(label, 0)
        if t_hat is None or count == 0:
            return math.inf
        var += weight**2 * max(0.0, 1.0 - t_hat**2) / count
    return math.sqrt(var) / (2**n)


def run_fidelity(tensor: SymmetricTensor, gamma: float, samples_per_setting: int,
                 stream: SampleStream, target, block_size: int = 1 << 17,
                 workers: int = 1):
    """Tomography -> reconstruction -> fidelity; returns (F, table, rho)."""
    table = run_tomography(tensor, gamma, samples_per_setting, stream,
                           block_size, workers)
    rho = reconstruct(table)
    return fidelity(rho, target), table, rho


def fidelity_with_uncertainty(tensor: SymmetricTensor, gamma: float,
                              samples_per_setting: int, repeats: int,
                              stream: SampleStream, target,
                              block_size: int = 1 << 17, workers: int = 1):
    """Sample mean and standard deviation of F over independent repeats."""
    if repeats < 2:
        raise ValueError(f"need repeats >= 2, got {repeats}")
    values = []
    for rep in range(repeats):
        sub = stream.substream(500_000 + rep)
        f, _, _ = run_fidelity(tensor, gamma, samples_per_setting, sub, target,
                               block_size, workers)
        values.append(f)
    values = np.array(values)
    return float(values.mean()), float(values.std(ddof=1))


# --- text export ------------------------------------------------------------

def density_matrix_to_text(rho: np.ndarray) -> str:
    """Dimension header then row-major 're im' pairs at 17 significant digits."""
    dim = rho.shape[0]
    lines = [str(dim)]
    for row in rho:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    return "\n".join(lines) + "\n"


def density_matrix_from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    dim = int(lines[0])
    rho = np.zeros((dim, dim), dtype=complex)
    for i, ln in enumerate(lines[1: dim + 1]):
        parts = [float(x) for x in ln.split()]
        rho[i] = [complex(parts[2 * j], parts[2 * j + 1]) for j in range(dim)]
    return rho


def correlation_table_rows(table: CorrelationTable):
    """CSV rows `labels,mu_value,coincidences,samples` in label order."""
    rows = []
    for label in pauli_labels(table.n):
        if label in table.values:
            rows.append((
                "".join(label),
                table.values[label],
                table.label_counts.get(label, 0),
                table.samples_per_setting,
            ))
        else:
            rows.append(("".join(label), math.nan, 0, table.samples_per_setting))
    return rows


__all__ = [
    "CorrelationTable",
    "MissingLabelsError",
    "measurement_settings",
    "run_tomography",
    "reconstruct",
    "fidelity",
    "fidelity_standard_error",
    "run_fidelity",
    "fidelity_with_uncertainty",
    "density_matrix_to_text",
    "density_matrix_from_text",
    "correlation_table_rows",
]
