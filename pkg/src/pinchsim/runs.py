"""Experiment orchestration: builds tensors, runs pipelines, writes CSV.

Every output file starts with a `# key=value` metadata block carrying the
full configuration, so re-running the same file reproduces the data rows
bitwise.
"""

from __future__ import annotations

import math

import numpy as np

from . import fock, qubits, tensor as tensor_mod, tomography
from .config import ConfigError, ExperimentConfig
from .mermin import classical_bound, mermin_statistic, mermin_terms, quantum_bound
from .sampling import SampleStream, transform_generic
from .tensor import SymmetricTensor, ghz_tensor, qubit_state_tensor, w_tensor


class StatisticalFailure(RuntimeError):
    """Zero coincidences where a result is required; CLI exit code 3."""


class OracleFailure(RuntimeError):
    """An oracle-suite check exceeded its threshold; CLI exit code 4."""


# --- tensor / target construction -------------------------------------------

def build_tensor(cfg: ExperimentConfig, r=None, n=None) -> SymmetricTensor:
    """Tensor for the configured state; `r`/`n` override the config for scans.

    Custom tensors come from their file as-is: they carry their own rank and
    cannot be rescaled or re-ranked over a grid.
    """
    if cfg.state == "GHZ":
        return ghz_tensor(cfg.n if n is None else n,
                          cfg.r if r is None else r, cfg.theta)
    if cfg.state == "W":
        thetas = list(cfg.thetas) if cfg.thetas else None
        return w_tensor(cfg.n if n is None else n,
                        cfg.r if r is None else r, thetas)
    tens = tensor_mod.read_text(cfg.tensor_file)
    if r is not None and r != cfg.r:
        raise ConfigError("custom tensors cannot be rescaled over a grid")
    if n is not None and n != tens.n:
        raise ConfigError(
            f"custom tensor has rank {tens.n}, cannot serve photon number {n}"
        )
    return tens


def target_amplitudes(cfg: ExperimentConfig, n=None) -> np.ndarray:
    n = cfg.n if n is None else n
    if cfg.state == "GHZ":
        return qubits.ghz_amplitudes(n, cfg.theta)
    if cfg.state == "W":
        thetas = list(cfg.thetas) if cfg.thetas else None
        return qubits.w_amplitudes(n, thetas)
    return target_from_tensor(tensor_mod.read_text(cfg.tensor_file))


def target_from_tensor(tens: SymmetricTensor) -> np.ndarray:
    """Normalized qubit amplitudes encoded by a d=2 tensor's one-V-per-photon keys."""
    if tens.d != 2:
        raise ConfigError("target extraction needs a d=2 tensor")
    n = tens.n
    amps = np.zeros(2**n, dtype=complex)
    for s in range(2**n):
        key = tuple(sorted(
            tensor_mod.mode_index(k, "V" if (s >> (n - k)) & 1 else "H")
            for k in range(1, n + 1)
        ))
        amps[s] = tens.entries.get(key, 0.0)
    norm = np.linalg.norm(amps)
    if norm == 0:
        raise ConfigError("tensor encodes no n-photon qubit amplitudes")
    return amps / norm


# --- CSV helpers --------------------------------------------------------------

def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def write_csv(path, cfg: ExperimentConfig, header, rows, extra_meta=None):
    lines = []
    meta = dict(cfg.metadata())
    meta.update(extra_meta or {})
    for key, value in meta.items():
        lines.append(f"# {key}={value}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# --- tasks --------------------------------------------------------------------

def run_tomography_task(cfg: ExperimentConfig, log=print):
    tens = build_tensor(cfg)
    stream = SampleStream(cfg.seed)
    table = tomography.run_tomography(tens, cfg.gamma, cfg.samples, stream,
                                      cfg.block_size, cfg.workers)
    rows = tomography.correlation_table_rows(table)
    write_csv(cfg.output, cfg, ["labels", "mu_value", "coincidences", "samples"], rows,
              {"total_coincidences": table.total_coincidences})
    if table.missing_labels:
        raise StatisticalFailure(
            f"{len(table.missing_labels)} labels have zero coincidences; "
            f"raise samples (total coincidences {table.total_coincidences})"
        )
    rho = tomography.reconstruct(table)
    if cfg.output:
        rho_path = cfg.output + ".rho.txt"
        with open(rho_path, "w") as fh:
            fh.write(tomography.density_matrix_to_text(rho))
        log(f"density matrix written to {rho_path}")
    f = tomography.fidelity(rho, target_amplitudes(cfg))
    se = tomography.fidelity_standard_error(table, target_amplitudes(cfg))
    log(f"fidelity = {f:.6f} (propagated se ~ {se:.6f}, "
        f"coincidences {table.total_coincidences})")
    return f, table, rho


def _fidelity_point(cfg, tens, target, stream):
    """One scan point; returns (F, F_se, total_coincidences, reason)."""
    try:
        f, table, _ = tomography.run_fidelity(tens, cfg.gamma, cfg.samples, stream,
                                              target, cfg.block_size, cfg.workers)
        return f, tomography.fidelity_standard_error(table, target), \
            table.total_coincidences, ""
    except tomography.MissingLabelsError:
        return math.nan, math.nan, 0, "no coincidences"


def run_fidelity_scan(cfg: ExperimentConfig, log=print):
    """F(r) per gamma; rows state,n,r,gamma,F,F_std,coincidences_total,reason."""
    target = target_amplitudes(cfg)
    rows = []
    stream = SampleStream(cfg.seed)
    point = 0
    for gamma in cfg.gamma_list:
        for r in cfg.r_values():
            sub = stream.substream(point)
            point += 1
            cfg_point = _with(cfg, gamma=gamma)
            tens = build_tensor(cfg_point, r=r)
            f, se, coinc, reason = _fidelity_point(cfg_point, tens, target, sub)
            if reason:
                log(f"r={r} gamma={gamma}: {reason}")
            elif coinc < 100 * (4 ** cfg.n):
                log(f"warning: r={r} gamma={gamma}: only {coinc} coincidences; "
                    "consider more samples")
            rows.append((cfg.state, cfg.n, r, gamma, f, se, coinc, reason))
    return write_csv(cfg.output, cfg,
                     ["state", "n", "r", "gamma", "F", "F_std",
                      "coincidences_total", "reason"], rows)


def run_photon_scan(cfg: ExperimentConfig, log=print):
    """F per photon number at fixed (r, gamma); same row schema as the r-scan."""
    rows = []
    stream = SampleStream(cfg.seed)
    for k, n in enumerate(cfg.n_list):
        tens = build_tensor(cfg, n=n)
        target = target_amplitudes(cfg, n=n)
        f, se, coinc, reason = _fidelity_point(cfg, tens, target, stream.substream(k))
        log(f"n={n}: F={format_value(f)} ({coinc} coincidences) {reason}")
        rows.append((cfg.state, n, cfg.r, cfg.gamma, f, se, coinc, reason))
    return write_csv(cfg.output, cfg,
                     ["state", "n", "r", "gamma", "F", "F_std",
                      "coincidences_total", "reason"], rows)


def run_mermin_table(cfg: ExperimentConfig, log=print):
    """Mermin statistic at one (n, r, gamma) from `repeats` independent runs."""
    tens = build_tensor(cfg)
    stream = SampleStream(cfg.seed)
    stats = []
    term_sums = {}
    term_counts = {}
    for rep in range(cfg.repeats):
        result = mermin_statistic(tens, cfg.gamma, cfg.samples,
                                  stream.substream(700_000 + rep), cfg.block_size)
        stats.append(result.statistic)
        for est in result.terms:
            if not math.isnan(est.expectation):
                term_sums[est.bases] = term_sums.get(est.bases, 0.0) + \
                    est.expectation * est.coincidences
            term_counts[est.bases] = term_counts.get(est.bases, 0) + est.coincidences
        log(f"repeat {rep}: M_{cfg.n} = {format_value(result.statistic)}")
    good = [m for m in stats if not math.isnan(m)]
    if not good:
        write_csv(cfg.output, cfg,
                  ["n", "r", "gamma", "M", "stddev", "classical_bound", "quantum_bound"],
                  [(cfg.n, cfg.r, cfg.gamma, math.nan, math.nan,
                    classical_bound(cfg.n), quantum_bound(cfg.n))])
        raise StatisticalFailure("every repeat had a term with zero coincidences")
    mean = float(np.mean(good))
    std = float(np.std(good, ddof=1)) if len(good) > 1 else math.nan
    rows = [(cfg.n, cfg.r, cfg.gamma, mean, std,
             classical_bound(cfg.n), quantum_bound(cfg.n))]
    text = write_csv(cfg.output, cfg,
                     ["n", "r", "gamma", "M", "stddev", "classical_bound",
                      "quantum_bound"], rows,
                     {"repeats_available": len(good)})
    if cfg.output:
        term_rows = []
        for term in mermin_terms(cfg.n):
            cnt = term_counts.get(term.bases, 0)
            mean_term = term_sums.get(term.bases, math.nan) / cnt if cnt else math.nan
            term_rows.append((cfg.n, cfg.r, cfg.gamma, term.bases, mean_term, cnt))
        write_csv(cfg.output + ".terms.csv", cfg,
                  ["n", "r", "gamma", "term", "expectation", "coincidences"],
                  term_rows)
    log(f"M_{cfg.n}({cfg.r}, {cfg.gamma}) = {mean:.4f} +- {format_value(std)} "
        f"(classical {classical_bound(cfg.n)}, quantum {quantum_bound(cfg.n)})")
    return text, mean, std


def run_mermin_scan(cfg: ExperimentConfig, log=print):
    """M(r) over the grid for each gamma; single run per point."""
    rows = []
    stream = SampleStream(cfg.seed)
    point = 0
    for gamma in cfg.gamma_list:
        for r in cfg.r_values():
            tens = build_tensor(cfg, r=r)
            result = mermin_statistic(tens, gamma, cfg.samples,
                                      stream.substream(point), cfg.block_size)
            point += 1
            if not result.available:
                log(f"r={r} gamma={gamma}: term with zero coincidences, recorded empty")
            rows.append((cfg.n, r, gamma, result.statistic, math.nan,
                         classical_bound(cfg.n), quantum_bound(cfg.n)))
    return write_csv(cfg.output, cfg,
                     ["n", "r", "gamma", "M", "stddev", "classical_bound",
                      "quantum_bound"], rows)


def dump_tensor_task(cfg: ExperimentConfig, log=print):
    tens = build_tensor(cfg)
    if not cfg.output:
        raise ConfigError("dump-tensor requires an output path")
    tensor_mod.write_text(tens, cfg.output)
    log(f"tensor written to {cfg.output} ({len(tens.entries)} distinct entries)")


# --- oracle suite ---------------------------------------------------------------

#: documented thresholds for the oracle report
ORACLE_THRESHOLDS = {
    "conjugation_residual": 1e-8,
    "closed_form": 0.0,          # termwise canonical equality
    "squeeze_series": 1e-9,
    "mermin_exact": 1e-9,
    "qst_roundtrip": 1e-12,
    "moment_sigmas": 5.0,
}


def run_oracle_check(cfg: ExperimentConfig, log=print, thresholds=None):
    """Exact-oracle validation suite; raises OracleFailure if any check fails."""
    th = dict(ORACLE_THRESHOLDS)
    th.update(thresholds or {})
    checks = []

    def check(name, ok, detail):
        checks.append((name, bool(ok)))
        log(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")

    rng = np.random.default_rng(cfg.seed)

    # conjugation identity on a truncated space, plus factorial decay
    space = fock.TruncatedFockSpace(6, cutoff=2, total_cap=4)
    gen = fock.generator_matrix(space, ghz_tensor(3, 0.1, 0.3))
    a_norm = float(np.linalg.norm(gen, 2))
    x_mat = fock.annihilation_matrix(space, 1)
    residuals = [fock.verify_conjugation_identity(space, x_mat, gen, k) for k in range(1, 7)]
    check("conjugation identity residual",
          residuals[-1] < th["conjugation_residual"] and a_norm <= 0.5,
          f"K=6 residual {residuals[-1]:.3e} (|A| = {a_norm:.3f})")
    check("conjugation-series residual decay",
          all(residuals[k + 1] < residuals[k] for k in range(5)),
          "residual(K+1) < residual(K) for K=1..5")

    # negative control: non-skew generator must be rejected
    try:
        fock.verify_conjugation_identity(space, x_mat, np.triu(gen), 2)
        check("skew-Hermiticity rejection", False, "corrupted generator accepted")
    except ValueError:
        check("skew-Hermiticity rejection", True, "corrupted generator rejected")

    # recursion vs closed forms on random sparse tensors of rank 1..3
    from itertools import combinations_with_replacement

    from .bogoliubov import (
        b_approx,
        c1_closed_form,
        c2_closed_form,
        c_term,
        squeeze_closed_form,
    )

    ok_closed = True
    for rank, nd in ((1, 4), (2, 4), (3, 6)):
        entries = {}
        pool = list(combinations_with_replacement(range(1, nd + 1), rank))
        for key in pool:
            if rng.random() < 0.5:
                entries[key] = complex(rng.normal(), rng.normal()) * 0.2
        tens = SymmetricTensor(rank, max(1, nd // rank), entries)
        for i in range(1, nd + 1):
            if c_term(tens, i, 1) != c1_closed_form(tens, i):
                ok_closed = False
            if rank >= 2 and c_term(tens, i, 2) != c2_closed_form(tens, i):
                ok_closed = False
    check("C1/C2 closed forms", ok_closed, "recursion equals closed forms termwise")

    # n=2: series matches cosh/sinh closed form
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    xi = 0.01 * (m + m.T)
    t2 = SymmetricTensor(2, 2, {(i + 1, j + 1): xi[i, j]
                                for i in range(4) for j in range(i, 4)})
    cosh_m, sinh_q = squeeze_closed_form(xi)
    worst = 0.0
    for i in range(1, 5):
        poly = b_approx(t2, i, 7)
        for j in range(1, 5):
            worst = max(worst, abs(poly.coefficient(annihilators=(j,)) - cosh_m[i - 1, j - 1]))
            worst = max(worst, abs(poly.coefficient(creators=(j,)) - sinh_q[i - 1, j - 1]))
    check("squeezing series vs cosh/sinh", worst < th["squeeze_series"],
          f"max coefficient error {worst:.3e}")

    # order-p convergence of the pinched state
    space3 = fock.TruncatedFockSpace(6, cutoff=2, total_cap=6)
    tens = ghz_tensor(3, 0.2, 0.0)
    exact = fock.pinched_state(space3, tens)
    errs = [np.linalg.norm(fock.pinched_state(space3, tens, order=p) - exact)
            for p in (1, 2, 3)]
    check("order-p state convergence", errs[0] > errs[1] > errs[2],
          f"residuals p=1..3: {errs[0]:.2e}, {errs[1]:.2e}, {errs[2]:.2e}")

    # GHZ at theta=0: H/V sector symmetry keeps the qubit projection exactly
    # on target for every r, a sharp exactness check
    ghz_target = qubits.ghz_amplitudes(3)
    state = fock.pinched_state(space3, ghz_tensor(3, 0.2, 0.0))
    ghz_deficit = 1.0 - fock.n_photon_fidelity(space3, state, ghz_target)
    check("GHZ qubit projection exact", abs(ghz_deficit) < 1e-12,
          f"fidelity deficit {ghz_deficit:.2e} at r=0.2")

    # a generic (asymmetric) state gains contamination at higher order in r
    generic = np.array([0.6, 0.4j, -0.3, 0.2 + 0.1j, 0.35, -0.25j, 0.3, 0.25])
    generic = generic / np.linalg.norm(generic)
    deficits = []
    for r in (0.2, 0.1, 0.05):
        state = fock.pinched_state(space3, qubit_state_tensor(generic, r))
        deficits.append(1.0 - fock.n_photon_fidelity(space3, state, generic))
    check("small-r fidelity deficit monotone", deficits[0] > deficits[1] > deficits[2],
          f"deficits at r=0.2,0.1,0.05: {deficits[0]:.2e}, {deficits[1]:.2e}, {deficits[2]:.2e}")

    # closure error of the order-p operator, halving r
    ok_orders = True
    details = []
    for p in (1, 2):
        hi = fock.b_order_residual(space3, ghz_tensor(3, 0.1, 0.0), 1, p)
        lo = fock.b_order_residual(space3, ghz_tensor(3, 0.05, 0.0), 1, p)
        ratio = hi / lo
        expected = 2.0 ** (p + 1)
        details.append(f"p={p}: ratio {ratio:.2f} (expect ~{expected:.0f})")
        if not (expected / 1.7 <= ratio <= expected * 1.7):
            ok_orders = False
    check("order-p closure error scaling", ok_orders, "; ".join(details))

    # exact Mermin expectation for GHZ
    worst = max(abs(fock.mermin_expectation_exact(n, qubits.ghz_amplitudes(n)) - 2.0 ** (n - 1))
                for n in range(1, 7))
    check("exact GHZ Mermin expectation", worst < th["mermin_exact"],
          f"max |<M_n> - 2^(n-1)| = {worst:.2e} for n <= 6")

    # linear QST round trip on exact correlations
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    table = tomography.CorrelationTable(n=3, samples_per_setting=1)
    for label, value in qubits.exact_correlation_table(psi).items():
        table.values[label] = value
        table.label_counts[label] = 1
    rho = tomography.reconstruct(table)
    err = float(np.max(np.abs(rho - qubits.pure_density(psi))))
    check("linear QST round trip", err < th["qst_roundtrip"], f"max entry error {err:.2e}")

    # sampler moments against the Weyl-ordered Fock oracle
    stream = SampleStream(cfg.seed, lane=77)
    tens = ghz_tensor(3, 0.1, 0.4)
    samples = min(cfg.samples, 1 << 20)
    a = stream.vacuum_block(6, 0, samples)
    b = transform_generic(tens, a)
    cross_mc = (b[:, :, None] * b.conj()[:, None, :]).mean(axis=0)
    plain_mc = (b[:, :, None] * b[:, None, :]).mean(axis=0)
    cross_or, plain_or = fock.first_order_moment_oracle(tens)
    se = 1.5 / math.sqrt(samples)  # |b|^2-scale variance bound per entry
    worst = max(np.max(np.abs(cross_mc - cross_or)), np.max(np.abs(plain_mc - plain_or)))
    check("sampler second moments vs Weyl oracle",
          worst < th["moment_sigmas"] * se,
          f"max moment deviation {worst:.2e} vs {th['moment_sigmas']} se = "
          f"{th['moment_sigmas'] * se:.2e} ({samples} draws)")

    # vacuum draw statistics
    mean_abs2 = float(np.mean(np.abs(a) ** 2))
    mean_re = float(np.mean(a.real))
    check("vacuum variance", abs(mean_abs2 - 0.5) < 0.002,
          f"E|a|^2 = {mean_abs2:.5f}")
    check("vacuum mean", abs(mean_re) < 0.002, f"E[Re a] = {mean_re:.2e}")

    failed = [name for name, ok in checks if not ok]
    if failed:
        raise OracleFailure(f"{len(failed)} oracle checks failed: {', '.join(failed)}")
    log(f"all {len(checks)} oracle checks passed")
    return checks


def _with(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    from dataclasses import replace

    return replace(cfg, **kw)


__all__ = [
    "StatisticalFailure",
    "OracleFailure",
    "build_tensor",
    "target_amplitudes",
    "target_from_tensor",
    "write_csv",
    "format_value",
    "run_tomography_task",
    "run_fidelity_scan",
    "run_photon_scan",
    "run_mermin_table",
    "run_mermin_scan",
    "run_oracle_check",
    "dump_tensor_task",
    "ORACLE_THRESHOLDS",
]
