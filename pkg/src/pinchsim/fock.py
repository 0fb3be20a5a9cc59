"""Exact ground truth on truncated multimode Fock spaces.

Builds ladder operators and pinching generators as dense matrices, applies
truncated or exact exponentials to the vacuum, and verifies the commutator
expansion e^{-A} X e^{A} = sum_k C^(k)/k! numerically.  Everything here is
small-scale (a handful of modes, low occupation cutoffs) and serves as the
oracle against which the symbolic engine and the Monte Carlo sampler are
tested.
"""

from __future__ import annotations

import math
from itertools import permutations, product

import numpy as np

from . import qubits
from .bogoliubov import OperatorPolynomial, generator
from .mermin import mermin_terms
from .tensor import SymmetricTensor, multiset_multiplicity_factor


class ConvergenceError(RuntimeError):
    """Exact-exponential series failed to converge within the term budget."""


class ZeroProjectionError(ValueError):
    """State has no component in the requested subspace."""


class TruncatedFockSpace:
    """Occupation-number basis with a per-mode cutoff and optional photon cap.

    Basis vectors are all tuples N with 0 <= N_m <= cutoff and, when
    `total_cap` is given, sum(N) <= total_cap; ordering is lexicographic.
    """

    def __init__(self, n_modes: int, cutoff: int = 2, total_cap=None):
        if n_modes < 1 or cutoff < 1:
            raise ValueError(f"need n_modes >= 1 and cutoff >= 1, got {n_modes}, {cutoff}")
        self.n_modes = n_modes
        self.cutoff = cutoff
        self.total_cap = total_cap
        basis = []
        for occ in product(range(cutoff + 1), repeat=n_modes):
            if total_cap is None or sum(occ) <= total_cap:
                basis.append(occ)
        basis.sort()
        self.basis = basis
        self.index = {occ: k for k, occ in enumerate(basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vacuum(self) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index[(0,) * self.n_modes]] = 1.0
        return vec

    def interior_indices(self, mode: int) -> np.ndarray:
        """Basis positions where raising `mode` stays inside the truncation."""
        keep = []
        for k, occ in enumerate(self.basis):
            if occ[mode - 1] >= self.cutoff:
                continue
            if self.total_cap is not None and sum(occ) + 1 > self.total_cap:
                continue
            keep.append(k)
        return np.array(keep, dtype=int)


def annihilation_matrix(space: TruncatedFockSpace, mode: int) -> np.ndarray:
    """<N - e_mode| a |N> = sqrt(N_mode); transitions leaving the basis drop."""
    if not 1 <= mode <= space.n_modes:
        raise ValueError(f"mode {mode} outside 1..{space.n_modes}")
    mat = np.zeros((space.dim, space.dim), dtype=complex)
    m = mode - 1
    for col, occ in enumerate(space.basis):
        if occ[m] == 0:
            continue
        lowered = occ[:m] + (occ[m] - 1,) + occ[m + 1:]
        row = space.index.get(lowered)
        if row is not None:
            mat[row, col] = math.sqrt(occ[m])
    return mat


def creation_matrix(space: TruncatedFockSpace, mode: int) -> np.ndarray:
    return annihilation_matrix(space, mode).conj().T


def operator_matrix(space: TruncatedFockSpace, poly: OperatorPolynomial) -> np.ndarray:
    """Dense matrix of a normal-ordered ladder polynomial."""
    ann = {m: annihilation_matrix(space, m) for m in range(1, space.n_modes + 1)}
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for (creators, annihilators), coeff in poly.terms.items():
        term = np.eye(space.dim, dtype=complex)
        for m in annihilators:  # annihilators act first (rightmost factors)
            term = ann[m] @ term
        for m in creators:
            term = ann[m].conj().T @ term
        out += coeff * term
    return out


def generator_matrix(space: TruncatedFockSpace, tensor: SymmetricTensor) -> np.ndarray:
    """Matrix of the pinching exponent A; skew-Hermitian by construction."""
    if tensor.modes != space.n_modes:
        raise ValueError(
            f"tensor has {tensor.modes} modes but space has {space.n_modes}"
        )
    creator_part = np.zeros((space.dim, space.dim), dtype=complex)
    for key, value in tensor.items():
        term = np.eye(space.dim, dtype=complex)
        for m in key:
            term = creation_matrix(space, m) @ term
        creator_part += (value / multiset_multiplicity_factor(key)) * term
    return creator_part - creator_part.conj().T


def expm_taylor(mat: np.ndarray, tol: float = 1e-16) -> np.ndarray:
    """Matrix exponential by Taylor series with scaling and squaring.

    Scales by 2^-s until the 1-norm is <= 0.5, sums the series until the term
    norm falls below tol * (result norm), then squares s times.  Adequate for
    the small-norm generators used in the oracle checks.
    """
    mat = np.asarray(mat, dtype=complex)
    norm = np.linalg.norm(mat, 1)
    s = max(0, math.ceil(math.log2(norm / 0.5))) if norm > 0.5 else 0
    scaled = mat / (2**s)
    result = np.eye(mat.shape[0], dtype=complex)
    term = np.eye(mat.shape[0], dtype=complex)
    for k in range(1, 60):
        term = term @ scaled / k
        result = result + term
        if np.linalg.norm(term, 1) <= tol * np.linalg.norm(result, 1):
            break
    else:
        raise ConvergenceError("matrix exponential series did not converge")
    for _ in range(s):
        result = result @ result
    return result


def pinched_state(space: TruncatedFockSpace, tensor: SymmetricTensor,
                  order=None, series_tol: float = 1e-12,
                  max_terms: int = 200) -> np.ndarray:
    """Order-p approximation S^(p)|0> = sum_{k<=p} A^k/k! |0>, or exact e^A|0>.

    `order=None` sums the exponential series on the vacuum until the term
    norm drops below `series_tol` (unnormalized for finite order; the exact
    state keeps norm 1 up to truncation loss).
    """
    amat = generator_matrix(space, tensor)
    vec = space.vacuum()
    total = vec.copy()
    if order is not None:
        if order < 0:
            raise ValueError(f"order must be >= 0, got {order}")
        for k in range(1, order + 1):
            vec = amat @ vec / k
            total += vec
        return total
    for k in range(1, max_terms + 1):
        vec = amat @ vec / k
        total += vec
        if np.linalg.norm(vec) < series_tol:
            return total
    raise ConvergenceError(
        f"exponential series residual above {series_tol} after {max_terms} terms"
    )


def qubit_subspace_projection(space: TruncatedFockSpace, state: np.ndarray):
    """Amplitudes on the one-photon-per-photon-slot subspace (d=2 encoding).

    Returns the length-2^n amplitude vector (photon 1 = most significant bit,
    H = 0) without normalization.
    """
    if space.n_modes % 2:
        raise ValueError("qubit projection needs an even number of modes (d=2)")
    n = space.n_modes // 2
    amps = np.zeros(2**n, dtype=complex)
    for s in range(2**n):
        occ = [0] * space.n_modes
        for k in range(1, n + 1):
            bit = (s >> (n - k)) & 1
            occ[2 * (k - 1) + bit] = 1
        pos = space.index.get(tuple(occ))
        if pos is not None:
            amps[s] = state[pos]
    return amps


def n_photon_fidelity(space: TruncatedFockSpace, state: np.ndarray, target) -> float:
    """|<target|P psi>|^2 / <psi|P|psi> with P the one-photon-per-slot projector."""
    target = np.asarray(target, dtype=complex)
    proj = qubit_subspace_projection(space, state)
    norm = np.linalg.norm(proj)
    if norm == 0.0:
        raise ZeroProjectionError("state has no n-photon component to project onto")
    return float(abs(target.conj() @ (proj / norm)) ** 2)


def interior_projector(space: TruncatedFockSpace) -> np.ndarray:
    """Diagonal projector onto occupations strictly below the cutoff.

    Ladder truncation distorts matrix elements near the occupancy boundary,
    so commutation-based identities are asserted on this subspace.
    """
    diag = np.array(
        [1.0 if max(occ) < space.cutoff and
         (space.total_cap is None or sum(occ) < space.total_cap) else 0.0
         for occ in space.basis]
    )
    return np.diag(diag).astype(complex)


def verify_conjugation_identity(space: TruncatedFockSpace, x: np.ndarray,
                             a: np.ndarray, k_max: int,
                             skew_tol: float = 1e-10) -> float:
    """Frobenius residual of e^{-A} X e^{A} against the commutator series.

    A must be skew-Hermitian within `skew_tol`; C^(0) = X and
    C^(k) = [C^(k-1), A] are computed as matrices on the same space, and the
    residual is evaluated on the interior subspace, where it decays
    factorially with k_max for small-norm A.
    """
    a = np.asarray(a, dtype=complex)
    x = np.asarray(x, dtype=complex)
    if np.max(np.abs(a + a.conj().T)) > skew_tol:
        raise ValueError("generator is not skew-Hermitian within tolerance")
    lhs = expm_taylor(-a) @ x @ expm_taylor(a)
    term = x.copy()
    rhs = x.copy()
    for k in range(1, k_max + 1):
        term = (term @ a - a @ term) / k
        rhs = rhs + term
    proj = interior_projector(space)
    return float(np.linalg.norm(proj @ (lhs - rhs) @ proj))


def b_order_residual(space: TruncatedFockSpace, tensor: SymmetricTensor,
                     mode: int, p: int) -> float:
    """Norm of the order-p closure error c^(p) acting on the vacuum.

    (S^(p))^dag a_i S^(p) |0> equals (b^(p) + c^(p))|0>; the return value is
    ||c^(p)|0>||, which scales as O(min{r^{p+1}, r^{2p}}) for small tensors.
    """
    from .bogoliubov import b_approx

    amat = generator_matrix(space, tensor)
    sp = np.eye(space.dim, dtype=complex)
    term = np.eye(space.dim, dtype=complex)
    for k in range(1, p + 1):
        term = term @ amat / k
        sp = sp + term
    lhs = sp.conj().T @ annihilation_matrix(space, mode) @ sp @ space.vacuum()
    bp = operator_matrix(space, b_approx(tensor, mode, p))
    return float(np.linalg.norm(lhs - bp @ space.vacuum()))


def mermin_expectation_exact(n: int, amplitudes) -> float:
    """<psi| M_n |psi> by direct enumeration of the 2^(n-1) X/Y terms."""
    psi = np.asarray(amplitudes, dtype=complex)
    total = 0.0
    for term in mermin_terms(n):
        total += term.sign * qubits.exact_correlation(psi, term.bases)
    return total


# --- text export for oracle fixtures -----------------------------------------

def state_to_text(space: TruncatedFockSpace, state: np.ndarray,
                  eps: float = 0.0) -> str:
    """One line per basis element: comma-joined occupations, re, im.

    Entries with |amplitude| <= eps are omitted; 17 significant digits.
    """
    lines = []
    for k, occ in enumerate(space.basis):
        z = complex(state[k])
        if abs(z) <= eps:
            continue
        label = ",".join(str(v) for v in occ)
        lines.append(f"{label} {z.real:.17g} {z.imag:.17g}")
    return "\n".join(lines) + "\n"


def state_from_text(space: TruncatedFockSpace, text: str) -> np.ndarray:
    state = np.zeros(space.dim, dtype=complex)
    for line in text.splitlines():
        if not line.strip():
            continue
        label, re_part, im_part = line.split()
        occ = tuple(int(v) for v in label.split(","))
        state[space.index[occ]] = complex(float(re_part), float(im_part))
    return state


# --- symmetric-ordering oracle for the sampler ------------------------------

def weyl_vacuum_expectation(space: TruncatedFockSpace, creators, annihilators) -> complex:
    """Vacuum expectation of the Weyl (symmetric) ordering of a ladder monomial.

    Distinct modes commute, so the symmetrization factorizes per mode; per
    mode the average runs over all distinct interleavings of its creation and
    annihilation operators.  The cutoff must be at least the per-mode operator
    count for the expectation to be exact.
    """
    per_mode = {}
    for m in creators:
        per_mode.setdefault(m, [0, 0])[0] += 1
    for m in annihilators:
        per_mode.setdefault(m, [0, 0])[1] += 1
    vec = space.vacuum()
    for m, (p, q) in sorted(per_mode.items()):
        a = annihilation_matrix(space, m)
        c = a.conj().T
        orderings = set(permutations(("c",) * p + ("a",) * q))
        acc = np.zeros((space.dim, space.dim), dtype=complex)
        for word in orderings:
            term = np.eye(space.dim, dtype=complex)
            for sym in word:
                term = term @ (c if sym == "c" else a)
            acc += term
        vec = (acc / len(orderings)) @ vec
    vac = space.vacuum()
    return complex(vac.conj() @ vec)


def first_order_moment_oracle(tensor: SymmetricTensor):
    """Exact symmetric-ordered second moments of the first-order pinched modes.

    Interprets b_i^(1) as a classical polynomial in the vacuum variables
    (creators meaning conjugated amplitudes), forms the classical products
    b_i * conj(b_j) and b_i * b_j, and evaluates the Weyl-ordered operator of
    each monomial in the truncated-Fock vacuum.  Matches the Monte Carlo
    moments of the sampler exactly, by the optical equivalence theorem.
    Returns (E[b conj(b)], E[b b]) as nd x nd arrays.
    """
    nd = tensor.modes

    # classical monomial lists per mode: (coeff, conj-multiset, plain-multiset)
    polys = []
    for i in range(1, nd + 1):
        mono = [(1.0 + 0.0j, (), (i,))]
        for key, value in tensor.items():
            if i not in key:
                continue
            rest = list(key)
            rest.remove(i)
            rest = tuple(rest)
            mono.append((value / multiset_multiplicity_factor(rest), rest, ()))
        polys.append(mono)

    def conj_poly(poly):
        return [(c.conjugate(), pl, cj) for (c, cj, pl) in poly]

    def classical_product(p1, p2):
        return [
            (c1 * c2, tuple(sorted(cj1 + cj2)), tuple(sorted(pl1 + pl2)))
            for (c1, cj1, pl1) in p1
            for (c2, cj2, pl2) in p2
        ]

    def weyl_value(poly):
        total = 0.0 + 0.0j
        for coeff, conj_part, plain_part in poly:
            modes = sorted(set(conj_part) | set(plain_part))
            if not modes:
                total += coeff
                continue
            # small dedicated space over just the touched modes
            relabel = {m: k + 1 for k, m in enumerate(modes)}
            counts = max(
                max(conj_part.count(m), plain_part.count(m)) for m in modes
            )
            sub = TruncatedFockSpace(len(modes), cutoff=max(2, counts))
            total += coeff * weyl_vacuum_expectation(
                sub,
                tuple(relabel[m] for m in conj_part),
                tuple(relabel[m] for m in plain_part),
            )
        return total

    cross = np.zeros((nd, nd), dtype=complex)
    plain = np.zeros((nd, nd), dtype=complex)
    for i in range(nd):
        for j in range(nd):
            cross[i, j] = weyl_value(classical_product(polys[i], conj_poly(polys[j])))
            plain[i, j] = weyl_value(classical_product(polys[i], polys[j]))
    return cross, plain


__all__ = [
    "TruncatedFockSpace",
    "ConvergenceError",
    "ZeroProjectionError",
    "annihilation_matrix",
    "creation_matrix",
    "operator_matrix",
    "generator_matrix",
    "expm_taylor",
    "pinched_state",
    "qubit_subspace_projection",
    "n_photon_fidelity",
    "verify_conjugation_identity",
    "b_order_residual",
    "mermin_expectation_exact",
    "state_to_text",
    "state_from_text",
    "weyl_vacuum_expectation",
    "first_order_moment_oracle",
]
