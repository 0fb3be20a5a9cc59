"""Normal-ordered ladder-operator polynomials and the commutator recursion.

The pinched annihilation operator b_i = S^dag a_i S expands as
sum_k C_i^(k)/k! with C^(0) = a_i and C^(k) = [C^(k-1), A], where A is the
skew-Hermitian exponent of the pinching operator.  Everything here is exact
symbolic algebra on normal-ordered monomials; closed forms for the rank-1
(displacement) and rank-2 (squeezing) cases provide independent cross-checks.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .tensor import SymmetricTensor, multiset_multiplicity_factor

#: canonicalization drops monomial coefficients below this magnitude
COEFF_EPS = 1e-14

#: default abort threshold for monomial blow-up in products/commutators
DEFAULT_TERM_CAP = 10**6


class TermBudgetError(RuntimeError):
    """Raised when a product would exceed the monomial count cap."""


class OperatorPolynomial:
    """Sum of normal-ordered monomials c * a^dag[creators] * a[annihilators].

    Monomials are keyed by (creators, annihilators), both sorted tuples of
    1-based mode indices.  Like terms merge on construction and coefficients
    with magnitude below COEFF_EPS are dropped, so equal operators compare
    equal termwise.  The identity is the monomial with two empty tuples.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        merged = {}
        for key, coeff in (terms or {}).items():
            creators, annihilators = key
            key = (tuple(sorted(creators)), tuple(sorted(annihilators)))
            merged[key] = merged.get(key, 0.0) + complex(coeff)
        self.terms = {k: c for k, c in merged.items() if abs(c) > COEFF_EPS}

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def identity(cls, coeff=1.0):
        return cls({((), ()): coeff})

    @classmethod
    def annihilation(cls, mode: int, coeff=1.0):
        return cls({((), (mode,)): coeff})

    @classmethod
    def creation(cls, mode: int, coeff=1.0):
        return cls({((mode,), ()): coeff})

    @classmethod
    def monomial(cls, coeff, creators=(), annihilators=()):
        return cls({(tuple(creators), tuple(annihilators)): coeff})

    # -- algebra ----------------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for key, coeff in other.terms.items():
            out[key] = out.get(key, 0.0) + coeff
        return OperatorPolynomial(out)

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, factor):
        return OperatorPolynomial({k: c * factor for k, c in self.terms.items()})

    def adjoint(self):
        return OperatorPolynomial(
            {(ann, cre): c.conjugate() for (cre, ann), c in self.terms.items()}
        )

    def multiply(self, other, term_cap: int = DEFAULT_TERM_CAP):
        """Operator product, reduced to normal order with [a_i, a_j^dag] = delta_ij.

        For each pair of monomials, the annihilators of the left factor are
        commuted past the creators of the right factor; per mode with m
        annihilators meeting k creators, j contractions contribute the exact
        integer weight j! C(m,j) C(k,j).
        """
        out = {}
        for (cre1, ann1), c1 in self.terms.items():
            for (cre2, ann2), c2 in other.terms.items():
                base = c1 * c2
                m_count = Counter(ann1)
                k_count = Counter(cre2)
                shared = sorted(set(m_count) & set(k_count))
                choices = []
                for mode in shared:
                    m, k = m_count[mode], k_count[mode]
                    choices.append(
                        [
                            (j, math.factorial(j) * math.comb(m, j) * math.comb(k, j))
                            for j in range(min(m, k) + 1)
                        ]
                    )
                for combo in product(*choices):
                    coeff = base
                    contracted = {}
                    for mode, (j, w) in zip(shared, combo):
                        coeff *= w
                        if j:
                            contracted[mode] = j
                    creators = list(cre1)
                    take = dict(contracted)
                    for mode in cre2:
                        if take.get(mode, 0) > 0:
                            take[mode] -= 1
                        else:
                            creators.append(mode)
                    annihilators = []
                    take = dict(contracted)
                    for mode in ann1:
                        if take.get(mode, 0) > 0:
                            take[mode] -= 1
                        else:
                            annihilators.append(mode)
                    annihilators.extend(ann2)
                    key = (tuple(sorted(creators)), tuple(sorted(annihilators)))
                    out[key] = out.get(key, 0.0) + coeff
                    if len(out) > term_cap:
                        raise TermBudgetError(
                            f"operator product exceeded {term_cap} monomials"
                        )
        return OperatorPolynomial(out)

    def __eq__(self, other):
        """Termwise equality in canonical form: the difference merges and
        drops (below COEFF_EPS) to the zero polynomial."""
        if not isinstance(other, OperatorPolynomial):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None  # tolerance-based equality

    def is_zero(self) -> bool:
        return not self.terms

    def max_mode(self) -> int:
        return max((max(cre + ann, default=0) for cre, ann in self.terms), default=0)

    def coefficient(self, creators=(), annihilators=()) -> complex:
        key = (tuple(sorted(creators)), tuple(sorted(annihilators)))
        return self.terms.get(key, 0.0 + 0.0j)

    def sorted_terms(self):
        return sorted(self.terms.items())

    def to_text(self) -> str:
        """Pretty-print, lexicographically sorted, for golden-file comparisons."""
        if not self.terms:
            return "0"
        parts = []
        for (cre, ann), c in self.sorted_terms():
            sign = "+" if c.imag >= 0 else "-"
            piece = f"({c.real:+.12g}{sign}{abs(c.imag):.12g}i)"
            if cre:
                piece += " a†[" + ",".join(map(str, cre)) + "]"
            if ann:
                piece += " a[" + ",".join(map(str, ann)) + "]"
            parts.append(piece)
        return " ".join(parts)

    def __repr__(self):
        return f"OperatorPolynomial({self.to_text()})"


def commutator(p: OperatorPolynomial, q: OperatorPolynomial,
               term_cap: int = DEFAULT_TERM_CAP) -> OperatorPolynomial:
    """[p, q] = pq - qp in canonical normal order."""
    return p.multiply(q, term_cap) - q.multiply(p, term_cap)


def generator(tensor: SymmetricTensor) -> OperatorPolynomial:
    """Skew-Hermitian exponent A of the pinching operator.

    A = (1/n!) sum over ordered index tuples of xi * (creator product) minus
    its Hermitian conjugate; collapsing orderings of each distinct multiset
    leaves the weight xi / prod(multiplicity!).
    """
    terms = {}
    for key, value in tensor.items():
        w = value / multiset_multiplicity_factor(key)
        terms[(key, ())] = terms.get((key, ()), 0.0) + w
        terms[((), key)] = terms.get(((), key), 0.0) - w.conjugate()
    return OperatorPolynomial(terms)


def c_term(tensor: SymmetricTensor, i: int, k: int,
           term_cap: int = DEFAULT_TERM_CAP) -> OperatorPolynomial:
    """k-th commutator term C_i^(k) of the Bogoliubov expansion for mode i."""
    if k < 0:
        raise ValueError(f"order must be >= 0, got {k}")
    a = generator(tensor)
    out = OperatorPolynomial.annihilation(i)
    for _ in range(k):
        out = commutator(out, a, term_cap)
    return out


def b_approx(tensor: SymmetricTensor, i: int, p: int,
             term_cap: int = DEFAULT_TERM_CAP) -> OperatorPolynomial:
    """Order-p pinched annihilation operator sum_{k<=p} C_i^(k)/k!."""
    if p < 0:
        raise ValueError(f"order must be >= 0, got {p}")
    a = generator(tensor)
    current = OperatorPolynomial.annihilation(i)
    total = current
    for k in range(1, p + 1):
        current = commutator(current, a, term_cap)
        total = total + current.scale(1.0 / math.factorial(k))
    return total


def c1_closed_form(tensor: SymmetricTensor, i: int) -> OperatorPolynomial:
    """First-order term: (1/(n-1)!) sum xi_{i,i2..in} a^dag_{i2} ... a^dag_{in}."""
    terms = {}
    for key, value in tensor.items():
        if i not in key:
            continue
        rest = list(key)
        rest.remove(i)
        rest = tuple(rest)
        w = value / multiset_multiplicity_factor(rest)
        terms[(rest, ())] = terms.get((rest, ()), 0.0) + w
    return OperatorPolynomial(terms)


def c2_closed_form(tensor: SymmetricTensor, i: int) -> OperatorPolynomial:
    """Second-order term via the explicit double contraction, normal-ordered.

    Follows the ordered-tuple sums literally: for each ordered (i2..in) with
    xi_{i,i2..in} and ordered (j2..jn) with conj(xi_{i2,j2..jn}), the bracket
    contributes, for every insertion point m, the product
    a^dag_{i3}..a^dag_{im} a_{j2}..a_{jn} a^dag_{i_{m+1}}..a^dag_{in}.
    Duplicate permutations of multisets carry exactly the 1/(n-1)!^2 weights.
    Must match c_term(..., k=2) termwise.
    """
    n = tensor.n
    if n < 2:
        raise ValueError("second-order closed form needs rank >= 2")
    w0 = 1.0 / math.factorial(n - 1)
    total = OperatorPolynomial.zero()
    for key, value in tensor.items():
        if i not in key:
            continue
        rest = list(key)
        rest.remove(i)
        # distinct orderings of (i2..in); each appears once in the ordered sum
        for ordered_i in set(permutations(rest)):
            i2, tail = ordered_i[0], ordered_i[1:]
            for key2, value2 in tensor.items():
                if i2 not in key2:
                    continue
                rest2 = list(key2)
                rest2.remove(i2)
                annihilators = tuple(sorted(rest2))
                # inner ordered sum collapses: annihilators commute
                w_j = value2.conjugate() / multiset_multiplicity_factor(annihilators)
                for m in range(2, n + 1):
                    left = tail[: m - 2]
                    right = tail[m - 2:]
                    piece = OperatorPolynomial.monomial(1.0, creators=left)
                    piece = piece.multiply(
                        OperatorPolynomial.monomial(1.0, annihilators=annihilators)
                    )
                    piece = piece.multiply(
                        OperatorPolynomial.monomial(1.0, creators=right)
                    )
                    total = total + piece.scale(value * w0 * w_j)
    return total


@dataclass(frozen=True)
class PolarFactors:
    """xi = R Q with R positive semi-definite Hermitian and Q unitary."""

    R: np.ndarray
    Q: np.ndarray


def polar_decompose(xi: np.ndarray, symmetry_tol: float = 1e-10) -> PolarFactors:
    """Polar factors of a complex symmetric squeezing matrix via SVD.

    xi = U S V^dag gives R = U S U^dag and Q = U V^dag; the SVD route stays
    well defined for singular xi.
    """
    xi = np.asarray(xi, dtype=complex)
    if xi.ndim != 2 or xi.shape[0] != xi.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {xi.shape}")
    if np.max(np.abs(xi - xi.T)) > symmetry_tol * max(1.0, np.max(np.abs(xi))):
        raise ValueError("squeezing matrix must be symmetric (xi^T = xi)")
    u, s, vh = np.linalg.svd(xi)
    r = (u * s) @ u.conj().T
    q = u @ vh
    return PolarFactors(R=r, Q=q)


def squeeze_closed_form(xi: np.ndarray):
    """Coefficient matrices (cosh R, sinh R . Q) of the squeezed operator.

    b = (cosh R) a + (sinh R) Q a^dag; computed by eigendecomposition of the
    Hermitian polar factor R.
    """
    factors = polar_decompose(xi)
    evals, evecs = np.linalg.eigh(factors.R)
    cosh_r = (evecs * np.cosh(evals)) @ evecs.conj().T
    sinh_r = (evecs * np.sinh(evals)) @ evecs.conj().T
    return cosh_r, sinh_r @ factors.Q


__all__ = [
    "OperatorPolynomial",
    "PolarFactors",
    "TermBudgetError",
    "COEFF_EPS",
    "DEFAULT_TERM_CAP",
    "commutator",
    "generator",
    "c_term",
    "b_approx",
    "c1_closed_form",
    "c2_closed_form",
    "polar_decompose",
    "squeeze_closed_form",
]
