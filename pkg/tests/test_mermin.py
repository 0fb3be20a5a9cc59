import math

import numpy as np
import pytest

from pinchsim import qubits
from pinchsim.fock import mermin_expectation_exact
from pinchsim.mermin import (
    classical_bound,
    mermin_scan,
    mermin_statistic,
    mermin_terms,
    quantum_bound,
    term_expectation,
)
from pinchsim.sampling import SampleStream
from pinchsim.tensor import ghz_tensor


class TestTerms:
    def test_small_expansions(self):
        assert [(t.sign, t.bases) for t in mermin_terms(1)] == [(1, "X")]
        assert [(t.sign, t.bases) for t in mermin_terms(2)] == [(1, "XX"), (-1, "YY")]
        assert {(t.sign, t.bases) for t in mermin_terms(3)} == {
            (1, "XXX"), (-1, "XYY"), (-1, "YXY"), (-1, "YYX")}

    def test_n4_expansion(self):
        terms = {(t.sign, t.bases) for t in mermin_terms(4)}
        expected = {(1, "XXXX"), (1, "YYYY")}
        for bases in ("XXYY", "XYXY", "XYYX", "YXXY", "YXYX", "YYXX"):
            expected.add((-1, bases))
        assert terms == expected

    def test_term_count(self):
        for n in range(1, 11):
            assert len(mermin_terms(n)) == 2 ** (n - 1)

    def test_even_y_and_sign_rule(self):
        for n in (3, 5, 6):
            for term in mermin_terms(n):
                n_y = term.bases.count("Y")
                assert n_y % 2 == 0
                assert term.sign == (1 if (n_y // 2) % 2 == 0 else -1)

    def test_deterministic_order(self):
        assert [t.bases for t in mermin_terms(3)] == ["XXX", "XYY", "YXY", "YYX"]

    def test_matches_operator_definition(self):
        # sum of signed Pauli strings equals (sx+isy)^n/2 + h.c.
        for n in (2, 3, 4):
            sx, sy = qubits.PAULI["X"], qubits.PAULI["Y"]
            plus = np.ones((1, 1), dtype=complex)
            minus = np.ones((1, 1), dtype=complex)
            for _ in range(n):
                plus = np.kron(plus, sx + 1j * sy)
                minus = np.kron(minus, sx - 1j * sy)
            direct = (plus + minus) / 2
            summed = sum(t.sign * qubits.pauli_string_matrix(t.bases)
                         for t in mermin_terms(n))
            np.testing.assert_allclose(summed, direct, atol=1e-12)


class TestBounds:
    def test_values(self):
        assert classical_bound(3) == 2 and quantum_bound(3) == 4
        assert classical_bound(4) == 4 and quantum_bound(4) == 8
        assert classical_bound(1) == 1 and quantum_bound(1) == 1
        assert classical_bound(5) == 4 and quantum_bound(5) == 16

    def test_exact_ghz_reaches_quantum_bound(self):
        for n in range(1, 7):
            assert mermin_expectation_exact(n, qubits.ghz_amplitudes(n)) == \
                pytest.approx(quantum_bound(n), abs=1e-9)


class TestStatistic:
    def test_deterministic(self):
        tens = ghz_tensor(3, 1.0)
        r1 = mermin_statistic(tens, 0.5, 1 << 14, SampleStream(5))
        r2 = mermin_statistic(tens, 0.5, 1 << 14, SampleStream(5))
        assert r1.statistic == r2.statistic
        assert [t.coincidences for t in r1.terms] == [t.coincidences for t in r2.terms]

    def test_violation_at_peak_parameters(self):
        result = mermin_statistic(ghz_tensor(3, 1.0), 0.5, 1 << 16, SampleStream(6))
        assert result.available
        assert classical_bound(3) < result.statistic < quantum_bound(3)
        assert 3.0 < result.statistic < 3.7  # calibrated ~3.35

    def test_zero_strength_unavailable(self):
        result = mermin_statistic(ghz_tensor(3, 0.0), 2.3, 1 << 12, SampleStream(7))
        assert not result.available
        assert all(t.coincidences == 0 for t in result.terms)

    def test_term_expectation_range(self):
        total, count = term_expectation(ghz_tensor(3, 1.0), "XXX", 0.5, 1 << 14,
                                        SampleStream(8))
        assert count > 0
        assert abs(total) <= count

    def test_photon_relabeling_invariance(self):
        # GHZ is symmetric under photon permutation; permuting the basis
        # letters across photons estimates the same statistic
        tens = ghz_tensor(3, 1.0)
        samples = 1 << 16
        base = mermin_statistic(tens, 0.5, samples, SampleStream(9))

        perm = [2, 0, 1]
        total = 0.0
        se2 = 0.0
        for k, term in enumerate(mermin_terms(3)):
            permuted = "".join(term.bases[perm[i]] for i in range(3))
            tot, cnt = term_expectation(tens, permuted, 0.5, samples,
                                        SampleStream(9).substream(100 + k))
            e = tot / cnt
            total += term.sign * e
            se2 += (1 - e**2) / cnt
        for term in base.terms:
            se2 += (1 - term.expectation**2) / term.coincidences
        assert abs(total - base.statistic) < 5 * math.sqrt(se2)


class TestScan:
    def test_scan_shape(self):
        # vacuum alone still coincides at gamma=1.0, just uncorrelated
        rows = mermin_scan(lambda r: ghz_tensor(3, r), 1.0, [0.0, 0.8],
                           1 << 13, SampleStream(10))
        assert len(rows) == 2
        r0, res0 = rows[0]
        assert r0 == 0.0 and res0.available and abs(res0.statistic) < 0.6
        r1, res1 = rows[1]
        assert r1 == 0.8 and res1.available and res1.statistic > 2.0

    def test_scan_records_failures_and_continues(self):
        # at gamma=2.3 the vacuum never fires all three photons
        rows = mermin_scan(lambda r: ghz_tensor(3, r), 2.3, [0.0], 1 << 12,
                           SampleStream(11))
        assert not rows[0][1].available
