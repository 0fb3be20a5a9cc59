import math

import numpy as np
import pytest

from pinchsim.sampling import (
    GenericTransform,
    SampleStream,
    draw_vacuum,
    dump_realizations,
    first_order_terms,
    load_realizations,
    realize,
    transform_generic,
    transform_ghz,
    transform_w,
)
from pinchsim.tensor import SymmetricTensor, ghz_tensor, w_tensor


class TestVacuumDraws:
    def test_moments(self):
        a = SampleStream(123).vacuum_block(4, 0, 250_000)  # 10^6 amplitudes
        mean_abs2 = np.mean(np.abs(a) ** 2)
        assert abs(mean_abs2 - 0.5) < 0.002
        assert abs(np.mean(a.real)) < 0.002
        assert abs(np.mean(a.imag)) < 0.002

    def test_mode_independence(self):
        a = SampleStream(77).vacuum_block(4, 0, 250_000)
        for i in range(4):
            for j in range(i + 1, 4):
                assert abs(np.mean(a[:, i] * np.conj(a[:, j]))) < 0.002

    def test_quadrature_variance(self):
        a = SampleStream(5).vacuum_block(2, 0, 500_000)
        assert np.var(a.real) == pytest.approx(0.25, abs=0.002)
        assert np.var(a.imag) == pytest.approx(0.25, abs=0.002)


class TestDeterminism:
    def test_chunking_invariance(self):
        stream = SampleStream(99, lane=3)
        whole = stream.vacuum_block(6, 0, 64)
        part = stream.vacuum_block(6, 17, 21)
        np.testing.assert_array_equal(whole[17:38], part)

    def test_draw_matches_block(self):
        stream = SampleStream(42)
        singles = np.array([draw_vacuum(stream, 5) for _ in range(8)])
        np.testing.assert_array_equal(singles, SampleStream(42).vacuum_block(5, 0, 8))

    def test_lanes_differ(self):
        a = SampleStream(1, lane=0).vacuum_block(4, 0, 4)
        b = SampleStream(1, lane=1).vacuum_block(4, 0, 4)
        assert not np.allclose(a, b)

    def test_substream_reproducible(self):
        s1 = SampleStream(7).substream(12)
        s2 = SampleStream(7).substream(12)
        assert s1.lane == s2.lane
        assert SampleStream(7).substream(13).lane != s1.lane


class TestGenericTransform:
    def test_zero_tensor_identity(self):
        a = SampleStream(3).vacuum_block(6, 0, 10)
        np.testing.assert_array_equal(transform_generic(SymmetricTensor(3, 2), a), a)

    def test_ghz_explicit_rows(self):
        theta = 0.7
        tens = ghz_tensor(3, 0.4, theta)
        a = SampleStream(4).vacuum_block(6, 0, 50)
        b = transform_generic(tens, a)
        np.testing.assert_allclose(
            b[:, 0], a[:, 0] + 0.4 * np.conj(a[:, 2]) * np.conj(a[:, 4]), atol=1e-15)
        np.testing.assert_allclose(
            b[:, 1],
            a[:, 1] + 0.4 * np.exp(1j * theta) * np.conj(a[:, 3]) * np.conj(a[:, 5]),
            atol=1e-15)

    def test_w_explicit_row(self):
        tens = w_tensor(3, 1.0, [0.0, 0.0])
        a = SampleStream(8).vacuum_block(6, 0, 20)
        b = transform_generic(tens, a)
        amp = math.sqrt(2.0 / 3.0)
        expected = a[:, 0] + amp * (np.conj(a[:, 2]) * np.conj(a[:, 5]) +
                                    np.conj(a[:, 3]) * np.conj(a[:, 4]))
        np.testing.assert_allclose(b[:, 0], expected, atol=1e-15)

    def test_rank1_displacement(self):
        tens = SymmetricTensor(1, 2, {(1,): 0.3 + 0.2j, (2,): -0.5})
        a = SampleStream(9).vacuum_block(2, 0, 7)
        b = transform_generic(tens, a)
        np.testing.assert_allclose(b[:, 0], a[:, 0] + (0.3 + 0.2j), atol=1e-15)
        np.testing.assert_allclose(b[:, 1], a[:, 1] - 0.5, atol=1e-15)

    def test_repeated_index_weights(self):
        # multiset (1,1,2): b_1 += xi * conj(a_1) conj(a_2); b_2 += xi/2 conj(a_1)^2
        xi = 0.2 + 0.1j
        tens = SymmetricTensor(3, 1, {(1, 1, 2): xi})
        a = SampleStream(10).vacuum_block(3, 0, 11)
        b = transform_generic(tens, a)
        np.testing.assert_allclose(
            b[:, 0], a[:, 0] + xi * np.conj(a[:, 0]) * np.conj(a[:, 1]), atol=1e-15)
        np.testing.assert_allclose(
            b[:, 1], a[:, 1] + xi / 2 * np.conj(a[:, 0]) ** 2, atol=1e-15)

    def test_single_vector_shape(self):
        tens = ghz_tensor(3, 0.2)
        vec = SampleStream(11).vacuum_block(6, 0, 1)[0]
        out = transform_generic(tens, vec)
        assert out.shape == (6,)

    def test_first_order_terms_cost(self):
        terms = first_order_terms(ghz_tensor(4, 0.5))
        assert sum(len(t) for t in terms) == 8  # 2 multisets x 4 photon slots


class TestSpecializedTransforms:
    @pytest.mark.parametrize("n", [3, 4])
    def test_ghz_matches_generic(self, n):
        r, theta = 0.45, 1.1
        a = SampleStream(21, lane=n).vacuum_block(2 * n, 0, 10_000)
        direct = transform_ghz(n, r, theta, a)
        generic = transform_generic(ghz_tensor(n, r, theta), a)
        assert np.max(np.abs(direct - generic)) < 1e-12

    @pytest.mark.parametrize("n", [3, 4])
    def test_w_matches_generic(self, n):
        r = 0.8
        thetas = [0.3 * k for k in range(1, n)]
        a = SampleStream(22, lane=n).vacuum_block(2 * n, 0, 10_000)
        direct = transform_w(n, r, thetas, a)
        generic = transform_generic(w_tensor(n, r, thetas), a)
        assert np.max(np.abs(direct - generic)) < 1e-12

    def test_r_zero_identity(self):
        a = SampleStream(23).vacuum_block(6, 0, 5)
        np.testing.assert_array_equal(transform_ghz(3, 0.0, 0.4, a), a)
        np.testing.assert_array_equal(transform_w(3, 0.0, [0, 0], a), a)

    def test_ghz_n4_product_term(self):
        a = SampleStream(24).vacuum_block(8, 0, 16)
        b = transform_ghz(4, 0.6, 0.0, a)
        expected = a[:, 0] + 0.6 * np.conj(a[:, 2] * a[:, 4] * a[:, 6])
        np.testing.assert_allclose(b[:, 0], expected, atol=1e-14)

    def test_theta_conjugation_covariance(self):
        # b(-theta, conj(a)) = conj(b(theta, a)) exactly
        a = SampleStream(25).vacuum_block(6, 0, 100)
        for theta in (0.3, 1.7):
            pos = transform_ghz(3, 0.5, theta, a)
            neg = transform_ghz(3, 0.5, -theta, np.conj(a))
            np.testing.assert_array_equal(neg, np.conj(pos))


class TestRealize:
    def test_b_is_function_of_a(self):
        tens = ghz_tensor(3, 0.4)
        real = realize(tens, SampleStream(31))
        np.testing.assert_array_equal(real.b, transform_generic(tens, real.a))


class TestDump:
    def test_round_trip(self, tmp_path):
        blocks = [SampleStream(1).vacuum_block(4, 0, 10),
                  SampleStream(1).vacuum_block(4, 10, 5)]
        path = tmp_path / "raw.bin"
        dump_realizations(path, blocks)
        back = load_realizations(path)
        np.testing.assert_array_equal(back, np.vstack(blocks))


class TestMomentOracle:
    def test_against_weyl_oracle(self):
        """Second moments over 10^7 draws match the symmetric-ordered oracle
        within five standard errors."""
        from pinchsim.fock import first_order_moment_oracle

        for tens in (ghz_tensor(3, 0.1, 0.4), w_tensor(3, 0.1, [0.2, -0.5])):
            cross_or, plain_or = first_order_moment_oracle(tens)
            transform = GenericTransform(tens)
            stream = SampleStream(2024, lane=17)
            total = 10_000_000
            chunk = 1 << 19
            cross = np.zeros((6, 6), dtype=complex)
            plain = np.zeros((6, 6), dtype=complex)
            done = 0
            while done < total:
                c = min(chunk, total - done)
                b = transform(stream.vacuum_block(6, done, c))
                cross += np.einsum("ki,kj->ij", b, b.conj())
                plain += np.einsum("ki,kj->ij", b, b)
                done += c
            cross /= total
            plain /= total
            se = 1.0 / math.sqrt(total)  # per-entry 1-sigma scale for |b|~O(1)
            assert np.max(np.abs(cross - cross_or)) < 5 * se
            assert np.max(np.abs(plain - plain_or)) < 5 * se
