"""Pairwise events, MGF determinant form, CPEP approximations, and the bound."""

import math

import numpy as np
import pytest

from fasim.analysis import (
    AbepResult,
    PairwiseEvent,
    abep_bound,
    cpep,
    cpep_approx,
    mgf,
    pairwise_events,
    upep,
)
from fasim.channel import CorrelationMatrix, build_correlation_matrix
from fasim.errors import ConfigError
from fasim.modulation import build_codebook

from test_modulation import make_config

Q_AT_1 = 0.158655253931457051  # mpmath oracle: erfc(1/sqrt(2))/2


def single_group_config():
    # one group of two ports, BPSK: B = 2, four codewords
    return make_config("fagim", 2, 1, na1=1, na2=1, m=2, nr=2, w1=1.0, w2=1.0)


def b4_config():
    # two groups of two ports on a 4x1 line, BPSK: B = 4
    return make_config("fagim", 4, 1, na1=2, na2=1, m=2, nr=2, w1=2.0, w2=1.0)


def b6_config(nr=2):
    return make_config("fagim", 2, 4, na1=1, na2=2, m=2, nr=nr, w1=2.0, w2=4.0)


class TestPairwiseEvents:
    def test_two_codeword_count(self):
        # B = 1: a single always-on port with BPSK
        config = make_config("fagim", 1, 1, na1=1, na2=1, m=2, nr=1, w1=1.0, w2=1.0)
        book = build_codebook(config)
        events = list(pairwise_events(book))
        assert len(events) == 2

    def test_b6_count(self):
        book = build_codebook(b6_config())
        count = sum(1 for _ in pairwise_events(book))
        assert count == 64 * 63

    def test_no_diagonal_events(self):
        book = build_codebook(b4_config())
        for ev in pairwise_events(book):
            assert ev.tx_label != ev.rx_label
            assert np.any(ev.psi != 0)

    def test_symmetry_properties(self):
        book = build_codebook(b4_config())
        events = {(e.tx_label, e.rx_label): e for e in pairwise_events(book)}
        for (a, b), e in events.items():
            mirror = events[(b, a)]
            assert e.bit_errors == mirror.bit_errors
            assert np.array_equal(e.psi, -mirror.psi)
            assert 0 <= e.bit_errors <= book.bits_per_tx


class TestCpep:
    def test_zero_gamma(self):
        assert cpep(0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_q_at_one(self):
        # Gamma / (2 n0) = 1
        assert cpep(2.0, 1.0) == pytest.approx(Q_AT_1, abs=1e-15)

    def test_large_gamma_vanishes(self):
        assert cpep(1e6, 1.0) == 0.0

    def test_approx_zero_gamma(self):
        assert cpep_approx(0.0, 1.0) == pytest.approx(0.5, abs=1e-15)

    def test_approx_large_gamma_vanishes(self):
        assert cpep_approx(1e6, 1.0) == pytest.approx(0.0, abs=1e-300)

    def test_approx_upper_bounds_exact_on_grid(self):
        grid = np.logspace(math.log10(0.1), math.log10(40.0), 100)
        ratios = np.array([cpep_approx(u, 1.0) / cpep(u, 1.0) for u in grid])
        assert np.all(ratios >= 1.0)
        # the three-exponential form decays like exp(-u/4)/4 while the exact
        # tail decays like phi/x, so the ratio grows with u; oracle-computed
        # maximum on this grid (mpmath, 30 digits) is 2.93126 at u = 40
        assert float(ratios.max()) == pytest.approx(2.931260, abs=1e-4)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            cpep(-1.0, 1.0)
        with pytest.raises(ValueError):
            cpep_approx(1.0, 0.0)


class TestMgf:
    def test_at_zero_is_half(self):
        jt = build_correlation_matrix(b6_config().layout)
        psi = np.zeros(8, dtype=complex)
        psi[0] = 1.0 - 0.3j
        assert mgf(0.0, jt, psi, 2) == pytest.approx(0.5, abs=1e-15)

    def test_zero_psi_is_half_everywhere(self):
        jt = CorrelationMatrix(np.eye(4))
        psi = np.zeros(4, dtype=complex)
        for arg in (-10.0, -1.0, 0.0, 5.0):
            assert mgf(arg, jt, psi, 3) == pytest.approx(0.5, abs=1e-15)

    def test_rank_one_identity_oracle(self):
        # independent closed form: det(I - x Jt psi psi^H) = 1 - x psi^H Jt psi
        rng = np.random.default_rng(5)
        jt = build_correlation_matrix(b6_config().layout)
        for _ in range(50):
            psi = rng.standard_normal(8) + 1j * rng.standard_normal(8)
            x = -float(rng.uniform(0.01, 20.0))
            quad = float((psi.conj() @ jt.entries @ psi).real)
            expect = 0.5 * (1.0 - x * quad) ** (-3)
            assert mgf(x, jt, psi, 3) == pytest.approx(expect, rel=1e-12)

    def test_monte_carlo_expectation_oracle(self):
        # Jt = I, psi = delta * e1: E[exp(-a ||H psi||^2)] = (1 + a delta^2)^-nr,
        # i.e. twice the printed MGF (the leading 1/2 is a convention, not a
        # property of the distribution)
        nr, delta, a = 2, 0.8, 0.7
        rng = np.random.Generator(np.random.Philox(key=77))
        g = math.sqrt(0.5) * (
            rng.standard_normal((100_000, nr)) + 1j * rng.standard_normal((100_000, nr))
        )
        gamma = delta**2 * np.sum(np.abs(g) ** 2, axis=1)
        mc = float(np.mean(np.exp(-a * gamma)))
        expect = (1.0 + a * delta**2) ** (-nr)
        assert mc == pytest.approx(expect, rel=0.02)
        jt = CorrelationMatrix(np.eye(4))
        psi = np.zeros(4, dtype=complex)
        psi[0] = delta
        assert 2.0 * mgf(-a, jt, psi, nr) == pytest.approx(expect, rel=1e-12)

    def test_rotation_invariance_identity_correlation(self):
        # with Jt = I the value depends on psi only through its norm
        jt = CorrelationMatrix(np.eye(5))
        rng = np.random.default_rng(9)
        psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5)))
        rotated = q @ psi
        assert mgf(-0.8, jt, rotated, 2) == pytest.approx(
            mgf(-0.8, jt, psi, 2), rel=1e-12
        )

    def test_monotone_in_negative_arg(self):
        jt = build_correlation_matrix(b6_config().layout)
        psi = np.zeros(8, dtype=complex)
        psi[1] = 1.0
        psi[4] = -0.5j
        args = [-0.1, -1.0, -5.0, -25.0]
        vals = [mgf(a, jt, psi, 2) for a in args]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_singularity_rejected(self):
        jt = CorrelationMatrix(np.eye(2))
        psi = np.array([1.0, 0.0], dtype=complex)
        with pytest.raises(ValueError, match="singular"):
            mgf(1.0, jt, psi, 2)  # pole at x = 1/||psi||^2 = 1


class TestUpep:
    def test_zero_psi_quarter(self):
        jt = CorrelationMatrix(np.eye(4))
        ev = PairwiseEvent(0, 0, np.zeros(4, dtype=complex), 0)
        assert upep(ev, 1.0, jt, 2) == pytest.approx(0.25, abs=1e-15)

    def test_huge_noise_limit(self):
        book = build_codebook(b4_config())
        jt = build_correlation_matrix(b4_config().layout)
        ev = next(pairwise_events(book))
        assert upep(ev, 1e12, jt, 2) == pytest.approx(0.25, rel=1e-6)

    def test_monte_carlo_upep_oracle(self):
        # MC average of the conditional approximation, halved by the printed
        # MGF convention, matches within 3 standard errors
        config = b4_config()
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        from fasim.channel import spectral_decompose, synthesize_channel

        factor = spectral_decompose(jt)
        ev = list(pairwise_events(book))[17]
        n0 = 0.5
        rng = np.random.Generator(np.random.Philox(key=13))
        vals = np.empty(10_000)
        for i in range(vals.shape[0]):
            h = synthesize_channel(factor, config.n_rx, rng).matrix
            vals[i] = cpep_approx(float(np.sum(np.abs(h @ ev.psi) ** 2)), n0)
        mc = 0.5 * float(np.mean(vals))
        se = 0.5 * float(np.std(vals, ddof=1)) / math.sqrt(vals.shape[0])
        got = upep(ev, n0, jt, config.n_rx)
        assert abs(got - mc) <= 3 * se

    def test_sign_invariance(self):
        book = build_codebook(b4_config())
        jt = build_correlation_matrix(b4_config().layout)
        ev = list(pairwise_events(book))[5]
        flipped = PairwiseEvent(ev.rx_label, ev.tx_label, -ev.psi, ev.bit_errors)
        assert upep(flipped, 0.3, jt, 2) == pytest.approx(
            upep(ev, 0.3, jt, 2), rel=1e-12
        )


def naive_abep(codebook, jt, nr, n0):
    """Independent double-sum oracle using the rank-1 determinant identity."""
    size = len(codebook)
    b = codebook.bits_per_tx
    total = 0.0
    for tx in range(size):
        for rx in range(size):
            if tx == rx:
                continue
            psi = codebook.dense[tx] - codebook.dense[rx]
            quad = float((psi.conj() @ jt.entries @ psi).real)
            term = 0.0
            for coef, mult in ((1 / 12, 1.0), (1 / 24, 0.5), (1 / 8, 0.25)):
                term += coef / (1.0 + mult * quad / n0) ** nr
            total += bin(tx ^ rx).count("1") * term
    return total / (size * b)


class TestAbepBound:
    def test_two_codeword_bound(self):
        config = make_config("fagim", 1, 1, na1=1, na2=1, m=2, nr=1, w1=1.0, w2=1.0)
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        result = abep_bound(book, jt, 1, [0.5])
        events = list(pairwise_events(book))
        expect = 0.5 * sum(upep(e, 0.5, jt, 1) * e.bit_errors for e in events)
        assert result.bound[0] == pytest.approx(expect, rel=1e-12)

    def test_matches_naive_double_sum(self):
        config = b4_config()
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        for n0 in (1.0, 0.1, 0.01):
            got = abep_bound(book, jt, config.n_rx, [n0]).bound[0]
            assert got == pytest.approx(naive_abep(book, jt, config.n_rx, n0), rel=1e-12)

    def test_sampled_within_three_stderr_of_exact(self):
        config = b6_config()
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        n0 = 0.1  # 10 dB
        exact = abep_bound(book, jt, config.n_rx, [n0]).bound[0]
        rng = np.random.Generator(np.random.Philox(key=3))
        sampled = abep_bound(
            book, jt, config.n_rx, [n0], mode="sampled", sample_count=100_000, rng=rng
        )
        assert abs(sampled.bound[0] - exact) <= 3 * sampled.stderr[0]

    def test_monotone_in_snr(self):
        config = b6_config()
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        snr = np.arange(0.0, 21.0, 2.0)
        result = abep_bound(book, jt, config.n_rx, 10.0 ** (-snr / 10.0))
        assert np.all(np.diff(result.bound) < 0)
        assert np.all(result.bound > 0)
        assert np.all(result.bound <= config.bits_per_tx * 2**config.bits_per_tx)

    def test_exact_mode_size_limit(self):
        config = make_config("fagim", 4, 4, na1=2, na2=2, m=4, nr=2, w1=2.4, w2=2.4)
        book = build_codebook(config)
        jt = build_correlation_matrix(config.layout)
        with pytest.raises(ConfigError):
            abep_bound(book, jt, 2, [0.1], mode="exact")

    def test_sampled_mode_minimum_pairs(self):
        book = build_codebook(b6_config())
        jt = build_correlation_matrix(b6_config().layout)
        with pytest.raises(ConfigError):
            abep_bound(book, jt, 2, [0.1], mode="sampled", sample_count=100, rng=np.random.default_rng())

    def test_result_is_frozen(self):
        book = build_codebook(b4_config())
        jt = build_correlation_matrix(b4_config().layout)
        result = abep_bound(book, jt, 2, [0.5, 0.1])
        assert isinstance(result, AbepResult)
        with pytest.raises(ValueError):
            result.bound[0] = 0.0
