import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signsel.errors import ArgumentError, ConfigurationError
from signsel.metrics import (MetricValue, crest_factor, get_metric, log_sum_exp_metric,
                             metric_db, papr, rcm, srcm, to_db)
from signsel.ofdm import SignalParams, build_constellation, draw_symbols, modulate


def direct_lse(s, kappa):
    # no shift: only safe for small kappa * |s|^2
    return np.log(np.sum(np.exp(kappa * np.abs(s) ** 2)))


class TestPapr:
    def test_constant_envelope(self):
        s = np.exp(1j * np.linspace(0, 6, 32))
        assert papr(s) == pytest.approx(1.0)
        assert crest_factor(s) == pytest.approx(1.0)

    def test_single_spike(self):
        s = np.zeros(16, dtype=complex)
        s[5] = 4.0
        assert papr(s) == 16.0
        assert crest_factor(s) == 4.0

    def test_batched(self):
        s = np.array([[1, 2j], [3, 0]])
        np.testing.assert_allclose(papr(s), [4.0, 9.0])

    def test_empty(self):
        for fn in (papr, crest_factor, srcm, log_sum_exp_metric):
            with pytest.raises(ArgumentError):
                fn(np.array([]))

    def test_coherent_qpsk_db(self):
        N = 16
        b = np.full(N, build_constellation("qpsk").points[0])
        s = modulate(b, None, SignalParams(N))
        assert MetricValue(float(papr(s))).db == pytest.approx(10 * np.log10(16), abs=1e-9)


class TestLogSumExp:
    def test_constant_envelope_exact(self):
        kappa, LN = 10.0, 64
        s = np.exp(2j * np.pi * np.arange(LN) / LN)
        assert log_sum_exp_metric(s, kappa) == pytest.approx(kappa + np.log(LN), rel=1e-12)

    def test_matches_direct_sum(self):
        rng = np.random.default_rng(4)
        c = build_constellation("qam16")
        params = SignalParams(32)
        for _ in range(20):
            s = modulate(draw_symbols(c, 32, rng), None, params)
            assert log_sum_exp_metric(s, 2.0) == pytest.approx(direct_lse(s, 2.0), rel=1e-12)

    def test_no_overflow(self):
        s = np.zeros(8, dtype=complex)
        s[0] = 20.0  # kappa |s|^2 = 4000, exp overflows without the shift
        v = log_sum_exp_metric(s, 10.0)
        assert np.isfinite(v)
        assert v == pytest.approx(4000.0 + np.log1p(7 * np.exp(-4000.0)))

    def test_kappa_below_one(self):
        with pytest.raises(ConfigurationError):
            log_sum_exp_metric(np.ones(4), 0.5)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(1, 32), st.floats(1.0, 50.0), st.integers(0, 2**32 - 1))
    def test_brackets_papr(self, N, kappa, seed):
        rng = np.random.default_rng(seed)
        s = modulate(draw_symbols(build_constellation("qam16"), N, rng), None, SignalParams(N))
        LN = s.size
        v = log_sum_exp_metric(s, kappa) / kappa
        p = papr(s)
        assert p - 1e-12 <= v <= p + np.log(LN) / kappa + 1e-12


class TestSrcm:
    def test_unit_envelope(self):
        s = np.exp(1j * np.arange(10))
        assert srcm(s) == pytest.approx(1.0)

    def test_power_law(self):
        s = np.array([2.0, 0.0])
        assert srcm(s) == pytest.approx(32.0)

    def test_rcm_is_mean(self):
        assert rcm([1.0, 2.0, 6.0]).linear == pytest.approx(3.0)
        with pytest.raises(ArgumentError):
            rcm([])

    def test_uncoded_mean_near_six(self):
        # E|s|^6 = 3! for a unit-power complex Gaussian; finite-N QAM sits a little below
        rng = np.random.default_rng(0)
        c = build_constellation("qam16")
        params = SignalParams(256)
        vals = [srcm(modulate(draw_symbols(c, 256, rng), None, params)) for _ in range(400)]
        assert 5.5 < np.mean(vals) < 6.2


class TestLookup:
    @pytest.mark.parametrize("name", ["papr", "cf", "se", "srcm"])
    def test_known(self, name):
        s = np.exp(1j * np.arange(8))
        assert np.isfinite(get_metric(name)(s))

    def test_unknown(self):
        with pytest.raises(ConfigurationError):
            get_metric("evm")

    def test_db_scales(self):
        assert to_db(10.0) == pytest.approx(10.0)
        assert metric_db("cf", 10.0) == pytest.approx(20.0)
        assert metric_db("se", 100.0, kappa=10.0) == pytest.approx(10.0)
        assert metric_db("papr", 100.0) == pytest.approx(20.0)

    def test_cf_and_papr_agree_in_db(self):
        s = np.array([3.0, 1j, -1.0])
        assert metric_db("cf", crest_factor(s)) == pytest.approx(metric_db("papr", papr(s)))

    def test_metric_value_validation(self):
        with pytest.raises(ArgumentError):
            MetricValue(-1.0)
        with pytest.raises(ArgumentError):
            MetricValue(0.0).db
