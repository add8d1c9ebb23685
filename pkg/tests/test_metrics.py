import json
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steerbeam.errors import SteerbeamError
from steerbeam.metrics import (MetricsReport, aggregate_reports, measure_rtf,
                               power_reduction, separation_report, si_sdr)
from steerbeam.dsp import MultichannelAudio


def orthogonal_noise(reference, energy_ratio, seed=0):
    """Gram-Schmidt oracle: noise orthogonal to the reference with a set energy."""
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(len(reference))
    w -= (np.dot(w, reference) / np.dot(reference, reference)) * reference
    w *= np.sqrt(energy_ratio * np.dot(reference, reference) / np.dot(w, w))
    return w


class TestPowerReduction:
    def test_identity_zero(self, rng):
        y = rng.standard_normal(1000)
        assert power_reduction(y, y) == pytest.approx(0.0, abs=1e-12)

    def test_half_amplitude(self, rng):
        y = rng.standard_normal(1000)
        assert power_reduction(y, 0.5 * y) == pytest.approx(6.0206, abs=1e-4)

    def test_sqrt10(self, rng):
        y = rng.standard_normal(1000)
        assert power_reduction(y, y / np.sqrt(10)) == pytest.approx(10.0, abs=1e-9)

    @given(g=st.floats(1e-4, 1e4))
    @settings(max_examples=50, deadline=None)
    def test_scale_law_exact(self, g):
        y = np.random.default_rng(3).standard_normal(512)
        assert power_reduction(y, g * y) == pytest.approx(-20 * np.log10(g), abs=1e-9)

    def test_zero_estimate_capped(self, rng):
        y = rng.standard_normal(100)
        assert power_reduction(y, np.zeros(100)) == 100.0

    def test_zero_reference_rejected(self):
        with pytest.raises(SteerbeamError, match="zero-energy"):
            power_reduction(np.zeros(100), np.ones(100))

    def test_length_mismatch(self, rng):
        with pytest.raises(SteerbeamError, match="length"):
            power_reduction(rng.standard_normal(10), rng.standard_normal(11))


class TestSiSdr:
    def test_perfect_reconstruction_capped(self, rng):
        x = rng.standard_normal(1000)
        assert si_sdr(x, x) == 100.0

    def test_scale_invariance_cap(self, rng):
        x = rng.standard_normal(1000)
        assert si_sdr(3.0 * x, x) == 100.0

    def test_orthogonal_noise_is_10db(self, rng):
        ref = rng.standard_normal(4000)
        est = ref + orthogonal_noise(ref, 0.1)
        assert si_sdr(est, ref) == pytest.approx(10.0, abs=0.01)

    @given(a=st.floats(-100, 100).filter(lambda v: abs(v) > 1e-3))
    @settings(max_examples=50, deadline=None)
    def test_scale_invariance(self, a):
        gen = np.random.default_rng(5)
        ref = gen.standard_normal(512)
        est = ref + orthogonal_noise(ref, 0.3, seed=6)
        assert si_sdr(a * est, ref) == pytest.approx(si_sdr(est, ref), abs=1e-6)

    def test_zero_reference_rejected(self):
        with pytest.raises(SteerbeamError):
            si_sdr(np.ones(10), np.zeros(10))


class TestRtf:
    def test_sleeping_pipeline(self):
        class Sleepy:
            class cfg:
                sample_rate = 16000
                hop = 160

            def process_frame(self, frame):
                time.sleep(0.001)
                return frame[0]

        result = measure_rtf(Sleepy, clips=2, clip_len_s=0.5)
        # 1 ms per 10 ms frame -> RTF 0.1, plus scheduler noise
        assert result.mean == pytest.approx(0.1, rel=0.5)
        assert result.clips == 2

    def test_builtin_pipeline_under_budget(self):
        from steerbeam.separation import StreamingPipeline

        result = measure_rtf(StreamingPipeline, clips=3, clip_len_s=2.0)
        assert result.mean < 0.25


class TestReports:
    def test_report_roundtrip(self, tmp_path):
        report = MetricsReport(pr_db=3.5, si_sdr_db=12.0, extra={"gamma_deg": 25.0})
        path = tmp_path / "metrics.json"
        report.to_json(path)
        data = json.loads(path.read_text())
        assert data["pr_db"] == 3.5 and data["gamma_deg"] == 25.0
        assert data["external_sig"] is None  # reserved, never computed here

    def test_aggregate(self):
        reports = [MetricsReport(pr_db=1.0), MetricsReport(pr_db=3.0),
                   MetricsReport(si_sdr_db=5.0)]
        agg = aggregate_reports(reports)
        assert agg["pr_db"]["mean"] == pytest.approx(2.0)
        assert agg["si_sdr_db"]["std"] == pytest.approx(0.0)

    def test_separation_report(self, rng):
        mix = MultichannelAudio(rng.standard_normal((2, 2000)), 16000)
        out = 0.5 * mix.data[0]
        report = separation_report(mix, out, target_stem=mix.data[0])
        assert report.pr_db == pytest.approx(6.0206, abs=1e-3)
        assert report.si_sdr_db == 100.0
