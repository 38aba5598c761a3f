"""Unit tests for stream generation and the file format."""

import math

import numpy as np
import pytest

from aioli import streams


class TestStreamSpec:
    def test_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            streams.StreamSpec(kind="mystery", n=10)

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            streams.StreamSpec(kind="adversarial", n=10, eps=1.5)

    def test_rejects_bad_chi(self):
        with pytest.raises(ValueError):
            streams.StreamSpec(kind="adversarial", n=10, chi=0)

    def test_effective_B_defaults_to_log_n(self):
        spec = streams.StreamSpec(kind="adversarial", n=10 ** 4)
        assert spec.effective_B == pytest.approx(math.log(10 ** 4))

    def test_file_needs_path(self):
        with pytest.raises(ValueError):
            streams.StreamSpec(kind="file", n=10)


class TestAdversarialStream:
    def test_values_match_paper_formulas(self):
        n = 10 ** 4
        spec = streams.StreamSpec(kind="adversarial", n=n, seed=0, chi=1, eps=0.01)
        B = math.log(n)
        examples = streams.adversarial_stream(spec)
        x_pos = 1.0 - math.sqrt(0.01) / (2.0 * B)
        x_neg = math.sqrt(0.01) / B
        assert x_pos == pytest.approx(0.994571, abs=1e-6)
        assert x_neg == pytest.approx(0.010857, abs=1e-6)
        for ex in examples[:200]:
            if ex.y == 1:
                assert ex.x[0] == pytest.approx(x_pos)
            else:
                assert ex.x[0] == pytest.approx(x_neg)

    def test_probabilities_both_chi(self):
        n = 10 ** 4
        B = math.log(n)
        p_plus = math.sqrt(0.01) / (2 * B) + 0.01 / B
        p_minus = math.sqrt(0.01) / (2 * B) - 0.01 / B
        assert p_plus == pytest.approx(0.006514, abs=1e-5)
        assert p_minus == pytest.approx(0.004343, abs=1e-5)

    def test_empirical_frequency_within_3_sigma(self):
        n = 10 ** 6
        spec = streams.StreamSpec(kind="adversarial", n=n, seed=42, chi=1, eps=0.01)
        B = spec.effective_B
        p = math.sqrt(0.01) / (2 * B) + 0.01 / B
        examples = streams.adversarial_stream(spec)
        count = sum(1 for ex in examples if ex.y == 1)
        sigma = math.sqrt(n * p * (1 - p))
        assert abs(count - n * p) <= 3.0 * sigma

    def test_invalid_probability_rejected(self):
        # tiny B pushes the label probability above 1
        spec = streams.StreamSpec(kind="adversarial", n=10, B=0.01, eps=0.5)
        with pytest.raises(ValueError):
            streams.adversarial_stream(spec)

    def test_deterministic(self):
        spec = streams.StreamSpec(kind="adversarial", n=500, seed=7, chi=-1)
        a = streams.adversarial_stream(spec)
        b = streams.adversarial_stream(spec)
        assert all(x.y == y.y and np.array_equal(x.x, y.x) for x, y in zip(a, b))


class TestGaussianStream:
    def test_deterministic(self):
        spec = streams.StreamSpec(kind="gaussian", n=100, seed=3, d=4)
        a = streams.gaussian_stream(spec)
        b = streams.gaussian_stream(spec)
        assert all(np.array_equal(x.x, y.x) and x.y == y.y for x, y in zip(a, b))

    def test_inputs_within_R(self):
        spec = streams.StreamSpec(kind="gaussian", n=500, seed=4, d=3, R=0.7)
        for ex in streams.gaussian_stream(spec):
            assert np.linalg.norm(ex.x) <= 0.7 + 1e-12

    def test_different_seeds_differ(self):
        a = streams.gaussian_stream(streams.StreamSpec(kind="gaussian", n=50, seed=1, d=2))
        b = streams.gaussian_stream(streams.StreamSpec(kind="gaussian", n=50, seed=2, d=2))
        assert any(not np.array_equal(x.x, y.x) for x, y in zip(a, b))


class TestFileStreams:
    def test_roundtrip(self, tmp_path):
        spec = streams.StreamSpec(kind="gaussian", n=50, seed=5, d=3)
        examples = streams.gaussian_stream(spec)
        path = tmp_path / "stream.txt"
        streams.write_stream(path, examples)
        back = streams.read_stream(path)
        assert len(back) == 50
        for a, b in zip(examples, back):
            assert a.y == b.y
            assert np.array_equal(a.x, b.x)  # 17 significant digits round-trip

    def test_rejects_bad_label(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 0.5\n")
        with pytest.raises(ValueError):
            streams.read_stream(path)

    def test_make_stream_dispatch(self, tmp_path):
        spec = streams.StreamSpec(kind="adversarial", n=20, seed=1)
        assert len(streams.make_stream(spec)) == 20
        examples = streams.gaussian_stream(
            streams.StreamSpec(kind="gaussian", n=5, seed=1, d=2))
        path = tmp_path / "s.txt"
        streams.write_stream(path, examples)
        spec = streams.StreamSpec(kind="file", n=3, path=str(path))
        assert len(streams.make_stream(spec)) == 3
