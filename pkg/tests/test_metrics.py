"""MSE/PSNR/BER reference values, oracles, and report conventions."""

from fractions import Fraction

import numpy as np
import pytest

from chanmark.frame_io import VideoClip
from chanmark.metrics import ber, mse, psnr, quality_report


def test_psnr_identical_is_infinite():
    a = np.full((4, 4), 50.0)
    assert psnr(a, a) == float("inf")


def test_psnr_full_swing_is_zero_db():
    a = np.zeros((8, 8))
    b = np.full((8, 8), 255.0)
    assert psnr(a, b) == pytest.approx(0.0, abs=1e-12)


def test_psnr_mse_65_025_is_30_db():
    # 255^2 / 65.025 = 1000, so PSNR = 10 * log10(1000) = 30
    a = np.zeros(1000)
    b = np.full(1000, np.sqrt(65.025))
    assert mse(a, b) == pytest.approx(65.025, rel=1e-12)
    assert psnr(a, b) == pytest.approx(30.0, abs=1e-9)


def test_psnr_decreases_with_noise_level():
    rng = np.random.default_rng(501)
    a = rng.uniform(60, 200, size=(6, 32, 32))
    values = []
    for sigma in (0.5, 1, 2, 4, 8, 16, 32):
        noisy = a + rng.normal(0, sigma, size=a.shape)
        values.append(psnr(a, noisy))
    assert all(x > y for x, y in zip(values, values[1:]))


def test_mse_matches_literal_loop_oracle():
    rng = np.random.default_rng(502)
    for _ in range(1000):
        n = int(rng.integers(1, 30))
        a = rng.uniform(-100, 355, size=n)
        b = rng.uniform(-100, 355, size=n)
        want = sum((float(x) - float(y)) ** 2 for x, y in zip(a, b)) / n
        assert mse(a, b) == pytest.approx(want, rel=1e-12)


def test_mse_shape_mismatch():
    with pytest.raises(ValueError, match="shape"):
        mse(np.zeros(3), np.zeros(4))


def test_ber_counts_mismatches():
    assert ber([1, 1, -1, -1], [1, -1, -1, -1]) == 0.25
    assert ber([1, -1], [1, -1]) == 0.0
    assert ber([1, 1], [-1, -1]) == 1.0


def test_ber_is_symmetric():
    rng = np.random.default_rng(503)
    for _ in range(200):
        a = rng.choice([-1, 1], size=16)
        b = rng.choice([-1, 1], size=16)
        assert ber(a, b) == ber(b, a)


def test_ber_accepts_grid_shaped_payloads():
    a = np.array([[1, -1], [1, 1]])  # flattens to [1, -1, 1, 1]
    b = np.array([1, -1, -1, 1])
    assert ber(a, b) == 0.25


def test_ber_length_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        ber([1, 1, 1], [1, 1])


def test_ber_empty_payload():
    with pytest.raises(ValueError, match="empty"):
        ber([], [])


def _clips(ref, proc):
    return (
        VideoClip(ref.astype(np.float32), Fraction(25, 1)),
        VideoClip(proc.astype(np.float32), Fraction(25, 1)),
    )


def test_quality_report_identical_clip():
    frames = np.random.default_rng(504).uniform(0, 255, size=(3, 16, 16, 3))
    ref, proc = _clips(frames, frames.copy())
    report = quality_report(ref, proc)
    assert report.identical
    assert report.psnr_mean == float("inf")
    assert report.psnr_clip == float("inf")
    assert np.all(np.isinf(report.psnr_frames))


def test_quality_report_channel_breakdown():
    rng = np.random.default_rng(505)
    frames = rng.uniform(50, 200, size=(4, 16, 16, 3))
    proc = frames.copy()
    proc[..., 2] += 5.0  # damage only the third channel
    ref_clip, proc_clip = _clips(frames, proc)
    report = quality_report(ref_clip, proc_clip)
    assert report.mse_channels[0] == 0.0 and report.mse_channels[1] == 0.0
    assert report.mse_channels[2] == pytest.approx(25.0, rel=1e-6)
    assert np.isinf(report.psnr_channels[0]) and np.isinf(report.psnr_channels[1])
    assert report.psnr_channels[2] == pytest.approx(psnr(frames[..., 2], proc[..., 2]), rel=1e-9)
    # whole-clip mean over channels includes the two infinite terms
    assert report.psnr_mean == float("inf")
    assert not report.identical


def test_quality_report_per_frame_series():
    rng = np.random.default_rng(506)
    frames = rng.uniform(50, 200, size=(3, 16, 16, 3))
    proc = frames.copy()
    proc[1] += 3.0
    ref_clip, proc_clip = _clips(frames, proc)
    report = quality_report(ref_clip, proc_clip)
    assert report.psnr_frames.shape == (3,)
    assert np.isinf(report.psnr_frames[0]) and np.isinf(report.psnr_frames[2])
    want = np.mean(
        [psnr(ref_clip.frames[1, ..., c], proc_clip.frames[1, ..., c]) for c in range(3)]
    )
    assert report.psnr_frames[1] == pytest.approx(want, rel=1e-9)
    assert report.psnr_clip == float("inf")  # mean over frames includes inf terms


def test_quality_report_finite_case_matches_manual_mean():
    rng = np.random.default_rng(507)
    frames = rng.uniform(50, 200, size=(4, 16, 16, 3))
    proc = frames + rng.normal(0, 2.0, size=frames.shape)
    ref_clip, proc_clip = _clips(frames, proc)
    report = quality_report(ref_clip, proc_clip)
    want_channels = [psnr(ref_clip.frames[..., c], proc_clip.frames[..., c]) for c in range(3)]
    assert report.psnr_mean == pytest.approx(np.mean(want_channels), rel=1e-9)
    assert report.psnr_clip == pytest.approx(np.mean(report.psnr_frames), rel=1e-12)


def test_quality_report_shape_mismatch():
    rng = np.random.default_rng(508)
    a = VideoClip(rng.uniform(0, 255, size=(2, 16, 16, 3)).astype(np.float32), Fraction(25, 1))
    b = VideoClip(rng.uniform(0, 255, size=(3, 16, 16, 3)).astype(np.float32), Fraction(25, 1))
    with pytest.raises(ValueError, match="differ"):
        quality_report(a, b)
