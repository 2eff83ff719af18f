"""Fidelity (MSE/PSNR) and payload-accuracy (BER) measures."""

from dataclasses import dataclass

import numpy as np

from .frame_io import VideoClip

__all__ = ["mse", "psnr", "QualityReport", "quality_report", "ber"]

PEAK = 255.0


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared error over all elements."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for 8-bit range; inf when identical."""
    err = mse(a, b)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(PEAK * PEAK / err))


@dataclass
class QualityReport:
    """PSNR/MSE summary between a reference clip and a processed clip.

    psnr_mean averages the three whole-clip channel PSNRs; psnr_frames holds
    the same three-channel average computed per frame, and psnr_clip is the
    mean of that series.
    """

    psnr_mean: float
    psnr_channels: tuple
    mse_channels: tuple
    psnr_frames: np.ndarray
    psnr_clip: float
    identical: bool

    def to_dict(self) -> dict:
        return {
            "psnr_mean": self.psnr_mean,
            "psnr_channels": list(self.psnr_channels),
            "mse_channels": list(self.mse_channels),
            "psnr_frames": [float(v) for v in self.psnr_frames],
            "psnr_clip": self.psnr_clip,
            "identical": self.identical,
        }


def _psnr_of_mse(values: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.where(
            values == 0.0, np.inf, 10.0 * np.log10(PEAK * PEAK / np.maximum(values, 1e-300))
        )


def quality_report(reference: VideoClip, processed: VideoClip) -> QualityReport:
    """Per-channel and per-frame PSNR of `processed` against `reference`."""
    if reference.frames.shape != processed.frames.shape:
        raise ValueError(
            f"clip shapes differ: {reference.frames.shape} vs {processed.frames.shape}"
        )
    ref = reference.frames.astype(np.float64)
    proc = processed.frames.astype(np.float64)
    sq = (ref - proc) ** 2
    mse_ch = tuple(float(v) for v in sq.mean(axis=(0, 1, 2)))
    psnr_ch = tuple(float(v) for v in _psnr_of_mse(np.asarray(mse_ch)))
    psnr_frames = _psnr_of_mse(sq.mean(axis=(1, 2))).mean(axis=1)
    return QualityReport(
        psnr_mean=float(np.mean(psnr_ch)),
        psnr_channels=psnr_ch,
        mse_channels=mse_ch,
        psnr_frames=psnr_frames,
        psnr_clip=float(np.mean(psnr_frames)),
        identical=bool(np.all(sq == 0.0)),
    )


def ber(reference: np.ndarray, extracted: np.ndarray) -> float:
    """Fraction of payload symbols that disagree."""
    reference = np.asarray(reference).reshape(-1)
    extracted = np.asarray(extracted).reshape(-1)
    if reference.shape != extracted.shape:
        raise ValueError(f"payload length mismatch {reference.size} vs {extracted.size}")
    if reference.size == 0:
        raise ValueError("empty payload")
    return float(np.mean(reference != extracted))
