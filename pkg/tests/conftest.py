"""Shared fixtures: small deterministic clips sized for fast unit tests."""

from fractions import Fraction

import numpy as np
import pytest

from chanmark.corpus import generate_clip
from chanmark.frame_io import VideoClip


@pytest.fixture(scope="session")
def small_clip() -> VideoClip:
    """Textured 128x128 clip, 12 frames: enough for two full embedding groups."""
    return generate_clip(seed=11, width=128, height=128, n_frames=12, fps=Fraction(25, 1))


@pytest.fixture(scope="session")
def cover_clip() -> VideoClip:
    """320x256 clip whose selected blocks cover all 16 payload positions (n=4)."""
    return generate_clip(seed=11, width=320, height=256, n_frames=10, fps=Fraction(25, 1))


@pytest.fixture(scope="session")
def gray_clip() -> VideoClip:
    """Uniform mid-gray clip: no texture, no corners, nothing selectable."""
    frames = np.full((6, 64, 64, 3), 128.0, dtype=np.float32)
    return VideoClip(frames, Fraction(25, 1))


def make_ingamut_ycbcr(rng: np.random.Generator, h: int = 16, w: int = 16):
    """Random 4:2:0 frame whose RGB image stays strictly inside [0, 255].

    Y in [60, 200] with chroma within +-20 of neutral keeps every converted
    sample away from the clamp rails, so the YCbCr->RGB->YCbCr loop is exact.
    """
    from chanmark.frame_io import FrameYCbCr420

    y = rng.integers(60, 201, size=(h, w), dtype=np.int64).astype(np.uint8)
    cb = rng.integers(108, 149, size=(h // 2, w // 2), dtype=np.int64).astype(np.uint8)
    cr = rng.integers(108, 149, size=(h // 2, w // 2), dtype=np.int64).astype(np.uint8)
    return FrameYCbCr420(y=y, cb=cb, cr=cr)
