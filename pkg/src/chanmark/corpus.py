"""Seeded synthetic test clips: moving textured rectangles and noise textures.

The generator exists so the evaluation battery needs no external video
downloads. Clips are built to exercise the block-selection path: strongly
textured, corner-rich rectangles drift slowly around the frame center over a
smooth low-contrast background, so both the texture score and the keypoint
test fire inside the central region. Two deliberate extremes are mixed in for
selection-ablation runs: a fine vertical grating (texture without corners)
and sparse isolated dots (corners without texture).
"""

from fractions import Fraction

import numpy as np

from .frame_io import VideoClip
from .geometry import resize_plane

__all__ = ["generate_clip", "default_corpus", "CORPUS_KINDS"]

CORPUS_KINDS = ("rects", "noise")


def _smooth_background(rng, height, width):
    """Low-contrast field from bilinearly upsampled coarse noise, channel-correlated."""
    coarse = rng.uniform(-8.0, 8.0, size=(max(2, height // 16), max(2, width // 16)))
    field = resize_plane(coarse.astype(np.float64), height, width)
    base = rng.uniform(95.0, 125.0)
    gains = rng.uniform(0.9, 1.1, size=3)
    return np.clip(base + field[:, :, None] * gains, 0.0, 255.0).astype(np.float32)


def _confetti_texture(rng, h, w):
    """Base fill plus scattered small squares: dense texture and FAST-style corners."""
    base = rng.uniform(70.0, 185.0, size=3)
    gains = rng.uniform(0.9, 1.1, size=3)
    patch = np.tile(base.astype(np.float64), (h, w, 1))
    for _ in range(max(6, h * w // 110)):
        s = int(rng.integers(2, 7))
        y = int(rng.integers(0, h - s))
        x = int(rng.integers(0, w - s))
        delta = float(rng.uniform(45.0, 95.0)) * float(rng.choice([-1.0, 1.0]))
        patch[y : y + s, x : x + s] += delta * gains
    patch += rng.normal(0.0, 4.0, size=(h, w))[:, :, None] * gains
    return np.clip(patch, 25.0, 230.0)


def _noise_texture(rng, h, w):
    """White-noise fill (channel-correlated), clipped away from the rails."""
    base = rng.uniform(90.0, 165.0, size=3)
    gains = rng.uniform(0.9, 1.1, size=3)
    patch = base + rng.normal(0.0, 45.0, size=(h, w))[:, :, None] * gains
    return np.clip(patch, 25.0, 230.0)


def _grating_texture(rng, h, w):
    """Fine vertical stripes: high texture score, almost no corner responses."""
    base = rng.uniform(90.0, 150.0, size=3)
    period = int(rng.integers(2, 4))
    stripe = np.where((np.arange(w) // period) % 2 == 0, 55.0, -55.0)
    patch = base + stripe[None, :, None] * rng.uniform(0.9, 1.1, size=3)
    return np.clip(np.broadcast_to(patch, (h, w, 3)).copy(), 25.0, 230.0)


def _dots_texture(rng, h, w):
    """Sparse isolated dots on a flat fill: corners without much texture energy."""
    base = rng.uniform(100.0, 150.0, size=3)
    gains = rng.uniform(0.9, 1.1, size=3)
    patch = np.tile(base.astype(np.float64), (h, w, 1))
    for y in range(4, h - 3, 11):
        for x in range(4, w - 3, 11):
            jy = y + int(rng.integers(-2, 3))
            jx = x + int(rng.integers(-2, 3))
            delta = float(rng.uniform(70.0, 95.0)) * float(rng.choice([-1.0, 1.0]))
            patch[jy : jy + 2, jx : jx + 2] += delta * gains
    return np.clip(patch, 25.0, 230.0)


def _bounce(p0, v, t, lo, hi):
    """Position at time t on a reflective path between lo and hi."""
    span = float(hi - lo)
    if span <= 0:
        return float(lo)
    x = (p0 - lo + v * t) % (2.0 * span)
    return lo + (span - abs(x - span))


def _paste(frame, patch, x, y):
    """Copy patch onto frame at (x, y), cropping whatever falls outside."""
    fh, fw = frame.shape[:2]
    ph, pw = patch.shape[:2]
    x0, y0 = max(0, x), max(0, y)
    x1, y1 = min(fw, x + pw), min(fh, y + ph)
    if x1 > x0 and y1 > y0:
        frame[y0:y1, x0:x1] = patch[y0 - y : y1 - y, x0 - x : x1 - x]


def generate_clip(
    seed: int,
    width: int = 352,
    height: int = 288,
    n_frames: int = 100,
    fps: Fraction = Fraction(25, 1),
    kind: str = "rects",
) -> VideoClip:
    """Deterministic synthetic clip; `kind` picks the rectangle texture family."""
    if kind not in CORPUS_KINDS:
        raise ValueError(f"unknown corpus kind {kind!r} (expected one of {CORPUS_KINDS})")
    if width < 64 or height < 64:
        raise ValueError(f"clip must be at least 64x64, got {width}x{height}")
    if width % 2 or height % 2:
        raise ValueError(f"clip dimensions must be even for 4:2:0 output, got {width}x{height}")
    rng = np.random.default_rng(seed)
    background = _smooth_background(rng, height, width)

    # Keep rectangles inside the middle of the frame so the central-region
    # constraint of block selection stays satisfied while they drift.
    margin_x, margin_y = int(width * 0.22), int(height * 0.22)
    texture_fn = _noise_texture if kind == "noise" else _confetti_texture
    rects = []
    n_rects = 7
    avail_w = max(12, min(96, width - 2 * margin_x))
    avail_h = max(12, min(88, height - 2 * margin_y))
    for i in range(n_rects):
        lo_w = min(40, max(8, avail_w // 2))
        lo_h = min(36, max(8, avail_h // 2))
        rw = int(rng.integers(lo_w, max(lo_w + 1, avail_w)))
        rh = int(rng.integers(lo_h, max(lo_h + 1, avail_h)))
        patch = texture_fn(rng, rh, rw).astype(np.float32)
        x_lo, x_hi = margin_x, width - margin_x - rw
        y_lo, y_hi = margin_y, height - margin_y - rh
        x0 = float(rng.uniform(x_lo, max(x_lo, x_hi)))
        y0 = float(rng.uniform(y_lo, max(y_lo, y_hi)))
        # A couple of static anchors; the rest drift slowly.
        speed = 0.0 if i < 2 else float(rng.uniform(0.4, 1.2))
        ang = float(rng.uniform(0.0, 2.0 * np.pi))
        rects.append((patch, x0, y0, speed * np.cos(ang), speed * np.sin(ang), x_lo, x_hi, y_lo, y_hi))

    # Ablation extremes (static): grating = texture-only bait, dots = corner-only bait.
    gw, gh = 64, 56
    grating = _grating_texture(rng, gh, gw).astype(np.float32)
    dots = _dots_texture(rng, gh, gw).astype(np.float32)
    gx, gy = int(width * 0.25) - gw // 2, int(height * 0.28) - gh // 2
    dx_, dy_ = int(width * 0.75) - gw // 2, int(height * 0.72) - gh // 2

    frames = np.empty((n_frames, height, width, 3), dtype=np.float32)
    for t in range(n_frames):
        frame = background.copy()
        _paste(frame, grating, gx, gy)
        _paste(frame, dots, dx_, dy_)
        for patch, x0, y0, vx, vy, x_lo, x_hi, y_lo, y_hi in rects:
            x = int(round(_bounce(x0, vx, t, x_lo, max(x_lo, x_hi))))
            y = int(round(_bounce(y0, vy, t, y_lo, max(y_lo, y_hi))))
            _paste(frame, patch, x, y)
        frames[t] = frame
    return VideoClip(frames, Fraction(fps))


def default_corpus(
    base_seed: int = 7,
    width: int = 352,
    height: int = 288,
    n_frames: int = 100,
    fps: Fraction = Fraction(25, 1),
) -> list[tuple[str, VideoClip]]:
    """Three-clip battery corpus: two rectangle clips plus one noise-texture clip."""
    specs = [("rects_a", "rects", 0), ("rects_b", "rects", 1), ("noise_a", "noise", 2)]
    return [
        (name, generate_clip(base_seed + off, width, height, n_frames, fps, kind))
        for name, kind, off in specs
    ]
