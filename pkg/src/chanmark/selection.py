"""Adaptive embedding-block selection.

Combines two stability signals on the green channel of a frame group's
average frame: a per-block texture factor (count and magnitude of 4x4 DCT
coefficients inside each 8x8 LL block) and FAST corners ranked by Harris
response, thinned by greedy radius clustering. A block is selected when it
is textured enough, anchored by a keypoint, and inside the central region.

Selection reads only the green channel; embedding modifies only blue, so the
mask recomputed from a watermarked clip is identical to the embed-time mask.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import resize_plane
from .transforms import block_view, dct2_blocks, haar_dwt

__all__ = [
    "SelectionConfig",
    "KeyPoint",
    "BlockScore",
    "TextureScores",
    "SelectionMask",
    "texture_rf",
    "texture_ef",
    "texture_scores",
    "detect_keypoints",
    "cluster_keypoints",
    "select_blocks",
]

HARRIS_K = 0.04
HARRIS_WINDOW = 7
BLOCK = 8

# FAST segment test: circle of 16 pixels at radius 3, (dy, dx) clockwise from the top.
_FAST_CIRCLE = (
    (-3, 0), (-3, 1), (-2, 2), (-1, 3), (0, 3), (1, 3), (2, 2), (3, 1),
    (3, 0), (3, -1), (2, -2), (1, -3), (0, -3), (-1, -3), (-2, -2), (-3, -1),
)
_FAST_ARC = 9


@dataclass
class SelectionConfig:
    theta: float = 0.6                        # texture binarization threshold on [0, 1] scores
    cluster_radius: float = 4.0 * np.sqrt(2)  # keypoint suppression radius, full-res pixels
    central_ratio: float = 0.6                # fraction of width/height kept, centered
    fast_threshold: float = 20.0              # FAST intensity delta
    pyramid_levels: int = 4
    pyramid_scale: float = 1.2
    zero_eps: float = 1e-6                    # |coefficient| above this counts as nonzero
    mode: str = "both"                        # "both" | "texture" | "keypoints"

    def validate(self) -> None:
        if not 0.0 < self.theta < 1.0:
            raise ValueError(f"theta must be in (0, 1), got {self.theta}")
        if self.cluster_radius <= 0:
            raise ValueError(f"cluster_radius must be positive, got {self.cluster_radius}")
        if not 0.0 < self.central_ratio <= 1.0:
            raise ValueError(f"central_ratio must be in (0, 1], got {self.central_ratio}")
        if self.mode not in ("both", "texture", "keypoints"):
            raise ValueError(f"unknown selection mode {self.mode!r}")


@dataclass(frozen=True)
class KeyPoint:
    x: float
    y: float
    response: float
    octave: int = 0


@dataclass(frozen=True)
class BlockScore:
    bx: int
    by: int
    rf: int
    ef: float
    s: float


@dataclass
class TextureScores:
    """Per-block texture factors over an LL plane's 8x8 grid."""

    rf: np.ndarray   # (nby, nbx) int
    ef: np.ndarray   # (nby, nbx) float
    raw: np.ndarray  # ef + rf + ef*rf
    s: np.ndarray    # min-max normalized raw, all zeros when degenerate

    def at(self, bx: int, by: int) -> BlockScore:
        return BlockScore(bx, by, int(self.rf[by, bx]), float(self.ef[by, bx]), float(self.s[by, bx]))


@dataclass
class SelectionMask:
    """Raster-ordered (bx, by) coordinates of selected 8x8 LL blocks for one frame group."""

    blocks: list[tuple[int, int]]
    group_id: int = 0

    def __len__(self) -> int:
        return len(self.blocks)


def _subblock_dcts(block8: np.ndarray) -> np.ndarray:
    block8 = np.asarray(block8, dtype=np.float64)
    if block8.shape != (8, 8):
        raise ValueError(f"expected an 8x8 block, got {block8.shape}")
    sub = block8.reshape(2, 4, 2, 4).swapaxes(1, 2).reshape(4, 4, 4)
    return dct2_blocks(sub)


def texture_rf(block8: np.ndarray, zero_eps: float = 1e-6) -> int:
    """Count of nonzero coefficients across the four 4x4 sub-block DCTs."""
    return int((np.abs(_subblock_dcts(block8)) > zero_eps).sum())


def texture_ef(block8: np.ndarray) -> float:
    """Sum of |coefficient| across the four 4x4 sub-block DCTs."""
    return float(np.abs(_subblock_dcts(block8)).sum())


def texture_scores(ll_plane: np.ndarray, zero_eps: float = 1e-6) -> TextureScores:
    """Texture factors for every 8x8 block of an LL plane (edge remainder cropped)."""
    blocks = block_view(np.asarray(ll_plane, dtype=np.float64), BLOCK)
    nby, nbx = blocks.shape[:2]
    sub = blocks.reshape(nby, nbx, 2, 4, 2, 4).swapaxes(3, 4)
    coeffs = np.abs(dct2_blocks(sub))
    rf = (coeffs > zero_eps).sum(axis=(2, 3, 4, 5))
    ef = coeffs.sum(axis=(2, 3, 4, 5))
    raw = ef + rf + ef * rf
    span = raw.max() - raw.min()
    if span > 0:
        s = (raw - raw.min()) / span
    else:
        s = np.zeros_like(raw)
    return TextureScores(rf=rf, ef=ef, raw=raw, s=s)


def _box_sum(a: np.ndarray, win: int) -> np.ndarray:
    """Windowed sum with the window truncated at the borders."""
    h, w = a.shape
    r = win // 2
    ii = np.zeros((h + 1, w + 1), dtype=np.float64)
    ii[1:, 1:] = a.cumsum(axis=0).cumsum(axis=1)
    y0 = np.clip(np.arange(h) - r, 0, h)
    y1 = np.clip(np.arange(h) + r + 1, 0, h)
    x0 = np.clip(np.arange(w) - r, 0, w)
    x1 = np.clip(np.arange(w) + r + 1, 0, w)
    return ii[np.ix_(y1, x1)] - ii[np.ix_(y0, x1)] - ii[np.ix_(y1, x0)] + ii[np.ix_(y0, x0)]


def _harris_response(plane: np.ndarray) -> np.ndarray:
    gy, gx = np.gradient(plane)
    sxx = _box_sum(gx * gx, HARRIS_WINDOW)
    syy = _box_sum(gy * gy, HARRIS_WINDOW)
    sxy = _box_sum(gx * gy, HARRIS_WINDOW)
    trace = sxx + syy
    return sxx * syy - sxy * sxy - HARRIS_K * trace * trace


def _fast_corners(plane: np.ndarray, threshold: float) -> tuple[np.ndarray, np.ndarray]:
    """(xs, ys) of pixels passing the FAST-9 segment test on the 16-pixel circle."""
    h, w = plane.shape
    if h < 7 or w < 7:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    center = plane[3 : h - 3, 3 : w - 3]
    n = len(_FAST_CIRCLE)
    brighter = np.empty((n, h - 6, w - 6), dtype=bool)
    darker = np.empty_like(brighter)
    for i, (dy, dx) in enumerate(_FAST_CIRCLE):
        ring = plane[3 + dy : h - 3 + dy, 3 + dx : w - 3 + dx]
        brighter[i] = ring > center + threshold
        darker[i] = ring < center - threshold
    corner = _has_circular_run(brighter, _FAST_ARC) | _has_circular_run(darker, _FAST_ARC)
    ys, xs = np.nonzero(corner)
    return xs + 3, ys + 3


def _has_circular_run(masks: np.ndarray, run: int) -> np.ndarray:
    ext = np.concatenate([masks, masks[: run - 1]], axis=0).astype(np.uint8)
    csum = np.cumsum(ext, axis=0)
    windows = csum[run - 1 :].copy()
    windows[1:] -= csum[: ext.shape[0] - run]
    return (windows == run).any(axis=0)


def detect_keypoints(plane: np.ndarray, cfg: SelectionConfig) -> list[KeyPoint]:
    """FAST-9 corners over a bilinear image pyramid, scored by Harris response.

    Coordinates are mapped back to level-0 resolution; the result is ordered
    by (response desc, y, x) which fixes the clustering order downstream.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    if h < 32 or w < 32:
        raise ValueError(f"plane too small for keypoint detection: {h}x{w} (need >= 32x32)")
    points: list[KeyPoint] = []
    for level in range(cfg.pyramid_levels):
        factor = cfg.pyramid_scale**level
        lw, lh = int(round(w / factor)), int(round(h / factor))
        if lw < 32 or lh < 32:
            break
        img = plane if level == 0 else resize_plane(plane, lh, lw).astype(np.float64)
        xs, ys = _fast_corners(img, cfg.fast_threshold)
        if xs.size == 0:
            continue
        response = _harris_response(img)[ys, xs]
        sx, sy = w / lw, h / lh
        fx = (xs + 0.5) * sx - 0.5
        fy = (ys + 0.5) * sy - 0.5
        points.extend(
            KeyPoint(float(px), float(py), float(r), level)
            for px, py, r in zip(fx, fy, response)
        )
    points.sort(key=lambda kp: (-kp.response, kp.y, kp.x))
    return points


def cluster_keypoints(kps: list[KeyPoint], radius: float) -> list[KeyPoint]:
    """Greedy suppression: strongest response first, drop anything within `radius`."""
    order = sorted(kps, key=lambda kp: (-kp.response, kp.y, kp.x))
    r2 = radius * radius
    kept: list[KeyPoint] = []
    grid: dict[tuple[int, int], list[KeyPoint]] = {}
    for kp in order:
        cx, cy = int(np.floor(kp.x / radius)), int(np.floor(kp.y / radius))
        blocked = False
        for gx in (cx - 1, cx, cx + 1):
            for gy in (cy - 1, cy, cy + 1):
                for other in grid.get((gx, gy), ()):
                    if (kp.x - other.x) ** 2 + (kp.y - other.y) ** 2 <= r2:
                        blocked = True
                        break
                if blocked:
                    break
            if blocked:
                break
        if not blocked:
            kept.append(kp)
            grid.setdefault((cx, cy), []).append(kp)
    return kept


def _central_block_range(n_ll: int, ratio: float) -> tuple[float, float]:
    margin = (1.0 - ratio) / 2.0 * n_ll
    return margin, n_ll - margin


def select_blocks(
    group_avg_green: np.ndarray, cfg: SelectionConfig, group_id: int = 0
) -> SelectionMask:
    """Blocks that are textured, keypoint-anchored, and inside the central region.

    Operates on the full-resolution green plane of a group-average frame:
    texture scores come from its Haar LL subband; keypoints are detected at
    full resolution and land in the LL 8x8 grid at half their coordinates.
    """
    cfg.validate()
    plane = np.asarray(group_avg_green, dtype=np.float64)
    ll = haar_dwt(plane)[0]
    scores = texture_scores(ll, cfg.zero_eps)
    nby, nbx = scores.s.shape

    texture_ok = scores.s >= cfg.theta

    keypoint_ok = np.zeros((nby, nbx), dtype=bool)
    for kp in cluster_keypoints(detect_keypoints(plane, cfg), cfg.cluster_radius):
        bx = int(np.floor(kp.x / 2.0 / BLOCK))
        by = int(np.floor(kp.y / 2.0 / BLOCK))
        if 0 <= bx < nbx and 0 <= by < nby:
            keypoint_ok[by, bx] = True

    if cfg.mode == "texture":
        combined = texture_ok
    elif cfg.mode == "keypoints":
        combined = keypoint_ok
    else:
        combined = texture_ok & keypoint_ok

    lo_x, hi_x = _central_block_range(ll.shape[1], cfg.central_ratio)
    lo_y, hi_y = _central_block_range(ll.shape[0], cfg.central_ratio)
    eps = 1e-9
    blocks = [
        (bx, by)
        for by in range(nby)
        for bx in range(nbx)
        if combined[by, bx]
        and bx * BLOCK >= lo_x - eps
        and (bx + 1) * BLOCK <= hi_x + eps
        and by * BLOCK >= lo_y - eps
        and (by + 1) * BLOCK <= hi_y + eps
    ]
    return SelectionMask(blocks=blocks, group_id=group_id)
