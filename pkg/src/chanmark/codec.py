"""Watermark embedding and blind extraction.

A payload of L = n*n symbols in {+1, -1} is Arnold-scrambled, then each
K-frame group carries the whole scrambled payload: selected blocks (raster
rank r) carry symbol r mod L. A block encodes its symbol as the sign of
cB - cG, the difference between the blue and green band sums on one
anti-diagonal of the block's LL-DCT, forced to +p or -p by rewriting the
blue band (the change amortized equally over the band's coefficients).
Extraction averages each group's frames, recomputes the mask from the green
channel, and majority-votes the block decisions per payload index.
"""

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .frame_io import VideoClip
from .selection import SelectionConfig, SelectionMask, select_blocks
from .transforms import (
    band_indices,
    band_mask,
    block_view,
    dct2_blocks,
    haar_dwt,
    haar_idwt,
    idct2_blocks,
)

__all__ = [
    "WatermarkPayload",
    "EmbedParams",
    "ExtractionResult",
    "arnold_period",
    "arnold_scramble",
    "arnold_descramble",
    "compute_group_average",
    "group_slices",
    "embed_group",
    "embed_clip",
    "detect_block",
    "vote_decisions",
    "extract",
]

RED, GREEN, BLUE = 0, 1, 2


@dataclass
class WatermarkPayload:
    """Length n*n sequence of +1/-1 symbols."""

    symbols: np.ndarray
    n: int

    @classmethod
    def from_symbols(cls, symbols) -> "WatermarkPayload":
        symbols = np.asarray(symbols, dtype=np.int8)
        n = int(np.sqrt(symbols.size))
        if n < 2 or n * n != symbols.size:
            raise ValueError(f"payload length {symbols.size} is not a square of n >= 2")
        if not np.all(np.abs(symbols) == 1):
            raise ValueError("payload symbols must be +1 or -1")
        return cls(symbols=symbols, n=n)

    @classmethod
    def from_bits(cls, bits: str) -> "WatermarkPayload":
        """Parse a '0'/'1' string; 0 maps to -1, 1 maps to +1."""
        clean = "".join(bits.split())
        if not clean or set(clean) - {"0", "1"}:
            raise ValueError("payload text must contain only '0' and '1'")
        return cls.from_symbols([1 if c == "1" else -1 for c in clean])

    @classmethod
    def from_file(cls, path) -> "WatermarkPayload":
        return cls.from_bits(Path(path).read_text())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "WatermarkPayload":
        return cls.from_symbols(rng.choice([-1, 1], size=n * n))

    def to_bits(self) -> str:
        return "".join("1" if s > 0 else "0" for s in self.symbols)

    def to_file(self, path) -> None:
        Path(path).write_text(self.to_bits() + "\n")

    @property
    def length(self) -> int:
        return self.symbols.size


@dataclass
class EmbedParams:
    p: float = 12.0        # embedding strength: target |cB - cG| on the band
    band_k: int = 5        # anti-diagonal u+v of the 8x8 LL-DCT (6 coefficients)
    k_frames: int = 5      # frames per group carrying one payload copy
    selection: SelectionConfig = field(default_factory=SelectionConfig)

    def validate(self) -> None:
        if self.p <= 0:
            raise ValueError(f"embedding strength must be positive, got {self.p}")
        if not 1 <= self.band_k <= 13:
            raise ValueError(f"band_k must be in [1, 13] for 8x8 blocks, got {self.band_k}")
        if self.k_frames < 1:
            raise ValueError(f"k_frames must be >= 1, got {self.k_frames}")
        self.selection.validate()


def _arnold_step_targets(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, y = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    return (x + y) % n, (x + 2 * y) % n


def _arnold_apply(grid: np.ndarray, times: int) -> np.ndarray:
    n = grid.shape[0]
    nx, ny = _arnold_step_targets(n)
    out = grid
    for _ in range(times):
        nxt = np.empty_like(out)
        nxt[nx, ny] = out
        out = nxt
    return out


def arnold_period(n: int) -> int:
    """Smallest t >= 1 with the cat map (x,y) -> (x+y, x+2y) mod n equal to identity."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    ident = np.arange(n * n).reshape(n, n)
    cur = _arnold_apply(ident, 1)
    period = 1
    while not np.array_equal(cur, ident):
        cur = _arnold_apply(cur, 1)
        period += 1
        if period > 12 * n:
            raise RuntimeError(f"cat map period search exceeded bound for n={n}")
    return period


def arnold_scramble(payload: WatermarkPayload, key: int) -> WatermarkPayload:
    """Permute the payload by `key` iterations of the cat map on its n x n layout."""
    if key < 0:
        raise ValueError(f"key must be >= 0, got {key}")
    n = payload.n
    times = key % arnold_period(n) if key else 0
    grid = _arnold_apply(payload.symbols.reshape(n, n), times)
    return WatermarkPayload(symbols=grid.reshape(-1), n=n)


def arnold_descramble(payload: WatermarkPayload, key: int) -> WatermarkPayload:
    """Exact inverse of arnold_scramble with the same key."""
    if key < 0:
        raise ValueError(f"key must be >= 0, got {key}")
    period = arnold_period(payload.n)
    return arnold_scramble(payload, (period - key % period) % period)


def compute_group_average(frames: np.ndarray) -> np.ndarray:
    """Arithmetic per-channel mean of a (K, H, W, 3) frame stack, real-valued."""
    return np.asarray(frames, dtype=np.float64).mean(axis=0)


def group_slices(n_frames: int, k: int) -> list[slice]:
    """Consecutive K-frame groups; the final group may be shorter."""
    return [slice(s, min(s + k, n_frames)) for s in range(0, n_frames, k)]


def _band_sums_at(ll_plane: np.ndarray, coords: np.ndarray, band_k: int) -> np.ndarray:
    blocks = block_view(ll_plane, 8)[coords[:, 1], coords[:, 0]]
    return dct2_blocks(blocks)[:, band_mask(8, band_k)].sum(axis=1)


def _payload_indices(coords: np.ndarray, nbx: int, length: int) -> np.ndarray:
    """Payload index for each (bx, by) block: raster position modulo payload length.

    Keyed to the block's absolute grid position rather than its rank inside the
    mask, so a block always carries the same bit even when attacks perturb which
    neighbours make it into the recomputed mask.
    """
    return (coords[:, 1] * nbx + coords[:, 0]) % length


def embed_group(
    frames: np.ndarray,
    scrambled: WatermarkPayload,
    params: EmbedParams,
    group_id: int = 0,
    mask: SelectionMask | None = None,
) -> tuple[np.ndarray, SelectionMask]:
    """Embed the scrambled payload into one group of frames (blue channel only).

    Returns the watermarked frames and the selection mask used. An empty mask
    leaves the group untouched (with a warning): the content offers no stable
    blocks there.
    """
    frames = np.asarray(frames)
    if mask is None:
        avg = compute_group_average(frames)
        mask = select_blocks(avg[..., GREEN], params.selection, group_id)
    if not mask.blocks:
        warnings.warn(f"group {group_id}: no embeddable blocks, frames left unmodified")
        return frames.astype(np.float32, copy=True), mask

    coords = np.asarray(mask.blocks, dtype=np.int64)
    nbx = (frames.shape[2] // 2) // 8
    bits = scrambled.symbols[_payload_indices(coords, nbx, scrambled.length)]
    bmask = band_mask(8, params.band_k)
    bu, bv = np.nonzero(bmask)
    f_count = len(band_indices(8, params.band_k))

    out = frames.astype(np.float32, copy=True)
    for t in range(out.shape[0]):
        blue = out[t, ..., BLUE].astype(np.float64)
        green = out[t, ..., GREEN].astype(np.float64)
        ll_b, lh_b, hl_b, hh_b = haar_dwt(blue)
        ll_g = haar_dwt(green)[0]

        b_blocks = block_view(ll_b, 8)
        coeff_b = dct2_blocks(b_blocks[coords[:, 1], coords[:, 0]])
        c_b = coeff_b[:, bmask].sum(axis=1)
        c_g = _band_sums_at(ll_g, coords, params.band_k)
        d_b = c_b - c_g

        modify = np.where(bits > 0, d_b <= 0, d_b >= 0)
        target = np.where(bits > 0, c_g + params.p, c_g - params.p)
        rows = np.nonzero(modify)[0]
        if rows.size:
            coeff_b[rows[:, None], bu[None, :], bv[None, :]] = (target[rows] / f_count)[:, None]
            b_blocks[coords[rows, 1], coords[rows, 0]] = idct2_blocks(coeff_b[rows])
            rebuilt = np.clip(haar_idwt(ll_b, lh_b, hl_b, hh_b), 0.0, 255.0)
            out[t, ..., BLUE] = rebuilt.astype(np.float32)
    return out, mask


def embed_clip(
    clip: VideoClip, payload: WatermarkPayload, key: int, params: EmbedParams
) -> tuple[VideoClip, list[SelectionMask]]:
    """Embed the payload into every K-frame group of a clip."""
    params.validate()
    clip.validate()
    scrambled = arnold_scramble(payload, key)
    frames = clip.frames.copy()
    masks = []
    for gid, sl in enumerate(group_slices(len(clip), params.k_frames)):
        frames[sl], mask = embed_group(frames[sl], scrambled, params, group_id=gid)
        masks.append(mask)
    return VideoClip(frames, clip.fps), masks


def detect_block(avg_frame: np.ndarray, block: tuple[int, int], band_k: int = 5) -> int:
    """Read one block's symbol from a group-average frame: +1 iff cB > cG, else -1."""
    coords = np.asarray([block], dtype=np.int64)
    ll_b = haar_dwt(np.asarray(avg_frame, dtype=np.float64)[..., BLUE])[0]
    ll_g = haar_dwt(np.asarray(avg_frame, dtype=np.float64)[..., GREEN])[0]
    c_b = _band_sums_at(ll_b, coords, band_k)[0]
    c_g = _band_sums_at(ll_g, coords, band_k)[0]
    return 1 if c_b > c_g else -1


@dataclass
class ExtractionResult:
    payload: WatermarkPayload            # descrambled decision per bit
    confidence: np.ndarray               # |vote sum| / vote count per bit (0 when uncovered)
    votes: np.ndarray                    # descrambled vote sums
    counts: np.ndarray                   # descrambled vote counts
    masks: list[SelectionMask]

    @property
    def uncovered(self) -> np.ndarray:
        """Indices (in descrambled payload order) that received no votes."""
        return np.nonzero(self.counts == 0)[0]


def vote_decisions(votes: np.ndarray, counts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Majority decision and confidence per payload index.

    Positive vote sum -> +1, ties and uncovered (zero count) -> -1;
    confidence is |vote sum| / vote count, zero when uncovered.
    """
    votes = np.asarray(votes, dtype=np.int64)
    counts = np.asarray(counts, dtype=np.int64)
    symbols = np.where(votes > 0, 1, -1).astype(np.int8)
    confidence = np.where(counts > 0, np.abs(votes) / np.maximum(counts, 1), 0.0)
    return symbols, confidence


def extract(clip: VideoClip, n: int, key: int, params: EmbedParams) -> ExtractionResult:
    """Blind extraction: per-group mask recomputation, block detection, majority vote."""
    params.validate()
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    length = n * n
    votes = np.zeros(length, dtype=np.int64)
    counts = np.zeros(length, dtype=np.int64)
    masks = []
    for gid, sl in enumerate(group_slices(len(clip), params.k_frames)):
        avg = compute_group_average(clip.frames[sl])
        mask = select_blocks(avg[..., GREEN], params.selection, gid)
        masks.append(mask)
        if not mask.blocks:
            continue
        coords = np.asarray(mask.blocks, dtype=np.int64)
        ll_b = haar_dwt(avg[..., BLUE])[0]
        ll_g = haar_dwt(avg[..., GREEN])[0]
        c_b = _band_sums_at(ll_b, coords, params.band_k)
        c_g = _band_sums_at(ll_g, coords, params.band_k)
        symbols = np.where(c_b > c_g, 1, -1)
        idx = _payload_indices(coords, ll_b.shape[1] // 8, length)
        np.add.at(votes, idx, symbols)
        np.add.at(counts, idx, 1)

    decisions, conf = vote_decisions(votes, counts)
    perm = _descramble_permutation(n, key)
    result = WatermarkPayload(symbols=decisions[perm], n=n)
    return ExtractionResult(
        payload=result,
        confidence=conf[perm],
        votes=votes[perm],
        counts=counts[perm],
        masks=masks,
    )


def _descramble_permutation(n: int, key: int) -> np.ndarray:
    """Flat index permutation such that descrambled.flat[i] = scrambled.flat[perm[i]]."""
    period = arnold_period(n)
    times = (period - key % period) % period
    grid = _arnold_apply(np.arange(n * n).reshape(n, n), times)
    return grid.reshape(-1)
