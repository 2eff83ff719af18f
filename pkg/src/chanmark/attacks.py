"""Signal-processing attacks and the alignment metadata needed to undo them.

Every attack returns the attacked clip plus an AlignmentInfo recording the
exact inverse mapping (geometric or temporal); apply_alignment replays those
inverses so extraction sees re-aligned content, mirroring a detector that is
handed registered footage. Attacks are deterministic given their spec (and
seed, where one applies). Attacks compose into chains; alignment undoes the
chain in reverse.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .frame_io import VideoClip
from .geometry import (
    homography_from_points,
    invert_homography,
    scale_map,
    similarity_about_center,
    warp_frames,
)

__all__ = [
    "AttackSpec",
    "AlignmentInfo",
    "rotate_attack",
    "crop_attack",
    "resize_attack",
    "projective_attack",
    "tlpf_attack",
    "frc_attack",
    "noise_attack",
    "apply_attack",
    "apply_chain",
    "apply_alignment",
]

KINDS = ("identity", "rotate", "crop", "resize", "projective", "tlpf", "frc", "noise")


@dataclass
class AttackSpec:
    """Tagged attack description, JSON round-trippable via to_dict/from_dict."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.kind == "rotate" and "degrees" not in self.params:
            raise ValueError("rotate needs a 'degrees' parameter")
        if self.kind == "crop":
            ratio = float(self.params.get("ratio", 0))
            if not 0.0 < ratio < 0.5:
                raise ValueError(f"crop ratio must be in (0, 0.5), got {ratio}")
        if self.kind == "resize":
            if float(self.params.get("factor", 0)) <= 0:
                raise ValueError("resize factor must be positive")
            if float(self.params.get("antialias", 0)) not in (0.0, 1.0):
                raise ValueError("resize antialias must be 0 or 1")
        if self.kind == "projective":
            corners = np.asarray(self.params.get("corners", []), dtype=np.float64)
            if corners.shape != (4, 2):
                raise ValueError("projective needs 4 corner offsets (TL, TR, BR, BL)")
        if self.kind == "frc" and float(self.params.get("target_fps", 0)) <= 0:
            raise ValueError("frc target_fps must be positive")
        if self.kind == "noise" and "sigma" not in self.params:
            raise ValueError("noise needs a 'sigma' parameter")

    @classmethod
    def rotate(cls, degrees: float) -> "AttackSpec":
        return cls("rotate", {"degrees": float(degrees)})

    @classmethod
    def crop(cls, ratio: float) -> "AttackSpec":
        return cls("crop", {"ratio": float(ratio)})

    @classmethod
    def resize(cls, factor: float, antialias: bool = False) -> "AttackSpec":
        params = {"factor": float(factor)}
        if antialias:
            params["antialias"] = 1.0
        return cls("resize", params)

    @classmethod
    def projective(cls, corners) -> "AttackSpec":
        corners = [[float(dx), float(dy)] for dx, dy in corners]
        if len(corners) != 4:
            raise ValueError("projective needs 4 corner offsets (TL, TR, BR, BL)")
        return cls("projective", {"corners": corners})

    @classmethod
    def tlpf(cls, window: int = 4) -> "AttackSpec":
        return cls("tlpf", {"window": int(window)})

    @classmethod
    def frc(cls, target_fps: float) -> "AttackSpec":
        return cls("frc", {"target_fps": float(target_fps)})

    @classmethod
    def noise(cls, sigma: float, seed: int = 0) -> "AttackSpec":
        return cls("noise", {"sigma": float(sigma), "seed": int(seed)})

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self.params}

    @classmethod
    def from_dict(cls, d: dict) -> "AttackSpec":
        d = dict(d)
        return cls(d.pop("kind"), d)

    def label(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()) if k != "corners")
        return f"{self.kind}({inner})" if inner else self.kind


@dataclass
class AlignmentInfo:
    """Ordered inverse-mapping steps, one per applied attack."""

    steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"steps": self.steps}

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentInfo":
        return cls(steps=list(d["steps"]))

    def extend(self, other: "AlignmentInfo") -> None:
        self.steps.extend(other.steps)


def _identity_step(**meta) -> dict:
    return {"kind": "identity", **meta}


def _homography_step(
    align_matrix: np.ndarray, width: int, height: int, border: str = "zero"
) -> dict:
    return {
        "kind": "homography",
        "matrix": np.asarray(align_matrix, dtype=float).tolist(),
        "width": int(width),
        "height": int(height),
        "border": border,
    }


def rotate_attack(clip: VideoClip, degrees: float) -> tuple[VideoClip, AlignmentInfo]:
    """Scale about the center so nothing is cropped, then rotate; borders go black."""
    w, h = clip.width, clip.height
    th = math.radians(degrees)
    c, s = abs(math.cos(th)), abs(math.sin(th))
    ex, ey = (w - 1) / 2.0, (h - 1) / 2.0
    fit = min(ex / (ex * c + ey * s), ey / (ex * s + ey * c)) if degrees % 180 else 1.0
    content_map = similarity_about_center(w, h, degrees, fit)
    frames = warp_frames(clip.frames, invert_homography(content_map), h, w)
    info = AlignmentInfo([_homography_step(content_map, w, h)])
    return VideoClip(frames, clip.fps), info


def crop_attack(clip: VideoClip, ratio: float) -> tuple[VideoClip, AlignmentInfo]:
    """Black out a `ratio` strip on all four sides; canvas (and block grid) unchanged."""
    if not 0.0 < ratio < 0.5:
        raise ValueError(f"crop ratio must be in (0, 0.5), got {ratio}")
    w, h = clip.width, clip.height
    x0, y0 = round(ratio * w), round(ratio * h)
    x1, y1 = w - x0, h - y0
    frames = np.zeros_like(clip.frames)
    frames[:, y0:y1, x0:x1, :] = clip.frames[:, y0:y1, x0:x1, :]
    info = AlignmentInfo([_identity_step(valid_region=[x0, y0, x1, y1])])
    return VideoClip(frames, clip.fps), info


def _even(v: float) -> int:
    return max(2, int(round(v / 2.0)) * 2)


def _box_blur(frames: np.ndarray, width: int) -> np.ndarray:
    """Separable box mean of odd-rounded `width` over H and W, edge-padded."""
    if width <= 1:
        return frames
    out = frames.astype(np.float64)
    for axis in (1, 2):
        lo = width // 2
        pad = [(0, 0)] * out.ndim
        pad[axis] = (lo, width - 1 - lo)
        csum = np.cumsum(np.pad(out, pad, mode="edge"), axis=axis)
        zero = np.zeros_like(np.take(csum, [0], axis=axis))
        csum = np.concatenate([zero, csum], axis=axis)
        n = out.shape[axis]
        out = (
            np.take(csum, np.arange(width, width + n), axis=axis)
            - np.take(csum, np.arange(n), axis=axis)
        ) / width
    return out.astype(np.float32)


def resize_attack(
    clip: VideoClip, factor: float, antialias: bool = False
) -> tuple[VideoClip, AlignmentInfo]:
    """Bilinear rescale of both dimensions (rounded to even for 4:2:0 output).

    Plain bilinear sampling by default; `antialias=True` applies a box
    prefilter matched to the downscale ratio first (no effect upscaling).
    """
    if factor <= 0:
        raise ValueError(f"resize factor must be positive, got {factor}")
    w, h = clip.width, clip.height
    out_w, out_h = _even(w * factor), _even(h * factor)
    src = clip.frames
    if antialias and factor < 1.0:
        src = _box_blur(src, int(round(1.0 / factor)))
    sampling = scale_map(w, h, out_w, out_h)
    frames = warp_frames(src, sampling, out_h, out_w, border="clamp")
    info = AlignmentInfo([_homography_step(invert_homography(sampling), w, h, border="clamp")])
    return VideoClip(frames, clip.fps), info


def projective_attack(clip: VideoClip, corners) -> tuple[VideoClip, AlignmentInfo]:
    """Keystone warp moving the frame corners by the given (dx, dy) offsets."""
    w, h = clip.width, clip.height
    src = np.array([[0, 0], [w - 1, 0], [w - 1, h - 1], [0, h - 1]], dtype=np.float64)
    offsets = np.asarray(corners, dtype=np.float64)
    if offsets.shape != (4, 2):
        raise ValueError("projective needs 4 corner offsets (TL, TR, BR, BL)")
    content_map = homography_from_points(src, src + offsets)
    frames = warp_frames(clip.frames, invert_homography(content_map), h, w)
    info = AlignmentInfo([_homography_step(content_map, w, h)])
    return VideoClip(frames, clip.fps), info


def tlpf_attack(clip: VideoClip, window: int = 4) -> tuple[VideoClip, AlignmentInfo]:
    """Temporal low-pass: each frame becomes the mean of the trailing `window` frames."""
    frames = clip.frames.astype(np.float64)
    csum = np.concatenate([np.zeros((1,) + frames.shape[1:]), frames.cumsum(axis=0)])
    out = np.empty_like(frames)
    for t in range(frames.shape[0]):
        lo = max(0, t - window + 1)
        out[t] = (csum[t + 1] - csum[lo]) / (t + 1 - lo)
    return VideoClip(out.astype(np.float32), clip.fps), AlignmentInfo([_identity_step()])


def _nearest_indices(n_out: int, src_fps: Fraction, dst_fps: Fraction, n_src: int) -> np.ndarray:
    """Half-up nearest source index for each output frame timestamp."""
    j = np.arange(n_out, dtype=np.float64)
    idx = np.floor(j * float(src_fps / dst_fps) + 0.5).astype(np.int64)
    return np.clip(idx, 0, n_src - 1)


def frc_attack(clip: VideoClip, target_fps: float) -> tuple[VideoClip, AlignmentInfo]:
    """Nearest-frame rate conversion to target_fps."""
    target = Fraction(target_fps).limit_denominator(1001)
    if target <= 0:
        raise ValueError(f"target fps must be positive, got {target_fps}")
    n_out = int(len(clip) * target / clip.fps)
    idx = _nearest_indices(n_out, clip.fps, target, len(clip))
    info = AlignmentInfo(
        [
            {
                "kind": "resample",
                "orig_len": len(clip),
                "orig_fps": [clip.fps.numerator, clip.fps.denominator],
            }
        ]
    )
    return VideoClip(clip.frames[idx].copy(), target), info


def noise_attack(clip: VideoClip, sigma: float, seed: int = 0) -> tuple[VideoClip, AlignmentInfo]:
    """Additive Gaussian pixel noise, clipped to [0, 255]."""
    rng = np.random.default_rng(seed)
    noisy = clip.frames + rng.normal(0.0, sigma, size=clip.frames.shape).astype(np.float32)
    return VideoClip(np.clip(noisy, 0.0, 255.0), clip.fps), AlignmentInfo([_identity_step()])


def apply_attack(clip: VideoClip, spec: AttackSpec) -> tuple[VideoClip, AlignmentInfo]:
    if spec.kind == "identity":
        return clip.copy(), AlignmentInfo([_identity_step()])
    if spec.kind == "rotate":
        return rotate_attack(clip, spec.params["degrees"])
    if spec.kind == "crop":
        return crop_attack(clip, spec.params["ratio"])
    if spec.kind == "resize":
        antialias = bool(spec.params.get("antialias", 0))
        return resize_attack(clip, spec.params["factor"], antialias=antialias)
    if spec.kind == "projective":
        return projective_attack(clip, spec.params["corners"])
    if spec.kind == "tlpf":
        return tlpf_attack(clip, int(spec.params.get("window", 4)))
    if spec.kind == "frc":
        return frc_attack(clip, spec.params["target_fps"])
    if spec.kind == "noise":
        return noise_attack(clip, spec.params["sigma"], int(spec.params.get("seed", 0)))
    raise ValueError(f"unknown attack kind {spec.kind!r}")


def apply_chain(clip: VideoClip, specs: list[AttackSpec]) -> tuple[VideoClip, AlignmentInfo]:
    """Apply attacks in order, concatenating their alignment steps."""
    info = AlignmentInfo()
    for spec in specs:
        clip, step = apply_attack(clip, spec)
        info.extend(step)
    return clip, info


def apply_alignment(clip: VideoClip, info: AlignmentInfo) -> VideoClip:
    """Undo recorded attack steps in reverse order (bilinear for geometric steps)."""
    for step in reversed(info.steps):
        kind = step["kind"]
        if kind == "identity":
            continue
        if kind == "homography":
            m = np.asarray(step["matrix"], dtype=np.float64)
            frames = warp_frames(
                clip.frames,
                m,
                step["height"],
                step["width"],
                border=step.get("border", "zero"),
            )
            clip = VideoClip(frames, clip.fps)
        elif kind == "resample":
            orig_fps = Fraction(*step["orig_fps"])
            n_out = int(len(clip) * orig_fps / clip.fps)
            n_out = min(max(n_out, 1), step["orig_len"]) if step.get("orig_len") else n_out
            idx = _nearest_indices(n_out, clip.fps, orig_fps, len(clip))
            clip = VideoClip(clip.frames[idx].copy(), orig_fps)
        else:
            raise ValueError(f"unknown alignment step kind {kind!r}")
    return clip
