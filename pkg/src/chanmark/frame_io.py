"""Uncompressed video I/O (YUV4MPEG2, PNG frame directories) and colorspace conversion.

Frames are held as real-valued RGB internally so watermark perturbations are
not quantized until write-out; quantization to 8-bit happens exactly once, in
the writers. The YCbCr convention is full-range BT.601 with chroma upsampled
by replication and downsampled by 2x2 box average, which makes the
YCbCr -> RGB -> YCbCr loop exact for in-gamut content.
"""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image

__all__ = [
    "VideoClip",
    "FrameYCbCr420",
    "Y4MError",
    "read_y4m",
    "write_y4m",
    "read_png_dir",
    "write_png_dir",
    "read_clip",
    "write_clip",
    "yuv420_to_rgb",
    "rgb_to_yuv420",
    "quantize_u8",
]


class Y4MError(ValueError):
    """Raised for malformed or truncated YUV4MPEG2 streams."""


@dataclass
class VideoClip:
    """Ordered RGB frame sequence: frames has shape (T, H, W, 3), float32 in [0, 255]."""

    frames: np.ndarray
    fps: Fraction = field(default_factory=lambda: Fraction(25, 1))

    @property
    def width(self) -> int:
        return self.frames.shape[2]

    @property
    def height(self) -> int:
        return self.frames.shape[1]

    def __len__(self) -> int:
        return self.frames.shape[0]

    def validate(self) -> None:
        if self.frames.ndim != 4 or self.frames.shape[3] != 3:
            raise ValueError(f"frames must have shape (T, H, W, 3), got {self.frames.shape}")
        if len(self) == 0:
            raise ValueError("no frames")
        if self.width % 2 or self.height % 2:
            raise ValueError(f"frame dims must be even for 4:2:0, got {self.width}x{self.height}")
        if self.width < 64 or self.height < 64:
            raise ValueError(f"frame dims must be >= 64, got {self.width}x{self.height}")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")
        if not np.all(np.isfinite(self.frames)):
            raise ValueError("frames contain non-finite samples")
        lo, hi = float(self.frames.min()), float(self.frames.max())
        if lo < 0.0 or hi > 255.0:
            raise ValueError(f"samples out of [0, 255]: min {lo}, max {hi}")

    def copy(self) -> "VideoClip":
        return VideoClip(self.frames.copy(), self.fps)


@dataclass
class FrameYCbCr420:
    """Planar 4:2:0 frame: y is (H, W), cb and cr are (H/2, W/2), all uint8."""

    y: np.ndarray
    cb: np.ndarray
    cr: np.ndarray

    def validate(self) -> None:
        h, w = self.y.shape
        if self.cb.shape != (h // 2, w // 2) or self.cr.shape != (h // 2, w // 2):
            raise ValueError(
                f"chroma dims {self.cb.shape} do not match half of luma dims {(h, w)}"
            )


def quantize_u8(x: np.ndarray) -> np.ndarray:
    """Round half away from zero and clamp to [0, 255] uint8."""
    x = np.asarray(x, dtype=np.float64)
    rounded = np.trunc(x + np.copysign(0.5, x))
    return np.clip(rounded, 0, 255).astype(np.uint8)


def yuv420_to_rgb(frame: FrameYCbCr420) -> np.ndarray:
    """Full-range BT.601 YCbCr 4:2:0 -> RGB float32, chroma upsampled by replication."""
    frame.validate()
    y = frame.y.astype(np.float64)
    cb = np.repeat(np.repeat(frame.cb.astype(np.float64), 2, axis=0), 2, axis=1) - 128.0
    cr = np.repeat(np.repeat(frame.cr.astype(np.float64), 2, axis=0), 2, axis=1) - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(rgb, 0.0, 255.0).astype(np.float32)


def rgb_to_yuv420(rgb: np.ndarray) -> FrameYCbCr420:
    """Inverse full-range BT.601, chroma by 2x2 box average, round half away, clamp."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = (b - y) / 1.772 + 128.0
    cr = (r - y) / 1.402 + 128.0
    cb = (cb[0::2, 0::2] + cb[0::2, 1::2] + cb[1::2, 0::2] + cb[1::2, 1::2]) / 4.0
    cr = (cr[0::2, 0::2] + cr[0::2, 1::2] + cr[1::2, 0::2] + cr[1::2, 1::2]) / 4.0
    return FrameYCbCr420(y=quantize_u8(y), cb=quantize_u8(cb), cr=quantize_u8(cr))


_FPS_RE = re.compile(rb"^(\d+):(\d+)$")


def read_y4m(path) -> VideoClip:
    """Parse a YUV4MPEG2 file into an RGB clip. Only C420-family colorspaces are supported."""
    data = Path(path).read_bytes()
    if not data.startswith(b"YUV4MPEG2"):
        raise Y4MError(f"{path}: not a YUV4MPEG2 stream (bad magic at byte 0)")
    nl = data.find(b"\n")
    if nl < 0:
        raise Y4MError(f"{path}: unterminated stream header at byte {len(data)}")
    header = data[:nl]
    width = height = None
    fps = None
    cursor = len(b"YUV4MPEG2")
    for token in header[cursor:].split(b" "):
        pos = cursor
        cursor += len(token) + 1
        if not token:
            continue
        tag, val = token[:1], token[1:]
        if tag == b"W":
            width = int(val)
        elif tag == b"H":
            height = int(val)
        elif tag == b"F":
            m = _FPS_RE.match(val)
            if not m:
                raise Y4MError(f"{path}: malformed frame rate {token!r} at byte {pos}")
            fps = Fraction(int(m.group(1)), int(m.group(2)))
        elif tag == b"C":
            if not val.startswith(b"420"):
                raise Y4MError(f"{path}: unsupported colorspace {token!r} at byte {pos}")
        elif tag in (b"I", b"A", b"X"):
            pass
        else:
            raise Y4MError(f"{path}: unknown header tag {token!r} at byte {pos}")
    if width is None or height is None or fps is None:
        raise Y4MError(f"{path}: header missing W/H/F tag (header ends at byte {nl})")
    if width % 2 or height % 2:
        raise Y4MError(f"{path}: odd dimensions {width}x{height} invalid for 4:2:0")

    luma = width * height
    chroma = (width // 2) * (height // 2)
    frames = []
    pos = nl + 1
    index = 0
    while pos < len(data):
        fnl = data.find(b"\n", pos)
        if fnl < 0 or not data[pos:fnl].startswith(b"FRAME"):
            raise Y4MError(f"{path}: expected FRAME marker for frame {index} at byte {pos}")
        pos = fnl + 1
        end = pos + luma + 2 * chroma
        if end > len(data):
            raise Y4MError(f"{path}: truncated frame {index} (need {end - len(data)} more bytes)")
        y = np.frombuffer(data, np.uint8, luma, pos).reshape(height, width)
        cb = np.frombuffer(data, np.uint8, chroma, pos + luma).reshape(height // 2, width // 2)
        cr = np.frombuffer(data, np.uint8, chroma, pos + luma + chroma).reshape(
            height // 2, width // 2
        )
        frames.append(yuv420_to_rgb(FrameYCbCr420(y, cb, cr)))
        pos = end
        index += 1
    if not frames:
        raise Y4MError(f"{path}: no frames")
    return VideoClip(np.stack(frames), fps)


def write_y4m(clip: VideoClip, path) -> None:
    """Write a clip as YUV4MPEG2 C420. RGB -> YCbCr quantization happens here, once."""
    clip.validate()
    header = (
        f"YUV4MPEG2 W{clip.width} H{clip.height} "
        f"F{clip.fps.numerator}:{clip.fps.denominator} Ip A1:1 C420\n"
    )
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        for frame in clip.frames:
            ycc = rgb_to_yuv420(frame)
            fh.write(b"FRAME\n")
            fh.write(ycc.y.tobytes())
            fh.write(ycc.cb.tobytes())
            fh.write(ycc.cr.tobytes())


def read_png_dir(path, fps: Fraction = Fraction(25, 1)) -> VideoClip:
    """Read a directory of frame_*.png files (8-bit RGB, lexicographic = temporal order)."""
    files = sorted(Path(path).glob("frame_*.png"))
    if not files:
        raise FileNotFoundError(f"{path}: no frame_*.png files")
    frames = []
    dims = None
    for f in files:
        img = Image.open(f)
        if img.mode != "RGB":
            raise ValueError(f"{f}: unsupported format (mode {img.mode}, need 8-bit RGB)")
        arr = np.asarray(img, dtype=np.float32)
        if dims is None:
            dims = arr.shape
        elif arr.shape != dims:
            raise ValueError(f"{f}: dimensions {arr.shape[:2]} differ from first frame {dims[:2]}")
        frames.append(arr)
    clip = VideoClip(np.stack(frames), fps)
    clip.validate()
    return clip


def write_png_dir(clip: VideoClip, path) -> None:
    """Write a clip as a directory of frame_%06d.png files."""
    clip.validate()
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(clip.frames):
        Image.fromarray(quantize_u8(frame), mode="RGB").save(out / f"frame_{i:06d}.png")


def read_clip(path, fps: Fraction = Fraction(25, 1)) -> VideoClip:
    """Read either a .y4m file or a PNG frame directory, by path kind."""
    p = Path(path)
    if p.is_dir():
        return read_png_dir(p, fps)
    return read_y4m(p)


def write_clip(clip: VideoClip, path) -> None:
    """Write to .y4m (file path) or a PNG directory (any other path)."""
    p = Path(path)
    if p.suffix.lower() == ".y4m":
        write_y4m(clip, p)
    else:
        write_png_dir(clip, p)
