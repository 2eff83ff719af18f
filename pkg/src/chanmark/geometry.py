"""Homography construction and bilinear warping on pixel-center coordinates.

Convention: a 3x3 matrix maps homogeneous OUTPUT pixel coordinates
(x, y, 1) to the SOURCE location to sample, with pixel centers at integer
coordinates. Samples falling outside the source are black (0).
"""

import numpy as np

__all__ = [
    "identity_matrix",
    "scale_map",
    "similarity_about_center",
    "homography_from_points",
    "invert_homography",
    "warp_plane",
    "warp_frames",
    "resize_plane",
]


def identity_matrix() -> np.ndarray:
    return np.eye(3)


def scale_map(src_w: int, src_h: int, out_w: int, out_h: int) -> np.ndarray:
    """Output->source map for a resize, using the half-pixel-center convention."""
    sx = src_w / out_w
    sy = src_h / out_h
    return np.array(
        [
            [sx, 0.0, 0.5 * sx - 0.5],
            [0.0, sy, 0.5 * sy - 0.5],
            [0.0, 0.0, 1.0],
        ]
    )


def similarity_about_center(width: int, height: int, degrees: float, scale: float) -> np.ndarray:
    """Forward map rotating by `degrees` and scaling by `scale` about the frame center."""
    cx, cy = (width - 1) / 2.0, (height - 1) / 2.0
    th = np.deg2rad(degrees)
    c, s = np.cos(th), np.sin(th)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    sc = np.diag([scale, scale, 1.0])
    to_center = np.array([[1.0, 0.0, -cx], [0.0, 1.0, -cy], [0.0, 0.0, 1.0]])
    back = np.array([[1.0, 0.0, cx], [0.0, 1.0, cy], [0.0, 0.0, 1.0]])
    return back @ rot @ sc @ to_center


def homography_from_points(src_pts, dst_pts) -> np.ndarray:
    """Exact homography mapping 4 source points onto 4 destination points (DLT)."""
    src = np.asarray(src_pts, dtype=np.float64)
    dst = np.asarray(dst_pts, dtype=np.float64)
    if src.shape != (4, 2) or dst.shape != (4, 2):
        raise ValueError("need exactly 4 point pairs")
    rows = []
    rhs = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y])
        rhs.append(u)
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y])
        rhs.append(v)
    h = np.linalg.solve(np.array(rows), np.array(rhs))
    return np.append(h, 1.0).reshape(3, 3)


def invert_homography(m: np.ndarray) -> np.ndarray:
    inv = np.linalg.inv(np.asarray(m, dtype=np.float64))
    return inv / inv[2, 2]


def _sample_maps(m: np.ndarray, out_h: int, out_w: int):
    xs, ys = np.meshgrid(np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64))
    denom = m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    sx = (m[0, 0] * xs + m[0, 1] * ys + m[0, 2]) / denom
    sy = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) / denom
    return sx, sy


def _bilinear_gather(
    src: np.ndarray, sx: np.ndarray, sy: np.ndarray, border: str = "zero"
) -> np.ndarray:
    """Bilinear sampling of src (..., H, W, C) at (sy, sx).

    border="zero" treats everything outside the source as black (geometric
    warps leave black corners); border="clamp" repeats edge pixels (resizes
    should not darken at the frame boundary).
    """
    h, w = src.shape[-3], src.shape[-2]
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = (sx - x0).astype(np.float32)
    fy = (sy - y0).astype(np.float32)

    out = None
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            tap = src[..., np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1), :]
            if border == "zero":
                valid = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
                tap = tap * valid[..., None]
            wx = fx if dx else 1.0 - fx
            wy = fy if dy else 1.0 - fy
            tap = tap * (wx * wy)[..., None]
            out = tap if out is None else out + tap
    return out


def warp_plane(
    plane: np.ndarray, m: np.ndarray, out_h: int, out_w: int, border: str = "zero"
) -> np.ndarray:
    """Warp a single (H, W) plane by the output->source map m."""
    src = np.asarray(plane, dtype=np.float32)[..., None]
    sx, sy = _sample_maps(m, out_h, out_w)
    return _bilinear_gather(src, sx, sy, border=border)[..., 0]


def warp_frames(
    frames: np.ndarray,
    m: np.ndarray,
    out_h: int,
    out_w: int,
    chunk: int = 16,
    border: str = "zero",
) -> np.ndarray:
    """Warp a (T, H, W, 3) stack by a shared output->source map, chunked over frames."""
    frames = np.asarray(frames, dtype=np.float32)
    t = frames.shape[0]
    sx, sy = _sample_maps(m, out_h, out_w)
    out = np.empty((t, out_h, out_w, frames.shape[3]), dtype=np.float32)
    for start in range(0, t, chunk):
        stop = min(start + chunk, t)
        out[start:stop] = _bilinear_gather(frames[start:stop], sx, sy, border=border)
    return out


def resize_plane(plane: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of a single plane (half-pixel-center convention)."""
    h, w = plane.shape
    return warp_plane(plane, scale_map(w, h, out_w, out_h), out_h, out_w, border="clamp")
