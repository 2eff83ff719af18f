"""Orthonormal 2-D DCT-II/IDCT, one-level Haar DWT, and anti-diagonal band sums.

All transforms use orthonormal scaling so energy is preserved (Parseval) and
the inverse is the transpose. The DCT is computed separably as D @ X @ D.T
with a precomputed cosine matrix; batched variants operate on stacks of
blocks for the block-partitioned planes used elsewhere in the package.
"""

import numpy as np

__all__ = [
    "dct_matrix",
    "dct2",
    "idct2",
    "dct2_blocks",
    "idct2_blocks",
    "haar_dwt",
    "haar_idwt",
    "band_indices",
    "band_mask",
    "band_sum",
    "block_view",
    "block_merge",
]

_DCT_CACHE: dict[int, np.ndarray] = {}


def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II matrix of size n x n (D @ D.T == I)."""
    mat = _DCT_CACHE.get(n)
    if mat is None:
        x = np.arange(n)
        u = x[:, None]
        mat = np.cos(np.pi * (2 * x + 1) * u / (2 * n)) * np.sqrt(2.0 / n)
        mat[0] /= np.sqrt(2.0)
        mat.setflags(write=False)
        _DCT_CACHE[n] = mat
    return mat


def dct2(block: np.ndarray) -> np.ndarray:
    """2-D orthonormal DCT-II of a square block."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected a square block, got shape {block.shape}")
    d = dct_matrix(block.shape[0])
    return d @ block @ d.T


def idct2(block: np.ndarray) -> np.ndarray:
    """Inverse of dct2 (orthonormal, so the inverse matrix is the transpose)."""
    block = np.asarray(block, dtype=np.float64)
    if block.ndim != 2 or block.shape[0] != block.shape[1]:
        raise ValueError(f"expected a square block, got shape {block.shape}")
    d = dct_matrix(block.shape[0])
    return d.T @ block @ d


def dct2_blocks(blocks: np.ndarray) -> np.ndarray:
    """dct2 applied over the last two axes of a (..., n, n) stack."""
    blocks = np.asarray(blocks, dtype=np.float64)
    d = dct_matrix(blocks.shape[-1])
    return np.einsum("ab,...bc,dc->...ad", d, blocks, d, optimize=True)


def idct2_blocks(blocks: np.ndarray) -> np.ndarray:
    """idct2 applied over the last two axes of a (..., n, n) stack."""
    blocks = np.asarray(blocks, dtype=np.float64)
    d = dct_matrix(blocks.shape[-1])
    return np.einsum("ba,...bc,cd->...ad", d, blocks, d, optimize=True)


def haar_dwt(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """One-level orthonormal Haar DWT of an even-dimensioned plane.

    Returns (LL, LH, HL, HH) where per 2x2 cell [[a, b], [c, d]]:
    LL = (a+b+c+d)/2, LH = (a-b+c-d)/2 (horizontal detail),
    HL = (a+b-c-d)/2 (vertical detail), HH = (a-b-c+d)/2.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    if h % 2 or w % 2:
        raise ValueError(f"plane dims must be even for Haar DWT, got {h}x{w}")
    a = plane[0::2, 0::2]
    b = plane[0::2, 1::2]
    c = plane[1::2, 0::2]
    d = plane[1::2, 1::2]
    ll = (a + b + c + d) / 2.0
    lh = (a - b + c - d) / 2.0
    hl = (a + b - c - d) / 2.0
    hh = (a - b - c + d) / 2.0
    return ll, lh, hl, hh


def haar_idwt(ll: np.ndarray, lh: np.ndarray, hl: np.ndarray, hh: np.ndarray) -> np.ndarray:
    """Perfect-reconstruction inverse of haar_dwt."""
    ll = np.asarray(ll, dtype=np.float64)
    h2, w2 = ll.shape
    out = np.empty((2 * h2, 2 * w2), dtype=np.float64)
    out[0::2, 0::2] = (ll + lh + hl + hh) / 2.0
    out[0::2, 1::2] = (ll - lh + hl - hh) / 2.0
    out[1::2, 0::2] = (ll + lh - hl - hh) / 2.0
    out[1::2, 1::2] = (ll - lh - hl + hh) / 2.0
    return out


def band_indices(n: int, k: int) -> list[tuple[int, int]]:
    """Row-major (u, v) coordinates of the anti-diagonal u + v == k in an n x n block."""
    if not 0 <= k <= 2 * (n - 1):
        raise ValueError(f"band {k} out of range for {n}x{n} block")
    return [(u, k - u) for u in range(n) if 0 <= k - u < n]

_MASK_CACHE: dict[tuple[int, int], np.ndarray] = {}


def band_mask(n: int, k: int) -> np.ndarray:
    """Boolean n x n mask selecting the u + v == k anti-diagonal."""
    key = (n, k)
    mask = _MASK_CACHE.get(key)
    if mask is None:
        mask = np.zeros((n, n), dtype=bool)
        for u, v in band_indices(n, k):
            mask[u, v] = True
        mask.setflags(write=False)
        _MASK_CACHE[key] = mask
    return mask


def band_sum(block: np.ndarray, k: int) -> float:
    """Sum of the coefficients on anti-diagonal k of a square block."""
    block = np.asarray(block)
    return float(block[band_mask(block.shape[-1], k)].sum())


def block_view(plane: np.ndarray, n: int) -> np.ndarray:
    """Reshape a (H, W) plane into a (H//n, W//n, n, n) grid of blocks.

    Any remainder on the right/bottom edges is cropped.
    """
    plane = np.asarray(plane)
    h, w = plane.shape
    by, bx = h // n, w // n
    cropped = plane[: by * n, : bx * n]
    return cropped.reshape(by, n, bx, n).swapaxes(1, 2)


def block_merge(blocks: np.ndarray) -> np.ndarray:
    """Inverse of block_view: (by, bx, n, n) -> (by*n, bx*n)."""
    by, bx, n, m = blocks.shape
    return blocks.swapaxes(1, 2).reshape(by * n, bx * m)
