"""Blind robust video watermarking with channel-referenced band-sum embedding.

The pipeline hides a +-1 payload in the blue channel of selected 8x8 blocks
of each frame's Haar LL subband: a bit is the sign of the difference between
the blue and green sums over one DCT anti-diagonal, so extraction needs no
original content. Blocks are chosen where texture scores and pyramid FAST
keypoints agree, inside the central region of the K-frame group average.
"""

from .attacks import AlignmentInfo, AttackSpec, apply_alignment, apply_attack, apply_chain
from .codec import (
    EmbedParams,
    ExtractionResult,
    WatermarkPayload,
    arnold_descramble,
    arnold_period,
    arnold_scramble,
    embed_clip,
    extract,
)
from .corpus import default_corpus, generate_clip
from .frame_io import VideoClip, read_clip, write_clip
from .metrics import ber, psnr, quality_report
from .selection import SelectionConfig, SelectionMask, select_blocks

__version__ = "0.1.0"

__all__ = [
    "AlignmentInfo",
    "AttackSpec",
    "EmbedParams",
    "ExtractionResult",
    "SelectionConfig",
    "SelectionMask",
    "VideoClip",
    "WatermarkPayload",
    "apply_alignment",
    "apply_attack",
    "apply_chain",
    "arnold_descramble",
    "arnold_period",
    "arnold_scramble",
    "ber",
    "default_corpus",
    "embed_clip",
    "extract",
    "generate_clip",
    "psnr",
    "quality_report",
    "read_clip",
    "select_blocks",
    "write_clip",
]
