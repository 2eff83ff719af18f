"""Video I/O tests: BT.601 conversions, Y4M parsing/writing, PNG directories."""

from fractions import Fraction

import numpy as np
import pytest
from PIL import Image

from chanmark.frame_io import (
    FrameYCbCr420,
    VideoClip,
    Y4MError,
    quantize_u8,
    read_png_dir,
    read_y4m,
    rgb_to_yuv420,
    write_png_dir,
    write_y4m,
    yuv420_to_rgb,
)
from conftest import make_ingamut_ycbcr


def frame_of(y_val, cb_val, cr_val, h=16, w=16) -> FrameYCbCr420:
    return FrameYCbCr420(
        y=np.full((h, w), y_val, dtype=np.uint8),
        cb=np.full((h // 2, w // 2), cb_val, dtype=np.uint8),
        cr=np.full((h // 2, w // 2), cr_val, dtype=np.uint8),
    )


def test_neutral_gray_is_fixed_point():
    rgb = yuv420_to_rgb(frame_of(128, 128, 128))
    assert np.allclose(rgb, 128.0)


def test_white_point():
    rgb = yuv420_to_rgb(frame_of(255, 128, 128))
    assert np.allclose(rgb, 255.0)


def test_bt601_linear_formula_oracle():
    # Y=81, Cb=90, Cr=240 evaluated straight through the three linear
    # formulas: R = 81 + 1.402*112, G = 81 + 0.344136*38 - 0.714136*112,
    # B = 81 - 1.772*38 -> (238.024, 14.094, 13.664), all inside [0, 255].
    rgb = yuv420_to_rgb(frame_of(81, 90, 240))
    assert rgb[0, 0, 0] == pytest.approx(238.024, abs=1e-3)
    assert rgb[0, 0, 1] == pytest.approx(14.094, abs=1e-3)
    assert rgb[0, 0, 2] == pytest.approx(13.664, abs=1e-3)


def test_gray_rgb_maps_to_neutral_ycbcr():
    ycc = rgb_to_yuv420(np.full((8, 8, 3), 128.0))
    assert np.all(ycc.y == 128) and np.all(ycc.cb == 128) and np.all(ycc.cr == 128)


def test_pure_blue_luma():
    ycc = rgb_to_yuv420(np.broadcast_to([0.0, 0.0, 255.0], (8, 8, 3)).copy())
    assert np.all(ycc.y == 29)  # 0.114 * 255 = 29.07, rounded


def test_ycbcr_rgb_ycbcr_identity_on_ingamut_frames():
    # Exact loop: replication + box average recover chroma, and the BT.601
    # matrices are mutually inverse, provided no sample hits the clamp rails.
    rng = np.random.default_rng(201)
    for _ in range(200):
        h, w = 2 * int(rng.integers(2, 12)), 2 * int(rng.integers(2, 12))
        src = make_ingamut_ycbcr(rng, h, w)
        back = rgb_to_yuv420(yuv420_to_rgb(src))
        assert np.array_equal(back.y, src.y)
        assert np.array_equal(back.cb, src.cb)
        assert np.array_equal(back.cr, src.cr)


def test_quantize_u8_rounds_half_away_from_zero():
    vals = np.array([0.5, 1.49, 1.5, 2.5, -0.4, 254.5, 255.7, 300.0])
    assert np.array_equal(quantize_u8(vals), [1, 1, 2, 3, 0, 255, 255, 255])


def build_y4m_bytes(width=64, height=64, n_frames=2, y=128, cb=128, cr=128) -> bytes:
    head = f"YUV4MPEG2 W{width} H{height} F25:1 Ip A1:1 C420\n".encode()
    plane = bytes([y]) * (width * height) + bytes([cb, cr]) * 0
    frame = (
        bytes([y]) * (width * height)
        + bytes([cb]) * (width * height // 4)
        + bytes([cr]) * (width * height // 4)
    )
    return head + b"".join(b"FRAME\n" + frame for _ in range(n_frames))


def test_read_y4m_header_echo(tmp_path):
    path = tmp_path / "two.y4m"
    path.write_bytes(build_y4m_bytes())
    clip = read_y4m(path)
    assert clip.fps == Fraction(25, 1)
    assert len(clip) == 2
    assert (clip.width, clip.height) == (64, 64)


def test_read_y4m_gray_frame_decodes_to_128(tmp_path):
    path = tmp_path / "gray.y4m"
    path.write_bytes(build_y4m_bytes())
    clip = read_y4m(path)
    assert np.allclose(clip.frames, 128.0)


def test_read_y4m_rejects_bad_magic(tmp_path):
    path = tmp_path / "junk.y4m"
    path.write_bytes(b"JUNKJUNKJUNK\nFRAME\n")
    with pytest.raises(Y4MError, match="byte 0"):
        read_y4m(path)


def test_read_y4m_truncated_frame_names_index(tmp_path):
    data = build_y4m_bytes(n_frames=2)
    path = tmp_path / "short.y4m"
    path.write_bytes(data[:-100])
    with pytest.raises(Y4MError, match="frame 1"):
        read_y4m(path)


def test_read_y4m_rejects_non_420_colorspace(tmp_path):
    path = tmp_path / "c444.y4m"
    path.write_bytes(b"YUV4MPEG2 W64 H64 F25:1 C444\n")
    with pytest.raises(Y4MError, match="colorspace"):
        read_y4m(path)


def test_y4m_writer_is_deterministic(tmp_path):
    rng = np.random.default_rng(202)
    frames = rng.integers(0, 256, size=(3, 64, 64, 3)).astype(np.float32)
    clip = VideoClip(frames, Fraction(30000, 1001))
    p1, p2 = tmp_path / "a.y4m", tmp_path / "b.y4m"
    write_y4m(clip, p1)
    write_y4m(clip, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert read_y4m(p1).fps == Fraction(30000, 1001)


def test_y4m_read_back_reproduces_written_samples(tmp_path):
    # Quantization happens once at write; the reader must surface exactly the
    # YCbCr planes the writer produced.
    rng = np.random.default_rng(208)
    frames = rng.uniform(0, 255, size=(2, 64, 64, 3)).astype(np.float32)
    clip = VideoClip(frames)
    path = tmp_path / "clip.y4m"
    write_y4m(clip, path)
    raw = path.read_bytes()
    body = raw.split(b"\n", 1)[1]
    luma, chroma = 64 * 64, 32 * 32
    for t in range(2):
        start = (len(b"FRAME\n") + luma + 2 * chroma) * t + len(b"FRAME\n")
        written_y = np.frombuffer(body, np.uint8, luma, start).reshape(64, 64)
        expected = rgb_to_yuv420(frames[t])
        assert np.array_equal(written_y, expected.y)


def test_y4m_round_trip_stable_for_ingamut_content(tmp_path):
    # When every pixel stays inside the RGB gamut the write/read loop settles
    # immediately: re-writing the read-back clip is byte-identical.
    rng = np.random.default_rng(209)
    planes = make_ingamut_ycbcr(rng, 64, 64)
    frame = yuv420_to_rgb(planes)
    clip = VideoClip(np.stack([frame, frame]))
    p1, p2 = tmp_path / "a.y4m", tmp_path / "b.y4m"
    write_y4m(clip, p1)
    write_y4m(read_y4m(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_y4m_rejects_odd_width(tmp_path):
    clip = VideoClip(np.zeros((1, 64, 65, 3), dtype=np.float32))
    with pytest.raises(ValueError, match="even"):
        write_y4m(clip, tmp_path / "odd.y4m")


def test_write_y4m_rejects_empty_clip(tmp_path):
    clip = VideoClip(np.zeros((0, 64, 64, 3), dtype=np.float32))
    with pytest.raises(ValueError, match="no frames"):
        write_y4m(clip, tmp_path / "empty.y4m")


def test_png_dir_round_trip(tmp_path):
    rng = np.random.default_rng(203)
    frames = rng.integers(0, 256, size=(10, 64, 64, 3)).astype(np.float32)
    clip = VideoClip(frames)
    write_png_dir(clip, tmp_path / "clip")
    back = read_png_dir(tmp_path / "clip", fps=Fraction(25, 1))
    assert len(back) == 10
    assert np.array_equal(back.frames, frames)  # integer-valued input survives exactly


def test_png_dir_rejects_16bit(tmp_path):
    d = tmp_path / "deep"
    d.mkdir()
    Image.fromarray(np.zeros((64, 64), dtype=np.uint16)).save(d / "frame_000000.png")
    with pytest.raises(ValueError, match="unsupported format"):
        read_png_dir(d)


def test_png_dir_rejects_mixed_dims(tmp_path):
    d = tmp_path / "mixed"
    d.mkdir()
    Image.fromarray(np.zeros((64, 64, 3), dtype=np.uint8), "RGB").save(d / "frame_000000.png")
    Image.fromarray(np.zeros((64, 96, 3), dtype=np.uint8), "RGB").save(d / "frame_000001.png")
    with pytest.raises(ValueError, match="frame_000001"):
        read_png_dir(d)


def test_videoclip_validate_bounds():
    bad = VideoClip(np.full((1, 64, 64, 3), 300.0, dtype=np.float32))
    with pytest.raises(ValueError, match="out of"):
        bad.validate()
    nan = VideoClip(np.full((1, 64, 64, 3), np.nan, dtype=np.float32))
    with pytest.raises(ValueError, match="finite"):
        nan.validate()
