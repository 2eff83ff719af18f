"""Texture-factor, keypoint, and block-selection tests with independent oracles."""

import numpy as np
import pytest

from chanmark.selection import (
    KeyPoint,
    SelectionConfig,
    cluster_keypoints,
    detect_keypoints,
    select_blocks,
    texture_ef,
    texture_rf,
    texture_scores,
)


def dct_matrix(n):
    """Orthonormal DCT-II basis built straight from the cosine formula."""
    c = np.zeros((n, n))
    for u in range(n):
        for x in range(n):
            a = np.sqrt(1.0 / n) if u == 0 else np.sqrt(2.0 / n)
            c[u, x] = a * np.cos((2 * x + 1) * u * np.pi / (2 * n))
    return c


def naive_texture_factors(block8, zero_eps=1e-6):
    """Literal re-count over the four 4x4 sub-block DCTs."""
    c4 = dct_matrix(4)
    rf, ef = 0, 0.0
    for qy in (0, 4):
        for qx in (0, 4):
            coeffs = c4 @ block8[qy : qy + 4, qx : qx + 4] @ c4.T
            rf += int((np.abs(coeffs) > zero_eps).sum())
            ef += float(np.abs(coeffs).sum())
    return rf, ef


# --- texture factors ---------------------------------------------------------


def test_texture_rf_constant_block():
    assert texture_rf(np.full((8, 8), 8.0)) == 4  # one DC per 4x4 sub-block


def test_texture_ef_constant_block():
    assert texture_ef(np.full((8, 8), 8.0)) == pytest.approx(128.0)


def test_texture_factors_match_naive_oracle():
    rng = np.random.default_rng(401)
    c4 = dct_matrix(4)
    for trial in range(1000):
        if trial % 2 == 0:
            block = rng.uniform(-64, 320, size=(8, 8))
        else:
            # sparse spectrum: random support per quadrant, synthesized by inverse DCT
            block = np.zeros((8, 8))
            for qy in (0, 4):
                for qx in (0, 4):
                    coeffs = np.where(
                        rng.random((4, 4)) < 0.4, rng.uniform(1.0, 50.0, (4, 4)), 0.0
                    )
                    block[qy : qy + 4, qx : qx + 4] = c4.T @ coeffs @ c4
        rf_want, ef_want = naive_texture_factors(block)
        assert texture_rf(block) == rf_want
        assert texture_ef(block) == pytest.approx(ef_want, rel=1e-9)


def test_texture_rf_rejects_wrong_shape():
    with pytest.raises(ValueError, match="8x8"):
        texture_rf(np.zeros((4, 4)))


def test_texture_scores_grid_matches_per_block_calls():
    rng = np.random.default_rng(402)
    ll = rng.uniform(0, 255, size=(24, 32))
    scores = texture_scores(ll)
    assert scores.rf.shape == scores.ef.shape == scores.s.shape == (3, 4)
    for by in range(3):
        for bx in range(4):
            block = ll[by * 8 : by * 8 + 8, bx * 8 : bx * 8 + 8]
            assert scores.rf[by, bx] == texture_rf(block)
            assert scores.ef[by, bx] == pytest.approx(texture_ef(block), rel=1e-12)
            raw = scores.ef[by, bx] + scores.rf[by, bx] + scores.ef[by, bx] * scores.rf[by, bx]
            assert scores.raw[by, bx] == pytest.approx(raw, rel=1e-12)


def test_texture_scores_normalization_spans_unit_interval():
    ll = np.zeros((8, 24))
    ll[:, 0:8] = 10.0
    ll[:, 8:16] = 10.0
    ll[:, 16:24] = 50.0
    s = texture_scores(ll).s
    assert s[0, 0] == 0.0 and s[0, 1] == 0.0 and s[0, 2] == 1.0


def test_texture_scores_degenerate_all_zero():
    s = texture_scores(np.full((16, 16), 77.0)).s
    assert np.all(s == 0.0)


def test_texture_scores_preserve_raw_ordering():
    rng = np.random.default_rng(403)
    for _ in range(50):
        ll = rng.uniform(0, 255, size=(16, 40))
        scores = texture_scores(ll)
        order_raw = np.argsort(scores.raw, axis=None, kind="stable")
        order_s = np.argsort(scores.s, axis=None, kind="stable")
        assert np.array_equal(order_raw, order_s)


def test_texture_scores_crop_edge_remainder():
    scores = texture_scores(np.zeros((20, 27)))
    assert scores.rf.shape == (2, 3)


# --- keypoints ---------------------------------------------------------------


def _square_plane(size=48, lo=20, hi=31, value=255.0):
    plane = np.zeros((size, size))
    plane[lo:hi, lo:hi] = value
    return plane


def test_keypoints_uniform_plane_empty():
    assert detect_keypoints(np.full((64, 64), 128.0), SelectionConfig()) == []


def test_keypoints_found_at_square_corners():
    plane = _square_plane()
    kps = detect_keypoints(plane, SelectionConfig())
    assert len(kps) >= 4
    corners = [(20, 20), (20, 30), (30, 20), (30, 30)]
    for cx, cy in corners:
        dists = [np.hypot(kp.x - cx, kp.y - cy) for kp in kps]
        assert min(dists) <= 3.0, f"no keypoint near corner {(cx, cy)}"


def test_keypoints_invariant_to_intensity_shift():
    cfg = SelectionConfig()
    base = detect_keypoints(_square_plane(), cfg)
    shifted = detect_keypoints(_square_plane() + 10.0, cfg)
    key = lambda kps: sorted((round(kp.x, 6), round(kp.y, 6), kp.octave) for kp in kps)
    assert key(base) == key(shifted)


def test_keypoints_sorted_by_response():
    kps = detect_keypoints(_square_plane(), SelectionConfig())
    responses = [kp.response for kp in kps]
    assert responses == sorted(responses, reverse=True)


def test_keypoints_plane_too_small():
    with pytest.raises(ValueError, match="32"):
        detect_keypoints(np.zeros((16, 16)), SelectionConfig())


def test_cluster_close_pair_keeps_stronger():
    radius = 4.0 * np.sqrt(2)
    a = KeyPoint(10.0, 10.0, 5.0)
    b = KeyPoint(13.0, 10.0, 9.0)  # 3 px away, stronger
    for pair in ([a, b], [b, a]):
        kept = cluster_keypoints(pair, radius)
        assert kept == [b]


def test_cluster_far_pair_keeps_both():
    radius = 4.0 * np.sqrt(2)
    a = KeyPoint(10.0, 10.0, 5.0)
    b = KeyPoint(20.0, 10.0, 9.0)  # 10 px away
    assert len(cluster_keypoints([a, b], radius)) == 2


def naive_cluster(kps, radius):
    order = sorted(kps, key=lambda kp: (-kp.response, kp.y, kp.x))
    kept = []
    for kp in order:
        if all((kp.x - o.x) ** 2 + (kp.y - o.y) ** 2 > radius * radius for o in kept):
            kept.append(kp)
    return kept


def test_cluster_matches_quadratic_oracle():
    rng = np.random.default_rng(404)
    for _ in range(1000):
        n = rng.integers(2, 40)
        kps = [
            KeyPoint(float(x), float(y), float(r))
            for x, y, r in zip(
                rng.uniform(0, 100, n), rng.uniform(0, 100, n), rng.uniform(0, 1, n)
            )
        ]
        radius = float(rng.uniform(2.0, 12.0))
        got = [(kp.x, kp.y) for kp in cluster_keypoints(kps, radius)]
        want = [(kp.x, kp.y) for kp in naive_cluster(kps, radius)]
        assert got == want


# --- block selection ---------------------------------------------------------


def test_select_blocks_uniform_plane_empty():
    plane = np.full((128, 128), 90.0)
    for mode in ("both", "texture", "keypoints"):
        mask = select_blocks(plane, SelectionConfig(mode=mode))
        assert mask.blocks == []


def test_select_blocks_single_feature():
    plane = np.full((128, 128), 100.0)
    plane[68:78, 68:78] = 230.0  # the only texture and the only corners, in block (4, 4)
    mask = select_blocks(plane, SelectionConfig())
    assert mask.blocks == [(4, 4)]


def test_keypoint_to_block_mapping():
    # full-resolution pixel (100, 60) lies in LL 8x8 block (100 // 16, 60 // 16) = (6, 3)
    plane = np.full((256, 256), 80.0)
    plane[57:64, 97:104] = 220.0  # small square centered at (100, 60)
    cfg = SelectionConfig(mode="keypoints", central_ratio=1.0)
    mask = select_blocks(plane, cfg)
    assert (6, 3) in mask.blocks
    for bx, by in mask.blocks:
        assert abs(bx - 6) <= 1 and abs(by - 3) <= 1


def test_select_blocks_mode_intersection_and_central_bound():
    rng = np.random.default_rng(405)
    for _ in range(20):
        plane = np.full((160, 160), 100.0)
        for _ in range(12):
            x, y = rng.integers(8, 148, size=2)
            plane[y : y + 5, x : x + 5] += rng.uniform(40, 90)
        plane += rng.normal(0, 5, size=plane.shape)
        cfg = SelectionConfig()
        both = set(select_blocks(plane, cfg).blocks)
        tex = set(select_blocks(plane, SelectionConfig(mode="texture")).blocks)
        kp = set(select_blocks(plane, SelectionConfig(mode="keypoints")).blocks)
        assert both == tex & kp
        # central 60% of the 80x80 LL plane allows block indices 2..7 only
        for bx, by in both | tex | kp:
            assert 2 <= bx <= 7 and 2 <= by <= 7


def test_select_blocks_reads_only_green_equivalent_plane():
    # the mask is a pure function of the supplied plane
    rng = np.random.default_rng(406)
    plane = rng.uniform(0, 255, size=(128, 128))
    cfg = SelectionConfig()
    m1 = select_blocks(plane, cfg, group_id=2)
    m2 = select_blocks(plane.copy(), cfg, group_id=2)
    assert m1.blocks == m2.blocks and m1.group_id == 2


def test_selection_config_validation():
    with pytest.raises(ValueError, match="theta"):
        SelectionConfig(theta=0.0).validate()
    with pytest.raises(ValueError, match="theta"):
        SelectionConfig(theta=1.0).validate()
    with pytest.raises(ValueError, match="cluster_radius"):
        SelectionConfig(cluster_radius=0.0).validate()
    with pytest.raises(ValueError, match="central_ratio"):
        SelectionConfig(central_ratio=0.0).validate()
    with pytest.raises(ValueError, match="mode"):
        SelectionConfig(mode="loose").validate()
