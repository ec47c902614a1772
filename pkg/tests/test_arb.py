import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arbshape.arb import (
    ArbConfig,
    OrientationMode,
    WeightMode,
    arb_from_polar,
    compute_accumulative_arb,
    compute_overlapping_arb,
    compute_simple_arb,
    describe_arb,
    format_arb,
    fourier_magnitude_descriptor,
    orient_start_angle,
    parse_arb,
    polar_contour,
)
from arbshape.errors import ConfigError, DegenerateShape, EmptyShape
from arbshape.geometry import trace_contour
from arbshape.imgio import BinaryImage

from conftest import block, random_blob
from oracles import brute_force_arb, naive_dft2

MODES = ["count", "total", "average"]


def test_config_validation():
    assert ArbConfig().shape == (2, 24)
    with pytest.raises(ConfigError):
        ArbConfig(angular_width_deg=7)
    with pytest.raises(ConfigError):
        ArbConfig(rings=0)
    with pytest.raises(ConfigError):
        ArbConfig(tilt_delta_deg=0)
    # 15 / 3 = 5 distinct tilts; a sixth would repeat the first
    ArbConfig(angular_width_deg=15, tilt_delta_deg=3, instances=5)
    with pytest.raises(ConfigError):
        ArbConfig(angular_width_deg=15, tilt_delta_deg=3, instances=6)
    with pytest.raises(ValueError):
        ArbConfig(weight_mode="median")


def test_errors():
    with pytest.raises(EmptyShape):
        compute_simple_arb(BinaryImage(np.zeros((5, 5))), ArbConfig())
    single = np.zeros((5, 5), dtype=bool)
    single[2, 2] = True
    with pytest.raises(DegenerateShape):
        compute_simple_arb(BinaryImage(single), ArbConfig())
    with pytest.raises(DegenerateShape):
        orient_start_angle(BinaryImage(single), "furthest")


def test_horizontal_segment_side_bins():
    img = block(2, 5, 8, 1)
    cfg = ArbConfig(rings=1, angular_width_deg=90, weight_mode="count", tilt_delta_deg=90, instances=1)
    d = compute_simple_arb(img, cfg).values
    # bins: [0,90) NE, [90,180) SE, [180,270) SW, [270,360) NW
    assert d[0, 0] == 0 and d[0, 2] == 0
    assert d[0, 1] > 0 and d[0, 3] > 0
    assert d.sum() * 8 == pytest.approx(len(trace_contour(img)))


def test_rotation_by_90_shifts_six_bins(blobs):
    cfg = ArbConfig(rings=3, angular_width_deg=15, weight_mode="total")
    for img in blobs[:8]:
        d = compute_simple_arb(img, cfg).values
        rot = BinaryImage(np.rot90(img.pixels, k=-1))  # clockwise on screen
        dr = compute_simple_arb(rot, cfg).values
        np.testing.assert_allclose(dr, np.roll(d, 6, axis=1), rtol=0, atol=1e-12)


@pytest.mark.parametrize("mode", MODES)
def test_simple_matches_brute_force(blobs, mode):
    rng = np.random.default_rng(11)
    for img in blobs[:6]:
        rings = int(rng.choice([1, 2, 4, 12]))
        width = float(rng.choice([5, 10, 15, 20, 30]))
        start = float(rng.uniform(0, 360))
        cfg = ArbConfig(rings=rings, angular_width_deg=width, weight_mode=mode, tilt_delta_deg=width, instances=1)
        ours = compute_simple_arb(img, cfg, start).values
        ref = brute_force_arb(img, trace_contour(img).points, rings, width, mode, start)
        np.testing.assert_allclose(ours, ref, rtol=0, atol=1e-12)


@pytest.mark.parametrize("variant", ["simple", "overlap", "accum"])
def test_translation_invariance_is_exact(blobs, variant):
    cfg = ArbConfig(rings=4, angular_width_deg=10, tilt_delta_deg=2, instances=5)
    for img in blobs[:6]:
        base = describe_arb(img, cfg, variant)
        for dx, dy in [(1, 0), (0, -2), (-3, 1), (2, 3)]:
            moved = BinaryImage(np.roll(img.pixels, (dy, dx), axis=(0, 1)))
            assert np.array_equal(describe_arb(moved, cfg, variant), base)


def test_mass_division_applied_once(blobs):
    img = blobs[0]
    pc = polar_contour(img)
    doubled = pc._replace(moments=dataclasses.replace(pc.moments, m00=2 * pc.moments.m00))
    for mode in MODES:
        cfg = ArbConfig(weight_mode=mode)
        a = arb_from_polar(pc, cfg)
        b = arb_from_polar(doubled, cfg)
        if mode == "average":
            assert np.array_equal(a, b)
        else:
            assert np.array_equal(b, a / 2)


def test_weight_sums_reconstruct(blobs):
    for img in blobs[:5]:
        pc = polar_contour(img)
        m00 = pc.moments.m00
        count = compute_simple_arb(img, ArbConfig(weight_mode="count")).values
        total = compute_simple_arb(img, ArbConfig(weight_mode="total")).values
        assert count.sum() * m00 == pytest.approx(len(pc.r), rel=1e-12)
        assert total.sum() * m00 == pytest.approx(pc.r.sum(), rel=1e-12)
        avg = compute_simple_arb(img, ArbConfig(weight_mode="average")).values
        occupied = count > 0
        np.testing.assert_allclose(avg[occupied], total[occupied] / count[occupied], rtol=1e-12)
        assert (avg[~occupied] == 0).all()


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 5000), start=st.floats(0, 360), k=st.integers(-30, 30), width=st.sampled_from([5, 10, 15, 20, 30]))
def test_angular_shift_equivariance(seed, start, k, width):
    img = random_blob(np.random.default_rng(seed), size=48, margin=2)
    cfg = ArbConfig(rings=2, angular_width_deg=width, tilt_delta_deg=width, instances=1)
    start = float(round(start))
    a = compute_simple_arb(img, cfg, start).values
    b = compute_simple_arb(img, cfg, start + k * width).values
    assert np.array_equal(b, np.roll(a, -k, axis=1))


def test_overlapping_slices(blobs):
    cfg = ArbConfig(rings=2, angular_width_deg=15, tilt_delta_deg=3, instances=5)
    for img in blobs[:5]:
        ov = compute_overlapping_arb(img, cfg)
        assert ov.values.shape == (2, 24, 5)
        for n in range(5):
            expect = compute_simple_arb(img, cfg, n * 3.0).values
            assert np.array_equal(ov.slice(n).values, expect)
    flat = {ov.values[:, :, n].tobytes() for n in range(5)}
    assert len(flat) == 5


def test_single_instance_collapses(blobs):
    cfg = ArbConfig(instances=1)
    img = blobs[1]
    simple = compute_simple_arb(img, cfg).values
    ov = compute_overlapping_arb(img, cfg).values
    assert ov.shape == simple.shape + (1,)
    assert np.array_equal(ov[:, :, 0], simple)
    assert np.array_equal(compute_accumulative_arb(img, cfg).values, simple)


def test_accumulative_is_instance_sum(blobs):
    for mode in MODES:
        cfg = ArbConfig(rings=4, angular_width_deg=15, tilt_delta_deg=1, instances=15, weight_mode=mode)
        for img in blobs[:4]:
            acc = compute_accumulative_arb(img, cfg).values
            ov = compute_overlapping_arb(img, cfg).values
            np.testing.assert_allclose(acc, ov.sum(axis=2), rtol=0, atol=1e-12)


def test_accumulative_count_total(blobs):
    cfg = ArbConfig(weight_mode="count", instances=5)
    for img in blobs[:5]:
        pc = polar_contour(img)
        acc = compute_accumulative_arb(img, cfg).values
        assert acc.sum() == pytest.approx(5 * len(pc.r) / pc.moments.m00, rel=1e-12)


def test_orientation_examples():
    bar = block(2, 5, 9, 2, size=14)
    assert orient_start_angle(bar, "moments").degrees == pytest.approx(90.0)
    # plus sign with a long upper arm: furthest point straight up
    a = np.zeros((20, 20), dtype=bool)
    a[10, 7:14] = True
    a[2:14, 10] = True
    assert orient_start_angle(BinaryImage(a), "furthest") == (0.0, False)
    iso = orient_start_angle(block(2, 2, 5, 5), "moments")
    assert iso == (0.0, True)
    with pytest.raises(ConfigError):
        orient_start_angle(bar, "fourier")


def test_furthest_orientation_brute_force(blobs):
    import math

    for img in blobs:
        pts = trace_contour(img).points
        m00 = img.count()
        ys, xs = np.nonzero(img.pixels)
        cx, cy = xs.sum() / m00, ys.sum() / m00
        d = [math.hypot(x - cx, y - cy) for x, y in pts.tolist()]
        x, y = pts[int(np.argmax(d))]
        expect = math.degrees(math.atan2(x - cx, -(y - cy))) % 360
        assert orient_start_angle(img, "furthest").degrees == pytest.approx(expect, abs=1e-9)


def test_moments_orientation_tracks_rotation(small_dataset):
    from arbshape.deform import rotate
    from arbshape.geometry import compute_moments

    for _, img in small_dataset:
        m = compute_moments(img)
        s0 = orient_start_angle(img, "moments").degrees
        s1 = orient_start_angle(BinaryImage(rotate(img.pixels, 30.0, (m.cx, m.cy))), "moments").degrees
        diff = (s1 - s0 - 30.0 + 90) % 180 - 90
        assert abs(diff) < 3.0


def test_oriented_descriptor_uses_start_angle(blobs):
    cfg = ArbConfig(orientation_mode="furthest", instances=5)
    img = blobs[2]
    start = orient_start_angle(img, "furthest").degrees
    plain = cfg.replace(orientation_mode="none")
    expect = compute_accumulative_arb(img, plain, start).values
    assert np.array_equal(describe_arb(img, cfg, "accum"), expect)


def test_fourier_magnitude_basics():
    assert not fourier_magnitude_descriptor(np.zeros((2, 24))).any()
    rng = np.random.default_rng(3)
    f = rng.random((3, 8))
    np.testing.assert_allclose(fourier_magnitude_descriptor(f), np.abs(naive_dft2(f)), atol=1e-9)
    for k in range(8):
        np.testing.assert_allclose(fourier_magnitude_descriptor(np.roll(f, k, axis=1)), fourier_magnitude_descriptor(f), atol=1e-9)


def test_fourier_orientation_shift_invariant(blobs):
    cfg = ArbConfig(rings=2, angular_width_deg=15, tilt_delta_deg=15, instances=1, orientation_mode="fourier")
    img = blobs[4]
    plain = cfg.replace(orientation_mode="none")
    base = describe_arb(img, cfg, "simple")
    for k in range(1, 24):
        shifted = compute_simple_arb(img, plain, 15.0 * k).values
        np.testing.assert_allclose(fourier_magnitude_descriptor(shifted), base, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    seed=st.integers(0, 10_000),
    rings=st.sampled_from([1, 2, 4, 12]),
    width=st.sampled_from([5, 10, 15, 20, 30]),
    mode=st.sampled_from(MODES),
    orient=st.sampled_from([m.value for m in OrientationMode]),
    variant=st.sampled_from(["simple", "overlap", "accum"]),
)
def test_entries_finite_and_non_negative(seed, rings, width, mode, orient, variant):
    img = random_blob(np.random.default_rng(seed), size=40, margin=2)
    cfg = ArbConfig(rings=rings, angular_width_deg=width, weight_mode=mode, tilt_delta_deg=1, instances=min(3, width), orientation_mode=orient)
    d = describe_arb(img, cfg, variant)
    assert np.isfinite(d).all() and (d >= 0).all()


@pytest.mark.parametrize("variant", ["simple", "overlap"])
def test_serialisation_roundtrip(blobs, variant):
    cfg = ArbConfig(rings=3, angular_width_deg=20, weight_mode=WeightMode.AVERAGE, tilt_delta_deg=4, instances=5)
    values = describe_arb(blobs[0], cfg, variant)
    text = format_arb(values, cfg, "arb-" + variant)
    assert text.splitlines()[0] == "ARB v1 rings=3 width=20 mode=average delta=4 instances=5 orient=none method=arb-" + variant
    back, cfg2, method = parse_arb(text)
    assert cfg2 == cfg and method == "arb-" + variant
    assert np.array_equal(back, values)
