import numpy as np
import pytest

from hkpolar.channels import InterferenceChannel, JointModel
from hkpolar.regions import (
    RatePolytope,
    classify,
    dominant_faces,
    hk_region,
    hk_with_extras,
    mac_region,
    partial_region,
    project,
    projected_combined_region,
    sample_dominant_face,
    split_to_total_rates,
    vertex_sets_equal,
    verify_decomposition,
)

from helpers import no_interference_ic, random_dist, random_ic, uniform_const_w_dist


def bounds_by_tag(poly):
    return dict(zip(poly.tags, poly.b))


def test_hk_region_no_interference():
    poly = hk_region(no_interference_ic(), uniform_const_w_dist())
    t = bounds_by_tag(poly)
    assert t["a"] == pytest.approx(1.0, abs=1e-12)
    assert t["b"] == pytest.approx(1.0, abs=1e-12)
    for k in "cde":
        assert t[k] == pytest.approx(2.0, abs=1e-12)
    for k in "fg":
        assert t[k] == pytest.approx(3.0, abs=1e-12)


def test_hk_region_degenerate_channel():
    jt = np.full((2, 2, 2, 2), 0.25)
    ic = InterferenceChannel(2, 2, 2, 2, jt)
    poly = hk_region(ic, uniform_const_w_dist())
    np.testing.assert_allclose(poly.b, 0.0, atol=1e-12)


def test_hk_region_matches_term_oracle():
    # each bound equals the direct evaluation of its defining sum of terms
    rng = np.random.default_rng(0)
    ic = random_ic(rng)
    dist = random_dist(rng, qw1=3)
    poly = hk_region(ic, dist)
    m = JointModel(ic, dist).mi
    want = {
        "a": m(("X1",), ("Y1",), ("W2",)),
        "b": m(("X2",), ("Y2",), ("W1",)),
        "c": m(("X1", "W2"), ("Y1",)) + m(("X2",), ("Y2",), ("W1", "W2")),
        "d": m(("X1",), ("Y1",), ("W1", "W2")) + m(("X2", "W1"), ("Y2",)),
        "e": m(("X1", "W2"), ("Y1",), ("W1",)) + m(("X2", "W1"), ("Y2",), ("W2",)),
        "f": m(("X1", "W2"), ("Y1",))
        + m(("X1",), ("Y1",), ("W1", "W2"))
        + m(("X2", "W1"), ("Y2",), ("W2",)),
        "g": m(("X2",), ("Y2",), ("W1", "W2"))
        + m(("X2", "W1"), ("Y2",))
        + m(("X1", "W2"), ("Y1",), ("W1",)),
    }
    got = bounds_by_tag(poly)
    for k, v in want.items():
        assert got[k] == pytest.approx(v, abs=1e-10)


def test_mac_region_noiseless_pair():
    # Y = (X1, X2) noiseless
    tab = np.zeros((2, 2, 4))
    for a in range(2):
        for b in range(2):
            tab[a, b, 2 * a + b] = 1.0
    from hkpolar.channels import DiscreteChannel

    chan = DiscreteChannel((2, 2), 4, tab)
    poly = mac_region(chan, (np.full(2, 0.5), np.full(2, 0.5)))
    t = bounds_by_tag(poly)
    assert t["r1"] == pytest.approx(1.0, abs=1e-12)
    assert t["r2"] == pytest.approx(1.0, abs=1e-12)
    assert t["sum"] == pytest.approx(2.0, abs=1e-12)


def test_mac_region_binary_adder():
    tab = np.zeros((2, 2, 3))
    for a in range(2):
        for b in range(2):
            tab[a, b, a + b] = 1.0
    from hkpolar.channels import DiscreteChannel

    chan = DiscreteChannel((2, 2), 3, tab)
    poly = mac_region(chan, (np.full(2, 0.5), np.full(2, 0.5)))
    t = bounds_by_tag(poly)
    assert t["r1"] == pytest.approx(1.0, abs=1e-12)
    assert t["r2"] == pytest.approx(1.0, abs=1e-12)
    assert t["sum"] == pytest.approx(1.5, abs=1e-12)


def test_project_substitution_example():
    # {R1c <= 1, R1p <= 1} with R1 = R1p + R1c projects to R1 <= 2
    p4 = RatePolytope(
        ("R1c", "R2c", "R1p", "R2p"),
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
        [1.0, 1.0, 0.5, 0.5],
    )
    shadow = project(split_to_total_rates(p4), ("R1",))
    assert shadow.contains([2.0 - 1e-12])
    assert not shadow.contains([2.0 + 1e-6])


def test_projection_no_interference_is_rectangle():
    ic = no_interference_ic()
    dist = uniform_const_w_dist()
    shadow = projected_combined_region(ic, dist)
    verts = shadow.vertices()
    want = {(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)}
    got = {tuple(np.round(v, 9)) for v in verts}
    assert got == want


@pytest.mark.parametrize("seed", range(12))
def test_combined_projection_equals_region_with_extras(seed):
    rng = np.random.default_rng(1000 + seed)
    ic = random_ic(rng)
    dist = random_dist(rng)
    lhs = projected_combined_region(ic, dist)
    rhs = hk_with_extras(ic, dist)
    assert vertex_sets_equal(lhs, rhs, tol=1e-9)
    # membership spot check on a grid
    grid = np.linspace(0, 1.2, 7)
    for r1 in grid:
        for r2 in grid:
            assert lhs.contains((r1, r2), tol=1e-7) == rhs.contains((r1, r2), tol=1e-7)


def test_union_of_variants_matches_combined_projection():
    rng = np.random.default_rng(5)
    ic = random_ic(rng)
    dist = random_dist(rng)
    shadows = [
        project(split_to_total_rates(partial_region(ic, dist, v)), ("R1", "R2"))
        for v in (1, 2, 3)
    ]
    combined = projected_combined_region(ic, dist)
    pts = np.random.default_rng(6).uniform(0, 1.0, size=(50, 2))
    # also probe near each vertex to exercise boundaries
    pts = np.vstack([pts, combined.vertices() * 0.999])
    for pt in pts:
        in_union = any(s.contains(pt, tol=1e-7) for s in shadows)
        assert in_union == combined.contains(pt, tol=1e-7)


def test_classify_no_interference_corner():
    ic = no_interference_ic()
    dist = uniform_const_w_dist()
    dec = classify((1.0, 1.0), ic, dist)
    assert dec.point_type == "A"
    assert dec.r1c == pytest.approx(0.0, abs=1e-9)
    assert dec.r2c == pytest.approx(0.0, abs=1e-9)
    assert dec.r1p == pytest.approx(1.0, abs=1e-9)
    assert dec.r2p == pytest.approx(1.0, abs=1e-9)


def test_classify_rejects_interior_point():
    ic = no_interference_ic()
    dist = uniform_const_w_dist()
    with pytest.raises(ValueError):
        classify((0.25, 0.25), ic, dist)


def test_classify_face_f_is_type_b2():
    rng = np.random.default_rng(33)
    for _ in range(40):
        ic = random_ic(rng)
        dist = random_dist(rng)
        poly = hk_with_extras(ic, dist)
        faces = dict((tag, (p0, p1)) for tag, p0, p1 in dominant_faces(poly))
        if "f" not in faces:
            continue
        p0, p1 = faces["f"]
        if np.linalg.norm(p1 - p0) < 1e-6:
            continue
        mid = (p0 + p1) / 2
        dec = classify(mid, ic, dist)
        picks = [dec] + dec.alternates
        assert any(d.point_type == "B2" for d in picks)
        chosen = next(d for d in picks if d.point_type == "B2")
        m = JointModel(ic, dist).mi
        assert chosen.r1p == pytest.approx(m(("X1",), ("Y1",), ("W1", "W2")), abs=1e-8)
        return
    pytest.skip("no instance with a proper f face found")


@pytest.mark.parametrize("seed", range(10))
def test_sampled_dominant_points_classify_and_verify(seed):
    rng = np.random.default_rng(2000 + seed)
    done = 0
    while done < 3:
        ic = random_ic(rng)
        dist = random_dist(rng)
        poly = hk_with_extras(ic, dist)
        if not dominant_faces(poly):
            continue
        done += 1
        for pt in sample_dominant_face(poly, 12):
            dec = classify(pt, ic, dist)
            assert verify_decomposition(dec, ic, dist)
            r1, r2 = dec.rate_pair()
            assert r1 == pytest.approx(pt[0], abs=1e-9)
            assert r2 == pytest.approx(pt[1], abs=1e-9)


def test_sliver_point_raises_with_guidance():
    # hunt for an instance whose compact region strictly exceeds the
    # achievable shadow, then classify a point in the gap
    rng = np.random.default_rng(0)
    for _ in range(500):
        ic = random_ic(rng)
        dist = random_dist(rng)
        hk = hk_region(ic, dist)
        ext = hk_with_extras(ic, dist)
        faces = dominant_faces(hk)
        if not faces:
            continue
        for pt in sample_dominant_face(hk, 16):
            if not ext.contains(pt, tol=1e-9):
                with pytest.raises(ValueError, match="common layer"):
                    classify(pt, ic, dist)
                return
    pytest.skip("no sliver instance found")


def test_sample_rectangle_returns_corner():
    poly = RatePolytope(
        ("R1", "R2"),
        [[1, 0], [0, 1], [1, 1]],
        [1.0, 1.0, 2.0],
        ["a", "b", "c"],
    )
    pts = sample_dominant_face(poly, 3)
    for pt in pts:
        np.testing.assert_allclose(pt, [1.0, 1.0], atol=1e-9)


def test_sample_single_segment_midpoint():
    poly = RatePolytope(
        ("R1", "R2"),
        [[1, 0], [0, 1], [1, 1]],
        [1.0, 1.0, 1.5],
        ["a", "b", "c"],
    )
    (pt,) = sample_dominant_face(poly, 1)
    np.testing.assert_allclose(pt, [0.75, 0.75], atol=1e-9)


def test_sampling_proportional_to_length():
    # pentagon with sum face from (0.2, 1) to (1, 0.2): single segment here,
    # but check spread is uniform along it
    poly = RatePolytope(
        ("R1", "R2"),
        [[1, 0], [0, 1], [1, 1]],
        [1.0, 1.0, 1.2],
        ["a", "b", "c"],
    )
    pts = np.array(sample_dominant_face(poly, 4))
    fracs = (pts[:, 0] - 0.2) / 0.8
    np.testing.assert_allclose(fracs, [0.125, 0.375, 0.625, 0.875], atol=1e-9)


def test_region_monotone_under_channel_cleanup():
    # composing outputs with less post-noise upgrades the channel, so every
    # bound is nondecreasing (data processing); plain convex mixing with the
    # identity is NOT an upgrade ordering and can dip, so the family used
    # here is degradation-ordered by construction.
    rng = np.random.default_rng(77)
    base = no_interference_ic()
    dist = random_dist(rng)

    def flip(eps):
        f = np.array([[1 - eps, eps], [eps, 1 - eps]])
        jt = np.einsum("abcd,ce,df->abef", base.joint_table, f, f)
        return InterferenceChannel(2, 2, 2, 2, jt)

    prev = None
    for eps in (0.4, 0.25, 0.1, 0.0):
        b = hk_region(flip(eps), dist).b
        if prev is not None:
            assert np.all(b >= prev - 1e-9)
        prev = b
