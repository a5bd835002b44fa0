import numpy as np
import pytest

from hkpolar.polar import (
    ChainPath,
    canonical_path,
    delta_n,
    exact_profile_mac,
    exact_profile_single,
    generator_matrix,
    mac_joint_from_channel,
    polar_inverse,
    polar_transform,
    polarized_sets,
    scale_path,
    single_joint_from_channel,
)


def test_transform_length_two():
    assert list(polar_transform([1, 0], 2)) == [1, 0]
    assert list(polar_transform([1, 1], 2)) == [0, 1]
    assert list(polar_transform([0, 1], 2)) == [1, 1]


def test_transform_identity_n1():
    assert list(polar_transform([2], 3)) == [2]


def test_transform_matches_matrix_and_inverts():
    rng = np.random.default_rng(0)
    for q in (2, 3, 5):
        for N in (2, 4, 8):
            G = generator_matrix(N, q)
            u = rng.integers(0, q, size=(20, N))
            x = polar_transform(u, q)
            np.testing.assert_array_equal(x, (u @ G) % q)
            np.testing.assert_array_equal(polar_inverse(x, q), u)


def test_binary_transform_is_involution():
    rng = np.random.default_rng(1)
    u = rng.integers(0, 2, size=(16, 16))
    x = polar_transform(polar_transform(u, 2), 2)
    np.testing.assert_array_equal(x, u)


def test_transform_rejects_bad_length():
    with pytest.raises(ValueError):
        polar_transform([0, 1, 0], 2)


def test_canonical_path_forms():
    p = canonical_path(2, 1)
    assert p.bits == (0, 1, 1, 0)
    assert p.canonical_i == 1
    assert canonical_path(2, 0).bits == (1, 1, 0, 0)
    assert ChainPath((0, 1, 0, 1)).canonical_i is None
    with pytest.raises(ValueError):
        ChainPath((0, 0, 0, 1))


def test_scale_path():
    p = ChainPath((0, 0, 1, 1))
    assert scale_path(p, 2).bits == (0, 0, 0, 0, 1, 1, 1, 1)
    assert scale_path(canonical_path(2, 0), 2).bits == (1,) * 4 + (0,) * 4
    assert scale_path(canonical_path(4, 3), 2).canonical_i == 6
    with pytest.raises(ValueError):
        scale_path(p, 3)


def test_path_order_is_monotone():
    p = canonical_path(2, 1)
    assert p.order() == [(0, 0), (1, 0), (1, 1), (0, 1)]


def test_profile_noiseless_channel():
    # noiseless: output reveals the input, all conditional entropies 0
    joint = single_joint_from_channel(np.eye(2), [0.5, 0.5])
    prof = exact_profile_single(joint, 2)
    np.testing.assert_allclose(prof.values, 0.0, atol=1e-12)


def test_profile_pure_noise_channel():
    joint = single_joint_from_channel(np.full((2, 2), 0.5), [0.5, 0.5])
    prof = exact_profile_single(joint, 2)
    np.testing.assert_allclose(prof.values, 1.0, atol=1e-12)


def flip_channel(eps):
    return np.array([[1 - eps, eps], [eps, 1 - eps]])


def test_profile_conservation_binary_flip():
    eps = 0.11
    joint = single_joint_from_channel(flip_channel(eps), [0.5, 0.5])
    N = 4
    prof = exact_profile_single(joint, N)
    h = -(eps * np.log2(eps) + (1 - eps) * np.log2(1 - eps))
    assert prof.values.sum() == pytest.approx(N * h, abs=1e-9)
    # polarization moved mass toward the ends
    assert prof.values.min() < h < prof.values.max()


def test_profile_conservation_nonuniform_source():
    rng = np.random.default_rng(3)
    p = rng.dirichlet(np.ones(3))
    chan = rng.dirichlet(np.ones(2), size=3)
    joint = single_joint_from_channel(chan, p)
    N = 4
    prof = exact_profile_single(joint, N)
    hx_y = -np.sum((joint * np.log2(np.where(joint > 0, joint / joint.sum(0, keepdims=True), 1))))
    assert prof.values.sum() == pytest.approx(N * hx_y, abs=1e-9)


def test_polarized_sets_threshold():
    eps = 0.11
    joint = single_joint_from_channel(flip_channel(eps), [0.5, 0.5])
    prof = exact_profile_single(joint, 4)
    delta = 0.1
    high, low, mid = polarized_sets(prof.values, 2, delta)
    assert len(high) + len(low) + len(mid) == 4
    for j in high:
        assert prof.values[j] >= 1 - delta
    for j in low:
        assert prof.values[j] <= delta
    # direct thresholding equivalence
    np.testing.assert_array_equal(high, np.where(prof.values >= 1 - delta)[0])
    np.testing.assert_array_equal(low, np.where(prof.values <= delta)[0])


def test_polarized_sets_degenerate_profiles():
    high, low, mid = polarized_sets(np.zeros(4), 2, 0.05)
    assert len(low) == 4 and len(high) == 0 and len(mid) == 0
    high, low, mid = polarized_sets(np.ones(4), 2, 0.05)
    assert len(high) == 4 and len(low) == 0


def test_mac_profile_conservation_and_path_split():
    rng = np.random.default_rng(5)
    chan = rng.dirichlet(np.ones(2), size=(2, 2))  # (x1, x2) -> y
    p1 = np.array([0.6, 0.4])
    p2 = np.array([0.3, 0.7])
    joint = mac_joint_from_channel(chan, p1, p2)
    N = 4
    for i in (0, 2, 4):
        path = canonical_path(N, i)
        prof = exact_profile_mac(joint, N, path)
        assert prof.values.size == 2 * N
        # chain rule: total equals N * H(X1, X2 | Y)
        flat = joint.reshape(4, -1)
        h_joint = -np.sum(flat[flat > 0] * np.log2(flat[flat > 0]))
        py = flat.sum(axis=0)
        h_y = -np.sum(py[py > 0] * np.log2(py[py > 0]))
        assert prof.values.sum() == pytest.approx(N * (h_joint - h_y), abs=1e-9)
        # owners follow the path
        np.testing.assert_array_equal(prof.owners, np.array(path.bits))


def test_mac_profile_user1_prefix_matches_single_user():
    # on the canonical path, sender 1's first i entries see no sender-2
    # conditioning: they equal the single-user profile on the averaged channel
    rng = np.random.default_rng(6)
    chan = rng.dirichlet(np.ones(3), size=(2, 2))
    p1 = np.array([0.5, 0.5])
    p2 = np.array([0.25, 0.75])
    N = 4
    i = 2
    prof = exact_profile_mac(mac_joint_from_channel(chan, p1, p2), N, canonical_path(N, i))
    avg = np.einsum("aby,b->ay", chan, p2)
    single = exact_profile_single(single_joint_from_channel(avg, p1), N)
    np.testing.assert_allclose(prof.values[:i], single.values[:i], atol=1e-9)


def test_mac_profile_scaling_preserves_rates():
    # rate pair of a path survives doubling (exactly at these tiny sizes the
    # sums track within the oracle resolution)
    rng = np.random.default_rng(7)
    chan = rng.dirichlet(np.ones(2), size=(2, 2))
    p1 = np.full(2, 0.5)
    p2 = np.full(2, 0.5)
    joint = mac_joint_from_channel(chan, p1, p2)
    path4 = canonical_path(4, 2)
    path8 = scale_path(path4, 2)
    prof4 = exact_profile_mac(joint, 4, path4)
    prof8 = exact_profile_mac(joint, 8, path8)
    r4 = 1.0 - prof4.user_values(0).sum() / 4
    r8 = 1.0 - prof8.user_values(0).sum() / 8
    assert abs(r4 - r8) < 1e-9  # sender-1 sum splits identically under scaling


def test_delta_n():
    assert delta_n(16) == pytest.approx(2 ** -(16**0.25))
    with pytest.raises(ValueError):
        delta_n(16, beta=0.7)


def test_enumeration_budget_guard():
    joint = np.full((2, 2, 2), 0.125)
    with pytest.raises(ValueError, match="budget"):
        exact_profile_mac(joint, 16, canonical_path(16, 0))
