import numpy as np
import pytest

from hkpolar.channels import (
    Alphabet,
    ChannelFormatError,
    JointModel,
    default_cloud_size,
    dump_channel,
    dump_distribution,
    info,
    load_channel,
    load_distribution,
    synthesize,
)

from helpers import (
    no_interference_ic,
    oracle_mi,
    random_dist,
    random_ic,
    uniform_const_w_dist,
)


def test_alphabet_rejects_non_prime():
    with pytest.raises(ValueError):
        Alphabet(4)
    with pytest.raises(ValueError):
        Alphabet(1)
    Alphabet(7)


def test_default_cloud_size():
    assert default_cloud_size(2) == 7
    assert default_cloud_size(3) == 11


IDENTITY_DOC = """\
# y1=x1, y2=x2
ic 2 2 2 2
1 0 0 0
0 1 0 0
0 0 1 0
0 0 0 1
"""


def test_load_identity_channel():
    ic = load_channel(IDENTITY_DOC)
    for a in range(2):
        for b in range(2):
            assert ic.joint_table[a, b, a, b] == 1.0
    # round trip
    again = load_channel(dump_channel(ic))
    np.testing.assert_allclose(again.joint_table, ic.joint_table)


def test_load_rejects_bad_row_sum():
    doc = IDENTITY_DOC.replace("1 0 0 0", "0.999 0 0 0", 1)
    with pytest.raises(ChannelFormatError) as e:
        load_channel(doc)
    assert e.value.line is not None


def test_load_rejects_non_prime_alphabet():
    doc = "ic 4 2 2 2\n" + "\n".join(["0.25 0.25 0.25 0.25"] * 8)
    with pytest.raises(ChannelFormatError, match="not prime"):
        load_channel(doc)


def test_distribution_round_trip():
    rng = np.random.default_rng(7)
    dist = random_dist(rng, 3, 2, 2, 2)
    again = load_distribution(dump_distribution(dist))
    np.testing.assert_allclose(again.pw1x1, dist.pw1x1)
    np.testing.assert_allclose(again.pw2x2, dist.pw2x2)


def test_effective_channel_ignores_interferer_when_absent():
    ic = no_interference_ic()
    rng = np.random.default_rng(1)
    dist = random_dist(rng)
    eff1 = synthesize(ic, dist, "EFF1")
    # y1 = x1 regardless of w2
    for w2 in range(dist.w2.size):
        np.testing.assert_allclose(eff1.table[:, w2, :], np.eye(2), atol=1e-12)


def test_effective_channel_constant_w2_is_averaged_marginal():
    rng = np.random.default_rng(2)
    ic = random_ic(rng)
    dist = uniform_const_w_dist()
    eff1 = synthesize(ic, dist, "EFF1")
    px2 = dist.x_marginal(2)
    want = np.einsum("abc,b->ac", ic.marginal(1).table, px2)
    for w2 in range(2):
        np.testing.assert_allclose(eff1.table[:, w2, :], want, atol=1e-12)


def test_effective_channel_xor_with_cloud_copy():
    # y1 = x1 xor x2; w2 = x2 exactly; then (x1, w2) determine y1.
    jt = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            jt[a, b, a ^ b, b] = 1.0
    ic_xor = load_channel(dump_channel(type(no_interference_ic())(2, 2, 2, 2, jt)))
    p2 = np.array([[0.5, 0.0], [0.0, 0.5]])  # w2 == x2, uniform
    p1 = np.full((2, 2), 0.25)
    dist = load_distribution(
        dump_distribution(
            __import__("hkpolar.channels", fromlist=["JointInputDistribution"]).JointInputDistribution(p1, p2)
        )
    )
    eff1 = synthesize(ic_xor, dist, "EFF1")
    # hand-enumerated: output y1 = x1 xor w2 with certainty
    for x1 in range(2):
        for w2 in range(2):
            want = np.zeros(2)
            want[x1 ^ w2] = 1.0
            np.testing.assert_allclose(eff1.table[x1, w2], want, atol=1e-12)


def test_info_trivial_cases():
    ic = no_interference_ic()
    dist = uniform_const_w_dist()
    assert info(dist, ic, "I(X1;Y1|W2)") == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(3)
    # output independent of inputs
    jt = rng.dirichlet(np.ones(4), size=1).reshape(1, 1, 2, 2)
    jt = np.tile(jt, (2, 2, 1, 1))
    from hkpolar.channels import InterferenceChannel

    flat = InterferenceChannel(2, 2, 2, 2, jt)
    assert info(dist, flat, "I(X1;Y1|W2)") == pytest.approx(0.0, abs=1e-12)


def test_info_and_channel_for_and_gate():
    # y1 = x1 AND x2, uniform binary inputs, constant W's.
    jt = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            jt[a, b, a & b, b] = 1.0
    from hkpolar.channels import InterferenceChannel

    ic = InterferenceChannel(2, 2, 2, 2, jt)
    dist = uniform_const_w_dist()
    # frozen from an 8-entry enumeration: H(Y1) = H(1/4) = 0.811278..., H(Y1|X1) = 0.5
    want = 0.8112781244591328 - 0.5
    assert info(dist, ic, "I(X1;Y1)") == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_info_matches_enumeration_oracle(seed):
    rng = np.random.default_rng(100 + seed)
    ic = random_ic(rng, n1=3, n2=2)
    dist = random_dist(rng, qw1=3, qx1=2, qw2=2, qx2=2)
    cases = [
        (("X1",), ("Y1",), ("W2",)),
        (("X1", "W2"), ("Y1",), ()),
        (("X2", "W1"), ("Y2",), ("W2",)),
        (("W1", "W2"), ("Y1",), ()),
        (("X1",), ("Y1",), ("W1", "W2")),
    ]
    model = JointModel(ic, dist)
    for a, b, c in cases:
        got = model.mi(a, b, c)
        want = oracle_mi(ic, dist, a, b, c)
        assert got == pytest.approx(want, abs=1e-10)


def test_chain_rule_property():
    rng = np.random.default_rng(9)
    for _ in range(100):
        ic = random_ic(rng)
        dist = random_dist(rng)
        m = JointModel(ic, dist)
        lhs = m.mi(("X1", "W2"), ("Y1",))
        rhs = m.mi(("W2",), ("Y1",)) + m.mi(("X1",), ("Y1",), ("W2",))
        assert lhs == pytest.approx(rhs, abs=1e-10)
        assert lhs >= -1e-12


def test_data_processing_cloud_center():
    rng = np.random.default_rng(11)
    for _ in range(25):
        ic = random_ic(rng)
        dist = random_dist(rng, qw1=3)
        m = JointModel(ic, dist)
        # W1 - X1 - Y1 given the interferer's fine layer is averaged out:
        # conditioning set must include W2 so that Y1 depends on (X1, W2) only.
        assert m.mi(("W1",), ("Y1",), ("X1", "W2")) == pytest.approx(0.0, abs=1e-10)
        assert m.mi(("W1",), ("Y1",)) <= m.mi(("X1", "W1"), ("Y1",)) + 1e-12
        assert m.mi(("X1", "W1"), ("Y1",), ("W2",)) == pytest.approx(
            m.mi(("X1",), ("Y1",), ("W2",)), abs=1e-10
        )


def test_synthesized_rows_normalise():
    rng = np.random.default_rng(13)
    for _ in range(20):
        ic = random_ic(rng, n1=3, n2=3)
        dist = random_dist(rng, qw1=3, qw2=2)
        for which in ("EFF1", "EFF2", "COMMON1", "COMMON2"):
            ch = synthesize(ic, dist, which)
            sums = ch.table.sum(axis=-1)
            np.testing.assert_allclose(sums, 1.0, atol=1e-12)
