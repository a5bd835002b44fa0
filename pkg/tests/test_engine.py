"""The SC engine against brute-force enumeration: the module's master test."""

import numpy as np
import pytest

from hkpolar.engine import ChainEngine, mac_chain_sweep, single_user_sweep
from hkpolar.exhaustive import PairEnumeration, sc_chain_posteriors
from hkpolar.polar import canonical_path


def random_leaf(rng, B, N, q1, q2):
    return rng.gamma(1.0, size=(B, N, q1, q2))


def argmax_decider(record):
    def decide(t, lam):
        v = np.argmax(lam, axis=1)
        record.append((t, lam.copy(), v))
        return v

    return decide


@pytest.mark.parametrize("q1,q2", [(2, 2), (2, 3), (3, 2)])
@pytest.mark.parametrize("N", [1, 2, 4, 8])
def test_mac_chain_matches_bruteforce_all_prefixes(N, q1, q2):
    if N == 8 and (q1, q2) != (2, 2):
        pytest.skip("keep runtime sane")
    rng = np.random.default_rng(N * 100 + q1 * 10 + q2)
    B = 3
    leaf = random_leaf(rng, B, N, q1, q2)
    for i_m in range(N + 1):
        rec1, rec2 = [], []
        u1, u2, posts = mac_chain_sweep(
            leaf, i_m, argmax_decider(rec1), argmax_decider(rec2), collect=True
        )
        path = canonical_path(N, i_m)
        for b in range(B):
            decisions = {}
            for user, seq in ((0, u1[b]), (1, u2[b])):
                for idx in range(N):
                    decisions[(user, idx)] = int(seq[idx])
            ref = sc_chain_posteriors(leaf[b], path.order(), decisions)
            for k, (want, got) in enumerate(zip(ref, posts)):
                tv = 0.5 * np.abs(want - got[b]).sum()
                assert tv <= 1e-10, (i_m, b, k, want, got[b])


def test_single_user_matches_bruteforce():
    rng = np.random.default_rng(7)
    B, N, q = 4, 8, 2
    leaf = rng.gamma(1.0, size=(B, N, q))
    rec = []
    u, posts = single_user_sweep(leaf, argmax_decider(rec), collect=True)
    for b in range(B):
        enum = PairEnumeration(leaf[b][:, :, None])
        known1 = np.full(N, -1)
        known2 = np.zeros(N, dtype=int)
        for t in range(N):
            want = enum.posterior(0, t, known1, known2)
            tv = 0.5 * np.abs(want - posts[t][b]).sum()
            assert tv <= 1e-10
            known1[t] = u[b, t]


def test_single_user_q3_matches_bruteforce():
    rng = np.random.default_rng(8)
    B, N, q = 2, 4, 3
    leaf = rng.gamma(1.0, size=(B, N, q))
    rec = []
    u, posts = single_user_sweep(leaf, argmax_decider(rec), collect=True)
    for b in range(B):
        enum = PairEnumeration(leaf[b][:, :, None])
        known1 = np.full(N, -1)
        known2 = np.zeros(N, dtype=int)
        for t in range(N):
            want = enum.posterior(0, t, known1, known2)
            assert 0.5 * np.abs(want - posts[t][b]).sum() <= 1e-10
            known1[t] = u[b, t]


def test_random_decisions_not_just_argmax():
    # decisions sampled from the posterior must also reproduce brute force
    rng = np.random.default_rng(9)
    B, N = 2, 4
    leaf = random_leaf(rng, B, N, 2, 2)
    i_m = 3

    def sampler(t, lam):
        u = rng.random(lam.shape[0])
        return (lam.cumsum(axis=1) < u[:, None]).sum(axis=1).clip(0, lam.shape[1] - 1)

    u1, u2, posts = mac_chain_sweep(leaf, i_m, sampler, sampler, collect=True)
    path = canonical_path(N, i_m)
    for b in range(B):
        decisions = {}
        for user, seq in ((0, u1[b]), (1, u2[b])):
            for idx in range(N):
                decisions[(user, idx)] = int(seq[idx])
        ref = sc_chain_posteriors(leaf[b], path.order(), decisions)
        for want, got in zip(ref, posts):
            assert 0.5 * np.abs(want - got[b]).sum() <= 1e-10


def test_noiseless_channel_posteriors_are_point_masses():
    # leaf measures that pin the pair exactly: every posterior is 0/1
    rng = np.random.default_rng(10)
    B, N = 2, 4
    x1 = rng.integers(0, 2, size=(B, N))
    x2 = rng.integers(0, 2, size=(B, N))
    leaf = np.zeros((B, N, 2, 2))
    for b in range(B):
        for t in range(N):
            leaf[b, t, x1[b, t], x2[b, t]] = 1.0
    u1, u2, posts = mac_chain_sweep(
        leaf,
        2,
        lambda t, lam: np.argmax(lam, axis=1),
        lambda t, lam: np.argmax(lam, axis=1),
        collect=True,
    )
    from hkpolar.polar import polar_transform

    np.testing.assert_array_equal(polar_transform(u1, 2), x1)
    np.testing.assert_array_equal(polar_transform(u2, 2), x2)
    for lam in posts:
        assert np.all(np.max(lam, axis=1) > 1 - 1e-12)


def test_uniform_prior_no_observation_gives_uniform_posteriors():
    B, N = 1, 4
    leaf = np.full((B, N, 2, 2), 0.25)
    _, _, posts = mac_chain_sweep(
        leaf,
        2,
        lambda t, lam: np.zeros(B, dtype=int),
        lambda t, lam: np.zeros(B, dtype=int),
        collect=True,
    )
    for lam in posts:
        np.testing.assert_allclose(lam, 0.5, atol=1e-12)
