"""Frozen code specifications: partitions, chain paths, and serialization.

``build_codespec`` turns a classified rate point into everything the encoders
and decoders need: one canonical chain per receiver, per-stream index
partitions (message, chain-in, chain-out, frozen, near-deterministic, side
channel), and the shared seeds.  Index selection at finite N uses reliability
ranking with set sizes round(N * rate / log2 q); the near-deterministic
boundary comes from ranked source entropies, and indices whose estimated
decode entropy exceeds ``theta`` bits are shipped out of band.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    COMMON1,
    COMMON2,
    EFF1,
    EFF2,
    InterferenceChannel,
    JointInputDistribution,
    JointModel,
    dump_channel,
    dump_distribution,
    synthesize,
)
from .construct import DEGRADE, Dmc, mac_user2_profile_estimate, single_profile_estimate
from .regions import Decomposition

THETA_DEFAULT = 0.01


def _ints(x):
    return tuple(int(v) for v in x)


@dataclass
class StreamPartition:
    """Index sets for one symbol stream of length N over alphabet size q."""

    q: int
    info: tuple = ()
    chain_src: tuple = ()  # reliable only on the forward receiver's side
    chain_dst: tuple = ()  # filled from the previous block's chain_src
    frozen: tuple = ()
    determ: tuple = ()
    side_rx1: tuple = ()  # subset of determ shipped out of band to receiver 1
    side_rx2: tuple = ()

    def __post_init__(self):
        for name in ("info", "chain_src", "chain_dst", "frozen", "determ", "side_rx1", "side_rx2"):
            setattr(self, name, _ints(getattr(self, name)))

    def validate(self, N):
        groups = [self.info, self.chain_src, self.chain_dst, self.frozen, self.determ]
        flat = [i for g in groups for i in g]
        if len(flat) != len(set(flat)):
            raise ValueError("stream sets overlap")
        if sorted(flat) != list(range(N)):
            raise ValueError("stream sets do not cover the block")
        if len(self.chain_src) != len(self.chain_dst):
            raise ValueError("chain set sizes differ")
        det = set(self.determ)
        if not (set(self.side_rx1) <= det and set(self.side_rx2) <= det):
            raise ValueError("side-channel sets must be near-deterministic indices")

    def message_size(self, block, K):
        """Message symbols carried in one block (the last block skips the
        chain-out positions, which hold a pre-shared sequence there)."""
        if block == K - 1:
            return len(self.info)
        return len(self.info) + len(self.chain_src)


@dataclass
class CodeSpec:
    """Frozen outcome of construction for one classified rate point."""

    N: int
    K: int
    mu: int | None
    mode: str
    theta: float
    point_type: str
    anchor: int
    face: str
    rates: dict
    target_common: tuple
    target_eff: tuple | None
    path_rx1: tuple  # (expansion kind, prefix length i)
    path_rx2: tuple
    streams: dict  # name -> StreamPartition for c1, c2, p1, p2
    frozen_seed: int
    determ_seed: int
    channel_digest: str
    dist_digest: str
    achieved: dict = field(default_factory=dict)

    def validate(self):
        for name, sp in self.streams.items():
            sp.validate(self.N)

    def common_rate_symbols(self, sender: int) -> float:
        """(K |I| + (K-1) |I1|) / (K N) for the sender's common stream."""
        sp = self.streams[f"c{sender}"]
        return (self.K * len(sp.info) + (self.K - 1) * len(sp.chain_src)) / (self.K * self.N)

    def private_rate_symbols(self, sender: int) -> float:
        return len(self.streams[f"p{sender}"].info) / self.N

    def overhead_symbols(self) -> dict:
        """Frozen/pre-shared and side-channel symbol counts per chain."""
        frozen = 0
        side = 0
        for name, sp in self.streams.items():
            frozen += len(sp.frozen)  # reused across blocks
            frozen += len(sp.chain_src) + len(sp.chain_dst)  # block-edge values
            side += self.K * (len(sp.side_rx1) + len(sp.side_rx2))
        return {"frozen_rate": frozen / (self.K * self.N), "d_rate": side / (self.K * self.N)}


def digest_channel(ic) -> str:
    return hashlib.sha256(dump_channel(ic).encode()).hexdigest()[:16]


def digest_distribution(dist) -> str:
    return hashlib.sha256(dump_distribution(dist).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Profile assembly
# ---------------------------------------------------------------------------

def _joint_entropy(joint2d) -> float:
    return Dmc(np.asarray(joint2d).T).cond_entropy()


class SystemTables:
    """Per-symbol joint tables every construction and decoder leaf uses."""

    def __init__(self, ic: InterferenceChannel, dist: JointInputDistribution):
        self.ic = ic
        self.dist = dist
        self.pw1 = dist.w_marginal(1)
        self.pw2 = dist.w_marginal(2)
        self.x1_given_w1 = dist.x_given_w(1)
        self.x2_given_w2 = dist.x_given_w(2)
        self.common1 = synthesize(ic, dist, COMMON1).table  # (w1, w2, y1)
        self.common2 = synthesize(ic, dist, COMMON2).table
        self.eff1 = synthesize(ic, dist, EFF1).table  # (x1, w2, y1)
        self.eff2 = synthesize(ic, dist, EFF2).table  # (w1, x2, y2)
        self.qw1, self.qw2 = self.pw1.size, self.pw2.size
        self.qx1 = dist.x1.size
        self.qx2 = dist.x2.size

    # --- common-layer MACs -------------------------------------------------
    def common_mac_joint(self, rx: int) -> np.ndarray:
        tab = self.common1 if rx == 1 else self.common2
        return self.pw1[:, None, None] * self.pw2[None, :, None] * tab

    # --- effective MACs (pair = (own fine layer, other's coarse layer)) ----
    def effective_mac_joint(self, rx: int) -> np.ndarray:
        if rx == 1:
            # pair (x1, w2), output (y1, w1)
            j = np.einsum("wa,v,awy->avyw", self.dist.pw1x1, self.pw2, self.eff1)
            return j.reshape(self.qx1, self.qw2, -1)
        j = np.einsum("wb,v,vby->bvyw", self.dist.pw2x2, self.pw1, self.eff2)
        return j.reshape(self.qx2, self.qw1, -1)

    # --- single-user pieces -------------------------------------------------
    def common_single_pre(self, sender: int, rx: int) -> np.ndarray:
        """Joint (w_sender, y_rx) with the other coarse layer averaged out."""
        jm = self.common_mac_joint(rx)
        return jm.sum(axis=2 - sender)  # drop the other sender's axis

    def common_single_post(self, sender: int, rx: int) -> np.ndarray:
        """Joint (w_sender, (y_rx, w_other))."""
        jm = self.common_mac_joint(rx)
        if sender == 1:
            return jm.transpose(0, 2, 1).reshape(self.qw1, -1)
        return jm.transpose(1, 2, 0).reshape(self.qw2, -1)

    def private_full_joint(self, sender: int) -> np.ndarray:
        """Joint (x_k, (y_k, w1, w2)): both coarse layers known at decode."""
        if sender == 1:
            j = np.einsum("wa,v,awy->aywv", self.dist.pw1x1, self.pw2, self.eff1)
            return j.reshape(self.qx1, -1)
        j = np.einsum("wb,v,vby->byvw", self.dist.pw2x2, self.pw1, self.eff2)
        return j.reshape(self.qx2, -1)

    def private_own_joint(self, sender: int) -> np.ndarray:
        """Joint (x_k, (y_k, w_k)): only the own coarse layer known."""
        if sender == 1:
            avg = np.einsum("awy,w->ay", self.eff1, self.pw2)
            j = np.einsum("wa,ay->ayw", self.dist.pw1x1, avg)
            return j.reshape(self.qx1, -1)
        avg = np.einsum("vby,v->by", self.eff2, self.pw1)
        j = np.einsum("wb,by->byw", self.dist.pw2x2, avg)
        return j.reshape(self.qx2, -1)

    def source_joint_common(self, sender: int) -> np.ndarray:
        p = self.pw1 if sender == 1 else self.pw2
        return p[:, None].copy()

    def source_joint_private(self, sender: int) -> np.ndarray:
        """Joint (x_k, w_k): the coarse sequence is encoder side information."""
        pwx = self.dist.pw1x1 if sender == 1 else self.dist.pw2x2
        return pwx.T.copy()


def choose_chain_prefix(pre, post, h1_bits, h2_bits, htot_bits, N, target_bits):
    """Prefix length whose estimated rate pair comes closest to the target.

    pre/post: first-sender per-index entropy estimates without/with the second
    sender known.  The second sender's sum follows from conservation.
    """
    pre = np.asarray(pre)
    post = np.asarray(post)
    cum_pre = np.concatenate([[0.0], np.cumsum(pre)])
    cum_post = np.concatenate([[0.0], np.cumsum(post)])
    total_post = cum_post[-1]
    best_i, best_err = 0, np.inf
    best_pair = (0.0, 0.0)
    t1, t2 = target_bits
    for i in range(N + 1):
        s1 = cum_pre[i] + (total_post - cum_post[i])
        r1 = h1_bits - s1 / N
        r2 = h2_bits - (N * htot_bits - s1) / N
        err = max(abs(r1 - t1), abs(r2 - t2))
        if err < best_err - 1e-15:
            best_err, best_i = err, i
            best_pair = (r1, r2)
    return best_i, best_pair, best_err


def _size(N, rate_bits, q):
    if rate_bits <= 0:
        return 0
    return int(min(N, max(0, round(N * rate_bits / np.log2(q)))))


def _top_reliable(order_pool, entropies, count):
    """First `count` members of order_pool sorted by entropy (stable)."""
    pool = np.asarray(sorted(order_pool), dtype=int)
    if count <= 0 or pool.size == 0:
        return []
    order = pool[np.argsort(entropies[pool], kind="stable")]
    return sorted(order[: min(count, pool.size)].tolist())


def _high_set(source_entropies, q, N, h_bits):
    count = _size(N, h_bits, q)
    order = np.argsort(-source_entropies, kind="stable")
    return sorted(order[:count].tolist())


def _partition_common(N, q, c1, c2, high, ent_rx1, ent_rx2, theta):
    """Chain partition of a common stream from its two receiver-side sets."""
    c1s, c2s = set(c1), set(c2)
    info = sorted(c1s & c2s)
    chain_src = sorted(c1s - c2s)
    pool = sorted(c2s - c1s)
    chain_dst = pool[: len(chain_src)]
    used = set(info) | set(chain_src) | set(chain_dst)
    frozen = sorted(set(high) - used)
    determ = sorted(set(range(N)) - set(high))
    side1 = [j for j in determ if ent_rx1 is not None and ent_rx1[j] > theta]
    side2 = [j for j in determ if ent_rx2 is not None and ent_rx2[j] > theta]
    return StreamPartition(q, info, chain_src, chain_dst, frozen, determ, side1, side2)


def _partition_private(N, q, info, high, ent_own, theta, rx: int):
    used = set(info)
    frozen = sorted(set(high) - used)
    determ = sorted(set(range(N)) - set(high))
    side = [j for j in determ if ent_own[j] > theta]
    kw = dict(side_rx1=side if rx == 1 else (), side_rx2=side if rx == 2 else ())
    return StreamPartition(q, sorted(info), (), (), frozen, determ, **kw)


def build_codespec(
    ic: InterferenceChannel,
    dist: JointInputDistribution,
    dec: Decomposition,
    N: int,
    K: int,
    mu=64,
    theta=THETA_DEFAULT,
    frozen_seed=1,
    determ_seed=2,
) -> CodeSpec:
    """Assemble the full code specification for a classified rate point."""
    if N < 2 or (N & (N - 1)):
        raise ValueError("N must be a power of two >= 2")
    if K < 2:
        raise ValueError("K must be at least 2")
    tabs = SystemTables(ic, dist)
    model = JointModel(ic, dist)
    mode = DEGRADE
    rates = dict(r1p=dec.r1p, r1c=dec.r1c, r2p=dec.r2p, r2c=dec.r2c)

    h_w1 = model.entropy(("W1",))
    h_w2 = model.entropy(("W2",))
    h_x1_w1 = model.entropy(("X1",), ("W1",))
    h_x2_w2 = model.entropy(("X2",), ("W2",))

    # source profiles (exact: outputs stay tiny)
    src_c1 = single_profile_estimate(tabs.source_joint_common(1), N, None, mode)
    src_c2 = single_profile_estimate(tabs.source_joint_common(2), N, None, mode)
    src_p1 = single_profile_estimate(tabs.source_joint_private(1), N, mu, mode)
    src_p2 = single_profile_estimate(tabs.source_joint_private(2), N, mu, mode)

    high_c1 = _high_set(src_c1, tabs.qw1, N, h_w1)
    high_c2 = _high_set(src_c2, tabs.qw2, N, h_w2)
    high_p1 = _high_set(src_p1, tabs.qx1, N, h_x1_w1)
    high_p2 = _high_set(src_p2, tabs.qx2, N, h_x2_w2)

    if dec.point_type == "A":
        spec = _build_type_a(ic, dist, dec, N, K, mu, theta, mode, tabs, model, rates,
                             (high_c1, high_c2, high_p1, high_p2), (h_w1, h_w2))
    elif dec.point_type in ("B1", "B2"):
        spec = _build_type_b(ic, dist, dec, N, K, mu, theta, mode, tabs, model, rates,
                             (high_c1, high_c2, high_p1, high_p2), (h_w1, h_w2))
    else:
        raise ValueError(f"unknown point type {dec.point_type}")

    spec.frozen_seed = int(frozen_seed)
    spec.determ_seed = int(determ_seed)
    spec.channel_digest = digest_channel(ic)
    spec.dist_digest = digest_distribution(dist)
    spec.validate()
    return spec


def _common_mac_profiles(tabs, model, rx, N, mu, mode, target_bits):
    """Choose the chain prefix for a common-layer MAC and return per-index
    entropy estimates for both senders."""
    pre = single_profile_estimate(tabs.common_single_pre(1, rx), N, mu, mode)
    post = single_profile_estimate(tabs.common_single_post(1, rx), N, mu, mode)
    h1 = model.entropy(("W1",))
    h2 = model.entropy(("W2",))
    yk = "Y1" if rx == 1 else "Y2"
    htot = model.entropy(("W1", "W2"), (yk,))
    i, pair, err = choose_chain_prefix(pre, post, h1, h2, htot, N, target_bits)
    ent1 = np.concatenate([pre[:i], post[i:]])
    joint = tabs.common_mac_joint(rx)
    ent2 = mac_user2_profile_estimate(joint, N, i, mu, mode)
    return i, pair, ent1, ent2


def _build_type_a(ic, dist, dec, N, K, mu, theta, mode, tabs, model, rates, highs, hws):
    high_c1, high_c2, high_p1, high_p2 = highs
    anchor = dec.anchor
    other = 2 if anchor == 1 else 1
    targets = {anchor: dec.common_pair(), other: dec.target_common}
    i_rx, ent1_rx, ent2_rx, pair_rx = {}, {}, {}, {}
    for rx in (1, 2):
        i, pair, e1, e2 = _common_mac_profiles(tabs, model, rx, N, mu, mode, targets[rx])
        i_rx[rx], pair_rx[rx], ent1_rx[rx], ent2_rx[rx] = i, pair, e1, e2

    n1 = {rx: _size(N, targets[rx][0], tabs.qw1) for rx in (1, 2)}
    n2 = {rx: _size(N, targets[rx][1], tabs.qw2) for rx in (1, 2)}
    # the enlarged target may never select fewer indices than the base target
    n1[other] = max(n1[other], n1[anchor])
    n2[other] = max(n2[other], n2[anchor])

    c1_sets = {rx: _top_reliable(high_c1, ent1_rx[rx], n1[rx]) for rx in (1, 2)}
    c2_sets = {rx: _top_reliable(high_c2, ent2_rx[rx], n2[rx]) for rx in (1, 2)}
    sp_c1 = _partition_common(N, tabs.qw1, c1_sets[1], c1_sets[2], high_c1,
                              ent1_rx[1], ent1_rx[2], theta)
    sp_c2 = _partition_common(N, tabs.qw2, c2_sets[1], c2_sets[2], high_c2,
                              ent2_rx[1], ent2_rx[2], theta)

    ent_p1 = single_profile_estimate(tabs.private_full_joint(1), N, mu, mode)
    ent_p2 = single_profile_estimate(tabs.private_full_joint(2), N, mu, mode)
    i1p = _top_reliable(high_p1, ent_p1, _size(N, rates["r1p"], tabs.qx1))
    i2p = _top_reliable(high_p2, ent_p2, _size(N, rates["r2p"], tabs.qx2))
    sp_p1 = _partition_private(N, tabs.qx1, i1p, high_p1, ent_p1, theta, 1)
    sp_p2 = _partition_private(N, tabs.qx2, i2p, high_p2, ent_p2, theta, 2)

    return CodeSpec(
        N=N, K=K, mu=None if mu is None else int(mu), mode=mode, theta=theta,
        point_type="A", anchor=anchor, face=dec.face, rates=rates,
        target_common=tuple(dec.target_common),
        target_eff=None,
        path_rx1=("common", i_rx[1]),
        path_rx2=("common", i_rx[2]),
        streams={"c1": sp_c1, "c2": sp_c2, "p1": sp_p1, "p2": sp_p2},
        frozen_seed=0, determ_seed=0, channel_digest="", dist_digest="",
        achieved={
            "path_rate_rx1": pair_rx[1],
            "path_rate_rx2": pair_rx[2],
        },
    )


def _build_type_b(ic, dist, dec, N, K, mu, theta, mode, tabs, model, rates, highs, hws):
    """Type B: the Type-II receiver decodes its own coarse layer first, then a
    joint pass over (own fine layer, other's coarse layer)."""
    high_c1, high_c2, high_p1, high_p2 = highs
    flip = dec.point_type == "B2"
    # work in the canonical orientation (receiver 1 is the Type-II side),
    # mirroring all tables when the point is B2
    if not flip:
        qw_own, qw_oth = tabs.qw1, tabs.qw2
        qx_own = tabs.qx1
        high_cown, high_coth, high_pown, high_poth = high_c1, high_c2, high_p1, high_p2
        own_c, oth_c, own_p, oth_p = "c1", "c2", "p1", "p2"
        r_own_c, r_oth_c = rates["r1c"], rates["r2c"]
        r_own_p, r_oth_p = rates["r1p"], rates["r2p"]
        rx_own, rx_oth = 1, 2
        sender_own = 1
    else:
        qw_own, qw_oth = tabs.qw2, tabs.qw1
        qx_own = tabs.qx2
        high_cown, high_coth, high_pown, high_poth = high_c2, high_c1, high_p2, high_p1
        own_c, oth_c, own_p, oth_p = "c2", "c1", "p2", "p1"
        r_own_c, r_oth_c = rates["r2c"], rates["r1c"]
        r_own_p, r_oth_p = rates["r2p"], rates["r1p"]
        rx_own, rx_oth = 2, 1
        sender_own = 2

    # stage 1: own coarse layer from the averaged channel
    ent_own_stage1 = single_profile_estimate(
        tabs.common_single_pre(sender_own, rx_own), N, mu, mode
    )
    # the other receiver's joint common pass (targets in (sender1, sender2) order)
    i_oth, pair_oth, e1_oth, e2_oth = _common_mac_profiles(
        tabs, model, rx_oth, N, mu, mode, dec.target_common
    )
    ent_own_at_oth = e1_oth if sender_own == 1 else e2_oth
    ent_oth_at_oth = e2_oth if sender_own == 1 else e1_oth

    # Type-II receiver's joint pass over (own fine, other's coarse)
    eff_joint = tabs.effective_mac_joint(rx_own)
    pre_eff = single_profile_estimate(tabs.private_own_joint(sender_own), N, mu, mode)
    post_eff = single_profile_estimate(tabs.private_full_joint(sender_own), N, mu, mode)
    h_fine = model.entropy((f"X{sender_own}",), (f"W{sender_own}",))
    h_coarse_oth = model.entropy((f"W{2 if sender_own == 1 else 1}",))
    y_own = f"Y{rx_own}"
    htot = model.entropy(
        (f"X{sender_own}", f"W{2 if sender_own == 1 else 1}"),
        (y_own, f"W{sender_own}"),
    )
    # the effective pair is ordered (own fine layer, other's coarse layer)
    eff_target = dec.target_eff if not flip else (dec.target_eff[1], dec.target_eff[0])
    i_eff, pair_eff, err = choose_chain_prefix(
        pre_eff, post_eff, h_fine, h_coarse_oth, htot, N, eff_target
    )
    ent_pown = np.concatenate([pre_eff[:i_eff], post_eff[i_eff:]])
    ent_coth_joint = mac_user2_profile_estimate(eff_joint, N, i_eff, mu, mode)

    # common stream of the Type-II sender: stage-1 set vs other receiver's set
    n_own_c = _size(N, r_own_c, qw_own)
    cown_1 = _top_reliable(high_cown, ent_own_stage1, n_own_c)
    cown_2 = _top_reliable(high_cown, ent_own_at_oth, n_own_c)
    sp_cown = _partition_common(
        N, qw_own,
        cown_1 if rx_own == 1 else cown_2,
        cown_2 if rx_own == 1 else cown_1,
        high_cown,
        ent_own_stage1 if rx_own == 1 else ent_own_at_oth,
        ent_own_at_oth if rx_own == 1 else ent_own_stage1,
        theta,
    )
    # common stream of the Type-I sender: joint-pass set vs own receiver's set
    n_oth_c = _size(N, r_oth_c, qw_oth)
    coth_1 = _top_reliable(high_coth, ent_coth_joint, n_oth_c)
    coth_2 = _top_reliable(high_coth, ent_oth_at_oth, n_oth_c)
    sp_coth = _partition_common(
        N, qw_oth,
        coth_1 if rx_own == 1 else coth_2,
        coth_2 if rx_own == 1 else coth_1,
        high_coth,
        ent_coth_joint if rx_own == 1 else ent_oth_at_oth,
        ent_oth_at_oth if rx_own == 1 else ent_coth_joint,
        theta,
    )

    # private streams
    i_pown = _top_reliable(high_pown, ent_pown, _size(N, r_own_p, qx_own))
    sp_pown = _partition_private(N, qx_own, i_pown, high_pown, ent_pown, theta, rx_own)
    ent_poth = single_profile_estimate(
        tabs.private_full_joint(2 if sender_own == 1 else 1), N, mu, mode
    )
    qx_oth = tabs.qx2 if sender_own == 1 else tabs.qx1
    i_poth = _top_reliable(high_poth, ent_poth, _size(N, r_oth_p, qx_oth))
    sp_poth = _partition_private(N, qx_oth, i_poth, high_poth, ent_poth, theta, rx_oth)

    streams = {own_c: sp_cown, oth_c: sp_coth, own_p: sp_pown, oth_p: sp_poth}
    path_own = ("effective", i_eff)
    path_oth = ("common", i_oth)
    return CodeSpec(
        N=N, K=K, mu=None if mu is None else int(mu), mode=mode, theta=theta,
        point_type=dec.point_type, anchor=dec.anchor, face=dec.face, rates=rates,
        target_common=tuple(dec.target_common),
        target_eff=tuple(dec.target_eff) if dec.target_eff else None,
        path_rx1=path_own if rx_own == 1 else path_oth,
        path_rx2=path_oth if rx_own == 1 else path_own,
        streams=streams,
        frozen_seed=0, determ_seed=0, channel_digest="", dist_digest="",
        achieved={
            "path_rate_eff": pair_eff,
            "path_rate_other": pair_oth,
        },
    )


# ---------------------------------------------------------------------------
# Serialization ("codespec v1": key-value plus index lists, byte-exact)
# ---------------------------------------------------------------------------

def codespec_to_text(spec: CodeSpec) -> str:
    lines = ["codespec v1"]
    add = lines.append
    add(f"N {spec.N}")
    add(f"K {spec.K}")
    add(f"mu {'inf' if spec.mu is None else spec.mu}")
    add(f"mode {spec.mode}")
    add(f"theta {spec.theta!r}")
    add(f"point_type {spec.point_type}")
    add(f"anchor {spec.anchor}")
    add(f"face {spec.face}")
    for k in ("r1p", "r1c", "r2p", "r2c"):
        add(f"rate {k} {spec.rates[k]!r}")
    add(f"target_common {spec.target_common[0]!r} {spec.target_common[1]!r}")
    if spec.target_eff is None:
        add("target_eff none")
    else:
        add(f"target_eff {spec.target_eff[0]!r} {spec.target_eff[1]!r}")
    add(f"path rx1 {spec.path_rx1[0]} {spec.path_rx1[1]}")
    add(f"path rx2 {spec.path_rx2[0]} {spec.path_rx2[1]}")
    add(f"seed frozen {spec.frozen_seed}")
    add(f"seed determ {spec.determ_seed}")
    add(f"digest channel {spec.channel_digest}")
    add(f"digest dist {spec.dist_digest}")
    for name in ("c1", "c2", "p1", "p2"):
        sp = spec.streams[name]
        add(f"stream {name} q {sp.q}")
        for part in ("info", "chain_src", "chain_dst", "frozen", "determ", "side_rx1", "side_rx2"):
            vals = " ".join(str(v) for v in getattr(sp, part))
            add(f"stream {name} {part} {vals}".rstrip())
    return "\n".join(lines) + "\n"


def codespec_from_text(text: str) -> CodeSpec:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "codespec v1":
        raise ValueError("not a v1 codespec document")
    kv = {}
    streams = {n: {"q": 2} for n in ("c1", "c2", "p1", "p2")}
    rates = {}
    paths = {}
    seeds = {}
    digests = {}
    for line in lines[1:]:
        toks = line.split()
        if toks[0] == "stream":
            name, part = toks[1], toks[2]
            if part == "q":
                streams[name]["q"] = int(toks[3])
            else:
                streams[name][part] = tuple(int(v) for v in toks[3:])
        elif toks[0] == "rate":
            rates[toks[1]] = float(toks[2])
        elif toks[0] == "path":
            paths[toks[1]] = (toks[2], int(toks[3]))
        elif toks[0] == "seed":
            seeds[toks[1]] = int(toks[2])
        elif toks[0] == "digest":
            digests[toks[1]] = toks[2] if len(toks) > 2 else ""
        elif toks[0] == "target_common":
            kv["target_common"] = (float(toks[1]), float(toks[2]))
        elif toks[0] == "target_eff":
            kv["target_eff"] = None if toks[1] == "none" else (float(toks[1]), float(toks[2]))
        else:
            kv[toks[0]] = " ".join(toks[1:])
    sps = {}
    for name, d in streams.items():
        q = d.pop("q")
        sps[name] = StreamPartition(q, **{k: d.get(k, ()) for k in (
            "info", "chain_src", "chain_dst", "frozen", "determ", "side_rx1", "side_rx2")})
    spec = CodeSpec(
        N=int(kv["N"]), K=int(kv["K"]),
        mu=None if kv["mu"] == "inf" else int(kv["mu"]),
        mode=kv["mode"], theta=float(kv["theta"]),
        point_type=kv["point_type"], anchor=int(kv["anchor"]), face=kv.get("face", ""),
        rates=rates, target_common=kv["target_common"], target_eff=kv.get("target_eff"),
        path_rx1=paths["rx1"], path_rx2=paths["rx2"], streams=sps,
        frozen_seed=seeds["frozen"], determ_seed=seeds["determ"],
        channel_digest=digests.get("channel", ""), dist_digest=digests.get("dist", ""),
    )
    spec.validate()
    return spec
