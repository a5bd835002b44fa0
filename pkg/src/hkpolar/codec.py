"""Chained encoders and partially-joint successive-cancellation decoders.

Encoding builds K linked blocks per sender: the common layer repeats the
chain-out positions of one block at the chain-in positions of the next, the
first block's chain-in and the last block's chain-out hold pre-shared
sequences, frozen positions reuse one pre-shared sequence across blocks, and
near-deterministic positions are sampled from their exact conditionals (the
hard-to-infer subset is shipped out of band).

Receiver 1 walks blocks first-to-last, receiver 2 last-to-first.  A joint-
first receiver runs one pair sweep over the two coarse layers and then a
single sweep for its private stream conditioned on both decoded coarse
sequences.  A self-first receiver decodes its own coarse layer alone, then a
pair sweep over (own fine layer, other's coarse layer).  All posteriors are
exact (see :mod:`hkpolar.engine`); decisions are argmax with ties to the
smallest symbol, except positions whose values the decoder already holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codespec import CodeSpec, StreamPartition, SystemTables
from .engine import ChainEngine, MODE_NONE, mac_chain_sweep
from .polar import polar_transform

STREAM_IDS = {"c1": 0, "c2": 1, "p1": 2, "p2": 3}


@dataclass
class SharedRandomness:
    """Pre-shared sequences both ends derive from the frozen seed."""

    frozen: dict  # stream -> (|frozen|,) symbols, reused across blocks
    edge_src: dict  # stream -> values of chain-out in the last block
    edge_dst: dict  # stream -> values of chain-in in the first block

    @classmethod
    def derive(cls, spec: CodeSpec) -> "SharedRandomness":
        frozen, src, dst = {}, {}, {}
        for name, sp in spec.streams.items():
            ss = np.random.SeedSequence(
                entropy=spec.frozen_seed, spawn_key=(STREAM_IDS[name],)
            )
            rng = np.random.default_rng(ss)
            frozen[name] = rng.integers(0, sp.q, size=len(sp.frozen))
            src[name] = rng.integers(0, sp.q, size=len(sp.chain_src))
            dst[name] = rng.integers(0, sp.q, size=len(sp.chain_dst))
        return cls(frozen, src, dst)


@dataclass
class BlockChain:
    """Everything one encoding pass produces, batched over trials."""

    u: dict  # stream -> (B, K, N) message-domain symbols
    x: dict  # sender ("x1"/"x2") -> (B, K, N) channel inputs
    w: dict  # sender ("w1"/"w2") -> (B, K, N) coarse codewords
    payloads: dict  # (stream, rx) -> (B, K, |side|) out-of-band symbols
    messages: dict  # stream -> (B, K, max-message-size) as supplied

    def check_chaining(self, spec: CodeSpec, shared: SharedRandomness):
        for name in ("c1", "c2"):
            sp = spec.streams[name]
            u = self.u[name]
            src = list(sp.chain_src)
            dst = list(sp.chain_dst)
            for i in range(1, spec.K):
                if not np.array_equal(u[:, i, dst], u[:, i - 1, src]):
                    raise AssertionError(f"chaining broken for {name} at block {i}")
            if len(dst) and not np.all(u[:, 0, dst] == shared.edge_dst[name][None, :]):
                raise AssertionError(f"first-block chain-in not pre-shared for {name}")
            if len(src) and not np.all(u[:, -1, src] == shared.edge_src[name][None, :]):
                raise AssertionError(f"last-block chain-out not pre-shared for {name}")


def _sampler(rng):
    def sample(lam):
        u = rng.random(lam.shape[0])
        c = np.cumsum(lam, axis=1)
        c /= c[:, -1:]
        return (c < u[:, None]).sum(axis=1).clip(0, lam.shape[1] - 1)

    return sample


def _preset_decider(preset, mask_sample, sampler):
    """Decide callback: sampled where mask_sample, else copied from preset."""

    def decide(t, lam):
        if mask_sample[t]:
            return sampler(lam)
        return preset[:, t]

    return decide


def _source_encode(sp: StreamPartition, prior_leaf, preset, rng, B, N):
    """Fill one stream's u-vector: preset positions copied, the rest sampled
    from the exact source conditionals."""
    mask_sample = np.zeros(N, dtype=bool)
    mask_sample[list(sp.determ)] = True
    leaf = np.broadcast_to(prior_leaf, (B, N, prior_leaf.shape[-1])).copy()
    eng_decide = _preset_decider(preset, mask_sample, _sampler(rng))
    eng = ChainEngine(leaf[:, :, :, None])
    return eng.sweep(MODE_NONE, eng_decide)


def _conditional_encode(sp: StreamPartition, leaf, preset, rng, B, N):
    """Same, with per-position leaf measures (superposed fine layer)."""
    mask_sample = np.zeros(N, dtype=bool)
    mask_sample[list(sp.determ)] = True
    eng = ChainEngine(leaf[:, :, :, None])
    return eng.sweep(MODE_NONE, _preset_decider(preset, mask_sample, _sampler(rng)))


def encode_chain(spec: CodeSpec, tabs: SystemTables, messages, shared, determ_rng) -> BlockChain:
    """Encode K blocks for both senders.

    messages: stream -> (B, K, m) symbol arrays; common streams use all m
    columns in blocks 0..K-2 (info then chain-out positions) and only the
    info part in the last block.
    """
    B = messages["c1"].shape[0]
    N, K = spec.N, spec.K
    u, xs, ws = {}, {}, {}
    payloads = {}

    for sender in (1, 2):
        name = f"c{sender}"
        sp = spec.streams[name]
        q = sp.q
        prior = tabs.pw1 if sender == 1 else tabs.pw2
        info = list(sp.info)
        src = list(sp.chain_src)
        dst = list(sp.chain_dst)
        useq = np.zeros((B, K, N), dtype=np.int64)
        for i in range(K):
            preset = np.zeros((B, N), dtype=np.int64)
            msg = messages[name][:, i]
            preset[:, info] = msg[:, : len(info)]
            if i < K - 1:
                preset[:, src] = msg[:, len(info) : len(info) + len(src)]
            else:
                preset[:, src] = shared.edge_src[name][None, :]
            if i == 0:
                preset[:, dst] = shared.edge_dst[name][None, :]
            else:
                preset[:, dst] = useq[:, i - 1, src]
            preset[:, list(sp.frozen)] = shared.frozen[name][None, :]
            useq[:, i] = _source_encode(sp, prior[None, None, :], preset, determ_rng, B, N)
        u[name] = useq
        ws[f"w{sender}"] = polar_transform(useq.reshape(B * K, N), q).reshape(B, K, N)

    for sender in (1, 2):
        name = f"p{sender}"
        sp = spec.streams[name]
        q = sp.q
        cond = tabs.x1_given_w1 if sender == 1 else tabs.x2_given_w2
        wseq = ws[f"w{sender}"]
        info = list(sp.info)
        useq = np.zeros((B, K, N), dtype=np.int64)
        for i in range(K):
            preset = np.zeros((B, N), dtype=np.int64)
            preset[:, info] = messages[name][:, i, : len(info)]
            preset[:, list(sp.frozen)] = shared.frozen[name][None, :]
            leaf = cond[wseq[:, i]]  # (B, N, qx)
            useq[:, i] = _conditional_encode(sp, leaf, preset, determ_rng, B, N)
        u[name] = useq
        xs[f"x{sender}"] = polar_transform(useq.reshape(B * K, N), q).reshape(B, K, N)

    for name, sp in spec.streams.items():
        for rx, side in ((1, sp.side_rx1), (2, sp.side_rx2)):
            if side:
                payloads[(name, rx)] = u[name][:, :, list(side)].copy()
    return BlockChain(u=u, x=xs, w=ws, payloads=payloads, messages=messages)


# ---------------------------------------------------------------------------
# Decoding
# ---------------------------------------------------------------------------

def _known_template(sp: StreamPartition, rx: int, block, K, shared, name, payloads, chain_vals):
    """(mask, values) of positions the decoder copies rather than estimates.

    chain_vals: values for the chained positions coming from the neighbour
    block in this receiver's decoding order (None outside the chain).
    """
    vals = {}

    def put(idx_list, value_rows):
        value_rows = np.asarray(value_rows)
        for col, j in enumerate(idx_list):
            vals[j] = value_rows[:, col] if value_rows.ndim == 2 else value_rows[col]

    put(list(sp.frozen), shared.frozen[name])
    if rx == 1:
        # chain-in positions come from the previous block (or the pre-shared
        # first-block sequence); chain-out decoded fresh except last block
        if block == 0:
            put(list(sp.chain_dst), shared.edge_dst[name][None, :])
        elif chain_vals is not None:
            put(list(sp.chain_dst), chain_vals)
        if block == K - 1:
            put(list(sp.chain_src), shared.edge_src[name][None, :])
    else:
        if block == K - 1:
            put(list(sp.chain_src), shared.edge_src[name][None, :])
        elif chain_vals is not None:
            put(list(sp.chain_src), chain_vals)
        if block == 0:
            put(list(sp.chain_dst), shared.edge_dst[name][None, :])
    side = sp.side_rx1 if rx == 1 else sp.side_rx2
    if side and (name, rx) in payloads:
        pay = payloads[(name, rx)][:, block]
        for col, j in enumerate(side):
            vals[j] = pay[:, col]
    return vals


def _stream_decider(vals, B):
    def decide(t, lam):
        if t in vals:
            v = vals[t]
            return np.broadcast_to(v, (B,)).astype(np.int64)
        return np.argmax(lam, axis=1)

    return decide


def _common_leaf(tabs, rx, y):
    tab = tabs.common1 if rx == 1 else tabs.common2
    base = tabs.pw1[:, None, None] * tabs.pw2[None, :, None] * tab
    leaf = base[:, :, y]  # (qw1, qw2, B, N)
    return np.moveaxis(leaf, (0, 1), (2, 3))


def _own_coarse_leaf(tabs, rx, y):
    tab = tabs.common1 if rx == 1 else tabs.common2  # (w1, w2, y)
    if rx == 1:
        avg = np.einsum("vwy,w->vy", tab, tabs.pw2)
        p_own = tabs.pw1
    else:
        avg = np.einsum("vwy,v->wy", tab, tabs.pw1)
        p_own = tabs.pw2
    joint = p_own[:, None] * avg
    out = joint[:, y]  # (q_own, B, N)
    return np.moveaxis(out, 0, 2)


def _private_leaf(tabs, sender, y, w_own, w_oth):
    if sender == 1:
        cond = tabs.x1_given_w1[w_own]  # (B, N, qx1)
        chan = tabs.eff1[:, w_oth, y]  # (qx1, B, N)
        return cond * np.moveaxis(chan, 0, 2)
    cond = tabs.x2_given_w2[w_own]
    chan = np.moveaxis(tabs.eff2, (0, 1), (1, 0))[:, w_oth, y]  # (qx2, B, N)
    return cond * np.moveaxis(chan, 0, 2)


def _effective_pair_leaf(tabs, rx, y, w_own):
    """Leaf over (own fine layer, other's coarse layer) given the decoded own
    coarse sequence."""
    if rx == 1:
        cond = tabs.x1_given_w1[w_own]  # (B, N, qx1)
        chan = tabs.eff1[:, :, y]  # (qx1, qw2, B, N)
        chan = np.moveaxis(chan, (0, 1), (2, 3))
        return cond[:, :, :, None] * tabs.pw2[None, None, None, :] * chan
    cond = tabs.x2_given_w2[w_own]  # (B, N, qx2)
    chan = np.moveaxis(tabs.eff2, (0, 1), (1, 0))[:, :, y]  # (qx2, qw1, B, N)
    chan = np.moveaxis(chan, (0, 1), (2, 3))
    return cond[:, :, :, None] * tabs.pw1[None, None, None, :] * chan


@dataclass
class DecodeResult:
    u: dict  # stream -> (B, K, N) estimates (streams this receiver touches)
    messages: dict  # stream -> (B, K, m) recovered message symbols


def decode_receiver(spec: CodeSpec, tabs: SystemTables, rx: int, y_blocks, shared, payloads) -> DecodeResult:
    """Run one receiver over all K blocks of observations (B, K, N)."""
    B, K, N = y_blocks.shape
    own_c = f"c{rx}"
    oth_c = f"c{2 if rx == 1 else 1}"
    own_p = f"p{rx}"
    joint_first = spec.point_type == "A" or (spec.point_type == "B1" and rx == 2) or (
        spec.point_type == "B2" and rx == 1
    )
    order = range(K) if rx == 1 else range(K - 1, -1, -1)
    est = {own_c: np.zeros((B, K, N), dtype=np.int64),
           oth_c: np.zeros((B, K, N), dtype=np.int64),
           own_p: np.zeros((B, K, N), dtype=np.int64)}
    path_kind, i_path = spec.path_rx1 if rx == 1 else spec.path_rx2

    for blk in order:
        y = y_blocks[:, blk]
        chain_vals = {}
        for name in (own_c, oth_c):
            sp = spec.streams[name]
            if rx == 1:
                chain_vals[name] = est[name][:, blk - 1, list(sp.chain_src)] if blk > 0 else None
            else:
                chain_vals[name] = (
                    est[name][:, blk + 1, list(sp.chain_dst)] if blk < K - 1 else None
                )
        if joint_first:
            # both coarse layers jointly, then the private stream
            leaf = _common_leaf(tabs, rx, y)
            vals1 = _known_template(spec.streams["c1"], rx, blk, K, shared, "c1", payloads, chain_vals["c1"])
            vals2 = _known_template(spec.streams["c2"], rx, blk, K, shared, "c2", payloads, chain_vals["c2"])
            u1, u2 = _mac_decode(leaf, i_path, _stream_decider(vals1, B), _stream_decider(vals2, B))
            est["c1"][:, blk] = u1
            est["c2"][:, blk] = u2
            w1 = polar_transform(u1, spec.streams["c1"].q)
            w2 = polar_transform(u2, spec.streams["c2"].q)
            w_own = w1 if rx == 1 else w2
            w_oth = w2 if rx == 1 else w1
            leaf_p = _private_leaf(tabs, rx, y, w_own, w_oth)
            vals_p = _known_template(spec.streams[own_p], rx, blk, K, shared, own_p, payloads, None)
            eng = ChainEngine(leaf_p[:, :, :, None])
            est[own_p][:, blk] = eng.sweep(MODE_NONE, _stream_decider(vals_p, B))
        else:
            # own coarse layer alone, then (own fine, other's coarse) jointly
            leaf1 = _own_coarse_leaf(tabs, rx, y)
            vals_own = _known_template(spec.streams[own_c], rx, blk, K, shared, own_c, payloads, chain_vals[own_c])
            eng = ChainEngine(leaf1[:, :, :, None])
            u_own = eng.sweep(MODE_NONE, _stream_decider(vals_own, B))
            est[own_c][:, blk] = u_own
            w_own = polar_transform(u_own, spec.streams[own_c].q)
            leaf2 = _effective_pair_leaf(tabs, rx, y, w_own)
            vals_p = _known_template(spec.streams[own_p], rx, blk, K, shared, own_p, payloads, None)
            vals_o = _known_template(spec.streams[oth_c], rx, blk, K, shared, oth_c, payloads, chain_vals[oth_c])
            up, uo = _mac_decode(leaf2, i_path, _stream_decider(vals_p, B), _stream_decider(vals_o, B))
            est[own_p][:, blk] = up
            est[oth_c][:, blk] = uo

    msgs = {}
    for name in (own_c, own_p):
        sp = spec.streams[name]
        info = list(sp.info)
        src = list(sp.chain_src)
        m = len(info) + len(src)
        out = np.zeros((B, K, m), dtype=np.int64)
        for blk in range(K):
            out[:, blk, : len(info)] = est[name][:, blk, info]
            if blk < K - 1 and src:
                out[:, blk, len(info):] = est[name][:, blk, src]
        msgs[name] = out
    return DecodeResult(u=est, messages=msgs)


def _mac_decode(leaf, i_path, decide1, decide2):
    """Joint pair sweep along the canonical chain with prefix i_path."""
    return mac_chain_sweep(leaf, i_path, decide1, decide2)


def extract_messages(chain: BlockChain, spec: CodeSpec, stream: str) -> np.ndarray:
    """Transmitted message symbols in the same layout decoders report."""
    sp = spec.streams[stream]
    info = list(sp.info)
    src = list(sp.chain_src)
    B, K, N = chain.u[stream].shape
    out = np.zeros((B, K, len(info) + len(src)), dtype=np.int64)
    for blk in range(K):
        out[:, blk, : len(info)] = chain.u[stream][:, blk, info]
        if blk < K - 1 and src:
            out[:, blk, len(info):] = chain.u[stream][:, blk, src]
    return out


def sc_posterior_single(leaf_row, prefix_values):
    """Exact next-symbol posterior for a single-sender code (one trial).

    leaf_row: (N, q) joint per-symbol measures; prefix_values: the already
    fixed symbols u^{1:j}; returns the posterior over symbol j+1.
    """
    leaf = np.asarray(leaf_row, dtype=np.float64)[None, :, :, None]
    j = len(prefix_values)
    out = {}

    def decide(t, lam):
        if t == j:
            out["lam"] = lam[0]
        if t < j:
            return np.array([prefix_values[t]])
        return np.argmax(lam, axis=1)

    ChainEngine(leaf).sweep(MODE_NONE, decide, t_stop=j + 1)
    return out["lam"]
