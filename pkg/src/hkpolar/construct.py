"""Scalable code construction: channel approximation and index selection.

Per-index reliabilities are estimated by the classic alphabet-bounded
degrading/upgrading recursions.  Stage objects are stored as *joint* measures
P(output, input) rather than conditionals: for non-uniform inputs the
transform coordinates are neither uniform nor independent across a pair, and
carrying the joint keeps every stage exact before merging (for uniform inputs
this reduces to the familiar conditional recursion with prior factors).

The two-sender recursion follows the per-stage combine/marginalise schedule
driven by the bits of the target index and of the known-prefix length: the
second sender's synthesized channel conditions on the first sender's known
prefix, whose image at each stage is kept as explicit channel outputs while
coordinates that can never be known are averaged out as early as possible
(one deferred case at most).  The stage trace (which coordinates are
marginalised or conditioned at each step) is recorded and reproduced in the
tests against the worked 32-length example.

All entropies here are estimates unless mu is None (no merging): degraded
estimates upper-bound and upgraded estimates lower-bound the exact values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import DiscreteChannel, entropy_bits, xlog2x

DEGRADE = "degrade"
UPGRADE = "upgrade"
EXACT = "exact"


# ---------------------------------------------------------------------------
# Joint-measure DMC objects and merges
# ---------------------------------------------------------------------------

class Dmc:
    """Joint measure P(output, input) with an opaque finite output alphabet."""

    __slots__ = ("J",)

    def __init__(self, J):
        self.J = np.asarray(J, dtype=np.float64)

    @property
    def out_size(self):
        return self.J.shape[0]

    @property
    def in_size(self):
        return self.J.shape[1]

    def input_prior(self):
        return self.J.sum(axis=0)

    def cond_entropy(self) -> float:
        """H(input | output) in bits."""
        mass = self.J.sum(axis=1)
        return float(-xlog2x(self.J).sum() + xlog2x(mass).sum())

    def mutual_information(self) -> float:
        p = self.input_prior()
        return entropy_bits(p) - self.cond_entropy()


def _posteriors(J):
    mass = J.sum(axis=1)
    safe = np.where(mass > 0, mass, 1.0)
    return J / safe[:, None], mass


def _sort_key(post):
    """1-D ordering key for posterior vectors (exact LLR order for 2 inputs)."""
    if post.shape[1] == 2:
        return post[:, 0]
    # lexicographic-ish smooth key: project onto a fixed random-ish direction
    k = post.shape[1]
    w = np.linspace(1.0, 2.0, k)
    primary = post @ w
    return primary


def _collapse_duplicates(J, decimals=12):
    """Merge outputs with identical posteriors (lossless both ways)."""
    post, mass = _posteriors(J)
    alive = mass > 0
    J = J[alive]
    post = post[alive]
    if J.shape[0] == 0:
        return J
    key = np.round(post, decimals)
    _, inv = np.unique(key, axis=0, return_inverse=True)
    out = np.zeros((inv.max() + 1, J.shape[1]))
    np.add.at(out, inv, J)
    return out


def degrading_merge(J, mu: int) -> np.ndarray:
    """Merge outputs down to at most mu rows (valid degradation).

    Outputs are sorted by posterior, bulk-merged into quantile buckets down to
    ~4*mu, then reduced to mu by greedy minimum-information-loss adjacent
    pair merges.
    """
    if mu < J.shape[1]:
        raise ValueError("mu must be at least the input alphabet size")
    J = _collapse_duplicates(J)
    if J.shape[0] <= mu:
        return J
    post, _ = _posteriors(J)
    order = np.argsort(_sort_key(post), kind="stable")
    J = J[order]
    # bulk pre-merge of adjacent pairs in posterior order
    while J.shape[0] > 4 * mu:
        m = J.shape[0] // 2
        paired = J[: 2 * m].reshape(m, 2, -1).sum(axis=1)
        J = np.vstack([paired, J[2 * m :]])
    # greedy adjacent merges
    rows = list(J)
    while len(rows) > mu:
        best, best_loss = None, np.inf
        for i in range(len(rows) - 1):
            loss = _merge_loss(rows[i], rows[i + 1])
            if loss < best_loss:
                best, best_loss = i, loss
        rows[best] = rows[best] + rows[best + 1]
        del rows[best + 1]
    return np.array(rows)


def _merge_loss(a, b):
    """Mutual-information loss of merging two output rows of a joint."""

    def h(v):
        s = v.sum()
        if s <= 0:
            return 0.0
        return float(-xlog2x(v).sum() + s * np.log2(s))

    return h(a + b) - h(a) - h(b)


def upgrading_merge(J, mu: int) -> np.ndarray:
    """Reduce outputs to at most mu rows producing an *upgraded* channel.

    Every output's posterior is written as a convex combination of at most mu
    representative posteriors; moving its mass onto the representatives yields
    a channel of which the original is a stochastic post-processing.  With two
    inputs the representatives bracket each output on the scalar posterior
    axis (the split is lossless at the representatives themselves); for more
    inputs the representatives are bucket averages plus the posterior-simplex
    corners.
    """
    if mu < J.shape[1]:
        raise ValueError("mu must be at least the input alphabet size")
    J = _collapse_duplicates(J)
    A, k = J.shape
    if A <= mu:
        return J
    post, mass = _posteriors(J)
    if k == 2:
        key = post[:, 0]
        order = np.argsort(key, kind="stable")
        # representatives: extreme posteriors plus mass-quantile picks
        take = [order[0], order[-1]]
        csum = np.cumsum(mass[order])
        csum /= csum[-1]
        for f in np.linspace(0, 1, mu - 2 + 2)[1:-1]:
            take.append(order[int(np.searchsorted(csum, f))])
        take = np.unique(np.array(take))
        reps = np.sort(key[take])
        reps = np.unique(reps)
        out = np.zeros((reps.size, 2))
        hi_idx = np.searchsorted(reps, key)
        hi_idx = np.clip(hi_idx, 1, reps.size - 1)
        lo_idx = hi_idx - 1
        lo, hi = reps[lo_idx], reps[hi_idx]
        span = np.where(hi > lo, hi - lo, 1.0)
        lam_hi = np.where(hi > lo, (key - lo) / span, 0.0)
        lam_hi = np.clip(lam_hi, 0.0, 1.0)
        for i in range(A):
            m = mass[i]
            out[lo_idx[i]] += m * (1 - lam_hi[i]) * np.array([reps[lo_idx[i]], 1 - reps[lo_idx[i]]])
            out[hi_idx[i]] += m * lam_hi[i] * np.array([reps[hi_idx[i]], 1 - reps[hi_idx[i]]])
        return out[out.sum(axis=1) > 0]
    # general input alphabets: bucket representatives plus simplex corners
    n_reps = max(mu - k, 1)
    order = np.argsort(_sort_key(post), kind="stable")
    buckets = np.array_split(order, n_reps)
    reps = []
    for b in buckets:
        if len(b) == 0:
            continue
        w = mass[b]
        reps.append((post[b] * w[:, None]).sum(axis=0) / max(w.sum(), 1e-300))
    reps = np.array(reps)
    out = np.zeros((reps.shape[0] + k, k))
    # each output: best single representative, remainder onto corners
    for i in range(A):
        pi = post[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(reps > 0, pi[None, :] / reps, np.inf)
        alphas = ratios.min(axis=1)
        alphas = np.minimum(alphas, 1.0)
        j = int(np.argmax(alphas))
        a = alphas[j]
        rem = pi - a * reps[j]
        rem = np.clip(rem, 0.0, None)
        out[j] += mass[i] * a * reps[j]
        out[reps.shape[0] : reps.shape[0] + k] += mass[i] * np.diag(rem)
    return out[out.sum(axis=1) > 0]


@dataclass
class ApproxChannel:
    """A DiscreteChannel plus how it relates to the exact one."""

    channel: DiscreteChannel
    provenance: str  # degraded | upgraded | exact
    mu: int | None

    def cond_entropy(self) -> float:
        tab = self.channel.table
        priors = self.channel.input_priors
        if priors is None:
            raise ValueError("channel carries no input priors")
        p = priors[0]
        J = (p[:, None] * tab).T
        return Dmc(J).cond_entropy()


def merge_channel(chan: DiscreteChannel, mu, mode) -> ApproxChannel:
    """Spec-facing merge of a (single- or multi-input) channel with priors."""
    if chan.input_priors is None:
        raise ValueError("attach input priors before merging")
    k = int(np.prod([a.size for a in chan.input_alphabets]))
    prior = np.ones(1)
    for p in chan.input_priors:
        prior = np.kron(prior, p)
    J = (prior[:, None] * chan.table.reshape(k, -1)).T  # (out, in)
    out = _collapse_duplicates(J)
    if mu is None or np.isinf(mu) or out.shape[0] <= mu:
        tag = EXACT
        mu_val = None if (mu is None or np.isinf(mu)) else int(mu)
    else:
        out = degrading_merge(out, mu) if mode == DEGRADE else upgrading_merge(out, mu)
        tag = "degraded" if mode == DEGRADE else "upgraded"
        mu_val = int(mu)
    cond = _joint_to_channel(out, prior)
    return ApproxChannel(
        DiscreteChannel(chan.input_alphabets, out.shape[0], cond, chan.input_priors),
        tag,
        mu_val,
    )


def _joint_to_channel(J, prior):
    """Rebuild W(out | in) table (in-axes flattened later by caller)."""
    safe = np.where(prior > 0, prior, 1.0)
    cond = (J / safe[None, :]).T  # (in, out)
    # rows for zero-prior inputs: uniform (never used)
    z = prior <= 0
    if np.any(z):
        cond[z] = 1.0 / J.shape[0]
    # renormalise against accumulated float error
    s = cond.sum(axis=1, keepdims=True)
    cond = cond / np.where(s > 0, s, 1.0)
    return cond.reshape((-1, J.shape[0]))


# ---------------------------------------------------------------------------
# The two channel transforms for a 2-sender channel (as printed: conditional
# form with prior factors; the internal recursion below uses joint measures)
# ---------------------------------------------------------------------------

def _mac_arrays(w: DiscreteChannel):
    if w.num_inputs != 2:
        raise ValueError("need a 2-input channel")
    if w.input_priors is None:
        raise ValueError("attach input priors first")
    q1, q2 = (a.size for a in w.input_alphabets)
    return w.table, np.asarray(w.input_priors[0]), np.asarray(w.input_priors[1]), q1, q2


def mac_minus(w: DiscreteChannel) -> DiscreteChannel:
    """First combined channel: output (y1, y2, u1_second), input the first
    coordinate pair; the second sender's second coordinate is averaged out."""
    tab, p1, p2, q1, q2 = _mac_arrays(w)
    A = w.output_size
    out = np.zeros((q1, q2, A, A, q1))
    for e1 in range(q1):
        for e2 in range(q2):
            # inputs (a1, a2); contribution of partner pair (e1, e2)
            shifted = np.roll(np.roll(tab, -e1, axis=0), -e2, axis=1)  # W(y1|a1+e1, a2+e2)
            out[:, :, :, :, e1] += (
                p1[e1] * p2[e2] * shifted[:, :, :, None] * tab[e1, e2][None, None, None, :]
            )
    return DiscreteChannel(
        w.input_alphabets, A * A * q1, out.reshape(q1, q2, -1), w.input_priors
    )


def mac_plus(w: DiscreteChannel) -> DiscreteChannel:
    """Second combined channel: output (y1, y2, u1_first, u2_first), input the
    second coordinate pair, with the first pair carrying its prior."""
    tab, p1, p2, q1, q2 = _mac_arrays(w)
    A = w.output_size
    out = np.zeros((q1, q2, A, A, q1, q2))
    for o1 in range(q1):
        for o2 in range(q2):
            shifted = np.roll(np.roll(tab, -o1, axis=0), -o2, axis=1)
            out[:, :, :, :, o1, o2] = (
                p1[o1] * p2[o2] * shifted[:, :, :, None] * tab[:, :, None, :]
            )
    return DiscreteChannel(
        w.input_alphabets, A * A * q1 * q2, out.reshape(q1, q2, -1), w.input_priors
    )


# ---------------------------------------------------------------------------
# Joint-measure stage recursions
# ---------------------------------------------------------------------------

def _merge_joint(J, mu, mode):
    """Merge the opaque output axis of a joint (A, ...) down to mu."""
    shape = J.shape
    flat = J.reshape(shape[0], -1)
    if mu is None or np.isinf(mu):
        out = _collapse_duplicates(flat)
    elif mode == DEGRADE:
        out = degrading_merge(flat, mu)
    else:
        out = upgrading_merge(flat, mu)
    return out.reshape((out.shape[0],) + shape[1:])


def _single_minus(C, q):
    """Joint of the first coordinate of a pair of blocks: (A, q) -> (A*A, q)."""
    A = C.shape[0]
    out = np.zeros((A, A, q))
    for b in range(q):
        out += C[:, None, (np.arange(q) + b) % q] * C[None, :, b, None]
    return out.reshape(A * A, q)


def _single_plus(C, q):
    """Joint of the second coordinate; the first rides along as an output."""
    A = C.shape[0]
    out = np.zeros((A, A, q, q))
    for w in range(q):
        out[:, :, w, :] = C[:, None, (np.arange(q) + w) % q] * C[None, :, :]
    return out.reshape(A * A * q, q)


def single_profile_estimate(joint, N, mu, mode):
    """Per-index H(U^j | outputs, U^{1:j-1}) estimates for one sender.

    joint: per-symbol P(x, o), shape (q, n_out).  Returns (N,) bits.  With
    mu None the recursion is exact (alphabet permitting).
    """
    joint = np.asarray(joint, dtype=np.float64)
    q = joint.shape[0]
    n = int(np.log2(N))
    if 2**n != N:
        raise ValueError("N must be a power of two")
    states = [_merge_joint(joint.T, mu, mode)]  # list over prefixes, (A, q)
    for _ in range(n):
        nxt = []
        for C in states:
            nxt.append(_merge_joint(_single_minus(C, q), mu, mode))
            nxt.append(_merge_joint(_single_plus(C, q), mu, mode))
        states = nxt
    return np.array([Dmc(C).cond_entropy() for C in states])


def _pair_stage(state, a_bit, image_prev, image_new, cur_new, q1, q2, mu, mode):
    """One stage of the two-sender recursion on joint measures.

    state: (J, ext_label) with J of shape (A, [q1 if ext], q1, q2); ext_label
    is the known-boundary coordinate kept explicit (None if absent).
    Returns the new state plus the labels marginalised at this stage.
    """
    J, ext = state
    has_ext = ext is not None
    A = J.shape[0]
    # copy axes: (A, A, [e1], [e2], fresh_q1, [fresh_q2], q1, q2)
    if has_ext:
        C1 = J  # (A, q1e, q1, q2)
    else:
        C1 = J[:, None]  # fake ext axis of size 1
    e = C1.shape[1]
    dropped = []

    if a_bit == 0:
        # new current = first member; partner pair (f1, f2): f2 summed now
        big = np.zeros((A, A, e, e, q1, q1, q2))
        for f1 in range(q1):
            for f2 in range(q2):
                s = np.roll(np.roll(C1, -f1, axis=2), -f2, axis=3)
                big[:, :, :, :, f1] += s[:, None, :, None] * C1[None, :, None, :, f1, f2, None, None]
        fresh = [(4, cur_new + 1)]  # (axis, label) of the partner's first coordinate
    else:
        # new current = second member; first pair (w1, w2) becomes outputs
        big = np.zeros((A, A, e, e, q1, q2, q1, q2))
        for w1 in range(q1):
            for w2 in range(q2):
                s = np.roll(np.roll(C1, -w1, axis=2), -w2, axis=3)
                big[:, :, :, :, w1, w2] = s[:, None, :, None] * C1[None, :, None, :]
        fresh = [(4, cur_new - 1)]  # (axis, label) of the first pair's first coordinate

    # resolve the copies' boundary axes into the parent pair they encode:
    # copy-1 carries (odd + even), copy-2 carries even, so re-index axis 2 to
    # the odd coordinate (label 2*ext-1); axis 3 is even (label 2*ext)
    axis_labels = []       # (axis_index, label) for u1 coordinate axes
    if has_ext:
        resolved = np.empty_like(big)
        for ev in range(q1):
            resolved[:, :, :, ev] = np.roll(big[:, :, :, ev], -ev, axis=2)
        big = resolved
        axis_labels.append((2, 2 * ext - 1))
        axis_labels.append((3, 2 * ext))
    axis_labels.extend(fresh)

    # decide fates: drop labels > image_new, keep-explicit label == image_new,
    # fold the rest into the opaque axis
    keep_axis = None
    fold_axes = []
    drop_axes = []
    for ax, label in axis_labels:
        if label == cur_new:
            raise AssertionError("current input can never be an output axis")
        if label > image_new:
            drop_axes.append(ax)
            dropped.append(label)
        elif label == image_new:
            keep_axis = ax
        else:
            fold_axes.append(ax)

    # sum the drops (axes stay as size-1 placeholders), then gather everything
    # that folds into the opaque output axis, keeping the boundary axis last
    if drop_axes:
        big = big.sum(axis=tuple(drop_axes), keepdims=True)
    n_axes = big.ndim
    in_axes = [n_axes - 2, n_axes - 1]
    keep_list = [keep_axis] if keep_axis is not None else []
    middle = [a for a in range(n_axes - 2) if a not in keep_list]
    big = np.transpose(big, middle + keep_list + in_axes)
    lead = int(np.prod(big.shape[: len(middle)]))
    if keep_list:
        big = big.reshape(lead, q1, q1, q2)
    else:
        big = big.reshape(lead, q1, q2)
    big = _merge_joint(big, mu, mode)
    new_ext = image_new if keep_list else None
    return (big, new_ext), dropped


def _image(i_m, n, j):
    """Known-boundary coordinate label of the length-2^j stage code."""
    if i_m <= 0:
        return 0
    return ((i_m - 1) >> (n - j)) + 1


@dataclass
class StageRecord:
    j: int
    a_bit: int
    b_bit: int
    it_plus1: int | None
    is_plus1: int | None
    y_count: int
    u1_kept: int
    u2_kept: int
    cur: int


def synth_user2_channel(w: DiscreteChannel, n: int, i_d: int, i_m: int, mu, mode, with_trace=False):
    """Approximate the second sender's synthesized channel at index i_d+1.

    ``w``: 2-input channel with attached priors; the chain places the first
    sender's first i_m coordinates before all of the second sender's.  Returns
    an ApproxChannel (output = everything the decoder holds: observations,
    the first sender's known coordinates, own history), optionally with the
    per-stage trace.
    """
    N = 1 << n
    if not 0 <= i_d <= N - 1:
        raise ValueError("i_d out of range")
    if not 0 <= i_m <= N:
        raise ValueError("i_m out of range")
    tab, p1, p2, q1, q2 = _mac_arrays(w)
    J0 = (p1[:, None, None] * p2[None, :, None] * tab).transpose(2, 0, 1)
    state = (_merge_joint(J0, mu, mode), None)
    a_bits = [(i_d >> (n - 1 - k)) & 1 for k in range(n)]
    b_src = max(i_m - 1, 0)
    b_bits = [(b_src >> (n - 1 - k)) & 1 for k in range(n)]
    cur = 1
    trace = []
    s_flag = False
    for j in range(1, n + 1):
        a = a_bits[j - 1]
        b = b_bits[j - 1]
        cur_new = 2 * cur - 1 + a
        img_new = _image(i_m, n, j)
        state, dropped = _pair_stage(state, a, _image(i_m, n, j - 1), img_new, cur_new, q1, q2, mu, mode)
        # printed-rule bookkeeping for the trace columns
        it_plus1 = is_plus1 = None
        if s_flag:
            is_plus1 = 2 * cur - 1 + (1 - a)
            s_flag = False
        if b == 0 and i_m >= 1:
            i_t = (b_src >> (n - j)) | 1
            a_pref = i_d >> (n - j)
            it_plus1 = i_t + 1
            if i_t == a_pref:
                s_flag = True
        u1_kept = min(img_new, cur_new - 1) if img_new else 0
        if img_new > cur_new:
            u1_kept = img_new - 1  # the current input itself is not an output
        trace.append(
            StageRecord(j, a, b, it_plus1, is_plus1, 1 << j, u1_kept, cur_new - 1, cur_new)
        )
        cur = cur_new
    J, ext = state
    if ext is not None:
        # boundary coordinate is fully known at the final stage: fold it
        J = np.moveaxis(J, 1, 0).reshape(-1, q1, q2)
    if i_d + 1 > i_m:
        J = J.sum(axis=1)
    else:
        J = np.moveaxis(J, 1, 0).reshape(-1, q2)
    J = _merge_joint(J, mu, mode)
    # the synthesized coordinate's own marginal, not the base prior
    prior2 = J.sum(axis=0)
    chan = _joint_to_channel(J, prior2)
    approx = ApproxChannel(
        DiscreteChannel((w.input_alphabets[1],), J.shape[0], chan, (prior2,)),
        EXACT if (mu is None or np.isinf(mu)) else ("degraded" if mode == DEGRADE else "upgraded"),
        None if (mu is None or np.isinf(mu)) else int(mu),
    )
    if with_trace:
        return approx, trace
    return approx


def user2_synthesized_entropy(w, n, i_d, i_m, mu, mode) -> float:
    """H(second sender's coordinate i_d+1 | decoder knowledge) estimate."""
    approx = synth_user2_channel(w, n, i_d, i_m, mu, mode)
    return approx.cond_entropy()


def mac_user2_profile_estimate(joint, N: int, i_m: int, mu, mode) -> np.ndarray:
    """All N second-sender entropies, sharing stage states across prefixes.

    joint: per-symbol P(x1, x2, o), shape (q1, q2, n_out).
    """
    joint = np.asarray(joint, dtype=np.float64)
    q1, q2 = joint.shape[:2]
    n = int(np.log2(N))
    if 2**n != N:
        raise ValueError("N must be a power of two")
    J0 = joint.transpose(2, 0, 1).reshape(-1, q1, q2)
    states = [(_merge_joint(J0, mu, mode), None)]
    cur = {0: 1}
    for j in range(1, n + 1):
        img_prev = _image(i_m, n, j - 1)
        img_new = _image(i_m, n, j)
        nxt = []
        ncur = {}
        for pref, state in enumerate(states):
            for a in (0, 1):
                cur_new = 2 * cur[pref] - 1 + a
                st, _ = _pair_stage(state, a, img_prev, img_new, cur_new, q1, q2, mu, mode)
                ncur[2 * pref + a] = cur_new
                nxt.append(st)
        states = nxt
        cur = ncur
    out = np.empty(N)
    for i_d in range(N):
        J, ext = states[i_d]
        if ext is not None:
            J = np.moveaxis(J, 1, 0).reshape(-1, q1, q2)
        if i_d + 1 > i_m:
            Jf = J.sum(axis=1)
        else:
            Jf = np.moveaxis(J, 1, 0).reshape(-1, q2)
        out[i_d] = Dmc(Jf).cond_entropy()
    return out


def user2_entropy_bounds(w: DiscreteChannel, n, i_d, i_m, mus):
    """Nested degraded/upgraded entropy brackets for a set of budgets.

    The largest finite budget runs the full recursion once per direction;
    smaller budgets further merge its final channel, so bracket widths are
    nonincreasing in mu by construction.  Returns {mu: (upper, lower)} plus
    {None: exact} when None is in ``mus``.
    """
    finite = sorted({int(m) for m in mus if m is not None and not np.isinf(m)})
    out = {}
    if None in mus or any(m is not None and np.isinf(m) for m in mus):
        exact = user2_synthesized_entropy(w, n, i_d, i_m, None, DEGRADE)
        out[None] = (exact, exact)
    if not finite:
        return out
    top = finite[-1]
    deg = synth_user2_channel(w, n, i_d, i_m, top, DEGRADE)
    upg = synth_user2_channel(w, n, i_d, i_m, top, UPGRADE)

    def entropy_at(approx, mu, mode):
        p = np.asarray(approx.channel.input_priors[0])
        J = (p[:, None] * approx.channel.table).T
        if mu is not None and J.shape[0] > mu:
            J = degrading_merge(J, mu) if mode == DEGRADE else upgrading_merge(J, mu)
        return Dmc(J).cond_entropy()

    for mu in reversed(finite):
        out[mu] = (entropy_at(deg, mu, DEGRADE), entropy_at(upg, mu, UPGRADE))
    return out
