"""Polarization substrate: the transform, chain paths, and exact entropy profiles.

The length-N transform over a prime alphabet is the usual bit-reversed kernel
power: recursively, the codeword interleaves (s+t mod q) and t where s and t
encode the two halves of the message vector.  Monotone chain paths interleave
two senders' transformed sequences while preserving each sender's internal
order; the canonical family places a prefix of sender 1, then all of sender 2,
then the rest of sender 1.

``exact_profile_*`` enumerate every (sequence, output) pair and are the ground
truth that anchors code construction and decoder correctness at small N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ENUM_BUDGET = 1 << 26


def delta_n(N: int, beta: float = 0.25) -> float:
    """Polarization threshold 2**(-N**beta)."""
    if not 0 < beta < 0.5:
        raise ValueError("beta must lie in (0, 1/2)")
    return float(2.0 ** (-(N**beta)))


def _check_len(N: int):
    if N < 1 or (N & (N - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {N}")


def polar_transform(u, q: int) -> np.ndarray:
    """x = u G_N over Z_q, applied along the last axis."""
    u = np.asarray(u)
    N = u.shape[-1]
    _check_len(N)
    if N == 1:
        return u.copy()
    if np.any(u >= q) or np.any(u < 0):
        raise ValueError("symbols out of range")
    return _enc(u.astype(np.int64), q)


def _enc(u, q):
    N = u.shape[-1]
    if N == 1:
        return u
    M = N // 2
    s = _enc(u[..., :M], q)
    t = _enc(u[..., M:], q)
    x = np.empty_like(u)
    x[..., 0::2] = (s + t) % q
    x[..., 1::2] = t
    return x


def polar_inverse(x, q: int) -> np.ndarray:
    """u such that polar_transform(u, q) == x."""
    x = np.asarray(x)
    N = x.shape[-1]
    _check_len(N)
    if N == 1:
        return x.copy()
    return _dec(x.astype(np.int64), q)


def _dec(x, q):
    N = x.shape[-1]
    if N == 1:
        return x
    t_code = x[..., 1::2]
    s_code = (x[..., 0::2] - t_code) % q
    return np.concatenate([_dec(s_code, q), _dec(t_code, q)], axis=-1)


def generator_matrix(N: int, q: int) -> np.ndarray:
    """Dense transform matrix (bit-reversal times kernel power), for tests."""
    _check_len(N)
    n = int(np.log2(N))
    F = np.array([[1, 0], [1, 1]], dtype=np.int64)
    G = np.array([[1]], dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, F)
    # bit-reverse the rows
    rev = np.zeros(N, dtype=int)
    for i in range(N):
        b = 0
        for k in range(n):
            b = (b << 1) | ((i >> k) & 1)
        rev[i] = b
    return G[rev] % q


# ---------------------------------------------------------------------------
# Chain paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChainPath:
    """Interleaving of two transformed sequences, as a 0/1 string of length 2N.

    bits[j] == 0 means position j carries the next symbol of sender 1.
    """

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        object.__setattr__(self, "bits", bits)
        n = len(bits)
        if n == 0 or n % 2:
            raise ValueError("path length must be even and positive")
        if any(b not in (0, 1) for b in bits):
            raise ValueError("path bits must be 0/1")
        if sum(bits) != n // 2:
            raise ValueError("path must contain equally many 0s and 1s")

    @property
    def half(self) -> int:
        return len(self.bits) // 2

    @property
    def canonical_i(self):
        """i if the path has the prefix/suffix form 0^i 1^N 0^(N-i), else None."""
        N = self.half
        bits = self.bits
        i = 0
        while i < N and bits[i] == 0:
            i += 1
        if bits[i : i + N] != (1,) * N:
            return None
        if bits[i + N :] != (0,) * (N - i):
            return None
        return i

    def order(self):
        """Sequence of (user, within-user index) pairs, 0-based."""
        c = [0, 0]
        out = []
        for b in self.bits:
            out.append((b, c[b]))
            c[b] += 1
        return out


def canonical_path(N: int, i: int) -> ChainPath:
    _check_len(N)
    if not 0 <= i <= N:
        raise ValueError("prefix length out of range")
    return ChainPath((0,) * i + (1,) * N + (0,) * (N - i))


def scale_path(path: ChainPath, l: int) -> ChainPath:
    """Repeat every path symbol l times (l a power of two); canonical paths map
    to canonical paths and the rate pair is preserved."""
    if l < 1 or (l & (l - 1)) != 0:
        raise ValueError("scale factor must be a power of two")
    bits = []
    for b in path.bits:
        bits.extend([b] * l)
    return ChainPath(tuple(bits))


# ---------------------------------------------------------------------------
# Entropy profiles (exact oracle)
# ---------------------------------------------------------------------------

@dataclass
class EntropyProfile:
    """Per-index conditional entropies, stored base-2.

    ``owners`` holds 0/1 per entry for two-sender profiles, None for
    single-sender ones.  ``alphabet_sizes`` gives each sender's q for on-demand
    conversion to the owner's base.
    """

    values: np.ndarray
    alphabet_sizes: tuple
    owners: np.ndarray | None = None

    def in_owner_base(self) -> np.ndarray:
        if self.owners is None:
            return self.values / np.log2(self.alphabet_sizes[0])
        scale = np.where(
            self.owners == 0,
            np.log2(self.alphabet_sizes[0]),
            np.log2(self.alphabet_sizes[1]),
        )
        return self.values / scale

    def user_values(self, user: int) -> np.ndarray:
        if self.owners is None:
            raise ValueError("single-sender profile has no owners")
        return self.values[self.owners == user]


def polarized_sets(values, q: int, delta: float):
    """Split indices into (high, low, middle) by conditional entropy."""
    v = np.asarray(values, dtype=float)
    if not 0 < delta < np.log2(q):
        raise ValueError("threshold must lie in (0, log2 q)")
    high = np.where(v >= np.log2(q) - delta)[0]
    low = np.where(v <= delta)[0]
    mid = np.setdiff1d(np.arange(v.size), np.concatenate([high, low]))
    return high, low, mid


def _entropy(v):
    v = v[v > 0]
    return float(-(v * np.log2(v)).sum())


def _all_configs(q, N):
    """(q**N, N) array of all length-N sequences, first symbol most significant."""
    idx = np.arange(q**N)
    out = np.empty((q**N, N), dtype=np.int64)
    for t in range(N - 1, -1, -1):
        out[:, t] = idx % q
        idx //= q
    return out


def exact_profile_single(joint, N: int) -> EntropyProfile:
    """Exact H(U^j | O^{1:N}, U^{1:j-1}) for a memoryless (X, O) pair.

    ``joint`` is the per-symbol joint law P(x, o), shape (q, n_out); side
    information is folded into the output symbol o.  Enumerates all
    (sequence, output) pairs; raises if q**N * n_out**N exceeds the budget.
    """
    joint = np.asarray(joint, dtype=np.float64)
    q, n_out = joint.shape
    if (q**N) * (n_out**N) > ENUM_BUDGET:
        raise ValueError("enumeration budget exceeded")
    u_cfg = _all_configs(q, N)
    x_cfg = polar_transform(u_cfg, q)
    o_cfg = _all_configs(n_out, N)
    # J[uc, oc] = prod_t joint[x_t, o_t]
    J = np.ones((q**N, n_out**N))
    for t in range(N):
        J *= joint[x_cfg[:, t]][:, o_cfg[:, t]]
    return _profile_from_table(J, [u_cfg[:, t] for t in range(N)], [q] * N, (q,), None)


def exact_profile_mac(joint, N: int, path: ChainPath) -> EntropyProfile:
    """Exact chain-order profile for a two-sender memoryless triple (X1, X2, O).

    ``joint`` is P(x1, x2, o) per symbol, shape (q1, q2, n_out).  Entry j of
    the result is H(S^j | O^{1:N}, S^{1:j-1}) in bits, where S follows
    ``path``.
    """
    joint = np.asarray(joint, dtype=np.float64)
    q1, q2, n_out = joint.shape
    if path.half != N:
        raise ValueError("path length does not match N")
    if (q1**N) * (q2**N) * (n_out**N) > ENUM_BUDGET:
        raise ValueError("enumeration budget exceeded")
    u1 = _all_configs(q1, N)
    u2 = _all_configs(q2, N)
    x1 = polar_transform(u1, q1)
    x2 = polar_transform(u2, q2)
    o_cfg = _all_configs(n_out, N)
    n1, n2, no = q1**N, q2**N, n_out**N
    J = np.ones((n1, n2, no))
    for t in range(N):
        J *= joint[x1[:, t][:, None, None], x2[None, :, t, None], o_cfg[None, None, :, t]]
    J = J.reshape(n1 * n2, no)
    idx1 = np.repeat(np.arange(n1), n2)
    idx2 = np.tile(np.arange(n2), n1)
    digits, radices, owners = [], [], []
    for user, k in path.order():
        if user == 0:
            digits.append(u1[idx1, k])
            radices.append(q1)
        else:
            digits.append(u2[idx2, k])
            radices.append(q2)
        owners.append(user)
    prof = _profile_from_table(J, digits, radices, (q1, q2), np.array(owners))
    return prof


def _profile_from_table(J, digits, radices, alphabet_sizes, owners):
    """Conditional entropies of successive digits given outputs and prefixes.

    J has one row per full sequence configuration and one column per output
    configuration; ``digits[j]`` maps rows to the j-th chain symbol.
    """
    n_rows, n_cols = J.shape
    h_prev = _entropy(J.sum(axis=0))  # H(O)
    values = []
    prefix = np.zeros(n_rows, dtype=np.int64)
    width = 1
    for d, r in zip(digits, radices):
        prefix = prefix * r + d
        width *= r
        # aggregate rows by prefix value
        flat = prefix[:, None] * n_cols + np.arange(n_cols)[None, :]
        agg = np.bincount(flat.ravel(), weights=J.ravel(), minlength=width * n_cols)
        h = _entropy(agg)
        values.append(h - h_prev)
        h_prev = h
        # re-index prefixes to the occupied range to keep widths small
        uniq, prefix = np.unique(prefix, return_inverse=True)
        width = uniq.size
    return EntropyProfile(np.array(values), alphabet_sizes, owners)


def mac_joint_from_channel(chan_table, p1, p2) -> np.ndarray:
    """P(x1, x2, o) from a 2-input channel table and independent priors."""
    t = np.asarray(chan_table, dtype=np.float64)
    return np.asarray(p1)[:, None, None] * np.asarray(p2)[None, :, None] * t


def single_joint_from_channel(chan_table, p) -> np.ndarray:
    t = np.asarray(chan_table, dtype=np.float64)
    return np.asarray(p)[:, None] * t
