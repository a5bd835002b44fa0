"""Finite-alphabet models for the 2-user interference channel.

Everything downstream (rate regions, code construction, decoding) consumes the
objects defined here: a dense conditional probability table for the channel, a
pair of per-sender joint distributions tying each channel input X_k to its
coarse layer W_k, and the synthesized channels obtained by marginalising one
or both senders' fine layers.  Mutual-information terms are evaluated exactly
by enumeration of the full joint, which is cheap at the intended desk-scale
alphabets (<= 16 symbols per variable).

Conventions: probabilities are float64, rows must normalise to 1 within 1e-12,
logarithms are base 2, and 0*log(0) is 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROW_TOL = 1e-12
LOAD_TOL = 1e-9

EFF1 = "EFF1"
EFF2 = "EFF2"
COMMON1 = "COMMON1"
COMMON2 = "COMMON2"


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def smallest_prime_above(n: int) -> int:
    """Smallest prime strictly larger than n."""
    k = n + 1
    while not is_prime(k):
        k += 1
    return k


def default_cloud_size(q_x: int) -> int:
    """Default coarse-layer alphabet size: smallest prime > q_x + 4."""
    return smallest_prime_above(q_x + 4)


class ChannelFormatError(ValueError):
    """Raised when a channel/distribution document fails to parse or validate."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Alphabet:
    """A finite symbol set {0, ..., size-1}; size must be prime."""

    size: int

    def __post_init__(self):
        if self.size < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.size}")
        if not is_prime(self.size):
            raise ValueError(f"alphabet size must be prime, got {self.size}")

    def __int__(self):
        return self.size


def _check_rows(table: np.ndarray, tol: float, what: str):
    if np.any(table < -1e-15) or np.any(table > 1 + 1e-12):
        raise ValueError(f"{what}: entries outside [0, 1]")
    sums = table.sum(axis=-1)
    err = np.max(np.abs(sums - 1.0))
    if err > tol:
        raise ValueError(f"{what}: row normalisation off by {err:.3e} (> {tol:.0e})")


class DiscreteChannel:
    """Dense memoryless channel W(y | x_1, ..., x_m) over finite alphabets.

    The table is stored with one axis per input followed by the output axis,
    so flattening the input axes row-major reproduces the canonical layout.
    ``input_priors`` optionally attaches an independent prior per input
    (required by the MAC channel transforms in :mod:`hkpolar.construct`).
    Instances are immutable; the table array is set read-only.
    """

    def __init__(self, input_alphabets, output_size, table, input_priors=None):
        self.input_alphabets = tuple(
            a if isinstance(a, Alphabet) else Alphabet(a) for a in input_alphabets
        )
        self.output_size = int(output_size)
        shape = tuple(a.size for a in self.input_alphabets) + (self.output_size,)
        table = np.asarray(table, dtype=np.float64).reshape(shape)
        _check_rows(table, ROW_TOL, "channel table")
        table = table.copy()
        table.flags.writeable = False
        self.table = table
        if input_priors is not None:
            input_priors = tuple(np.asarray(p, dtype=np.float64) for p in input_priors)
            for p, a in zip(input_priors, self.input_alphabets):
                if p.shape != (a.size,):
                    raise ValueError("prior length does not match input alphabet")
                if abs(p.sum() - 1.0) > ROW_TOL:
                    raise ValueError("input prior does not normalise")
        self.input_priors = input_priors

    @property
    def num_inputs(self) -> int:
        return len(self.input_alphabets)

    def row(self, x) -> np.ndarray:
        """P(. | x) for an input tuple (or scalar for single-input channels)."""
        if self.num_inputs == 1 and np.isscalar(x):
            x = (x,)
        return self.table[tuple(int(v) for v in x)]

    def with_priors(self, *priors) -> "DiscreteChannel":
        return DiscreteChannel(self.input_alphabets, self.output_size, self.table, priors)


class InterferenceChannel:
    """Two-sender two-receiver channel P(y1, y2 | x1, x2) with derived marginals."""

    def __init__(self, x1, x2, y1_size, y2_size, joint_table):
        self.x1 = x1 if isinstance(x1, Alphabet) else Alphabet(x1)
        self.x2 = x2 if isinstance(x2, Alphabet) else Alphabet(x2)
        self.y1_size = int(y1_size)
        self.y2_size = int(y2_size)
        shape = (self.x1.size, self.x2.size, self.y1_size, self.y2_size)
        jt = np.asarray(joint_table, dtype=np.float64).reshape(shape)
        _check_rows(jt.reshape(shape[0], shape[1], -1), ROW_TOL, "interference channel")
        jt = jt.copy()
        jt.flags.writeable = False
        self.joint_table = jt

    def marginal(self, receiver: int) -> DiscreteChannel:
        """P(y_k | x1, x2) for receiver k in {1, 2}."""
        if receiver == 1:
            tab = self.joint_table.sum(axis=3)
            out = self.y1_size
        elif receiver == 2:
            tab = self.joint_table.sum(axis=2)
            out = self.y2_size
        else:
            raise ValueError("receiver must be 1 or 2")
        return DiscreteChannel((self.x1, self.x2), out, tab)


class JointInputDistribution:
    """Per-sender joint laws P(w_k, x_k); senders are independent.

    The coarse layers W_k live on prime alphabets (a constant W is encoded as
    a prime-2 alphabet with a point mass, which realises the "no common
    message" corner cases).  Conditionals P(x|w) for zero-mass w are set
    uniform; such w never occur.
    """

    def __init__(self, pw1x1, pw2x2, w1=None, w2=None):
        self.pw1x1 = self._clean(pw1x1, "P(w1, x1)")
        self.pw2x2 = self._clean(pw2x2, "P(w2, x2)")
        self.w1 = w1 if isinstance(w1, Alphabet) else Alphabet(w1 or self.pw1x1.shape[0])
        self.w2 = w2 if isinstance(w2, Alphabet) else Alphabet(w2 or self.pw2x2.shape[0])
        self.x1 = Alphabet(self.pw1x1.shape[1])
        self.x2 = Alphabet(self.pw2x2.shape[1])
        if self.w1.size != self.pw1x1.shape[0] or self.w2.size != self.pw2x2.shape[0]:
            raise ValueError("W alphabet size does not match joint table")

    @staticmethod
    def _clean(p, what):
        p = np.asarray(p, dtype=np.float64)
        if p.ndim != 2:
            raise ValueError(f"{what} must be 2-D")
        if np.any(p < -1e-15):
            raise ValueError(f"{what} has negative entries")
        if abs(p.sum() - 1.0) > ROW_TOL:
            raise ValueError(f"{what} does not sum to 1")
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        return p

    def w_marginal(self, k: int) -> np.ndarray:
        return (self.pw1x1 if k == 1 else self.pw2x2).sum(axis=1)

    def x_marginal(self, k: int) -> np.ndarray:
        return (self.pw1x1 if k == 1 else self.pw2x2).sum(axis=0)

    def x_given_w(self, k: int) -> np.ndarray:
        """Conditional table P(x_k | w_k), uniform on zero-mass rows."""
        joint = self.pw1x1 if k == 1 else self.pw2x2
        pw = joint.sum(axis=1, keepdims=True)
        qx = joint.shape[1]
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(pw > 0, joint / np.where(pw > 0, pw, 1.0), 1.0 / qx)
        return cond

    def w_given_x(self, k: int) -> np.ndarray:
        joint = self.pw1x1 if k == 1 else self.pw2x2
        px = joint.sum(axis=0, keepdims=True)
        qw = joint.shape[0]
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(px > 0, joint / np.where(px > 0, px, 1.0), 1.0 / qw)
        return cond


# ---------------------------------------------------------------------------
# Text formats
# ---------------------------------------------------------------------------

def _numbered_tokens(text):
    """Yield (line_number, tokens) for non-comment, non-blank lines."""
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield i, line.split()


def _collect(tok_iter, count, what):
    """Pull exactly `count` floats from the token stream."""
    vals, last_line = [], None
    while len(vals) < count:
        try:
            last_line, toks = next(tok_iter)
        except StopIteration:
            raise ChannelFormatError(
                f"unexpected end of document: expected {count} values for {what}, got {len(vals)}",
                last_line,
            )
        for t in toks:
            try:
                vals.append(float(t))
            except ValueError:
                raise ChannelFormatError(f"bad number {t!r} in {what}", last_line)
        if len(vals) > count:
            raise ChannelFormatError(f"too many values on line for {what}", last_line)
    return np.array(vals), last_line


def load_channel(text: str) -> InterferenceChannel:
    """Parse the channel-spec text format.

    Line 1: ``ic q_x1 q_x2 n_y1 n_y2``; then one line per (x1, x2) pair in
    row-major order holding n_y1*n_y2 probabilities for (y1, y2) row-major.
    Comments start with ``#``.
    """
    toks = _numbered_tokens(text)
    try:
        line_no, header = next(toks)
    except StopIteration:
        raise ChannelFormatError("empty document", 1)
    if header[0] != "ic" or len(header) != 5:
        raise ChannelFormatError("expected header 'ic q_x1 q_x2 n_y1 n_y2'", line_no)
    try:
        q1, q2, n1, n2 = (int(v) for v in header[1:])
    except ValueError:
        raise ChannelFormatError("header sizes must be integers", line_no)
    for q, name in ((q1, "q_x1"), (q2, "q_x2")):
        if not is_prime(q):
            raise ChannelFormatError(f"{name}={q} is not prime", line_no)
    rows = np.empty((q1, q2, n1 * n2))
    for a in range(q1):
        for b in range(q2):
            vals, vline = _collect(toks, n1 * n2, f"row (x1={a}, x2={b})")
            if abs(vals.sum() - 1.0) > LOAD_TOL:
                raise ChannelFormatError(
                    f"row (x1={a}, x2={b}) sums to {vals.sum():.10f}", vline
                )
            rows[a, b] = vals
    rows /= rows.sum(axis=-1, keepdims=True)
    return InterferenceChannel(q1, q2, n1, n2, rows.reshape(q1, q2, n1, n2))


def load_distribution(text: str) -> JointInputDistribution:
    """Parse the distribution-spec format: ``dist q_w1 q_x1 q_w2 q_x2`` then
    the two joint tables row-major, each on its own block of lines."""
    toks = _numbered_tokens(text)
    try:
        line_no, header = next(toks)
    except StopIteration:
        raise ChannelFormatError("empty document", 1)
    if header[0] != "dist" or len(header) != 5:
        raise ChannelFormatError("expected header 'dist q_w1 q_x1 q_w2 q_x2'", line_no)
    try:
        qw1, qx1, qw2, qx2 = (int(v) for v in header[1:])
    except ValueError:
        raise ChannelFormatError("header sizes must be integers", line_no)
    for q, name in ((qw1, "q_w1"), (qx1, "q_x1"), (qw2, "q_w2"), (qx2, "q_x2")):
        if not is_prime(q):
            raise ChannelFormatError(f"{name}={q} is not prime", line_no)
    p1, l1 = _collect(toks, qw1 * qx1, "P(w1, x1)")
    if abs(p1.sum() - 1.0) > LOAD_TOL:
        raise ChannelFormatError(f"P(w1, x1) sums to {p1.sum():.10f}", l1)
    p2, l2 = _collect(toks, qw2 * qx2, "P(w2, x2)")
    if abs(p2.sum() - 1.0) > LOAD_TOL:
        raise ChannelFormatError(f"P(w2, x2) sums to {p2.sum():.10f}", l2)
    return JointInputDistribution(
        (p1 / p1.sum()).reshape(qw1, qx1), (p2 / p2.sum()).reshape(qw2, qx2)
    )


def _fmt_row(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def dump_channel(ic: InterferenceChannel) -> str:
    lines = [f"ic {ic.x1.size} {ic.x2.size} {ic.y1_size} {ic.y2_size}"]
    for a in range(ic.x1.size):
        for b in range(ic.x2.size):
            lines.append(_fmt_row(ic.joint_table[a, b].ravel()))
    return "\n".join(lines) + "\n"


def dump_distribution(dist: JointInputDistribution) -> str:
    lines = [
        f"dist {dist.w1.size} {dist.x1.size} {dist.w2.size} {dist.x2.size}",
        _fmt_row(dist.pw1x1.ravel()),
        _fmt_row(dist.pw2x2.ravel()),
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Synthesized channels
# ---------------------------------------------------------------------------

def synthesize(ic: InterferenceChannel, dist: JointInputDistribution, which: str) -> DiscreteChannel:
    """Derive one of the four synthesized channels used by the coding scheme.

    EFF1     y1 given (x1, w2): interferer's fine layer averaged out through
             P(x2 | w2).
    EFF2     y2 given (w1, x2): mirror image.
    COMMON1  y1 given (w1, w2): both fine layers averaged out.
    COMMON2  y2 given (w1, w2).
    """
    if dist.x1.size != ic.x1.size or dist.x2.size != ic.x2.size:
        raise ValueError("distribution input alphabets do not match channel")
    w1 = ic.marginal(1).table  # (x1, x2, y1)
    w2 = ic.marginal(2).table  # (x1, x2, y2)
    c1 = dist.x_given_w(1)  # (w1, x1)
    c2 = dist.x_given_w(2)  # (w2, x2)
    if which == EFF1:
        tab = np.einsum("abc,wb->awc", w1, c2)
        return DiscreteChannel((dist.x1, dist.w2), ic.y1_size, tab)
    if which == EFF2:
        tab = np.einsum("abc,wa->wbc", w2, c1)
        return DiscreteChannel((dist.w1, dist.x2), ic.y2_size, tab)
    if which == COMMON1:
        tab = np.einsum("abc,va,wb->vwc", w1, c1, c2)
        return DiscreteChannel((dist.w1, dist.w2), ic.y1_size, tab)
    if which == COMMON2:
        tab = np.einsum("abc,va,wb->vwc", w2, c1, c2)
        return DiscreteChannel((dist.w1, dist.w2), ic.y2_size, tab)
    raise ValueError(f"unknown synthesized channel {which!r}")


# ---------------------------------------------------------------------------
# Information quantities
# ---------------------------------------------------------------------------

_VARS = ("W1", "X1", "W2", "X2", "Y1", "Y2")
_AXIS = {v: i for i, v in enumerate(_VARS)}


def xlog2x(p: np.ndarray) -> np.ndarray:
    """p * log2(p) with the 0 log 0 = 0 convention."""
    out = np.zeros_like(p)
    mask = p > 0
    out[mask] = p[mask] * np.log2(p[mask])
    return out


def entropy_bits(p: np.ndarray) -> float:
    return float(-xlog2x(np.asarray(p, dtype=np.float64)).sum())


class JointModel:
    """Full joint P(w1, x1, w2, x2, y1, y2) with exact information queries."""

    def __init__(self, ic: InterferenceChannel, dist: JointInputDistribution):
        if dist.x1.size != ic.x1.size or dist.x2.size != ic.x2.size:
            raise ValueError("distribution input alphabets do not match channel")
        self.ic = ic
        self.dist = dist
        self.joint = np.einsum(
            "va,wb,abcd->vawbcd", dist.pw1x1, dist.pw2x2, ic.joint_table
        )

    def marginal(self, vars_):
        axes = tuple(i for i, v in enumerate(_VARS) if v not in vars_)
        m = self.joint.sum(axis=axes) if axes else self.joint
        # reorder to the canonical W1,X1,W2,X2,Y1,Y2 order of the kept vars
        kept = [v for v in _VARS if v in vars_]
        want = sorted(vars_, key=lambda v: _AXIS[v])
        assert kept == want
        return m

    def entropy(self, vars_, given=()):
        """H(vars | given) in bits."""
        vars_ = tuple(vars_)
        given = tuple(given)
        joint = self.marginal(set(vars_) | set(given))
        h_all = entropy_bits(joint)
        if not given:
            return h_all
        return h_all - entropy_bits(self.marginal(set(given)))

    def mi(self, a, b, given=()):
        """I(a ; b | given) in bits; a, b, given are variable-name iterables."""
        a, b, given = set(a), set(b), set(given)
        if a & b:
            raise ValueError("overlapping variable groups")
        return self.entropy(a, given) - self.entropy(a, b | given)


def parse_info_tag(tag: str):
    """Parse 'I(X1 W2; Y1 | W1)' style tags into variable groups."""
    t = tag.replace(" ", "")
    if not (t.startswith("I(") and t.endswith(")")):
        raise ValueError(f"malformed information tag {tag!r}")
    body = t[2:-1]
    if "|" in body:
        main, cond = body.split("|", 1)
    else:
        main, cond = body, ""
    try:
        left, right = main.split(";")
    except ValueError:
        raise ValueError(f"malformed information tag {tag!r}")

    def split_vars(s):
        out, i = [], 0
        while i < len(s):
            chunk = s[i : i + 2]
            if chunk not in _VARS:
                raise ValueError(f"unknown variable {chunk!r} in tag {tag!r}")
            out.append(chunk)
            i += 2
        return out

    return split_vars(left), split_vars(right), split_vars(cond)


def info(dist: JointInputDistribution, ic: InterferenceChannel, tag: str) -> float:
    """Evaluate a conditional mutual information tag exactly, in bits."""
    a, b, c = parse_info_tag(tag)
    return JointModel(ic, dist).mi(a, b, c)
