"""Rate regions for the 2-user interference channel and their polytope algebra.

The module covers four jobs:

* build the compact two-rate achievable region (seven labelled inequalities
  ``a``..``g``) and the three/combined four-rate regions of the partially-joint
  decoders;
* project labelled inequality systems by Fourier-Motzkin elimination with
  exact redundancy control (pairwise domination plus vertex tightness);
* classify a point on a dominant face into a private/common rate split
  (Type A, B1 or B2) together with the enlarged target pairs the code
  construction needs;
* sample points on dominant faces for batch experiments.

All rates are in bits per channel use.  Polytopes carry implicit
nonnegativity on every variable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    COMMON1,
    COMMON2,
    DiscreteChannel,
    InterferenceChannel,
    JointInputDistribution,
    JointModel,
    synthesize,
)

TIGHT_TOL = 1e-9
GEOM_TOL = 1e-9


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------

class RatePolytope:
    """System {A r <= b, r >= 0} over named rate variables, rows optionally tagged."""

    def __init__(self, variables, A, b, tags=None):
        self.variables = tuple(variables)
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.asarray(b, dtype=np.float64).ravel()
        if self.A.shape != (self.b.size, len(self.variables)):
            raise ValueError("coefficient matrix does not match variables/bounds")
        if not np.all(np.isfinite(self.A)) or not np.all(np.isfinite(self.b)):
            raise ValueError("non-finite polytope data")
        self.tags = list(tags) if tags is not None else [""] * self.b.size
        if len(self.tags) != self.b.size:
            raise ValueError("tag list does not match rows")

    @property
    def dim(self) -> int:
        return len(self.variables)

    def __len__(self) -> int:
        return self.b.size

    def row(self, tag):
        i = self.tags.index(tag)
        return self.A[i], self.b[i]

    def as_dict_point(self, r) -> dict:
        return dict(zip(self.variables, np.asarray(r, dtype=float)))

    def point_array(self, point) -> np.ndarray:
        if isinstance(point, dict):
            return np.array([point[v] for v in self.variables], dtype=float)
        return np.asarray(point, dtype=float)

    def contains(self, point, tol=TIGHT_TOL) -> bool:
        r = self.point_array(point)
        if np.any(r < -tol):
            return False
        return bool(np.all(self.A @ r <= self.b + tol * np.maximum(1.0, np.abs(self.b))))

    def slacks(self, point) -> np.ndarray:
        return self.b - self.A @ self.point_array(point)

    def vertices(self, tol=GEOM_TOL) -> np.ndarray:
        """All vertices of the (bounded) region, deduplicated."""
        d = self.dim
        rows = np.vstack([self.A, -np.eye(d)])
        rhs = np.concatenate([self.b, np.zeros(d)])
        verts = []
        for combo in itertools.combinations(range(rows.shape[0]), d):
            M = rows[list(combo)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, rhs[list(combo)])
            if np.any(v < -tol):
                continue
            if np.all(rows @ v <= rhs + tol * np.maximum(1.0, np.abs(rhs))):
                verts.append(v)
        if not verts:
            return np.zeros((0, d))
        verts = np.array(verts)
        order = np.lexsort(verts.T[::-1])
        uniq = []
        for v in verts[order]:
            if all(np.max(np.abs(v - u)) > 10 * tol for u in uniq):
                uniq.append(v)
        return np.array(uniq)

    def remove_redundant(self) -> "RatePolytope":
        return _cleanup(self)


def _cleanup(p: RatePolytope) -> RatePolytope:
    """Normalise rows, drop trivial/duplicate/dominated rows, then keep only
    rows tight at some vertex (regions here are bounded, so facets have
    vertices)."""
    A, b, tags = p.A.copy(), p.b.copy(), list(p.tags)
    # normalise
    scale = np.max(np.abs(A), axis=1)
    keep = []
    for i in range(len(b)):
        if scale[i] < 1e-12:
            if b[i] < -1e-9:
                raise ValueError("infeasible polytope (0 <= negative)")
            continue
        A[i] /= scale[i]
        b[i] /= scale[i]
        keep.append(i)
    A, b, tags = A[keep], b[keep], [tags[i] for i in keep]

    # exact-ish duplicates
    keep = []
    for i in range(len(b)):
        dup = any(
            np.max(np.abs(A[i] - A[j])) < 1e-10 and b[i] >= b[j] - 1e-12
            for j in keep
        )
        if not dup:
            # drop any previously kept row that this row duplicates more tightly
            keep = [
                j
                for j in keep
                if not (np.max(np.abs(A[i] - A[j])) < 1e-10 and b[j] >= b[i] - 1e-12)
            ]
            keep.append(i)
    A, b, tags = A[keep], b[keep], [tags[i] for i in keep]

    # pairwise domination under r >= 0: row i implied by row j
    keep = []
    for i in range(len(b)):
        dominated = False
        for j in range(len(b)):
            if i == j:
                continue
            if np.all(A[i] <= A[j] + 1e-12) and b[i] >= b[j] - 1e-12:
                if np.max(np.abs(A[i] - A[j])) > 1e-12 or b[i] > b[j] + 1e-12 or j < i:
                    dominated = True
                    break
        if not dominated:
            keep.append(i)
    A, b, tags = A[keep], b[keep], [tags[i] for i in keep]

    q = RatePolytope(p.variables, A, b, tags)
    verts = q.vertices()
    if len(verts) == 0:
        return q
    slack = q.b[None, :] - verts @ q.A.T
    tight_any = np.any(np.abs(slack) <= 1e-7 * np.maximum(1.0, np.abs(q.b[None, :])), axis=0)
    idx = [i for i in range(len(q)) if tight_any[i]]
    if not idx:
        return q
    return RatePolytope(p.variables, q.A[idx], q.b[idx], [q.tags[i] for i in idx])


def project(p: RatePolytope, keep) -> RatePolytope:
    """Fourier-Motzkin projection onto the named variable subset."""
    keep = tuple(keep)
    for v in keep:
        if v not in p.variables:
            raise ValueError(f"unknown variable {v!r}")
    A, b = p.A.copy(), p.b.copy()
    names = list(p.variables)
    for v in [x for x in p.variables if x not in keep]:
        k = names.index(v)
        # implicit nonnegativity of the eliminated variable becomes explicit
        extra = np.zeros((1, A.shape[1]))
        extra[0, k] = -1.0
        A = np.vstack([A, extra])
        b = np.concatenate([b, [0.0]])
        col = A[:, k]
        pos = np.where(col > 1e-12)[0]
        neg = np.where(col < -1e-12)[0]
        zer = np.where(np.abs(col) <= 1e-12)[0]
        rows, rhs = [], []
        for i in zer:
            rows.append(A[i])
            rhs.append(b[i])
        for i in pos:
            for j in neg:
                r = A[i] / col[i] - A[j] / col[j]
                rows.append(r)
                rhs.append(b[i] / col[i] - b[j] / col[j])
        A = np.array(rows) if rows else np.zeros((0, A.shape[1]))
        b = np.array(rhs)
        A = np.delete(A, k, axis=1)
        names.pop(k)
        inter = RatePolytope(names, A, b, None)
        inter = _cleanup(inter)
        A, b = inter.A, inter.b
    # reorder columns to requested order
    perm = [names.index(v) for v in keep]
    return _cleanup(RatePolytope(keep, A[:, perm], b, None))


def vertex_sets_equal(p: RatePolytope, q: RatePolytope, tol=1e-9) -> bool:
    vp, vq = p.vertices(), q.vertices()
    if len(vp) != len(vq):
        return False
    used = np.zeros(len(vq), dtype=bool)
    for v in vp:
        d = np.max(np.abs(vq - v), axis=1)
        d[used] = np.inf
        j = int(np.argmin(d))
        if d[j] > tol:
            return False
        used[j] = True
    return True


# ---------------------------------------------------------------------------
# Region builders
# ---------------------------------------------------------------------------

def _terms(model: JointModel) -> dict:
    """All information quantities the region formulas and classifier consume."""
    m = model.mi
    return {
        "a_hk": m(("X1",), ("Y1",), ("W2",)),
        "b_hk": m(("X2",), ("Y2",), ("W1",)),
        "ap": m(("X1",), ("Y1",), ("W1", "W2")),
        "bp": m(("X2",), ("Y2",), ("W1", "W2")),
        "s1": m(("X1", "W2"), ("Y1",)),
        "m1": m(("X1", "W2"), ("Y1",), ("W1",)),
        "s2": m(("X2", "W1"), ("Y2",)),
        "m2": m(("X2", "W1"), ("Y2",), ("W2",)),
        "w1_y1_w2": m(("W1",), ("Y1",), ("W2",)),
        "w2_y1_w1": m(("W2",), ("Y1",), ("W1",)),
        "w12_y1": m(("W1", "W2"), ("Y1",)),
        "w1_y2_w2": m(("W1",), ("Y2",), ("W2",)),
        "w2_y2_w1": m(("W2",), ("Y2",), ("W1",)),
        "w12_y2": m(("W1", "W2"), ("Y2",)),
        "w1_y1": m(("W1",), ("Y1",)),
        "w2_y1": m(("W2",), ("Y1",)),
        "w1_y2": m(("W1",), ("Y2",)),
        "w2_y2": m(("W2",), ("Y2",)),
    }


def hk_region(ic: InterferenceChannel, dist: JointInputDistribution) -> RatePolytope:
    """The compact seven-inequality achievable region over (R1, R2)."""
    t = _terms(JointModel(ic, dist))
    rows = [
        ("a", [1, 0], t["a_hk"]),
        ("b", [0, 1], t["b_hk"]),
        ("c", [1, 1], t["s1"] + t["bp"]),
        ("d", [1, 1], t["ap"] + t["s2"]),
        ("e", [1, 1], t["m1"] + t["m2"]),
        ("f", [2, 1], t["s1"] + t["ap"] + t["m2"]),
        ("g", [1, 2], t["bp"] + t["s2"] + t["m1"]),
    ]
    tags, A, b = zip(*rows)
    return RatePolytope(("R1", "R2"), np.array(A, float), np.array(b), list(tags))


def appendix_extra_constraints(ic, dist) -> RatePolytope:
    """The two single-rate bounds that accompany the projected combined region."""
    t = _terms(JointModel(ic, dist))
    return RatePolytope(
        ("R1", "R2"),
        [[1, 0], [0, 1]],
        [t["ap"] + t["m2"], t["bp"] + t["m1"]],
        ["x1", "x2"],
    )


def hk_with_extras(ic, dist) -> RatePolytope:
    """Seven-inequality region intersected with the two extra single-rate
    bounds: the shadow of the combined four-rate system, i.e. what the fixed
    distribution actually achieves without dropping a common layer."""
    hk = hk_region(ic, dist)
    ex = appendix_extra_constraints(ic, dist)
    merged = RatePolytope(
        ("R1", "R2"),
        np.vstack([hk.A, ex.A]),
        np.concatenate([hk.b, ex.b]),
        hk.tags + ex.tags,
    )
    return _cleanup(merged)


achievable_region = hk_with_extras


def mac_informations(chan: DiscreteChannel, p1, p2):
    """(I(X1;Y|X2), I(X2;Y|X1), I(X1X2;Y)) for a 2-input channel, product prior."""
    if chan.num_inputs != 2:
        raise ValueError("mac_informations needs a 2-input channel")
    p1 = np.asarray(p1, float)
    p2 = np.asarray(p2, float)
    joint = p1[:, None, None] * p2[None, :, None] * chan.table  # (x1, x2, y)

    def ent(p):
        p = p[p > 0]
        return float(-(p * np.log2(p)).sum())

    h_y = ent(joint.sum(axis=(0, 1)))
    h_y_x1 = ent(joint.sum(axis=1)) - ent(p1)
    h_y_x2 = ent(joint.sum(axis=0)) - ent(p2)
    h_y_x12 = ent(joint) - ent(p1) - ent(p2)
    return (h_y_x2 - h_y_x12, h_y_x1 - h_y_x12, h_y - h_y_x12)


def mac_region(chan: DiscreteChannel, priors) -> RatePolytope:
    """Pentagon {R1 <= I(X1;Y|X2), R2 <= I(X2;Y|X1), R1+R2 <= I(X1X2;Y)}."""
    i1, i2, i12 = mac_informations(chan, *priors)
    return RatePolytope(
        ("R1", "R2"), [[1, 0], [0, 1], [1, 1]], [i1, i2, i12], ["r1", "r2", "sum"]
    )


PARTIAL_VARS = ("R1c", "R2c", "R1p", "R2p")


def partial_region(ic, dist, variant) -> RatePolytope:
    """Four-rate achievable regions of the partially-joint decoders.

    variant 1: both receivers decode the two common layers jointly first.
    variant 2: receiver 1 does, receiver 2 decodes its own common layer alone
               and then the rest jointly.  variant 3 is the mirror image.
    variant "COMBINED": the eight-inequality system whose projection matches
    the two-rate region (with two extra single-rate bounds).
    """
    t = _terms(JointModel(ic, dist))
    c1, c2, p1v, p2v = np.eye(4)
    rows = []

    def add(tag, vec, bound):
        rows.append((tag, vec, bound))

    if variant == 1:
        add("r1c_y1", c1, t["w1_y1_w2"])
        add("r1c_y2", c1, t["w1_y2_w2"])
        add("r2c_y1", c2, t["w2_y1_w1"])
        add("r2c_y2", c2, t["w2_y2_w1"])
        add("rc_y1", c1 + c2, t["w12_y1"])
        add("rc_y2", c1 + c2, t["w12_y2"])
        add("r1p", p1v, t["ap"])
        add("r2p", p2v, t["bp"])
    elif variant == 2:
        add("r1c", c1, t["w1_y1_w2"])
        add("r2c_y1", c2, t["w2_y1_w1"])
        add("r2c_y2", c2, t["w2_y2"])
        add("rc_y1", c1 + c2, t["w12_y1"])
        add("r1p", p1v, t["ap"])
        add("r2p", p2v, t["bp"])
        add("r2p_r1c", p2v + c1, t["m2"])
    elif variant == 3:
        add("r1c_y2", c1, t["w1_y2_w2"])
        add("r1c_y1", c1, t["w1_y1"])
        add("r2c", c2, t["w2_y2_w1"])
        add("rc_y2", c1 + c2, t["w12_y2"])
        add("r1p", p1v, t["ap"])
        add("r2p", p2v, t["bp"])
        add("r1p_r2c", p1v + c2, t["m1"])
    elif variant == "COMBINED":
        add("r1c", c1, t["w1_y1_w2"])
        add("r1p", p1v, t["ap"])
        add("r1p_r2c", p1v + c2, t["m1"])
        add("r1_all", p1v + c1 + c2, t["s1"])
        add("r2c", c2, t["w2_y2_w1"])
        add("r2p", p2v, t["bp"])
        add("r2p_r1c", p2v + c1, t["m2"])
        add("r2_all", p2v + c1 + c2, t["s2"])
    else:
        raise ValueError(f"unknown variant {variant!r}")
    tags, A, b = zip(*rows)
    return RatePolytope(PARTIAL_VARS, np.array(A, float), np.array(b), list(tags))


def split_to_total_rates(p: RatePolytope) -> RatePolytope:
    """Rewrite a (R1c, R2c, R1p, R2p) system over (R1, R2, R1c, R2c) by the
    substitution R1p = R1 - R1c, R2p = R2 - R2c (the private rates' own
    nonnegativity becomes R1c <= R1, R2c <= R2)."""
    if p.variables != PARTIAL_VARS:
        raise ValueError("expected a (R1c, R2c, R1p, R2p) polytope")
    i1c, i2c, i1p, i2p = range(4)
    A = np.zeros((len(p) + 2, 4))
    # order: R1, R2, R1c, R2c
    A[: len(p), 0] = p.A[:, i1p]
    A[: len(p), 1] = p.A[:, i2p]
    A[: len(p), 2] = p.A[:, i1c] - p.A[:, i1p]
    A[: len(p), 3] = p.A[:, i2c] - p.A[:, i2p]
    b = np.concatenate([p.b, [0.0, 0.0]])
    A[len(p)] = [-1, 0, 1, 0]  # R1c - R1 <= 0
    A[len(p) + 1] = [0, -1, 0, 1]
    return RatePolytope(("R1", "R2", "R1c", "R2c"), A, b, p.tags + ["r1p_nn", "r2p_nn"])


def projected_combined_region(ic, dist) -> RatePolytope:
    """Shadow of the combined four-rate system on the (R1, R2) plane."""
    return project(split_to_total_rates(partial_region(ic, dist, "COMBINED")), ("R1", "R2"))


# ---------------------------------------------------------------------------
# Dominant faces and classification
# ---------------------------------------------------------------------------

DOMINANT_TAGS = ("c", "d", "e", "f", "g")


def dominant_faces(poly: RatePolytope, tol=1e-9):
    """Maximal boundary pieces where one of the sum-rate rows c..g is tight.

    Returns a list of (tag, p0, p1) with p0 == p1 for a degenerate (corner)
    face, ordered by decreasing R1.
    """
    if poly.variables != ("R1", "R2"):
        raise ValueError("dominant_faces expects an (R1, R2) polytope")
    verts = poly.vertices()
    faces = []
    for tag in DOMINANT_TAGS:
        if tag not in poly.tags:
            continue
        row, bound = poly.row(tag)
        tight = [
            v
            for v in verts
            if abs(row @ v - bound) <= tol * max(1.0, abs(bound))
        ]
        if not tight:
            continue
        tight = np.array(tight)
        order = np.argsort(tight[:, 0])
        p0, p1 = tight[order[0]], tight[order[-1]]
        faces.append((tag, p0, p1))
    # dedupe identical segments produced by coinciding rows
    uniq = []
    for tag, p0, p1 in faces:
        if any(
            np.max(np.abs(p0 - q0)) < 1e-9 and np.max(np.abs(p1 - q1)) < 1e-9
            for _, q0, q1 in uniq
        ):
            continue
        uniq.append((tag, p0, p1))
    uniq.sort(key=lambda f: -max(f[1][0], f[2][0]))
    return uniq


def sample_dominant_face(poly: RatePolytope, n: int):
    """n points spread over the dominant faces, proportionally to length."""
    if n < 1:
        raise ValueError("n must be >= 1")
    faces = dominant_faces(poly)
    if not faces:
        raise ValueError("region has no dominant face")
    segs = [(p0, p1, float(np.linalg.norm(p1 - p0))) for _, p0, p1 in faces]
    total = sum(s[2] for s in segs)
    if total < 1e-12:
        # all faces degenerate: single corner
        return [segs[0][0].copy() for _ in range(n)]
    live = [s for s in segs if s[2] >= 1e-12]
    pts = []
    for i in range(n):
        target = (i + 0.5) / n * total
        acc = 0.0
        placed = False
        for p0, p1, ell in live:
            if target <= acc + ell:
                frac = (target - acc) / ell
                pts.append(p0 + frac * (p1 - p0))
                placed = True
                break
            acc += ell
        if not placed:
            pts.append(live[-1][1].copy())
    return pts


@dataclass
class Decomposition:
    """Private/common rate split of a dominant-face point.

    ``point_type`` is "A" (both receivers decode the common pair jointly
    first), "B1" (receiver 1 decodes its own common layer alone first) or
    "B2" (mirror).  ``target_common`` is the enlarged common-rate pair used
    for the second receiver's expansion; ``target_eff`` is the enlarged
    effective-channel pair (Type B only).  ``anchor`` names the receiver whose
    common-layer pentagon the common pair saturates.
    """

    r1p: float
    r1c: float
    r2p: float
    r2c: float
    point_type: str
    target_common: tuple
    target_eff: tuple | None = None
    anchor: int = 1
    face: str = ""
    alternates: list = field(default_factory=list)

    def rate_pair(self):
        return (self.r1p + self.r1c, self.r2p + self.r2c)

    def common_pair(self):
        return (self.r1c, self.r2c)


def _pentagon_contains(t, rx, r1c, r2c, tol):
    if rx == 1:
        return (
            r1c <= t["w1_y1_w2"] + tol
            and r2c <= t["w2_y1_w1"] + tol
            and r1c + r2c <= t["w12_y1"] + tol
        )
    return (
        r1c <= t["w1_y2_w2"] + tol
        and r2c <= t["w2_y2_w1"] + tol
        and r1c + r2c <= t["w12_y2"] + tol
    )


def verify_decomposition(dec: Decomposition, ic, dist, tol=TIGHT_TOL) -> bool:
    """Check the defining inequalities of the point's type."""
    t = _terms(JointModel(ic, dist))
    scale = max(1.0, t["s1"], t["s2"])
    tol = tol * scale
    r1c, r2c, r1p, r2p = dec.r1c, dec.r2c, dec.r1p, dec.r2p
    if min(r1c, r2c, r1p, r2p) < -tol:
        return False
    if dec.point_type == "A":
        return (
            _pentagon_contains(t, 1, r1c, r2c, tol)
            and _pentagon_contains(t, 2, r1c, r2c, tol)
            and abs(r1p - t["ap"]) <= tol
            and abs(r2p - t["bp"]) <= tol
        )
    if dec.point_type == "B1":
        # receiver 1 decodes W1 alone; common pair rides receiver 2's pentagon
        return (
            _pentagon_contains(t, 2, r1c, r2c, tol)
            and r1c <= t["w1_y1"] + tol
            and abs(r2p - t["bp"]) <= tol
            and abs(r1p - (t["m1"] - r2c)) <= tol
        )
    if dec.point_type == "B2":
        return (
            _pentagon_contains(t, 1, r1c, r2c, tol)
            and r2c <= t["w2_y2"] + tol
            and abs(r1p - t["ap"]) <= tol
            and abs(r2p - (t["m2"] - r1c)) <= tol
        )
    return False


def _balanced_enlargement(t, rx, pc):
    """Point on receiver rx's common-pentagon dominant face that dominates pc,
    maximising the smaller coordinatewise increase."""
    if rx == 1:
        total, cap1, cap2 = t["w12_y1"], t["w1_y1_w2"], t["w2_y1_w1"]
    else:
        total, cap1, cap2 = t["w12_y2"], t["w1_y2_w2"], t["w2_y2_w1"]
    r1, r2 = pc
    gap = total - r1 - r2
    if gap < 0:
        gap = 0.0
    p1 = r1 + gap / 2
    p2 = r2 + gap / 2
    # clip into the dominant-face segment [total-cap2, cap1] x mirrored
    lo1, hi1 = max(total - cap2, r1), min(cap1, total - r2)
    p1 = min(max(p1, lo1), hi1)
    p2 = total - p1
    return (p1, p2)


def _candidates_for_face(face, point, t):
    """Appendix-style case analysis: candidate decompositions for one face."""
    R1, R2 = point
    out = []
    if face == "c":
        r2p = t["bp"]
        r2c = R2 - r2p
        # joint decoding at both receivers, common pair saturating receiver 1
        out.append(("A", 1, dict(r1p=t["ap"], r1c=t["w12_y1"] - r2c, r2p=r2p, r2c=r2c)))
        # receiver 1 falls back to decoding W1 alone
        out.append(("B1", 2, dict(r1p=t["m1"] - r2c, r1c=t["w1_y1"], r2p=r2p, r2c=r2c)))
    elif face == "d":
        r1p = t["ap"]
        r1c = R1 - r1p
        out.append(("A", 2, dict(r1p=r1p, r1c=r1c, r2p=t["bp"], r2c=t["w12_y2"] - r1c)))
        out.append(("B2", 1, dict(r1p=r1p, r1c=r1c, r2p=t["m2"] - r1c, r2c=t["w2_y2"])))
    elif face == "e":
        # case 1: private-2 at its ceiling
        r2c = R2 - t["bp"]
        out.append(
            ("B1", 2, dict(r1p=t["m1"] - r2c, r1c=t["w1_y2_w2"], r2p=t["bp"], r2c=r2c))
        )
        # case 2: private-1 at its ceiling
        r2c = t["w2_y1_w1"]
        out.append(
            (
                "B2",
                1,
                dict(
                    r1p=t["ap"],
                    r1c=t["m2"] + t["w2_y1_w1"] - R2,
                    r2p=R2 - r2c,
                    r2c=r2c,
                ),
            )
        )
    elif face == "f":
        r1c = R1 - t["ap"]
        out.append(
            ("B2", 1, dict(r1p=t["ap"], r1c=r1c, r2p=t["m2"] - r1c, r2c=t["w12_y1"] - r1c))
        )
    elif face == "g":
        r2c = R2 - t["bp"]
        out.append(
            ("B1", 2, dict(r1p=t["m1"] - r2c, r1c=t["w12_y2"] - r2c, r2p=t["bp"], r2c=r2c))
        )
    return out


def classify(point, ic, dist, tol=TIGHT_TOL) -> Decomposition:
    """Decompose a dominant-face rate pair into private/common rates.

    The candidate split for each tight face follows the value-range case
    analysis (smallest admissible common rate first, which prefers the
    symmetric joint-first decoding); each candidate is verified against the
    defining inequalities of its type before being returned.
    """
    poly = hk_region(ic, dist)
    R = poly.point_array(point)
    t = _terms(JointModel(ic, dist))
    slacks = poly.slacks(R)
    tight_faces = [
        tag
        for tag, s, bnd in zip(poly.tags, slacks, poly.b)
        if tag in DOMINANT_TAGS and abs(s) <= tol * max(1.0, abs(bnd))
    ]
    if not tight_faces:
        raise ValueError(f"point {tuple(R)} is not on a dominant face")
    if np.any(slacks < -tol * np.maximum(1.0, np.abs(poly.b))):
        raise ValueError(f"point {tuple(R)} is outside the region")

    verified = []
    for face in tight_faces:
        for kind, anchor, rates in _candidates_for_face(face, R, t):
            dec = _finish_decomposition(kind, anchor, face, rates, t)
            if dec is None:
                continue
            if (
                abs(dec.r1p + dec.r1c - R[0]) <= 1e-7
                and abs(dec.r2p + dec.r2c - R[1]) <= 1e-7
                and verify_decomposition(dec, ic, dist)
            ):
                # make the split reproduce the point exactly (assignments, not solves)
                dec.r1c = float(R[0] - dec.r1p)
                dec.r2c = float(R[1] - dec.r2p)
                if dec.r1c < 0:
                    dec.r1c, dec.r1p = 0.0, float(R[0])
                if dec.r2c < 0:
                    dec.r2c, dec.r2p = 0.0, float(R[1])
                verified.append(dec)
    if not verified:
        extras = appendix_extra_constraints(ic, dist)
        if not extras.contains(R, tol=tol):
            raise ValueError(
                f"point {tuple(R)} exceeds the fixed distribution's achievable "
                "shadow; re-run with the offending sender's common layer made "
                "constant (degenerate W) and classify there"
            )
        raise ValueError(f"no admissible decomposition found for point {tuple(R)}")
    # prefer Type A, then smaller common sum
    verified.sort(key=lambda d: (d.point_type != "A", d.r1c + d.r2c))
    primary = verified[0]
    primary.alternates = verified[1:]
    return primary


def _finish_decomposition(kind, anchor, face, rates, t):
    r1p, r1c = rates["r1p"], rates["r1c"]
    r2p, r2c = rates["r2p"], rates["r2c"]
    eps = 1e-12
    vals = np.array([r1p, r1c, r2p, r2c])
    if np.min(vals) < -1e-9:
        return None
    vals = np.clip(vals, 0.0, None)
    r1p, r1c, r2p, r2c = (float(v) for v in vals)
    if kind == "A":
        target = _balanced_enlargement(t, 2 if anchor == 1 else 1, (r1c, r2c))
        return Decomposition(
            r1p, r1c, r2p, r2c, "A", target, None, anchor=anchor, face=face
        )
    if kind == "B1":
        # receiver 1: own common layer first; targets enlarge on the Y2 pentagon
        p1 = (r1p + r1c, r2c)
        target_eff = (t["s1"] - p1[1], p1[1])
        target_common = (t["w12_y2"] - r2c, r2c)
        return Decomposition(
            r1p, r1c, r2p, r2c, "B1", target_common, target_eff, anchor=2, face=face
        )
    if kind == "B2":
        p2 = (r1c, r2p + r2c)
        target_eff = (p2[0], t["s2"] - p2[0])
        target_common = (r1c, t["w12_y1"] - r1c)
        return Decomposition(
            r1p, r1c, r2p, r2c, "B2", target_common, target_eff, anchor=1, face=face
        )
    return None


# ---------------------------------------------------------------------------
# Text output
# ---------------------------------------------------------------------------

def format_polytope(p: RatePolytope) -> str:
    """One inequality per line ``c1 c2 ... <= b`` preceded by the variable list."""
    lines = ["vars " + " ".join(p.variables)]
    for row, bound, tag in zip(p.A, p.b, p.tags):
        coefs = " ".join(f"{c:.12g}" for c in row)
        suffix = f"  # {tag}" if tag else ""
        lines.append(f"{coefs} <= {bound:.12g}{suffix}")
    return "\n".join(lines) + "\n"


def format_decomposition(dec: Decomposition) -> str:
    lines = [
        f"r1p {dec.r1p:.12g}",
        f"r1c {dec.r1c:.12g}",
        f"r2p {dec.r2p:.12g}",
        f"r2c {dec.r2c:.12g}",
        f"type {dec.point_type}",
        f"face {dec.face}",
        f"anchor {dec.anchor}",
        f"target_common {dec.target_common[0]:.12g} {dec.target_common[1]:.12g}",
    ]
    if dec.target_eff is not None:
        lines.append(f"target_eff {dec.target_eff[0]:.12g} {dec.target_eff[1]:.12g}")
    return "\n".join(lines) + "\n"
