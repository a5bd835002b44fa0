"""Shared test fixtures: random instances and slow reference computations.

The oracles here are deliberately naive (nested python loops over joint
states) so they stay independent of the vectorised library paths they check.
"""

import math

import numpy as np

from hkpolar.channels import InterferenceChannel, JointInputDistribution


def random_ic(rng, q1=2, q2=2, n1=2, n2=2, concentration=1.0):
    jt = rng.gamma(concentration, size=(q1, q2, n1, n2))
    jt /= jt.sum(axis=(2, 3), keepdims=True)
    return InterferenceChannel(q1, q2, n1, n2, jt)


def random_dist(rng, qw1=2, qx1=2, qw2=2, qx2=2, concentration=1.0):
    p1 = rng.gamma(concentration, size=(qw1, qx1))
    p2 = rng.gamma(concentration, size=(qw2, qx2))
    return JointInputDistribution(p1 / p1.sum(), p2 / p2.sum())


def no_interference_ic():
    """y1 = x1 and y2 = x2, binary, noiseless."""
    jt = np.zeros((2, 2, 2, 2))
    for a in range(2):
        for b in range(2):
            jt[a, b, a, b] = 1.0
    return InterferenceChannel(2, 2, 2, 2, jt)


def uniform_const_w_dist(qx1=2, qx2=2):
    """Uniform X's, W's pinned to symbol 0 of a degenerate prime-2 alphabet."""
    p1 = np.zeros((2, qx1))
    p1[0, :] = 1.0 / qx1
    p2 = np.zeros((2, qx2))
    p2[0, :] = 1.0 / qx2
    return JointInputDistribution(p1, p2)


def enumerate_joint(ic, dist):
    """Dict mapping (w1, x1, w2, x2, y1, y2) -> probability, by plain loops."""
    out = {}
    q = (dist.w1.size, dist.x1.size, dist.w2.size, dist.x2.size, ic.y1_size, ic.y2_size)
    for w1 in range(q[0]):
        for x1 in range(q[1]):
            for w2 in range(q[2]):
                for x2 in range(q[3]):
                    base = dist.pw1x1[w1, x1] * dist.pw2x2[w2, x2]
                    if base == 0:
                        continue
                    for y1 in range(q[4]):
                        for y2 in range(q[5]):
                            p = base * ic.joint_table[x1, x2, y1, y2]
                            if p > 0:
                                out[(w1, x1, w2, x2, y1, y2)] = p
    return out


_SLOT = {"W1": 0, "X1": 1, "W2": 2, "X2": 3, "Y1": 4, "Y2": 5}


def oracle_mi(ic, dist, a_vars, b_vars, c_vars=()):
    """Conditional mutual information by direct summation over joint states."""
    joint = enumerate_joint(ic, dist)

    def key(state, vars_):
        return tuple(state[_SLOT[v]] for v in sorted(vars_))

    pabc, pac, pbc, pc = {}, {}, {}, {}
    for state, p in joint.items():
        kabc = key(state, set(a_vars) | set(b_vars) | set(c_vars))
        kac = key(state, set(a_vars) | set(c_vars))
        kbc = key(state, set(b_vars) | set(c_vars))
        kc = key(state, set(c_vars))
        pabc[kabc] = pabc.get(kabc, 0.0) + p
        pac[kac] = pac.get(kac, 0.0) + p
        pbc[kbc] = pbc.get(kbc, 0.0) + p
        pc[kc] = pc.get(kc, 0.0) + p

    total = 0.0
    for state, p in joint.items():
        kabc = key(state, set(a_vars) | set(b_vars) | set(c_vars))
        kac = key(state, set(a_vars) | set(c_vars))
        kbc = key(state, set(b_vars) | set(c_vars))
        kc = key(state, set(c_vars))
        # sum over joint states weights each (a,b,c) cell exactly once per unit mass
        total += p * math.log2(pabc[kabc] * pc[kc] / (pac[kac] * pbc[kbc]))
    return total
