"""Brute-force reference computations over all message configurations.

These are the correctness anchors for the successive-cancellation engines:
posteriors computed by summing the joint measure over every configuration
consistent with the conditioning, with no recursive structure at all.  Only
usable at small N.
"""

from __future__ import annotations

import numpy as np

from .polar import _all_configs, polar_transform


class PairEnumeration:
    """All (u1, u2) configurations of a two-sender code with leaf measures.

    ``leaf`` has shape (N, q1, q2): per-position joint measure of the two
    codeword symbols, priors and observed outputs folded in.  For single-user
    problems use q2 == 1.
    """

    def __init__(self, leaf):
        leaf = np.asarray(leaf, dtype=np.float64)
        self.N, self.q1, self.q2 = leaf.shape
        self.leaf = leaf
        self.u1 = _all_configs(self.q1, self.N)
        self.u2 = _all_configs(self.q2, self.N)
        x1 = polar_transform(self.u1, self.q1)
        x2 = polar_transform(self.u2, self.q2)
        W = np.ones((self.q1**self.N, self.q2**self.N))
        for t in range(self.N):
            W *= leaf[t][x1[:, t]][:, x2[:, t]]
        self.weights = W

    def _mask(self, known1, known2):
        """Row/column selector for configurations matching the known symbols.

        known1/known2 are length-N int arrays with -1 for unknown positions.
        """
        known1 = np.asarray(known1)
        known2 = np.asarray(known2)
        m1 = np.ones(self.u1.shape[0], dtype=bool)
        for t in range(self.N):
            if known1[t] >= 0:
                m1 &= self.u1[:, t] == known1[t]
        m2 = np.ones(self.u2.shape[0], dtype=bool)
        for t in range(self.N):
            if known2[t] >= 0:
                m2 &= self.u2[:, t] == known2[t]
        return m1, m2

    def posterior(self, user: int, index: int, known1, known2) -> np.ndarray:
        """P(u_user^index = . | observations, known symbols), normalised.

        The target position must be unknown in the corresponding mask.
        """
        m1, m2 = self._mask(known1, known2)
        sub = self.weights[m1][:, m2]
        digits = (self.u1[m1, index] if user == 0 else self.u2[m2, index])
        q = self.q1 if user == 0 else self.q2
        totals = np.zeros(q)
        if user == 0:
            row_mass = sub.sum(axis=1)
            np.add.at(totals, digits, row_mass)
        else:
            col_mass = sub.sum(axis=0)
            np.add.at(totals, digits, col_mass)
        s = totals.sum()
        if s <= 0:
            raise ValueError("conditioning event has zero probability")
        return totals / s

    def map_configuration(self, known1, known2):
        """Most likely full (u1, u2) configuration given the conditioning."""
        m1, m2 = self._mask(known1, known2)
        sub = self.weights[m1][:, m2]
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        return self.u1[m1][i].copy(), self.u2[m2][j].copy()


def sc_chain_posteriors(leaf, path_order, decisions):
    """Posterior at every chain position given earlier *decided* symbols.

    ``decisions[(user, index)]`` supplies the value fixed at each position once
    visited; returns the list of posteriors in chain order.  This is the
    brute-force mirror of a successive-cancellation pass.
    """
    enum = PairEnumeration(leaf)
    known1 = np.full(enum.N, -1)
    known2 = np.full(enum.N, -1)
    out = []
    for user, idx in path_order:
        out.append(enum.posterior(user, idx, known1, known2))
        val = decisions[(user, idx)]
        if user == 0:
            known1[idx] = val
        else:
            known2[idx] = val
    return out
