"""Pure-numpy version of the pair-lattice reduction (same contract as the
compiled ``_lattice.lattice_sum``)."""

from __future__ import annotations

import numpy as np


def lattice_sum(table, o1, o2, r1, r2, F, G, eps2, product, bx, b1, b2, slot):
    T = o1.shape[0]
    out = np.zeros(T)
    for t in range(T):
        K = table[np.ix_(o1[t], o2[t])]
        if product:
            mask = (r1[t] > eps2)[:, None] & (r2[t] > eps2)[None, :]
        else:
            mask = (r1[t][:, None] + r2[t][None, :]) > eps2
        Km = np.where(mask, K, 0.0)
        Fv, Gv = F, G
        if slot == 1:
            Fv = F * (bx[t] - b1)
        elif slot == 2:
            Gv = G * (bx[t] - b2)
        out[t] = Fv @ Km @ Gv
    return out
