"""Compiled ensemble drivers.

Every replicate owns a counter-based uniform stream derived from its key,
so output is a pure function of the key array and never depends on thread
count or scheduling.  The selection arithmetic repeats the interpreted
sampler (walk.reinforced_index, walk.first_index) operation for operation;
positions and counts produced here are bitwise equal to the pure-Python
walk driven from the same stream.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
U64_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
U64_MIX_B = np.uint64(0x94D049BB133111EB)
U64_30 = np.uint64(30)
U64_27 = np.uint64(27)
U64_31 = np.uint64(31)
U64_11 = np.uint64(11)
INV53 = 2.0 ** -53


@njit(inline="always")
def _unit(z):
    z ^= z >> U64_30
    z *= U64_MIX_A
    z ^= z >> U64_27
    z *= U64_MIX_B
    z ^= z >> U64_31
    return (z >> U64_11) * INV53


@njit(inline="always")
def _first(m, uni, uniform_first, fixed):
    if uniform_first:
        i = int(uni * m)
        if i >= m:
            i = m - 1
        return i
    return fixed


@njit(inline="always")
def _pick(counts, k, p, q, m, uni):
    invk = 1.0 / k
    acc = 0.0
    for j in range(m):
        cj = counts[j] * invk
        acc += p * cj + q * (1.0 - cj)
        if uni < acc:
            return j
    return m - 1


@njit(cache=True, parallel=True, nogil=True)
def run_type2(keys, uvec, wvec, p, i0, j0, uniform_first, n_steps, targets,
              pos_out, counts_out):
    m = uvec.shape[0]
    mp = wvec.shape[0]
    d = uvec.shape[1]
    nt = targets.shape[0]
    q_u = (1.0 - p) / (m - 1)
    q_w = (1.0 - p) / (mp - 1)
    for r in prange(keys.shape[0]):
        z = keys[r]
        cu = np.zeros(m, np.int64)
        cw = np.zeros(mp, np.int64)
        pos = np.zeros(d, np.float64)
        tp = 0
        while tp < nt and targets[tp] == 0:
            for axis in range(d):
                pos_out[r, tp, axis] = pos[axis]
            tp += 1
        for t in range(n_steps):
            z += U64_GOLDEN
            uni = _unit(z)
            k = t >> 1
            if t & 1:
                if k == 0:
                    i = _first(mp, uni, uniform_first, j0)
                else:
                    i = _pick(cw, k, p, q_w, mp, uni)
                cw[i] += 1
                for axis in range(d):
                    pos[axis] += wvec[i, axis]
            else:
                if k == 0:
                    i = _first(m, uni, uniform_first, i0)
                else:
                    i = _pick(cu, k, p, q_u, m, uni)
                cu[i] += 1
                for axis in range(d):
                    pos[axis] += uvec[i, axis]
            while tp < nt and targets[tp] == t + 1:
                for axis in range(d):
                    pos_out[r, tp, axis] = pos[axis]
                tp += 1
        for i in range(m):
            counts_out[r, i] = cu[i]
        for i in range(mp):
            counts_out[r, m + i] = cw[i]


@njit(cache=True, parallel=True, nogil=True)
def run_type1(keys, uvec, p, i0, uniform_first, n_steps, targets,
              pos_out, counts_out):
    m = uvec.shape[0]
    d = uvec.shape[1]
    nt = targets.shape[0]
    q = (1.0 - p) / (m - 1)
    for r in prange(keys.shape[0]):
        z = keys[r]
        cu = np.zeros(m, np.int64)
        pos = np.zeros(d, np.float64)
        tp = 0
        while tp < nt and targets[tp] == 0:
            for axis in range(d):
                pos_out[r, tp, axis] = pos[axis]
            tp += 1
        for t in range(n_steps):
            z += U64_GOLDEN
            uni = _unit(z)
            if t == 0:
                i = _first(m, uni, uniform_first, i0)
            else:
                i = _pick(cu, t, p, q, m, uni)
            cu[i] += 1
            for axis in range(d):
                pos[axis] += uvec[i, axis]
            while tp < nt and targets[tp] == t + 1:
                for axis in range(d):
                    pos_out[r, tp, axis] = pos[axis]
                tp += 1
        for i in range(m):
            counts_out[r, i] = cu[i]
