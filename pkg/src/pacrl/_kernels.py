"""Compiled inner loops of the list decoder.

Per-path storage (N = 2**n):
  alpha[path, off(l) : off(l) + (N >> l)]    LLRs of the active node on layer l
  beta[path, side, off(l) : ...]             partial sums of the left (0) / right (1) child
with off(l) = 2N - 2 (N >> l). Layer 0 holds the channel LLRs, layer n the decision LLR.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _off(lam, N):
    return 2 * N - 2 * (N >> lam)


@njit(cache=True, inline="always")
def softplus(t):
    if t > 0.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


@njit(cache=True, inline="always")
def f_exact(a, b):
    # 2 atanh(tanh(a/2) tanh(b/2)) written as min-sum plus two correction terms
    s = 1.0
    if a < 0.0:
        s = -s
    if b < 0.0:
        s = -s
    if a == 0.0 or b == 0.0:
        return 0.0
    return (s * min(abs(a), abs(b))
            + math.log1p(math.exp(-abs(a + b)))
            - math.log1p(math.exp(-abs(a - b))))


@njit(cache=True, inline="always")
def f_minsum(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    m = min(abs(a), abs(b))
    if (a < 0.0) != (b < 0.0):
        return -m
    return m


@njit(cache=True)
def update_llrs(alpha, beta, k, n, N, minsum):
    """Propagate LLRs from the deepest still-valid layer down to leaf ``k``."""
    if k == 0:
        start = 1
    else:
        tz = 0
        while (k >> tz) & 1 == 0:
            tz += 1
        start = n - tz
    for lam in range(start, n + 1):
        size = N >> lam
        po = _off(lam - 1, N)
        co = _off(lam, N)
        if (k >> (n - lam)) & 1:
            for i in range(size):
                if beta[0, co + i]:
                    alpha[co + i] = alpha[po + size + i] - alpha[po + i]
                else:
                    alpha[co + i] = alpha[po + size + i] + alpha[po + i]
        elif minsum:
            for i in range(size):
                alpha[co + i] = f_minsum(alpha[po + i], alpha[po + size + i])
        else:
            for i in range(size):
                alpha[co + i] = f_exact(alpha[po + i], alpha[po + size + i])
    return alpha[2 * N - 2]


@njit(cache=True)
def set_bit(beta, k, n, N, bit):
    """Store decision ``bit`` for leaf ``k`` and fold completed subtrees upward."""
    beta[k & 1, 2 * N - 2] = bit
    lam = n
    while lam > 0 and (k >> (n - lam)) & 1:
        size = N >> lam
        co = _off(lam, N)
        po = _off(lam - 1, N)
        pside = (k >> (n - lam + 1)) & 1
        for i in range(size):
            beta[pside, po + i] = beta[0, co + i] ^ beta[1, co + i]
            beta[pside, po + size + i] = beta[1, co + i]
        lam -= 1


@njit(cache=True, inline="always")
def conv_feedback(vrow, k, w):
    """XOR of w_j v_{k-j} over j >= 1: the precoder contribution of earlier bits."""
    acc = 0
    p = w.shape[0]
    for j in range(1, p):
        if j > k:
            break
        if w[j]:
            acc ^= vrow[k - j]
    return acc


@njit(cache=True)
def step_frozen(alpha, beta, v, u, pm, m, k, w, n, N, minsum):
    for i in range(m):
        leaf = update_llrs(alpha[i], beta[i], k, n, N, minsum)
        ub = conv_feedback(v[i], k, w)
        v[i, k] = 0
        u[i, k] = ub
        if ub:
            pm[i] += softplus(leaf)
        else:
            pm[i] += softplus(-leaf)
        set_bit(beta[i], k, n, N, ub)


@njit(cache=True, inline="always")
def _copy_path(src_a, src_b, src_v, src_u, i, dst_a, dst_b, dst_v, dst_u, j):
    # explicit loops: numba row-slice assignment is far slower at these sizes
    for t in range(src_a.shape[1]):
        dst_a[j, t] = src_a[i, t]
    for s in range(2):
        for t in range(src_b.shape[2]):
            dst_b[j, s, t] = src_b[i, s, t]
    for t in range(src_v.shape[1]):
        dst_v[j, t] = src_v[i, t]
        dst_u[j, t] = src_u[i, t]


@njit(cache=True)
def step_info(alpha, beta, v, u, pm, az, m, k, w, n, N, L, minsum,
              s_alpha, s_beta, s_v, s_u, s_pm, s_az, cpm, cub):
    """Branch every path on v_k in {0, 1}, keep the L best; returns the new path count.

    Candidates are enumerated as (parent position, v_k). Survivors are the L
    smallest metrics, ties resolved by that enumeration order, and they keep it.
    """
    nc = 2 * m
    for i in range(m):
        leaf = update_llrs(alpha[i], beta[i], k, n, N, minsum)
        fb = conv_feedback(v[i], k, w)
        for b in range(2):
            ub = b ^ fb
            cub[2 * i + b] = ub
            if ub:
                cpm[2 * i + b] = pm[i] + softplus(leaf)
            else:
                cpm[2 * i + b] = pm[i] + softplus(-leaf)
    nm = 0
    for c in range(nc):
        if nc > L:
            rank = 0
            pc = cpm[c]
            for d in range(nc):
                if cpm[d] < pc or (cpm[d] == pc and d < c):
                    rank += 1
            if rank >= L:
                continue
        par = c >> 1
        b = c & 1
        _copy_path(alpha, beta, v, u, par, s_alpha, s_beta, s_v, s_u, nm)
        s_v[nm, k] = b
        s_u[nm, k] = cub[c]
        s_pm[nm] = cpm[c]
        s_az[nm] = az[par] if b == 0 else 0
        set_bit(s_beta[nm], k, n, N, cub[c])
        nm += 1
    for j in range(nm):
        _copy_path(s_alpha, s_beta, s_v, s_u, j, alpha, beta, v, u, j)
        pm[j] = s_pm[j]
        az[j] = s_az[j]
    return nm


def alloc_state(N, L):
    return dict(
        alpha=np.zeros((L, 2 * N)),
        beta=np.zeros((L, 2, 2 * N), dtype=np.uint8),
        v=np.zeros((L, N), dtype=np.uint8),
        u=np.zeros((L, N), dtype=np.uint8),
        pm=np.zeros(L),
        az=np.zeros(L, dtype=np.uint8),
        cpm=np.zeros(2 * L),
        cub=np.zeros(2 * L, dtype=np.uint8),
    )


@njit(cache=True)
def decode_all(llr, info_mask, w, L, minsum):
    """Full SCL decode; returns (v, u, pm, allzero_flags) of the surviving paths."""
    N = llr.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    alpha = np.zeros((L, 2 * N))
    beta = np.zeros((L, 2, 2 * N), dtype=np.uint8)
    v = np.zeros((L, N), dtype=np.uint8)
    u = np.zeros((L, N), dtype=np.uint8)
    pm = np.zeros(L)
    az = np.zeros(L, dtype=np.uint8)
    s_alpha = np.zeros((L, 2 * N))
    s_beta = np.zeros((L, 2, 2 * N), dtype=np.uint8)
    s_v = np.zeros((L, N), dtype=np.uint8)
    s_u = np.zeros((L, N), dtype=np.uint8)
    s_pm = np.zeros(L)
    s_az = np.zeros(L, dtype=np.uint8)
    cpm = np.zeros(2 * L)
    cub = np.zeros(2 * L, dtype=np.uint8)
    for t in range(N):
        alpha[0, t] = llr[t]
    az[0] = 1
    m = 1
    for k in range(N):
        if info_mask[k]:
            m = step_info(alpha, beta, v, u, pm, az, m, k, w, n, N, L, minsum,
                          s_alpha, s_beta, s_v, s_u, s_pm, s_az, cpm, cub)
        else:
            step_frozen(alpha, beta, v, u, pm, m, k, w, n, N, minsum)
    return v[:m].copy(), u[:m].copy(), pm[:m].copy(), az[:m].copy()


@njit(cache=True)
def best_v(llr, info_mask, w, L, minsum):
    """v-vector of the minimum-metric path (first in list order on ties)."""
    v, u, pm, az = decode_all(llr, info_mask, w, L, minsum)
    return v[np.argmin(pm)].copy()
