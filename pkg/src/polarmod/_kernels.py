"""Compiled hot loops: polar transform, SC/SCL decoding, ASK demapping.

Everything here operates on plain numpy arrays (bits as int8, LLRs as
float64) so the kernels stay trivially cacheable. The public, documented
wrappers live in the sibling modules; nothing in here validates inputs.

Stage convention for the decoders: stage ``kappa = log2(n)`` holds the n
channel LLRs, stage 0 holds the LLR of the leaf currently being decided.
LLR memory is compact (stage s occupies ``[2^s - 1, 2^(s+1) - 1)`` of a
``2n - 1`` buffer and only ever holds the block containing the current
leaf); partial-sum memory C is kept full-size per stage so that g-steps
can read completed left-sibling codewords by global position.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _boxplus(a, b, llr_max):
    # sign(a)sign(b)min(|a|,|b|) + log1p(e^-|a+b|) - log1p(e^-|a-b|)
    s = min(abs(a), abs(b))
    if (a < 0.0) != (b < 0.0):
        s = -s
    v = s + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))
    if v > llr_max:
        return llr_max
    if v < -llr_max:
        return -llr_max
    return v


@njit(cache=True, inline="always")
def _softplus(x):
    # log(1 + e^-x), stable for either sign
    if x >= 0.0:
        return np.log1p(np.exp(-x))
    return -x + np.log1p(np.exp(x))


@njit(cache=True, inline="always")
def _ctz(x):
    z = 0
    while (x & 1) == 0:
        x >>= 1
        z += 1
    return z


@njit(cache=True)
def polar_transform_kernel(u):
    n = u.shape[0]
    x = u.copy()
    step = 1
    while step < n:
        for base in range(0, n, 2 * step):
            for j in range(base, base + step):
                x[j] ^= x[j + step]
        step *= 2
    return x


@njit(cache=True, inline="always")
def _f_stage(lmem, s, llr_max):
    half = 1 << s
    po = (1 << (s + 1)) - 1
    co = half - 1
    for j in range(half):
        lmem[co + j] = _boxplus(lmem[po + j], lmem[po + half + j], llr_max)


@njit(cache=True, inline="always")
def _g_stage(lmem, c, phi, s):
    half = 1 << s
    po = (1 << (s + 1)) - 1
    co = half - 1
    left = ((phi >> s) << s) - half
    for j in range(half):
        a = lmem[po + j]
        b = lmem[po + half + j]
        if c[s, left + j]:
            lmem[co + j] = b - a
        else:
            lmem[co + j] = b + a


@njit(cache=True, inline="always")
def _update_llrs(lmem, c, phi, kappa, llr_max):
    if phi == 0:
        for s in range(kappa - 1, -1, -1):
            _f_stage(lmem, s, llr_max)
    else:
        z = _ctz(phi)
        _g_stage(lmem, c, phi, z)
        for s in range(z - 1, -1, -1):
            _f_stage(lmem, s, llr_max)


@njit(cache=True, inline="always")
def _update_bits(c, phi, bit, kappa):
    c[0, phi] = bit
    s = 1
    while s <= kappa and ((phi + 1) & ((1 << s) - 1)) == 0:
        half = 1 << (s - 1)
        base = phi + 1 - (1 << s)
        for j in range(half):
            c[s, base + j] = c[s - 1, base + j] ^ c[s - 1, base + half + j]
            c[s, base + half + j] = c[s - 1, base + half + j]
        s += 1


@njit(cache=True)
def sc_decode_kernel(channel_llrs, is_frozen, frozen_u, llr_max):
    n = channel_llrs.shape[0]
    kappa = 0
    while (1 << kappa) < n:
        kappa += 1
    lmem = np.empty(2 * n - 1, dtype=np.float64)
    lmem[n - 1:] = channel_llrs
    c = np.zeros((kappa + 1, n), dtype=np.int8)
    u = np.zeros(n, dtype=np.int8)
    for phi in range(n):
        _update_llrs(lmem, c, phi, kappa, llr_max)
        if is_frozen[phi]:
            b = frozen_u[phi]
        else:
            b = np.int8(1) if lmem[0] < 0.0 else np.int8(0)
        u[phi] = b
        _update_bits(c, phi, b, kappa)
    return u, c[kappa].copy()


@njit(cache=True)
def genie_sc_error_kernel(channel_llrs, u_true, err_counts, llr_max):
    """SC pass with decisions forced to the true bits (genie); for every
    position where the hard decision disagrees with the truth, bump the
    caller's error counter."""
    n = channel_llrs.shape[0]
    kappa = 0
    while (1 << kappa) < n:
        kappa += 1
    lmem = np.empty(2 * n - 1, dtype=np.float64)
    lmem[n - 1:] = channel_llrs
    c = np.zeros((kappa + 1, n), dtype=np.int8)
    for phi in range(n):
        _update_llrs(lmem, c, phi, kappa, llr_max)
        hard = np.int8(1) if lmem[0] < 0.0 else np.int8(0)
        if hard != u_true[phi]:
            err_counts[phi] += 1
        _update_bits(c, phi, u_true[phi], kappa)


@njit(cache=True)
def scl_block_kernel(llrs, metrics_in, is_frozen, frozen_u, list_size, llr_max):
    """Extend paths through one length-n polar block.

    llrs: (P, n) per-path channel LLRs. Returns (u, c, metrics, origins)
    where origins[a] is the input path an output path descends from.
    Paths in and out are ordered lexicographically by their decided bits,
    which makes the stable metric sort realize the smallest-lex tie-break.
    """
    num_in, n = llrs.shape
    kappa = 0
    while (1 << kappa) < n:
        kappa += 1
    cap = 2 * list_size

    lmem = np.empty((cap, 2 * n - 1), dtype=np.float64)
    c = np.zeros((cap, kappa + 1, n), dtype=np.int8)
    u = np.zeros((cap, n), dtype=np.int8)
    met = np.zeros(cap, dtype=np.float64)
    org = np.zeros(cap, dtype=np.int64)

    order = np.empty(cap, dtype=np.int64)
    active = num_in
    for p in range(num_in):
        lmem[p, n - 1:] = llrs[p]
        met[p] = metrics_in[p]
        org[p] = p
        order[p] = p

    free = np.empty(cap, dtype=np.int64)
    nfree = 0
    for slot in range(cap - 1, num_in - 1, -1):
        free[nfree] = slot
        nfree += 1

    cand_met = np.empty(cap, dtype=np.float64)
    sort_idx = np.empty(cap, dtype=np.int64)
    twin = np.empty(list_size, dtype=np.int64)
    child_cnt = np.empty(list_size, dtype=np.int64)
    new_order = np.empty(cap, dtype=np.int64)

    for phi in range(n):
        for a in range(active):
            slot = order[a]
            _update_llrs(lmem[slot], c[slot], phi, kappa, llr_max)

        if is_frozen[phi]:
            b = frozen_u[phi]
            sgn = 1.0 - 2.0 * b
            for a in range(active):
                slot = order[a]
                met[slot] += _softplus(sgn * lmem[slot, 0])
                u[slot, phi] = b
                _update_bits(c[slot], phi, b, kappa)
            continue

        ncand = 2 * active
        for a in range(active):
            slot = order[a]
            l0 = lmem[slot, 0]
            cand_met[2 * a] = met[slot] + _softplus(l0)
            cand_met[2 * a + 1] = met[slot] + _softplus(-l0)

        if ncand <= list_size:
            nkeep = ncand
            for i in range(nkeep):
                sort_idx[i] = i
        else:
            # stable insertion sort of candidate indices by metric
            for i in range(ncand):
                sort_idx[i] = i
            for i in range(1, ncand):
                key = sort_idx[i]
                kv = cand_met[key]
                j = i - 1
                while j >= 0 and cand_met[sort_idx[j]] > kv:
                    sort_idx[j + 1] = sort_idx[j]
                    j -= 1
                sort_idx[j + 1] = key
            nkeep = list_size
            # restore candidate (lex) order among the survivors
            for i in range(1, nkeep):
                key = sort_idx[i]
                j = i - 1
                while j >= 0 and sort_idx[j] > key:
                    sort_idx[j + 1] = sort_idx[j]
                    j -= 1
                sort_idx[j + 1] = key

        for a in range(active):
            child_cnt[a] = 0
        for i in range(nkeep):
            child_cnt[sort_idx[i] >> 1] += 1

        # clone parents whose both children survive, before either child
        # mutates the shared state
        for a in range(active):
            if child_cnt[a] == 2:
                src = order[a]
                nfree -= 1
                dst = free[nfree]
                twin[a] = dst
                lmem[dst] = lmem[src]
                c[dst] = c[src]
                u[dst] = u[src]
                met[dst] = met[src]
                org[dst] = org[src]

        for i in range(nkeep):
            cand = sort_idx[i]
            a = cand >> 1
            bit = np.int8(cand & 1)
            if child_cnt[a] == 2 and bit == 1:
                slot = twin[a]
            else:
                slot = order[a]
            met[slot] = cand_met[cand]
            u[slot, phi] = bit
            _update_bits(c[slot], phi, bit, kappa)
            new_order[i] = slot

        for a in range(active):
            if child_cnt[a] == 0:
                free[nfree] = order[a]
                nfree += 1

        active = nkeep
        for i in range(active):
            order[i] = new_order[i]

    u_out = np.empty((active, n), dtype=np.int8)
    c_out = np.empty((active, n), dtype=np.int8)
    met_out = np.empty(active, dtype=np.float64)
    org_out = np.empty(active, dtype=np.int64)
    for a in range(active):
        slot = order[a]
        u_out[a] = u[slot]
        c_out[a] = c[slot, kappa]
        met_out[a] = met[slot]
        org_out[a] = org[slot]
    return u_out, c_out, met_out, org_out


@njit(cache=True, inline="always")
def _lse_pair(e, bits_col, sel0):
    """log-sum-exp of e[i] over entries whose bit equals sel0."""
    mx = -np.inf
    for i in range(e.shape[0]):
        if bits_col[i] == sel0 and e[i] > mx:
            mx = e[i]
    if mx == -np.inf:
        return mx
    s = 0.0
    for i in range(e.shape[0]):
        if bits_col[i] == sel0:
            s += np.exp(e[i] - mx)
    return mx + np.log(s)


@njit(cache=True, inline="always")
def _clip(v, llr_max):
    if v > llr_max:
        return llr_max
    if v < -llr_max:
        return -llr_max
    return v


@njit(cache=True, inline="always")
def _exact_llr_scalar(y, inv2s2, amps, bits, level, prefix, e):
    """Exact conditional bit LLR: prefix fixes bit levels < level."""
    nsym = amps.shape[0]
    m0 = -np.inf
    m1 = -np.inf
    for i in range(nsym):
        ok = True
        for t in range(level):
            if bits[i, t] != prefix[t]:
                ok = False
                break
        if not ok:
            e[i] = np.nan
            continue
        d = y - amps[i]
        v = -d * d * inv2s2
        e[i] = v
        if bits[i, level] == 0:
            if v > m0:
                m0 = v
        else:
            if v > m1:
                m1 = v
    s0 = 0.0
    s1 = 0.0
    for i in range(nsym):
        if np.isnan(e[i]):
            continue
        if bits[i, level] == 0:
            s0 += np.exp(e[i] - m0)
        else:
            s1 += np.exp(e[i] - m1)
    return (m0 + np.log(s0)) - (m1 + np.log(s1))


@njit(cache=True)
def demap_level_multi_kernel(kind_id, y, sigma, amps, polar_bits, aux_bits,
                             decided, level, out, llr_max):
    """Per-path level-`level` demapping for one block of n symbols.

    kind_id: 0 = SP (exact conditional on the polar label), 1 = MM-style
    combining of unconditional auxiliary bitwise LLRs (used by both MM and
    MM-SP; the auxiliary table distinguishes them). decided: (P, n, m)
    codeword bits of the already-decoded levels, per path.
    """
    npaths = decided.shape[0]
    n = y.shape[0]
    nsym = amps.shape[0]
    inv2s2 = 1.0 / (2.0 * sigma * sigma)
    e = np.empty(nsym, dtype=np.float64)

    if kind_id == 0:
        for i in range(n):
            for p in range(npaths):
                v = _exact_llr_scalar(y[i], inv2s2, amps, polar_bits,
                                      level, decided[p, i], e)
                out[p, i] = _clip(v, llr_max)
        return

    lt = np.empty(3, dtype=np.float64)
    for i in range(n):
        for s in range(nsym):
            d = y[i] - amps[s]
            e[s] = -d * d * inv2s2
        for j in range(3):
            lt[j] = _clip(_lse_pair(e, aux_bits[:, j], np.int8(0))
                          - _lse_pair(e, aux_bits[:, j], np.int8(1)), llr_max)
        for p in range(npaths):
            if level == 0:
                v = _boxplus(_boxplus(lt[0], lt[1], llr_max), lt[2], llr_max)
            elif level == 1:
                s1 = 1.0 - 2.0 * decided[p, i, 0]
                v = s1 * lt[0] + _boxplus(lt[1], lt[2], llr_max)
            else:
                s2 = 1.0 - 2.0 * decided[p, i, 1]
                v = lt[2] + s2 * lt[1]
            out[p, i] = _clip(v, llr_max)
