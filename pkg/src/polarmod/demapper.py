"""Successive polar demappers for 8-ASK: SP (matched), MM and MM-SP
(mismatched), emitting per-level LLRs conditioned on the already-decoded
levels.

The matched SP demapper is the exact conditional LLR of the polar
set-partitioning label bit given the channel output and the prior-level
bits. The two mismatched demappers first compute the three unconditional
bitwise LLRs of their auxiliary (BRGC / LSB-BRGC) label and then combine
them as if independent:

    level 1:  Lt1 [+] Lt2 [+] Lt3
    level 2:  (1 - 2*b1) * Lt1  +  (Lt2 [+] Lt3)
    level 3:  Lt3  +  (1 - 2*b2) * Lt2

where [+] is the boxplus operation and b1, b2 are the decided bits of the
earlier levels entering as sign corrections. The combination reflects the
GF(2) label transform (aux_j = polar_j xor polar_j+1); it reuses each
auxiliary observation across levels, which is why these demappers are
mismatched: the auxiliary LLRs all derive from the same channel output.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .polar import LLR_MAX, boxplus
from .modulation import MM, SP, LabelMap, build_label_map

SP_KIND = "SP"
MM_KIND = "MM"
MM_SP_KIND = "MM_SP"
DEMAPPER_KINDS = (SP_KIND, MM_KIND, MM_SP_KIND)

# mapper used by each demapper, and the kernel dispatch id
_MAPPER_OF_KIND = {SP_KIND: SP, MM_KIND: MM, MM_SP_KIND: SP}
_KERNEL_ID = {SP_KIND: 0, MM_KIND: 1, MM_SP_KIND: 1}


def mapper_for(kind):
    """Label-map kind the given demapper operates on."""
    if kind not in DEMAPPER_KINDS:
        raise ValueError(f"unknown demapper kind {kind!r}")
    return _MAPPER_OF_KIND[kind]


def default_label_map(kind, m=3):
    return build_label_map(mapper_for(kind), m)


@dataclass
class OpCounter:
    """Tally of likelihood work, for complexity comparisons."""

    exp_terms: int = 0
    boxplus_ops: int = 0


@dataclass
class DemapContext:
    """One received symbol plus everything level j conditions on."""

    y: float
    sigma: float
    label_map: LabelMap
    prefix: tuple = field(default_factory=tuple)


def _sq_llrs(y, sigma, amps):
    """Gaussian log-likelihood (up to a constant) of each amplitude."""
    y = np.asarray(y, dtype=np.float64)
    return -((y[..., None] - amps) ** 2) / (2.0 * sigma ** 2)


def _lse(a, axis=-1):
    return np.logaddexp.reduce(a, axis=axis)


def exact_bit_llr(y, sigma, lmap, level, prefix=(), space="polar",
                  llr_max=LLR_MAX, counter=None):
    """Exact conditional LLR of bit `level` (0-based) given the bits of
    levels 0..level-1 of the same labeling.

    `space` selects which labeling of the map the bit indices refer to
    ("polar" or "aux"). Vectorized over y; `prefix` must then be an
    (len(y), level) bit array.
    """
    bits = lmap.polar_bits if space == "polar" else lmap.aux_bits
    y = np.asarray(y, dtype=np.float64)
    scalar = y.ndim == 0
    y = np.atleast_1d(y)
    prefix = np.asarray(prefix, dtype=np.int8).reshape(y.shape[0], level)

    e = _sq_llrs(y, sigma, lmap.amplitudes)
    out = np.empty(y.shape[0], dtype=np.float64)
    # group received samples by prefix value: the consistent symbol set is
    # the same within a group, so each group is one vectorized pass
    pref_vals = prefix @ (1 << np.arange(level - 1, -1, -1)) if level else \
        np.zeros(y.shape[0], dtype=np.int64)
    tab_vals = bits[:, :level] @ (1 << np.arange(level - 1, -1, -1)) if level else \
        np.zeros(bits.shape[0], dtype=np.int64)
    for v in np.unique(pref_vals):
        rows = pref_vals == v
        consistent = tab_vals == v
        set0 = consistent & (bits[:, level] == 0)
        set1 = consistent & (bits[:, level] == 1)
        if not set0.any() or not set1.any():
            raise RuntimeError("empty consistent symbol set; label table broken")
        out[rows] = _lse(e[rows][:, set0]) - _lse(e[rows][:, set1])
        if counter is not None:
            counter.exp_terms += int(rows.sum()) * int(consistent.sum())
    out = np.clip(out, -llr_max, llr_max)
    return float(out[0]) if scalar else out


def aux_bit_llrs(y, sigma, lmap, llr_max=LLR_MAX, counter=None):
    """Unconditional bitwise LLRs of the auxiliary label, (len(y), m)."""
    y = np.asarray(y, dtype=np.float64)
    e = _sq_llrs(y, sigma, lmap.amplitudes)
    out = np.empty(y.shape + (lmap.m,), dtype=np.float64)
    for j in range(lmap.m):
        b = lmap.aux_bits[:, j]
        out[..., j] = _lse(e[..., b == 0]) - _lse(e[..., b == 1])
        if counter is not None:
            counter.exp_terms += e.shape[0] * e.shape[1]
    return np.clip(out, -llr_max, llr_max)


def _combine_mismatched(lt, level, prefix, llr_max, counter=None):
    """Figure-wiring of the mismatched demappers on auxiliary LLRs."""
    if counter is not None:
        counter.boxplus_ops += lt.shape[0] * (2 if level == 0 else (1 if level == 1 else 0))
    if level == 0:
        out = boxplus(boxplus(lt[:, 0], lt[:, 1], llr_max), lt[:, 2], llr_max)
    elif level == 1:
        out = (1.0 - 2.0 * prefix[:, 0]) * lt[:, 0] + boxplus(lt[:, 1], lt[:, 2], llr_max)
    elif level == 2:
        out = lt[:, 2] + (1.0 - 2.0 * prefix[:, 1]) * lt[:, 1]
    else:
        raise ValueError("mismatched demappers are defined for m = 3 only")
    return np.clip(out, -llr_max, llr_max)


def demap_level_block(kind, y, sigma, lmap, level, prefix=None,
                      llr_max=LLR_MAX, counter=None):
    """Level-`level` LLRs for a block of received symbols.

    prefix: (len(y), level) decided bits of the earlier levels (decoder
    decisions in the receiver chain, true bits under genie conditioning).
    """
    if kind not in DEMAPPER_KINDS:
        raise ValueError(f"unknown demapper kind {kind!r}")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if prefix is None:
        prefix = np.zeros((y.shape[0], 0), dtype=np.int8)
    prefix = np.asarray(prefix, dtype=np.int8).reshape(y.shape[0], -1)
    if prefix.shape[1] < level:
        raise ValueError(f"level {level} needs {level} decided prefix bits")
    if kind == SP_KIND:
        return exact_bit_llr(y, sigma, lmap, level, prefix[:, :level],
                             space="polar", llr_max=llr_max, counter=counter)
    if lmap.m != 3:
        raise ValueError("mismatched demappers are defined for m = 3 only")
    lt = aux_bit_llrs(y, sigma, lmap, llr_max=llr_max, counter=counter)
    return _combine_mismatched(lt, level, prefix, llr_max, counter=counter)


def demap_level(kind, ctx, level, llr_max=LLR_MAX):
    """Scalar demapping of one symbol; ctx.prefix must hold `level` bits."""
    if len(ctx.prefix) != level:
        raise ValueError(f"prefix has {len(ctx.prefix)} bits, level {level} "
                         f"needs {level}")
    prefix = np.asarray(ctx.prefix, dtype=np.int8).reshape(1, -1)
    out = demap_level_block(kind, np.array([ctx.y]), ctx.sigma,
                            ctx.label_map, level, prefix, llr_max=llr_max)
    return float(out[0])


def demap_level_paths(kind, y, sigma, lmap, level, decided, llr_max=LLR_MAX):
    """Compiled per-path block demapping used by the simulator.

    decided: (P, n, m) int8 codeword bits of the levels decoded so far.
    Returns (P, n) LLRs.
    """
    y = np.ascontiguousarray(y, dtype=np.float64)
    decided = np.ascontiguousarray(decided, dtype=np.int8)
    out = np.empty((decided.shape[0], y.shape[0]), dtype=np.float64)
    _kernels.demap_level_multi_kernel(
        _KERNEL_ID[kind], y, float(sigma), lmap.amplitudes,
        lmap.polar_bits, lmap.aux_bits, decided, int(level), out,
        float(llr_max))
    return out
