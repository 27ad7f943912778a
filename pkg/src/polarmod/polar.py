"""Binary polar code primitives: transform, SC / list-SC decoding, CRC.

Bit blocks are int8 numpy arrays of 0/1; frozen masks are boolean arrays
whose False entries mark the k information positions. LLRs are natural-log
with positive values favouring bit 0, saturated to ``LLR_MAX`` at module
boundaries. Index order is natural (no bit-reversal permutation).
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels

LLR_MAX = 40.0


def _as_bits(x):
    b = np.asarray(x, dtype=np.int8)
    if b.ndim != 1 or np.any((b != 0) & (b != 1)):
        raise ValueError("expected a 1-D array of 0/1 bits")
    return b


def _check_pow2(n):
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"length must be a power of two, got {n}")


def polar_transform(u):
    """Apply the n x n binary polar transform (Kronecker-power butterfly).

    The transform is its own inverse over GF(2), so this both encodes
    u -> c and recovers u from c.
    """
    u = _as_bits(u)
    _check_pow2(u.shape[0])
    return _kernels.polar_transform_kernel(u)


def boxplus(a, b, llr_max=LLR_MAX):
    """LLR check-node combination 2*atanh(tanh(a/2)*tanh(b/2)).

    Evaluated in the overflow-safe sum/log1p form and saturated to
    +-llr_max. Accepts scalars or broadcastable arrays.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    s = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    v = s + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    v = np.clip(v, -llr_max, llr_max)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class CrcConfig:
    """16-bit shift-register CRC: generator polynomial and initial state."""

    width: int = 16
    poly: int = 0x1021
    init: int = 0x0000


CRC16_DEFAULT = CrcConfig()


def crc_compute(data, cfg=CRC16_DEFAULT):
    """CRC register bits (MSB first) after clocking in `data`."""
    data = _as_bits(data)
    mask = (1 << cfg.width) - 1
    top = 1 << (cfg.width - 1)
    reg = cfg.init & mask
    for b in data:
        fb = ((reg & top) != 0) ^ bool(b)
        reg = (reg << 1) & mask
        if fb:
            reg ^= cfg.poly
    out = np.empty(cfg.width, dtype=np.int8)
    for i in range(cfg.width):
        out[i] = (reg >> (cfg.width - 1 - i)) & 1
    return out


def crc_check(data_with_crc, cfg=CRC16_DEFAULT):
    """True iff the trailing `cfg.width` bits equal the CRC of the rest."""
    data_with_crc = _as_bits(data_with_crc)
    if data_with_crc.shape[0] < cfg.width:
        return False
    data = data_with_crc[:-cfg.width]
    tail = data_with_crc[-cfg.width:]
    return bool(np.array_equal(crc_compute(data, cfg), tail))


def _frozen_arrays(mask, frozen_values, n):
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (n,):
        raise ValueError(f"frozen mask length {mask.shape} != LLR length {n}")
    if frozen_values is None:
        fv = np.zeros(n, dtype=np.int8)
    else:
        fv = _as_bits(frozen_values)
        if fv.shape != (n,):
            raise ValueError("frozen_values must have one entry per position")
    return mask.astype(np.uint8), fv


def sc_decode(channel_llrs, mask, frozen_values=None, llr_max=LLR_MAX):
    """Successive cancellation decoding of one polar block.

    Parameters
    ----------
    channel_llrs : (n,) float array
        Per-position channel LLRs, positive = bit 0 more likely.
    mask : (n,) bool array
        True marks frozen positions.
    frozen_values : (n,) bit array, optional
        Values forced at frozen positions (zeros by default).

    Returns
    -------
    (u_hat, c_hat) : decided bit vector and its re-encoding.
    """
    llrs = np.ascontiguousarray(channel_llrs, dtype=np.float64)
    _check_pow2(llrs.shape[0])
    is_frozen, fv = _frozen_arrays(mask, frozen_values, llrs.shape[0])
    return _kernels.sc_decode_kernel(llrs, is_frozen, fv, float(llr_max))


@dataclass
class DecoderPath:
    """One SC list-decoder hypothesis.

    `u` holds every bit decided so far (all completed blocks concatenated),
    `c_block` the re-encoded codeword of the most recent block, and
    `parent_index` the position of the path this one descended from in the
    input list of the `scl_extend` call that produced it.
    """

    u: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    metric: float = 0.0
    c_block: np.ndarray | None = None
    parent_index: int | None = None


def scl_extend(paths, per_path_llrs, mask, list_size, frozen_values=None,
               llr_max=LLR_MAX):
    """Extend every path through one length-n polar block, keeping the
    `list_size` best by path metric.

    Each path supplies its own channel LLR vector (the demapper output
    depends on the path's earlier decisions). At information positions
    both continuations are scored with the exact LLR-domain penalty
    log(1 + e^-|L|) (agreeing with the LLR sign) or |L| + log(1 + e^-|L|)
    (disagreeing); metric ties are broken toward the lexicographically
    smaller decided-bit sequence.
    """
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    if len(paths) == 0:
        raise ValueError("need at least one path")
    if len(paths) > list_size:
        raise ValueError("more input paths than list_size")
    llrs = np.ascontiguousarray(per_path_llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[0] != len(paths):
        raise ValueError("per_path_llrs must be one LLR vector per path")
    n = llrs.shape[1]
    _check_pow2(n)
    is_frozen, fv = _frozen_arrays(mask, frozen_values, n)
    metrics = np.array([p.metric for p in paths], dtype=np.float64)
    u_out, c_out, met_out, origins = _kernels.scl_block_kernel(
        llrs, metrics, is_frozen, fv, int(list_size), float(llr_max))
    out = []
    for a in range(u_out.shape[0]):
        parent = int(origins[a])
        out.append(DecoderPath(
            u=np.concatenate([paths[parent].u, u_out[a]]),
            metric=float(met_out[a]),
            c_block=c_out[a],
            parent_index=parent,
        ))
    return out
