"""Achievable-rate estimation for demapper bit channels.

Estimators consume genie-conditioned (bit, LLR) sample pairs: the bit is
the transmitted level bit, the LLR is the demapper output computed with
the true earlier-level bits. The LM-rate maximizes the mismatched-decoding
objective over the metric exponent s and the binary input weighting
rho = log r(1) - log r(0); the GMI is the rho = 0 restriction, and for a
matched demapper both collapse to the mutual information (which is what
the dedicated matched estimator computes directly).
"""

import math
from dataclasses import dataclass

import numpy as np

from .polar import LLR_MAX
from .demapper import (DEMAPPER_KINDS, aux_bit_llrs, default_label_map,
                       demap_level_block)
from .modulation import ChannelParams

LN2 = math.log(2.0)

# Brannstrom's closed-form fit of the consistent-Gaussian MI function
H1 = 0.3073
H2 = 0.8935
H3 = 1.1064

_SHARD = 1 << 17


@dataclass
class LevelSamples:
    """Genie-conditioned demapper emissions for one bit level."""

    bits: np.ndarray
    llrs: np.ndarray

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.int8)
        self.llrs = np.asarray(self.llrs, dtype=np.float64)
        if self.bits.shape != self.llrs.shape:
            raise ValueError("bits and llrs must align")

    def __len__(self):
        return self.bits.shape[0]


@dataclass(frozen=True)
class LmParams:
    """Point in the LM maximization domain."""

    s: float
    rho: float = 0.0


@dataclass(frozen=True)
class LmFit:
    rate: float
    s: float
    rho: float


def j_fun(sigma_llr):
    """MI of a consistent Gaussian LLR with std sigma_llr (closed-form fit)."""
    sig = np.asarray(sigma_llr, dtype=np.float64)
    if np.any(sig < 0):
        raise ValueError("sigma_llr must be nonnegative")
    v = (1.0 - 2.0 ** (-H1 * sig ** (2 * H2))) ** H3
    return float(v) if v.ndim == 0 else v


def j_inv(mi):
    """Inverse of j_fun on [0, 1)."""
    i = np.asarray(mi, dtype=np.float64)
    if np.any((i < 0) | (i >= 1)):
        raise ValueError("mi must lie in [0, 1)")
    v = (-np.log2(1.0 - i ** (1.0 / H3)) / H1) ** (1.0 / (2 * H2))
    return float(v) if v.ndim == 0 else v


def surrogate_sigma_from_rate(rate):
    """Noise std of the biAWGN channel whose capacity equals `rate`.

    The biAWGN LLR is Gaussian with std 2/sigma, so the J-domain identity
    R_biAWGN(sigma^2) = J(2/sigma) inverts in closed form. Rates outside
    (0, 1) are clamped to [1e-6, 1 - 1e-6].
    """
    eps = 1e-6
    r = min(max(float(rate), eps), 1.0 - eps)
    return 2.0 / j_inv(r)


def mi_matched(samples):
    """MI estimate valid when the LLRs are the true posterior ratios:
    1 - E[log2(1 + e^-(1-2B)L)]."""
    x = (1.0 - 2.0 * samples.bits) * samples.llrs
    return 1.0 - float(np.mean(np.logaddexp(0.0, -x))) / LN2


def mi_histogram(samples, bins=2000, llr_max=LLR_MAX):
    """Plug-in I(B; L) with L quantized into equal-width cells over
    [-llr_max, +llr_max]; empty cells are skipped."""
    if bins < 2:
        raise ValueError("need at least two bins")
    edges = np.linspace(-llr_max, llr_max, bins + 1)
    l = np.clip(samples.llrs, -llr_max, llr_max)
    n = len(samples)
    mi = 0.0
    counts = np.empty((2, bins), dtype=np.int64)
    for b in (0, 1):
        counts[b], _ = np.histogram(l[samples.bits == b], bins=edges)
    pb = counts.sum(axis=1) / n
    pl = counts.sum(axis=0) / n
    for b in (0, 1):
        if pb[b] == 0:
            continue
        nz = counts[b] > 0
        pj = counts[b, nz] / n
        mi += float(np.sum(pj * np.log2(pj / (pb[b] * pl[nz]))))
    return mi


def _prior_logs(prior):
    p = np.asarray(prior, dtype=np.float64)
    if p.shape != (2,) or np.any(p <= 0):
        raise ValueError("prior must be two strictly positive masses")
    p = p / p.sum()
    return np.log(p[0]), np.log(p[1])

def lm_objective(samples, prior=(0.5, 0.5), params=LmParams(1.0, 0.0)):
    """Sample-mean LM objective (bits) at fixed (s, rho), r(0)=1, r(1)=e^rho."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    if params.s < 0:
        raise ValueError("s must be nonnegative")
    lp0, lp1 = _prior_logs(prior)
    t = params.s * 0.5 * samples.llrs
    num = np.where(samples.bits == 0, t, -t + params.rho)
    den = np.logaddexp(lp0 + t, lp1 - t + params.rho)
    return float(np.mean(num - den)) / LN2


def _golden_max(f, lo, hi, tol):
    """Golden-section maximization on [lo, hi]; returns (x*, f(x*))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


_S_GRID = np.logspace(np.log10(0.05), np.log10(4.0), 33)
_RHO_GRID = np.linspace(-5.0, 5.0, 33)


def _maximize(samples, prior, s_grid, rho_grid, tol=1e-5):
    lp0, lp1 = _prior_logs(prior)
    bits = samples.bits
    llrs = samples.llrs
    sign = np.where(bits == 0, 1.0, -1.0)
    mean_half_sl = float(np.mean(0.5 * llrs * sign))
    mean_b = float(np.mean(bits))

    def objective(s, rho):
        t = (0.5 * s) * llrs
        den = np.logaddexp(lp0 + t, lp1 + rho - t)
        return (s * mean_half_sl + rho * mean_b - float(np.mean(den))) / LN2

    best = (-np.inf, 0, 0)
    for si, s in enumerate(s_grid):
        t = (0.5 * s) * llrs
        for ri, rho in enumerate(rho_grid):
            den = np.logaddexp(lp0 + t, lp1 + rho - t)
            val = (s * mean_half_sl + rho * mean_b - float(np.mean(den))) / LN2
            if val > best[0]:
                best = (val, si, ri)

    val, si, ri = best
    s_lo = float(s_grid[max(si - 1, 0)])
    s_hi = float(s_grid[min(si + 1, len(s_grid) - 1)])
    r_lo = float(rho_grid[max(ri - 1, 0)])
    r_hi = float(rho_grid[min(ri + 1, len(rho_grid) - 1)])
    s_best, rho_best = float(s_grid[si]), float(rho_grid[ri])

    # coordinate-wise golden-section refinement inside the bracketing grid
    # cells until the rate improvement stalls below tol
    for _ in range(12):
        prev = val
        s_best, val = _golden_max(lambda s: objective(s, rho_best),
                                  s_lo, s_hi, tol=1e-4)
        if len(rho_grid) > 1:
            rho_best, val = _golden_max(lambda r: objective(s_best, r),
                                        r_lo, r_hi, tol=1e-4)
        if val - prev < tol:
            break
    return LmFit(rate=float(val), s=float(s_best), rho=float(rho_best))


def fit_lm(samples, prior=(0.5, 0.5), tol=1e-5):
    """Full (s, rho) maximization: coarse grid then golden-section."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    return _maximize(samples, prior, _S_GRID, _RHO_GRID, tol=tol)


def lm_rate(samples, prior=(0.5, 0.5)):
    """LM-rate of the sampled bit channel (max over s and rho)."""
    return fit_lm(samples, prior).rate


def fit_gmi(samples, prior=(0.5, 0.5), tol=1e-5):
    """GMI fit: rho pinned to zero, maximize over s only."""
    if len(samples) == 0:
        raise ValueError("empty sample set")
    return _maximize(samples, prior, _S_GRID, np.zeros(1), tol=tol)


def gmi(samples, prior=(0.5, 0.5)):
    return fit_gmi(samples, prior).rate


def demapper_samples(kind, snr_db, num_samples, seed, lmap=None,
                     include_aux=False, llr_max=LLR_MAX):
    """Draw genie-conditioned samples of every bit level of a demapper.

    Uniform labels are transmitted over the AWGN channel at snr_db; level j
    is demapped with the true bits of levels < j. Generation is sharded
    with per-shard generators seeded from (seed, shard), so the stream is
    independent of how shards would be distributed over workers.

    Returns a list of LevelSamples per polar level, or a
    (polar_levels, aux_levels) pair when include_aux is set (the auxiliary
    samples pair each auxiliary label bit with its unconditional bitwise
    LLR, the quantity the CGA construction consumes).
    """
    if kind not in DEMAPPER_KINDS:
        raise ValueError(f"unknown demapper kind {kind!r}")
    if num_samples < 1:
        raise ValueError("need at least one sample")
    lmap = lmap or default_label_map(kind)
    m = lmap.m
    params = ChannelParams.from_snr(snr_db, lmap.constellation)

    bits_parts, llr_parts = [], []
    aux_bits_parts, aux_llr_parts = [], []
    done = 0
    shard = 0
    while done < num_samples:
        ns = min(_SHARD, num_samples - done)
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(shard,)))
        labels = rng.integers(0, 2, size=(ns, m), dtype=np.int8)
        x = lmap.map_labels(labels)
        y = x + params.sigma * rng.standard_normal(ns)

        lv = np.empty((ns, m), dtype=np.float64)
        for j in range(m):
            lv[:, j] = demap_level_block(kind, y, params.sigma, lmap, j,
                                         prefix=labels[:, :j], llr_max=llr_max)
        bits_parts.append(labels)
        llr_parts.append(lv)
        if include_aux:
            aux_bits_parts.append(lmap.polar_to_aux(labels))
            aux_llr_parts.append(aux_bit_llrs(y, params.sigma, lmap, llr_max=llr_max))
        done += ns
        shard += 1

    bits = np.concatenate(bits_parts)
    llrs = np.concatenate(llr_parts)
    polar = [LevelSamples(bits[:, j], llrs[:, j]) for j in range(m)]
    if not include_aux:
        return polar
    abits = np.concatenate(aux_bits_parts)
    allrs = np.concatenate(aux_llr_parts)
    aux = [LevelSamples(abits[:, j], allrs[:, j]) for j in range(m)]
    return polar, aux


def batch_estimates(estimator, samples, num_batches=20):
    """Estimator applied to contiguous sample batches; the spread yields a
    standard error for the full-sample estimate."""
    n = len(samples)
    if num_batches < 2 or n < num_batches:
        raise ValueError("need at least two batches of data")
    edges = np.linspace(0, n, num_batches + 1, dtype=np.int64)
    vals = [estimator(LevelSamples(samples.bits[a:b], samples.llrs[a:b]))
            for a, b in zip(edges[:-1], edges[1:])]
    return np.asarray(vals, dtype=np.float64)


def stderr_of(estimator, samples, num_batches=20):
    vals = batch_estimates(estimator, samples, num_batches)
    return float(np.std(vals, ddof=1) / math.sqrt(num_batches))


@dataclass
class RateProfile:
    """Per-level achievable rates of a demapper at one SNR."""

    demapper: str
    method: str
    snr_db: float
    samples: int
    rates: list
    stderrs: list

    def to_dict(self):
        return {
            "demapper": self.demapper,
            "method": self.method,
            "snr_db": self.snr_db,
            "samples": self.samples,
            "rates": self.rates,
            "stderrs": self.stderrs,
        }


_METHODS = ("lm", "gmi", "mi-hist", "mi-matched", "cga")


def rate_profile(kind, snr_db, method, num_samples, seed):
    """Estimate one RateProfile; `method` is one of lm, gmi, mi-hist,
    mi-matched (polar bit channels) or cga (pre-demapper auxiliary MIs)."""
    if method not in _METHODS:
        raise ValueError(f"unknown method {method!r}")
    if method == "cga":
        _, levels = demapper_samples(kind, snr_db, num_samples, seed,
                                     include_aux=True)
        est = mi_matched
    else:
        levels = demapper_samples(kind, snr_db, num_samples, seed)
        est = {"lm": lm_rate, "gmi": gmi, "mi-hist": mi_histogram,
               "mi-matched": mi_matched}[method]
    rates, errs = [], []
    for s in levels:
        rates.append(float(est(s)))
        if method in ("lm", "gmi"):
            fit = fit_lm(s) if method == "lm" else fit_gmi(s)
            fixed = LmParams(fit.s, fit.rho)
            errs.append(stderr_of(lambda b: lm_objective(b, params=fixed), s))
        else:
            errs.append(stderr_of(est, s))
    return RateProfile(demapper=kind, method=method, snr_db=float(snr_db),
                       samples=int(num_samples), rates=rates, stderrs=errs)
