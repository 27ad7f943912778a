"""Polar code construction for coded modulation.

All four methods produce a CodeSpec: per-level frozen masks over the m
component codes plus the metadata needed to reproduce the run. The three
surrogate methods differ only in which per-level rate seeds the Gaussian
approximation:

  CGA     pre-demapper auxiliary bit MIs (demapper-independent),
  MI-DGA  histogram MI of the genie-conditioned demapper outputs,
  LM-DGA  LM-rate of the genie-conditioned demapper outputs,

after which each level's rate is evolved through the polar butterfly with
the J-function recursion and the k most reliable (level, position) pairs
become information positions. Monte Carlo construction instead counts
genie-aided SC first-decision errors per position over simulated frames.
"""

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .polar import LLR_MAX, CrcConfig
from .demapper import DEMAPPER_KINDS, default_label_map, demap_level_paths
from .modulation import ChannelParams
from .rates import (demapper_samples, j_fun, j_inv, lm_rate, mi_histogram,
                    mi_matched, surrogate_sigma_from_rate)

CGA = "CGA"
MI_DGA = "MI_DGA"
LM_DGA = "LM_DGA"
MC = "MC"
GA_METHODS = (CGA, MI_DGA, LM_DGA)

SPEC_VERSION = 1


@dataclass
class CodeSpec:
    """Frozen-position choice of an m-level polar-coded-modulation code."""

    method: str
    demapper: str
    snr_db: float
    m: int
    n: int
    k: int
    frozen: list            # per level: (n,) bool array, True = frozen
    crc: CrcConfig | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.frozen = [np.asarray(f, dtype=bool) for f in self.frozen]
        if len(self.frozen) != self.m:
            raise ValueError("one frozen mask per level required")
        if self.n & (self.n - 1):
            raise ValueError("n must be a power of two")
        total_info = sum(int((~f).sum()) for f in self.frozen)
        if total_info != self.k:
            raise ValueError(f"unfrozen positions sum to {total_info}, "
                             f"expected k={self.k}")

    def to_dict(self):
        return {
            "version": SPEC_VERSION,
            "method": self.method,
            "demapper": self.demapper,
            "snr_db": self.snr_db,
            "m": self.m,
            "n": self.n,
            "k": self.k,
            "crc": None if self.crc is None else {
                "width": self.crc.width,
                "poly": self.crc.poly,
                "init": self.crc.init,
            },
            "frozen": [np.flatnonzero(f).tolist() for f in self.frozen],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d):
        masks = []
        for idxs in d["frozen"]:
            f = np.zeros(d["n"], dtype=bool)
            f[np.asarray(idxs, dtype=np.int64)] = True
            masks.append(f)
        crc = d.get("crc")
        return cls(method=d["method"], demapper=d["demapper"],
                   snr_db=d["snr_db"], m=d["m"], n=d["n"], k=d["k"],
                   frozen=masks,
                   crc=None if crc is None else CrcConfig(**crc),
                   metadata=d.get("metadata", {}))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2)
            f.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


def _j_inv_safe(mi):
    # GA-internal variant: tolerate rounding onto the boundaries
    return j_inv(np.clip(mi, 0.0, 1.0 - 1e-15))


def ga_evolve(channel_mi, n):
    """MI of each synthesized bit channel after log2(n) polarization
    stages from a uniform start, natural u-index order (check branch =
    lower index)."""
    if not 0.0 <= channel_mi <= 1.0:
        raise ValueError("channel_mi must lie in [0, 1]")
    if n < 1 or n & (n - 1):
        raise ValueError("n must be a power of two")
    if channel_mi in (0.0, 1.0):
        return np.full(n, channel_mi)
    rel = np.array([channel_mi])
    while rel.shape[0] < n:
        minus = 1.0 - j_fun(np.sqrt(2.0) * _j_inv_safe(1.0 - rel))
        plus = j_fun(np.sqrt(2.0) * _j_inv_safe(rel))
        rel = np.empty(2 * rel.shape[0])
        rel[0::2] = minus
        rel[1::2] = plus
    return rel


def _select_information(scores, better_high, m, n, k):
    """Global top-k selection; ties keep (higher level, higher position)."""
    level = np.repeat(np.arange(m), n)
    pos = np.tile(np.arange(n), m)
    primary = -scores if better_high else scores
    order = np.lexsort((-pos, -level, primary))
    masks = [np.ones(n, dtype=bool) for _ in range(m)]
    for flat in order[:k]:
        masks[level[flat]][pos[flat]] = False
    return masks, order


def construct_ga(method, kind, snr_db, n, k, num_samples=200_000, seed=0,
                 crc=None, llr_max=LLR_MAX):
    """Surrogate + Gaussian approximation construction (CGA / MI-DGA /
    LM-DGA) of an m x n code with k information positions."""
    if method not in GA_METHODS:
        raise ValueError(f"unknown GA construction {method!r}")
    if kind not in DEMAPPER_KINDS:
        raise ValueError(f"unknown demapper kind {kind!r}")
    lmap = default_label_map(kind)
    m = lmap.m
    if k > m * n:
        raise ValueError(f"k={k} exceeds {m}*{n} available positions")

    if method == CGA:
        _, aux = demapper_samples(kind, snr_db, num_samples, seed,
                                  lmap=lmap, include_aux=True, llr_max=llr_max)
        level_rates = [mi_matched(s) for s in aux]
    else:
        polar = demapper_samples(kind, snr_db, num_samples, seed,
                                 lmap=lmap, llr_max=llr_max)
        est = mi_histogram if method == MI_DGA else lm_rate
        level_rates = [est(s) for s in polar]

    scores = np.concatenate([ga_evolve(min(max(r, 0.0), 1.0), n)
                             for r in level_rates])
    masks, _ = _select_information(scores, better_high=True, m=m, n=n, k=k)
    surrogate_sigmas = [surrogate_sigma_from_rate(r) for r in level_rates]
    return CodeSpec(
        method=method, demapper=kind, snr_db=float(snr_db), m=m, n=n, k=k,
        frozen=masks, crc=crc,
        metadata={"rates": [float(r) for r in level_rates],
                  "surrogate_sigmas": surrogate_sigmas,
                  "samples": int(num_samples), "seed": int(seed)})


def construct_mc(kind, snr_db, n, k, trials=100_000, seed=0, crc=None,
                 llr_max=LLR_MAX):
    """Monte Carlo construction: genie-aided SC over the full chain,
    counting per-position first-decision errors."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if kind not in DEMAPPER_KINDS:
        raise ValueError(f"unknown demapper kind {kind!r}")
    lmap = default_label_map(kind)
    m = lmap.m
    if k > m * n:
        raise ValueError(f"k={k} exceeds {m}*{n} available positions")
    params = ChannelParams.from_snr(snr_db, lmap.constellation)

    errors = np.zeros((m, n), dtype=np.int64)
    c_true = np.empty((1, n, m), dtype=np.int8)
    for t in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))
        u = rng.integers(0, 2, size=(m, n), dtype=np.int8)
        for j in range(m):
            c_true[0, :, j] = _kernels.polar_transform_kernel(u[j])
        x = lmap.map_labels(c_true[0])
        y = x + params.sigma * rng.standard_normal(n)
        for j in range(m):
            llrs = demap_level_paths(kind, y, params.sigma, lmap, j, c_true,
                                     llr_max=llr_max)[0]
            _kernels.genie_sc_error_kernel(llrs, u[j], errors[j], llr_max)

    err_prob = errors.flatten() / trials
    masks, order = _select_information(err_prob, better_high=False, m=m, n=n, k=k)
    if k < m * n:
        p_in = err_prob[order[k - 1]]
        p_out = err_prob[order[k]]
        halfw = 1.96 * np.sqrt(np.maximum(p_in * (1 - p_in), p_out * (1 - p_out))
                               / trials)
        if p_out - p_in <= 2 * halfw:
            warnings.warn(
                "MC construction boundary is not resolved: positions ranked "
                f"k and k+1 have error estimates {p_in:.2e} and {p_out:.2e} "
                f"with overlapping confidence intervals at {trials} trials")
    return CodeSpec(
        method=MC, demapper=kind, snr_db=float(snr_db), m=m, n=n, k=k,
        frozen=masks, crc=crc,
        metadata={"rates": None, "trials": int(trials), "seed": int(seed)})
