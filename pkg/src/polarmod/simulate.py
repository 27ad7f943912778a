"""End-to-end polar-coded-modulation link and the FER Monte Carlo harness.

The transmit chain scatters payload (+ optional CRC) bits into the
unfrozen positions in global level-major order, runs one polar transform
per level and maps the per-symbol label bits to ASK amplitudes. Receivers
follow the successive schedule: demap level j with the decided codeword
bits of levels < j, decode level j, re-encode, continue. The list decoder
carries one global path list across all levels and, when a CRC is in use,
returns the best-metric path that passes it.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .polar import (CRC16_DEFAULT, LLR_MAX, CrcConfig, DecoderPath,
                    crc_check, crc_compute, scl_extend)
from .construction import CodeSpec
from .demapper import DEMAPPER_KINDS, default_label_map, demap_level_paths
from .modulation import ChannelParams


def _crc_len(crc):
    return 0 if crc is None else crc.width


def pcm_encode(info_bits, spec, lmap, crc=None):
    """Encode payload bits into n ASK amplitudes.

    info_bits must have k - crc.width entries when a CRC is appended,
    k otherwise.
    """
    info_bits = np.asarray(info_bits, dtype=np.int8)
    expect = spec.k - _crc_len(crc)
    if info_bits.shape != (expect,):
        raise ValueError(f"expected {expect} payload bits, got {info_bits.shape}")
    bits = info_bits if crc is None else \
        np.concatenate([info_bits, crc_compute(info_bits, crc)])

    c = np.empty((spec.n, spec.m), dtype=np.int8)
    used = 0
    for j in range(spec.m):
        u = np.zeros(spec.n, dtype=np.int8)
        info_pos = ~spec.frozen[j]
        cnt = int(info_pos.sum())
        u[info_pos] = bits[used:used + cnt]
        used += cnt
        c[:, j] = _kernels.polar_transform_kernel(u)
    return lmap.map_labels(c)


def _gather_info(u_levels, spec):
    return np.concatenate([u_levels[j][~spec.frozen[j]] for j in range(spec.m)])


def pcm_decode_sc(y, spec, kind, sigma, lmap=None, level_feedback=None,
                  llr_max=LLR_MAX):
    """SC decoding over the level schedule; returns the k unfrozen bits.

    level_feedback, when given the true per-level codewords (n, m), feeds
    the demapper genie bits instead of decoder decisions (diagnostics
    only).
    """
    lmap = lmap or default_label_map(kind)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} received symbols")
    decided = np.zeros((1, spec.n, spec.m), dtype=np.int8)
    u_levels = []
    for j in range(spec.m):
        llrs = demap_level_paths(kind, y, sigma, lmap, j, decided,
                                 llr_max=llr_max)[0]
        u_hat, c_hat = _kernels.sc_decode_kernel(
            llrs, spec.frozen[j].astype(np.uint8),
            np.zeros(spec.n, dtype=np.int8), llr_max)
        u_levels.append(u_hat)
        if level_feedback is not None:
            decided[0, :, j] = level_feedback[:, j]
        else:
            decided[0, :, j] = c_hat
    return _gather_info(u_levels, spec)


def pcm_decode_scl(y, spec, kind, sigma, list_size, crc=None, lmap=None,
                   llr_max=LLR_MAX):
    """SC list decoding with one path list carried across all m levels.

    With a CRC, the lowest-metric path whose unfrozen bits check out is
    returned (lowest metric overall if none passes).
    """
    if list_size < 1:
        raise ValueError("list_size must be >= 1")
    lmap = lmap or default_label_map(kind)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} received symbols")

    paths = [DecoderPath()]
    decided = np.zeros((1, spec.n, spec.m), dtype=np.int8)
    for j in range(spec.m):
        llrs = demap_level_paths(kind, y, sigma, lmap, j, decided,
                                 llr_max=llr_max)
        paths = scl_extend(paths, llrs, spec.frozen[j], list_size,
                           llr_max=llr_max)
        parents = [p.parent_index for p in paths]
        decided = decided[parents]
        for a, p in enumerate(paths):
            decided[a, :, j] = p.c_block

    def info_of(path):
        u = path.u.reshape(spec.m, spec.n)
        return _gather_info(u, spec)

    if crc is not None:
        ranked = sorted(range(len(paths)), key=lambda a: paths[a].metric)
        for a in ranked:
            bits = info_of(paths[a])
            if crc_check(bits, crc):
                return bits
        return info_of(paths[ranked[0]])
    best = min(range(len(paths)), key=lambda a: paths[a].metric)
    return info_of(paths[best])


@dataclass
class SimConfig:
    """One FER sweep: code, receiver, SNR grid, stopping rule, seed."""

    spec: CodeSpec
    demapper: str
    decoder: str = "sc"
    list_size: int = 1
    crc_enabled: bool = False
    snr_start: float = 10.0
    snr_stop: float = 10.0
    snr_step: float = 0.5
    max_frames: int = 1_000_000
    target_errors: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.demapper not in DEMAPPER_KINDS:
            raise ValueError(f"unknown demapper kind {self.demapper!r}")
        if self.decoder not in ("sc", "scl"):
            raise ValueError("decoder must be 'sc' or 'scl'")
        if self.snr_step <= 0:
            raise ValueError("snr_step must be positive")
        if self.snr_stop < self.snr_start:
            raise ValueError("snr_stop must be >= snr_start")
        if self.list_size < 1:
            raise ValueError("list_size must be >= 1")
        if self.target_errors < 1:
            raise ValueError("target_errors must be >= 1")
        if self.max_frames < 1:
            raise ValueError("max_frames must be >= 1")

    @property
    def crc(self):
        if not self.crc_enabled:
            return None
        return self.spec.crc if self.spec.crc is not None else CRC16_DEFAULT

    def snr_points(self):
        pts = []
        v = self.snr_start
        while v <= self.snr_stop + 1e-9:
            pts.append(round(v, 10))
            v += self.snr_step
        return pts


@dataclass
class SimPoint:
    """Counters of one SNR point."""

    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    payload_bits: int
    seconds: float

    @property
    def fer(self):
        return self.frame_errors / self.frames

    @property
    def ber(self):
        return self.bit_errors / (self.frames * self.payload_bits)


def run_fer(config, progress=None):
    """Simulate the sweep; yields one SimPoint per SNR as it completes.

    Frames draw fresh payload bits and noise from a generator seeded by
    (seed, snr index, frame index), so results are reproducible bit-for-bit
    for a fixed config no matter how frames would be partitioned over
    workers.
    """
    spec = config.spec
    kind = config.demapper
    lmap = default_label_map(kind)
    crc = config.crc
    payload_bits = spec.k - _crc_len(crc)
    if payload_bits <= 0:
        raise ValueError("CRC leaves no payload bits")

    for snr_idx, snr_db in enumerate(config.snr_points()):
        sigma = ChannelParams.from_snr(snr_db, lmap.constellation).sigma
        frames = errors = bit_errors = 0
        t0 = time.perf_counter()
        while frames < config.max_frames and errors < config.target_errors:
            rng = np.random.default_rng(
                np.random.SeedSequence(config.seed, spawn_key=(snr_idx, frames)))
            payload = rng.integers(0, 2, size=payload_bits, dtype=np.int8)
            x = pcm_encode(payload, spec, lmap, crc=crc)
            y = x + sigma * rng.standard_normal(spec.n)
            if config.decoder == "sc":
                est = pcm_decode_sc(y, spec, kind, sigma, lmap=lmap)
            else:
                est = pcm_decode_scl(y, spec, kind, sigma, config.list_size,
                                     crc=crc, lmap=lmap)
            nerr = int(np.count_nonzero(est[:payload_bits] != payload))
            frames += 1
            bit_errors += nerr
            if nerr:
                errors += 1
        point = SimPoint(snr_db=snr_db, frames=frames, frame_errors=errors,
                         bit_errors=bit_errors, payload_bits=payload_bits,
                         seconds=time.perf_counter() - t0)
        if progress is not None:
            progress(point)
        yield point
