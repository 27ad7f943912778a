"""ASK constellations, polar/auxiliary label maps, and the AWGN channel.

Amplitudes are the bipolar odd integers {-(2^m - 1), ..., -1, +1, ...}
listed in ascending order; labels are (..., m) int8 bit arrays with column
j holding the bit of level j+1. A label map ties three things together:
the polar label (what the component polar codes see), the auxiliary label
(BRGC for the MM mapper, LSB-BRGC for the SP mapper) and the amplitude,
with the two labels related by the GF(2) band/triangular matrix pair.
"""

from dataclasses import dataclass

import numpy as np

MM = "MM"
SP = "SP"
LABEL_KINDS = (MM, SP)


class Constellation:
    """2^m-ASK alphabet under the uniform input distribution."""

    def __init__(self, m):
        if m < 1:
            raise ValueError("need at least one bit per symbol")
        self.m = int(m)
        self.amplitudes = np.arange(-(2 ** m - 1), 2 ** m, 2, dtype=np.float64)

    @property
    def energy(self):
        """Mean-square symbol energy E[X^2] = (4^m - 1) / 3."""
        return float(np.mean(self.amplitudes ** 2))

    def __repr__(self):
        return f"Constellation(m={self.m})"


def _pack(bits):
    """Bit rows (read level-1 first) to integers, level 1 as MSB."""
    bits = np.asarray(bits, dtype=np.int64)
    m = bits.shape[-1]
    weights = 1 << np.arange(m - 1, -1, -1)
    return bits @ weights


def _unpack(vals, m):
    vals = np.asarray(vals, dtype=np.int64)
    shifts = np.arange(m - 1, -1, -1)
    return ((vals[..., None] >> shifts) & 1).astype(np.int8)


class LabelMap:
    """Bijection between m-bit polar labels and 2^m ASK amplitudes.

    Attributes
    ----------
    polar_bits, aux_bits : (2^m, m) int8
        Label bits of the amplitude at each (ascending) index.
    forward, backward : (m, m) int8
        GF(2) matrices with aux = polar @ forward and polar = aux @ backward.
    """

    def __init__(self, kind, m):
        if kind not in LABEL_KINDS:
            raise ValueError(f"unsupported label map kind {kind!r}")
        self.kind = kind
        self.m = int(m)
        self.constellation = Constellation(m)
        self.amplitudes = self.constellation.amplitudes

        idx = np.arange(2 ** m)
        gray = idx ^ (idx >> 1)
        aux = _unpack(gray, m)
        if kind == SP:
            aux = aux[:, ::-1].copy()
        self.aux_bits = aux

        self.forward = np.zeros((m, m), dtype=np.int8)
        for i in range(m):
            self.forward[i, i] = 1
            if i > 0:
                self.forward[i, i - 1] = 1
        self.backward = np.tril(np.ones((m, m), dtype=np.int8))

        self.polar_bits = (aux @ self.backward % 2).astype(np.int8)
        self._polar_to_index = np.empty(2 ** m, dtype=np.int64)
        self._polar_to_index[_pack(self.polar_bits)] = idx
        if len(set(_pack(self.polar_bits).tolist())) != 2 ** m:
            raise AssertionError("label table is not a bijection")

    def polar_to_aux(self, bits):
        return (np.asarray(bits, dtype=np.int8) @ self.forward % 2).astype(np.int8)

    def aux_to_polar(self, bits):
        return (np.asarray(bits, dtype=np.int8) @ self.backward % 2).astype(np.int8)

    def amplitude_index(self, polar_labels):
        """Amplitude index of each (..., m) polar label."""
        return self._polar_to_index[_pack(polar_labels)]

    def map_labels(self, polar_labels):
        """Polar labels to transmitted amplitudes."""
        return self.amplitudes[self.amplitude_index(polar_labels)]

    def __repr__(self):
        return f"LabelMap(kind={self.kind!r}, m={self.m})"


def build_label_map(kind, m):
    """Label map for the given mapper kind; m = 3 reproduces the published
    8-ASK tables exactly, other m follow the same construction (BRGC or
    bit-reversed BRGC auxiliary label, band-matrix transform) and should be
    treated as experimental."""
    return LabelMap(kind, m)


def map_symbol(label, lmap):
    """Single m-bit polar label to its amplitude."""
    label = np.asarray(label, dtype=np.int8)
    if label.shape != (lmap.m,):
        raise ValueError(f"label must have {lmap.m} bits")
    return float(lmap.map_labels(label[None, :])[0])


def snr_to_sigma(snr_db, constellation):
    """Noise std from SNR = E[X^2] / sigma^2 in dB."""
    return float(np.sqrt(constellation.energy / 10.0 ** (snr_db / 10.0)))


def sigma_to_snr(sigma, constellation):
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return float(10.0 * np.log10(constellation.energy / sigma ** 2))


@dataclass(frozen=True)
class ChannelParams:
    """AWGN operating point; snr_db and sigma are kept consistent."""

    snr_db: float
    sigma: float

    @classmethod
    def from_snr(cls, snr_db, constellation):
        return cls(snr_db=float(snr_db), sigma=snr_to_sigma(snr_db, constellation))

    @classmethod
    def from_sigma(cls, sigma, constellation):
        return cls(snr_db=sigma_to_snr(sigma, constellation), sigma=float(sigma))


def awgn(x, params, rng):
    """y = x + sigma * z with z drawn i.i.d. standard normal from rng."""
    sigma = params.sigma if isinstance(params, ChannelParams) else float(params)
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    return x + sigma * rng.standard_normal(x.shape)
