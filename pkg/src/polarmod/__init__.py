"""Polar-coded modulation toolkit.

Binary polar codes with SC / CRC-aided list decoding, the three successive
8-ASK demappers from the multilevel-coding literature, achievable-rate
estimation (mutual information, GMI, LM-rate), surrogate-channel code
construction (CGA, MI-DGA, LM-DGA, Monte Carlo) and an AWGN frame-error
simulation harness.
"""

from .polar import (LLR_MAX, CrcConfig, CRC16_DEFAULT, DecoderPath, boxplus,
                    crc_check, crc_compute, polar_transform, sc_decode,
                    scl_extend)
from .modulation import (MM, SP, ChannelParams, Constellation, LabelMap,
                         awgn, build_label_map, map_symbol, sigma_to_snr,
                         snr_to_sigma)
from .demapper import (DEMAPPER_KINDS, MM_KIND, MM_SP_KIND, SP_KIND,
                       DemapContext, OpCounter, aux_bit_llrs, demap_level,
                       demap_level_block, exact_bit_llr)
from .rates import (LevelSamples, LmFit, LmParams, RateProfile,
                    demapper_samples, fit_gmi, fit_lm, gmi, j_fun, j_inv,
                    lm_objective, lm_rate, mi_histogram, mi_matched,
                    rate_profile, surrogate_sigma_from_rate)
from .construction import (CGA, LM_DGA, MC, MI_DGA, CodeSpec, construct_ga,
                           construct_mc, ga_evolve)
from .simulate import SimConfig, SimPoint, pcm_decode_sc, pcm_decode_scl, \
    pcm_encode, run_fer

__version__ = "0.1.0"
