"""Spatiotemporal 2-D polar coding for massive-MIMO links.

Library layout:
  kernel        binary kernel, Kronecker powers, 1-D encoding
  construction  Gaussian-approximation reliability profiles and code specs
  codec2d       2-D encoding, index map, 1-D equivalence checks
  decoder       successive-cancellation decoding (plus an ML oracle)
  mimo          quasi-static Rayleigh channel with MMSE detection
  harness       reproducible Monte Carlo BER/BLER sweeps and latency
  cli           command-line frontend (`stpolar`)
"""

from .codec2d import (
    IndexMap,
    encode_2d,
    flatten_codeword,
    index_map,
    reshape_codeword,
    verify_equivalence,
)
from .construction import (
    CodeSpec,
    ReliabilityProfile,
    bpsk_awgn_capacity,
    channel_ber_estimate,
    code_spec_from_profile,
    ga_evolve,
    make_code_spec,
    phi,
    phi_inv,
    polarization_fraction,
    profile_table,
    q_function,
    select_information_set,
)
from .decoder import (
    DecodeResult,
    f_combine,
    f_combine_minsum,
    g_combine,
    ml_decode_bruteforce,
    sc_decode,
    sc_decode_batch,
)
from .harness import (
    LatencyEstimate,
    SimConfig,
    SimResult,
    export_results,
    format_results,
    latency_estimate,
    load_config,
    make_sim_config,
    read_results,
    run_awgn_sim,
    run_mimo_sim,
    run_sim,
)
from .kernel import (
    bit_reversal_permutation,
    encode_1d,
    generator_matrix,
    kernel,
    kron,
)
from .mimo import (
    ChannelRealization,
    MmseOutput,
    SinrStats,
    detect_llr,
    mmse_filter,
    sample_channel,
    sinr_statistics,
    transmit,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
