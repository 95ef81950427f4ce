"""Iterative demapping and decoding for channel-coded physical-layer network coding."""

from .channel import NoiseSpec, ebn0_to_snr_db, snr_to_ebn0_db, snr_to_sigma2, transmit
from .constellation import (
    ANTI_GRAY,
    GRAY,
    LabelMap,
    SuperposedConstellation,
    build_superposed,
    make_label_map,
    modulate,
)
from .ra_code import (
    Interleaver,
    ParameterError,
    RaCodeSpec,
    accumulate,
    apply_perm,
    build_spec,
    encode,
)
from .relay_decoder import (
    L_MAX,
    DecodeResult,
    Schedule,
    acc_sweep,
    check_update,
    decode_packet,
    demap_extrinsic,
    nc_likelihood,
    var_update,
)

__version__ = "0.1.0"
