"""Uplink superposition channel ``y = a1 + a2 + w`` and SNR conventions.

SNR is ``2 / sigma2`` (per-node symbol energy 2) and ``sigma2`` is the
noise variance per real dimension. Eb/N0 relates to SNR as
``Eb/N0 = SNR / (4 R)``: Es = 2, 2R information bits per node-symbol and
N0 = 2 sigma2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseSpec:
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def snr_db(self) -> float:
        return 10 * np.log10(2 / self.sigma2)

    @classmethod
    def from_snr_db(cls, snr_db: float) -> "NoiseSpec":
        return cls(snr_to_sigma2(snr_db))


def snr_to_sigma2(snr_db: float) -> float:
    return 2.0 / 10 ** (snr_db / 10)


def ebn0_to_snr_db(ebn0_db: float, rate: float) -> float:
    return ebn0_db + 10 * np.log10(4 * rate)


def snr_to_ebn0_db(snr_db: float, rate: float) -> float:
    return snr_db - 10 * np.log10(4 * rate)


def awgn(shape, sigma2: float, rng_seed) -> np.ndarray:
    """Complex Gaussian noise with variance ``sigma2`` per real dimension."""
    rng = np.random.default_rng(rng_seed)
    g = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return np.sqrt(sigma2) * (g[0] + 1j * g[1])


def transmit(a1, a2, sigma2: float, rng_seed) -> np.ndarray:
    """Superimpose two synchronised QPSK packets and add AWGN.

    ``rng_seed`` is anything ``numpy.random.default_rng`` accepts (an int,
    a tuple of ints or a ``SeedSequence``); equal seeds give equal noise.
    """
    a1 = np.asarray(a1, dtype=np.complex128)
    a2 = np.asarray(a2, dtype=np.complex128)
    if a1.shape != a2.shape:
        raise ValueError(f"packet lengths differ: {a1.shape} vs {a2.shape}")
    return a1 + a2 + awgn(a1.shape, sigma2, rng_seed)
