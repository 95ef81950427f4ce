"""Regular repeat-accumulate (RA) code used identically at both end nodes.

Encoding chain: repeat each source bit ``d_v`` times, interleave (``pi1``),
pass through the degree-1 check nodes unchanged, accumulate, interleave
again (``pi2``). The code is non-systematic; the codeword is the
interleaved accumulator output only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PRNG_ALGORITHM = "numpy.PCG64/default_rng-v1"


class ParameterError(ValueError):
    """Raised for structurally invalid code or simulation parameters."""


def as_bits(bits, length: int | None = None, name: str = "bits") -> np.ndarray:
    """Validate a 0/1 sequence and return it as a ``uint8`` array."""
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError(f"{name} must contain only 0 and 1")
    if length is not None and arr.size != length:
        raise ValueError(f"{name} has length {arr.size}, expected {length}")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class Interleaver:
    """Permutation with ``out[i] = x[perm[i]]``."""

    perm: np.ndarray
    inverse_perm: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64)
        m = perm.size
        if perm.ndim != 1 or not np.array_equal(np.sort(perm), np.arange(m)):
            raise ParameterError("perm is not a permutation of 0..m-1")
        perm.setflags(write=False)
        inv = np.empty(m, dtype=np.int64)
        inv[perm] = np.arange(m)
        inv.setflags(write=False)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "inverse_perm", inv)

    def __len__(self) -> int:
        return self.perm.size

    def __eq__(self, other):
        return isinstance(other, Interleaver) and np.array_equal(self.perm, other.perm)

    def __hash__(self):
        return hash(self.perm.tobytes())


def apply_perm(interleaver: Interleaver, x, direction: str = "forward") -> np.ndarray:
    """Interleave (``forward``) or de-interleave (``inverse``) a sequence.

    Works on the last axis, so bit packets, LLR vectors and batches of
    either are handled alike.
    """
    x = np.asarray(x)
    if x.shape[-1] != len(interleaver):
        raise ValueError(
            f"sequence length {x.shape[-1]} does not match interleaver length {len(interleaver)}"
        )
    if direction == "forward":
        return x[..., interleaver.perm]
    if direction == "inverse":
        return x[..., interleaver.inverse_perm]
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class RaCodeSpec:
    """Structural parameters of the regular RA code plus its interleavers.

    The permutations are derived from ``seed``; ``to_record`` stores only the
    parameters needed to regenerate them.
    """

    k: int
    d_v: int
    seed: int
    pi1: Interleaver = field(repr=False)
    pi2: Interleaver = field(repr=False)

    @property
    def n(self) -> int:
        return self.d_v * self.k

    @property
    def rate(self) -> float:
        return self.k / self.n

    def to_record(self) -> str:
        return f"k={self.k}\nd_v={self.d_v}\nseed={self.seed}\nprng={PRNG_ALGORITHM}\n"

    @classmethod
    def from_record(cls, text: str) -> "RaCodeSpec":
        fields = {}
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            fields[key.strip()] = value.strip()
        if fields.get("prng") != PRNG_ALGORITHM:
            raise ParameterError(f"unsupported PRNG algorithm {fields.get('prng')!r}")
        return build_spec(int(fields["k"]), int(fields["d_v"]), int(fields["seed"]))


def build_spec(k: int, d_v: int = 3, seed: int = 0) -> RaCodeSpec:
    """Build a regular RA code with two independent random interleavers.

    Args:
        k: Source packet length in bits.
        d_v: Repetition factor (variable-node degree).
        seed: Seed for the interleaver PRNG; identical arguments give
            identical permutations.

    Raises:
        ParameterError: If ``k < 1`` or ``d_v < 2``.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if d_v < 2:
        raise ParameterError(f"d_v must be >= 2, got {d_v}")
    n = k * d_v
    rng = np.random.default_rng(seed)
    pi1 = Interleaver(rng.permutation(n))
    pi2 = Interleaver(rng.permutation(n))
    return RaCodeSpec(k=k, d_v=d_v, seed=seed, pi1=pi1, pi2=pi2)


def repeat(s, d_v: int) -> np.ndarray:
    # bit i occupies [i*d_v, (i+1)*d_v)
    return np.repeat(np.asarray(s, dtype=np.uint8), d_v, axis=-1)


def accumulate(u) -> np.ndarray:
    """Differential encoder ``x[t] = x[t-1] ^ u[t]`` with zero initial state."""
    u = as_bits(u, name="u")
    return (np.cumsum(u, dtype=np.int64) & 1).astype(np.uint8)


def encode(spec: RaCodeSpec, s) -> np.ndarray:
    s = as_bits(s, spec.k, name="source packet")
    v = apply_perm(spec.pi1, repeat(s, spec.d_v))
    return apply_perm(spec.pi2, accumulate(v))
