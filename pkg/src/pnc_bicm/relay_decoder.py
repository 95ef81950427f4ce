"""Iterative demapping and decoding at the relay.

The relay never separates the two end-node packets. It demaps the
superimposed symbols straight to LLRs of the network-coded (XOR) coded
bits and runs RA message passing on the NC codeword, which is a valid
codeword of the shared code.

LLR sign convention throughout: ``L = ln(Pr(bit=1) / Pr(bit=0))``.

Graph order on the decoder side (right to left):

    coded bits --pi2^-1--> ACC outputs | ACC | ACC inputs == CND (degree 1)
    --pi1^-1--> repetition edges --> VND (one per source bit)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import logsumexp

from .constellation import LabelMap, SuperposedConstellation, build_superposed
from .ra_code import RaCodeSpec, apply_perm, encode

L_MAX = 50.0


def clamp(llr):
    return np.clip(llr, -L_MAX, L_MAX)


# ---------------------------------------------------------------------------
# demapper


def nc_log_likelihoods(y, sc: SuperposedConstellation, sigma2: float) -> np.ndarray:
    """``ln p(y | nc_label)`` for every symbol and all four NC labels.

    Each label collects 4 constituent pairs with prior 1/4; the Gaussian
    density uses ``sigma2`` per real dimension.
    """
    y = np.atleast_1d(np.asarray(y, dtype=np.complex128))
    pts = sc.by_label
    d2 = np.abs(y[:, None, None] - pts[None, :, :]) ** 2
    log_norm = np.log(0.25) - np.log(2 * np.pi * sigma2)
    return logsumexp(-d2 / (2 * sigma2), axis=-1) + log_norm


def nc_likelihood(y: complex, nc_label: int, sc: SuperposedConstellation, sigma2: float) -> float:
    return float(np.exp(nc_log_likelihoods([y], sc, sigma2)[0, nc_label]))


def demap_extrinsic(y, prior, sc: SuperposedConstellation, sigma2: float) -> np.ndarray:
    """Extrinsic LLRs of the NC coded bits given the superimposed symbols.

    ``prior`` holds the a-priori LLRs of the coded bits in transmission
    order (two per symbol). For the first bit of a symbol,

        L_e(x1) = ln (p(y|10) + p(y|11) e^{La(x2)}) / (p(y|00) + p(y|01) e^{La(x2)})

    and symmetrically for the second bit. The bit's own prior never enters
    its own output.
    """
    return extrinsic_from_loglik(nc_log_likelihoods(y, sc, sigma2), prior)


def extrinsic_from_loglik(lp: np.ndarray, prior) -> np.ndarray:
    """``demap_extrinsic`` with the ``(N, 4)`` label log-likelihoods precomputed."""
    prior = clamp(np.asarray(prior, dtype=np.float64))
    if prior.size != 2 * lp.shape[0]:
        raise ValueError(f"prior has length {prior.size}, expected {2 * lp.shape[0]}")
    la1, la2 = prior[0::2], prior[1::2]
    out = np.empty(prior.size)
    out[0::2] = np.logaddexp(lp[:, 2], lp[:, 3] + la2) - np.logaddexp(lp[:, 0], lp[:, 1] + la2)
    out[1::2] = np.logaddexp(lp[:, 1], lp[:, 3] + la1) - np.logaddexp(lp[:, 0], lp[:, 2] + la1)
    return clamp(out)


# ---------------------------------------------------------------------------
# node updates


def boxplus(a, b):
    """LLR of ``x ^ y`` from LLRs of ``x`` and ``y`` (tanh rule, stable form)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    r = (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )
    return -r


def check_update(incoming) -> float:
    """Check-node output for one edge from the messages on all other edges.

    A single input passes through unchanged (degree-1 check node).
    """
    values = [float(v) for v in np.ravel(incoming)]
    if not values:
        raise ValueError("check node needs at least one incoming message")
    out = values[0]
    for value in values[1:]:
        out = _bp(out, value)
    return out


def var_update(incoming) -> float:
    return float(clamp(np.sum(np.asarray(incoming, dtype=np.float64))))


@njit(cache=True)
def _bp(a, b):
    if a == 0.0 or b == 0.0:
        return 0.0
    m = min(abs(a), abs(b))
    if (a > 0.0) != (b > 0.0):
        m = -m
    r = m + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))
    return -r


@njit(cache=True)
def _clip(x, lim):
    if x > lim:
        return lim
    if x < -lim:
        return -lim
    return x


@njit(cache=True)
def _acc_sweep_kernel(ch, up, lim):
    n = ch.size
    fwd = np.empty(n)
    bwd = np.empty(n)
    out_ch = np.empty(n)
    out_up = np.empty(n)
    # accumulator starts in the known state 0, so x[0] = u[0]
    fwd[0] = up[0]
    for t in range(1, n):
        fwd[t] = _clip(_bp(_clip(fwd[t - 1] + ch[t - 1], lim), up[t]), lim)
    bwd[n - 1] = 0.0
    for t in range(n - 2, -1, -1):
        bwd[t] = _clip(_bp(_clip(bwd[t + 1] + ch[t + 1], lim), up[t + 1]), lim)
    for t in range(n):
        out_ch[t] = _clip(fwd[t] + bwd[t], lim)
    out_up[0] = _clip(ch[0] + bwd[0], lim)
    for t in range(1, n):
        out_up[t] = _clip(
            _bp(_clip(fwd[t - 1] + ch[t - 1], lim), _clip(ch[t] + bwd[t], lim)), lim
        )
    return out_ch, out_up


def acc_sweep(channel_llrs, upstream_llrs):
    """One forward-backward pass over the accumulator chain.

    Internal check node ``t`` ties ``x[t-1]``, ``u[t]`` and ``x[t]``.

    Args:
        channel_llrs: a-priori LLRs of the accumulator outputs ``x``.
        upstream_llrs: a-priori LLRs of the accumulator inputs ``u``.

    Returns:
        ``(extrinsic_to_channel, extrinsic_to_upstream)``. The chain is a
        tree, so a single sweep gives exact two-state trellis marginals.
    """
    ch = clamp(np.ascontiguousarray(channel_llrs, dtype=np.float64))
    up = clamp(np.ascontiguousarray(upstream_llrs, dtype=np.float64))
    if ch.shape != up.shape or ch.ndim != 1:
        raise ValueError(f"length mismatch: {ch.shape} vs {up.shape}")
    if ch.size == 0:
        return ch.copy(), up.copy()
    return _acc_sweep_kernel(ch, up, L_MAX)


# ---------------------------------------------------------------------------
# full receiver


@dataclass(frozen=True)
class Schedule:
    """Iteration schedule of the relay receiver.

    ``demapper_feedback=False`` gives the non-iterative baseline: demap once
    with zero priors and iterate only inside the RA decoder.
    ``demap_every_inner=False`` re-runs the demapper once per outer iteration
    instead of once per inner iteration.
    """

    outer_iters: int = 20
    inner_iters: int = 3
    demapper_feedback: bool = True
    demap_every_inner: bool = True
    early_stop: bool = False

    def __post_init__(self):
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("outer_iters and inner_iters must be >= 1")


@dataclass
class DecodeResult:
    nc_bits: np.ndarray
    posterior: np.ndarray
    iterations_run: int
    trace: list = field(default_factory=list)


def inner_unit(loglik, spec: RaCodeSpec, vnd_prior, sched: Schedule, to_demapper=None,
               channel=None):
    """Run the inner iterations of {demapper, ACC, degree-1 CND}.

    Args:
        loglik: ``nc_log_likelihoods`` of the received symbols.
        vnd_prior: a-priori LLRs on the ACC inputs (CND side), ACC order.
        to_demapper: feedback LLRs for the demapper in coded-bit order;
            zeros when None.
        channel: demapper output in ACC order to reuse when feedback is off.

    Returns:
        ``(extrinsic_to_vnd, to_demapper, channel)``, the first in ACC order.
    """
    if to_demapper is None:
        to_demapper = np.zeros(spec.n)
    ext_up = None
    for inner in range(sched.inner_iters):
        refresh = sched.demapper_feedback and (sched.demap_every_inner or inner == 0)
        if refresh or channel is None:
            prior = to_demapper if sched.demapper_feedback else np.zeros(spec.n)
            channel = apply_perm(spec.pi2, extrinsic_from_loglik(loglik, prior), "inverse")
        elif ext_up is not None:
            # the sweep is exact; unchanged inputs reproduce the previous output
            break
        ext_ch, ext_up = acc_sweep(channel, vnd_prior)
        to_demapper = apply_perm(spec.pi2, ext_ch)
    return ext_up, to_demapper, channel


def vnd_update(edges: np.ndarray):
    """Repetition-node update on a ``(k, d_v)`` array of incoming messages.

    Returns ``(extrinsic_per_edge, total)``.
    """
    total = edges.sum(axis=1)
    return clamp(total[:, None] - edges), total


def decode_packet(y, spec: RaCodeSpec, label_map: LabelMap, sigma2: float,
                  sched: Schedule = Schedule(), truth=None, trace: bool = False) -> DecodeResult:
    """Decode the network-coded source packet ``s1 ^ s2`` from relay symbols.

    Each outer iteration runs ``sched.inner_iters`` passes of the inner unit,
    then the repetition (VND) update, whose extrinsic output becomes the
    ACC-input prior of the next outer iteration. Hard decision: bit is 1 iff
    the summed source LLR is strictly positive.

    Args:
        truth: optional reference NC packet, used only for trace rows.
        trace: record ``(iteration, mean |LLR|, bit_errors)`` per outer
            iteration; ``bit_errors`` is -1 without ``truth``.
    """
    y = np.asarray(y, dtype=np.complex128)
    if 2 * y.size != spec.n:
        raise ValueError(f"received {y.size} symbols, code needs {spec.n // 2}")
    loglik = nc_log_likelihoods(y, build_superposed(label_map), sigma2)
    k, d_v = spec.k, spec.d_v
    vnd_prior = np.zeros(spec.n)
    to_demapper = None
    channel = None
    rows = []
    prev_bits = None
    iterations = 0
    for outer in range(sched.outer_iters):
        ext_up, to_demapper, channel = inner_unit(
            loglik, spec, vnd_prior, sched, to_demapper, channel
        )
        edges = apply_perm(spec.pi1, ext_up, "inverse").reshape(k, d_v)
        ext_edges, total = vnd_update(edges)
        vnd_prior = apply_perm(spec.pi1, ext_edges.ravel())
        iterations = outer + 1
        bits = (total > 0).astype(np.uint8)
        if trace:
            errors = -1 if truth is None else int(np.count_nonzero(bits != np.asarray(truth)))
            rows.append((iterations, float(np.mean(np.abs(clamp(total)))), errors))
        if sched.early_stop and prev_bits is not None and np.array_equal(bits, prev_bits):
            if _consistent(spec, bits, channel, to_demapper):
                break
        prev_bits = bits
    return DecodeResult(nc_bits=bits, posterior=clamp(total), iterations_run=iterations, trace=rows)


def _consistent(spec, bits, channel, to_demapper) -> bool:
    """True when re-encoding ``bits`` matches the hard coded-bit posterior."""
    posterior = channel + apply_perm(spec.pi2, to_demapper, "inverse")
    coded = apply_perm(spec.pi2, (posterior > 0).astype(np.uint8))
    return np.array_equal(encode(spec, bits), coded)
