"""EXIT-chart machinery: J-function, synthetic priors, MI estimation and
transfer curves for the demapper, the inner unit and the repetition node.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .channel import ebn0_to_snr_db, snr_to_sigma2, transmit
from .constellation import LabelMap, build_superposed, modulate
from .ra_code import RaCodeSpec, accumulate, apply_perm
from .relay_decoder import (
    L_MAX,
    Schedule,
    demap_extrinsic,
    inner_unit,
    nc_log_likelihoods,
    vnd_update,
)

DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(20)) + (0.999,)

_TABLE_SIGMA_MAX = 20.0
_TABLE_KNOTS = 1000
_LN2 = math.log(2.0)


def _j_integral(sigma_a: float) -> float:
    if sigma_a <= 0:
        return 0.0
    mean = sigma_a**2 / 2

    def integrand(x):
        pdf = math.exp(-((x - mean) ** 2) / (2 * sigma_a**2)) / math.sqrt(2 * math.pi * sigma_a**2)
        return pdf * np.logaddexp(0.0, -x) / _LN2

    lo, hi = mean - 12 * sigma_a, mean + 12 * sigma_a
    # split at the kink of log(1 + e^-x) so quad sees two smooth pieces
    pts = [0.0] if lo < 0 < hi else None
    val, _ = integrate.quad(integrand, lo, hi, points=pts, limit=200, epsabs=1e-12)
    return min(max(1.0 - val, 0.0), 1.0)


@lru_cache(maxsize=1)
def _j_table():
    sigmas = np.linspace(0.0, _TABLE_SIGMA_MAX, _TABLE_KNOTS)
    values = np.array([_j_integral(s) for s in sigmas])
    return sigmas, np.maximum.accumulate(values)


def j_function(sigma_a):
    """Mutual information between a bit and a consistent Gaussian LLR.

    The LLR is ``N((2b - 1) sigma_a**2 / 2, sigma_a**2)``. Values come from a
    1000-knot table of the integral with linear interpolation; above the
    table range the integral is evaluated directly.
    """
    sigmas, values = _j_table()
    s = np.asarray(sigma_a, dtype=np.float64)
    if np.any(s < 0):
        raise ValueError("sigma_a must be non-negative")
    out = np.interp(s, sigmas, values)
    big = s > _TABLE_SIGMA_MAX
    if np.any(big):
        out = np.where(big, np.vectorize(_j_integral)(np.where(big, s, 0.0)), out)
    return float(out) if out.ndim == 0 else out


def j_inverse(mi: float, tol: float = 1e-6) -> float:
    """Bisection inverse of ``j_function``."""
    if not 0.0 <= mi <= 1.0:
        raise ValueError(f"mutual information must lie in [0, 1], got {mi}")
    if mi == 0.0:
        return 0.0
    lo, hi = 0.0, 100.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if j_function(mid) < mi:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def gen_apriori(bits, sigma_a: float, seed) -> np.ndarray:
    bits = np.asarray(bits)
    rng = np.random.default_rng(seed)
    return (2.0 * bits - 1.0) * sigma_a**2 / 2 + sigma_a * rng.standard_normal(bits.shape)


def estimate_mi(llrs, truth) -> float:
    """Time-average MI estimate ``1 - mean(log2(1 + exp(-(2b - 1) L)))``."""
    llrs = np.asarray(llrs, dtype=np.float64)
    truth = np.asarray(truth)
    if llrs.size == 0:
        raise ValueError("cannot estimate MI from an empty sequence")
    if llrs.shape != truth.shape:
        raise ValueError(f"shape mismatch: {llrs.shape} vs {truth.shape}")
    z = (2.0 * truth - 1.0) * llrs
    mi = 1.0 - np.mean(np.logaddexp(0.0, -z)) / _LN2
    return float(min(max(mi, 0.0), 1.0))


@dataclass
class ExitCurve:
    """Sampled transfer characteristic ``i_e = T(i_a)`` of one component."""

    i_a: np.ndarray
    i_e: np.ndarray
    component: str
    map_kind: str = ""
    context: dict = field(default_factory=dict)

    def __post_init__(self):
        self.i_a = np.asarray(self.i_a, dtype=np.float64)
        self.i_e = np.asarray(self.i_e, dtype=np.float64)
        if self.i_a.shape != self.i_e.shape:
            raise ValueError("i_a and i_e differ in length")
        if self.i_a.size > 1 and np.any(np.diff(self.i_a) <= 0):
            raise ValueError("i_a grid must be strictly increasing")


def _check_grid(grid) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("EXIT grid is empty")
    if np.any(grid < 0) or np.any(grid >= 1):
        raise ValueError("EXIT grid values must lie in [0, 1)")
    return grid


def _constituent_symbols(nc_coded, label_map, rng):
    """Two QPSK packets whose coded bits XOR to ``nc_coded``."""
    c1 = rng.integers(0, 2, nc_coded.size, dtype=np.uint8)
    return modulate(label_map, c1), modulate(label_map, c1 ^ nc_coded)


def demapper_curve(label_map: LabelMap, snr_db: float, grid=DEFAULT_GRID,
                   n_symbols: int = 100_000, seed: int = 0) -> ExitCurve:
    grid = _check_grid(grid)
    sc = build_superposed(label_map)
    sigma2 = snr_to_sigma2(snr_db)
    i_e = []
    for idx, i_a in enumerate(grid):
        rng = np.random.default_rng([seed, idx, 0])
        nc = rng.integers(0, 2, 2 * n_symbols, dtype=np.uint8)
        a1, a2 = _constituent_symbols(nc, label_map, rng)
        y = transmit(a1, a2, sigma2, [seed, idx, 1])
        prior = gen_apriori(nc, j_inverse(i_a), [seed, idx, 2])
        i_e.append(estimate_mi(demap_extrinsic(y, prior, sc, sigma2), nc))
    return ExitCurve(grid, i_e, "demapper", label_map.name, {"snr_db": snr_db})


def demapper_mi_perfect_prior(label_map: LabelMap, snr_db: float, n_symbols: int = 100_000,
                              seed: int = 0) -> float:
    """Demapper extrinsic MI when the partner bit is known exactly."""
    sc = build_superposed(label_map)
    sigma2 = snr_to_sigma2(snr_db)
    rng = np.random.default_rng([seed, 0])
    nc = rng.integers(0, 2, 2 * n_symbols, dtype=np.uint8)
    a1, a2 = _constituent_symbols(nc, label_map, rng)
    y = transmit(a1, a2, sigma2, [seed, 1])
    prior = (2.0 * nc - 1.0) * L_MAX
    return estimate_mi(demap_extrinsic(y, prior, sc, sigma2), nc)


def vnd_closed_form(i_a, d_v: int = 3):
    i_a = np.atleast_1d(np.asarray(i_a, dtype=np.float64))
    return np.array([j_function(math.sqrt(d_v - 1) * j_inverse(x)) for x in i_a])


def vnd_curve(d_v: int, grid=DEFAULT_GRID, n_bits: int = 100_000, seed: int = 0) -> ExitCurve:
    grid = _check_grid(grid)
    k = max(1, n_bits // d_v)
    i_e = []
    for idx, i_a in enumerate(grid):
        rng = np.random.default_rng([seed, idx, 0])
        bits = rng.integers(0, 2, k, dtype=np.uint8)
        rep = np.repeat(bits[:, None], d_v, axis=1)
        edges = gen_apriori(rep, j_inverse(i_a), [seed, idx, 1])
        ext, _ = vnd_update(edges)
        i_e.append(estimate_mi(ext, rep))
    return ExitCurve(grid, i_e, "vnd", "", {"d_v": d_v})


def inner_curve(label_map: LabelMap, spec: RaCodeSpec, snr_db: float, grid=DEFAULT_GRID,
                inner_iters: int = 3, n_bits: int = 100_000, seed: int = 0) -> ExitCurve:
    """Transfer curve of {demapper, pi2, ACC, degree-1 CND} seen from the VND.

    Synthetic priors sit on the ACC inputs; each grid point decodes
    ``ceil(n_bits / n)`` random blocks of ``n`` ACC inputs.
    """
    grid = _check_grid(grid)
    sc = build_superposed(label_map)
    sigma2 = snr_to_sigma2(snr_db)
    sched = Schedule(outer_iters=1, inner_iters=inner_iters)
    blocks = max(1, math.ceil(n_bits / spec.n))
    i_e = []
    for idx, i_a in enumerate(grid):
        sigma_a = j_inverse(i_a)
        ext_all, u_all = [], []
        for b in range(blocks):
            rng = np.random.default_rng([seed, idx, b, 0])
            u = rng.integers(0, 2, spec.n, dtype=np.uint8)
            nc_coded = apply_perm(spec.pi2, accumulate(u))
            a1, a2 = _constituent_symbols(nc_coded, label_map, rng)
            y = transmit(a1, a2, sigma2, [seed, idx, b, 1])
            prior = gen_apriori(u, sigma_a, [seed, idx, b, 2])
            loglik = nc_log_likelihoods(y, sc, sigma2)
            ext, _, _ = inner_unit(loglik, spec, prior, sched)
            ext_all.append(ext)
            u_all.append(u)
        i_e.append(estimate_mi(np.concatenate(ext_all), np.concatenate(u_all)))
    ctx = {"snr_db": snr_db, "k": spec.k, "d_v": spec.d_v, "inner_iters": inner_iters}
    return ExitCurve(grid, i_e, "inner_unit", label_map.name, ctx)


def inner_and_vnd_curves(label_map: LabelMap, spec: RaCodeSpec, ebn0_db: float,
                         grid=DEFAULT_GRID, inner_iters: int = 3, n_bits: int = 100_000,
                         seed: int = 0):
    snr_db = ebn0_to_snr_db(ebn0_db, spec.rate)
    inner = inner_curve(label_map, spec, snr_db, grid, inner_iters, n_bits, seed)
    inner.context["ebn0_db"] = ebn0_db
    vnd = vnd_curve(spec.d_v, grid, n_bits, seed)
    vnd.context["ebn0_db"] = ebn0_db
    return inner, vnd


def vnd_input_for_output(vnd: ExitCurve, i_e) -> np.ndarray:
    """Invert a sampled VND curve: the a-priori MI that yields output ``i_e``.

    This is the VND curve as drawn on an EXIT chart, with its axes swapped
    against the inner-unit curve.
    """
    ie = np.maximum.accumulate(vnd.i_e)
    return np.interp(i_e, ie, vnd.i_a)


def tunnel_margin(inner: ExitCurve, vnd: ExitCurve) -> np.ndarray:
    """Vertical gap between the inner curve and the flipped VND curve.

    Positive at every point means the decoding trajectory can pass.
    """
    return inner.i_e - vnd_input_for_output(vnd, inner.i_a)
