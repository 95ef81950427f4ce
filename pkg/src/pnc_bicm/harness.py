"""Experiment orchestration: BER sweeps, EXIT jobs, configuration and CSV output."""

from __future__ import annotations

import csv
import dataclasses
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import snr_to_ebn0_db, snr_to_sigma2, transmit
from .constellation import ANTI_GRAY, GRAY, MAP_KINDS, make_label_map, modulate
from .exit_analysis import (
    DEFAULT_GRID,
    ExitCurve,
    demapper_curve,
    inner_and_vnd_curves,
)
from .ra_code import ParameterError, RaCodeSpec, build_spec, encode
from .relay_decoder import Schedule, decode_packet

BER_COLUMNS = (
    "snr_db", "ebn0_db", "map", "feedback", "k", "outer_iters", "inner_iters",
    "packets", "bit_errors", "ber", "fer", "seed",
)
EXIT_COLUMNS = ("component", "map", "snr_db_or_ebn0_db", "i_a", "i_e")


@dataclass
class BerConfig:
    k: int = 4096
    num_packets: int = 1000
    snr_grid_db: tuple = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    map: str = ANTI_GRAY
    schedule: Schedule = field(default_factory=Schedule)
    seed: int = 0
    d_v: int = 3
    workers: int = 1
    zero_s2: bool = False

    def validate(self):
        if self.k < 2:
            raise ParameterError(f"k must be >= 2, got {self.k}")
        if (self.d_v * self.k) % 2:
            raise ParameterError(f"codeword length {self.d_v * self.k} is odd; QPSK needs pairs")
        if self.num_packets < 1:
            raise ParameterError("num_packets must be >= 1")
        if self.map not in MAP_KINDS:
            raise ParameterError(f"unknown map {self.map!r}")
        if len(self.snr_grid_db) == 0:
            raise ParameterError("SNR grid is empty")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")


@dataclass(frozen=True)
class BerRecord:
    snr_db: float
    ebn0_db: float
    map: str
    feedback: bool
    k: int
    outer_iters: int
    inner_iters: int
    packets: int
    bit_errors: int
    ber: float
    fer: float
    seed: int

    def row(self) -> list:
        return [
            f"{self.snr_db:.4f}", f"{self.ebn0_db:.4f}", self.map, int(self.feedback), self.k,
            self.outer_iters, self.inner_iters, self.packets, self.bit_errors,
            f"{self.ber:.6e}", f"{self.fer:.6e}", self.seed,
        ]


def packet_sources(k: int, seed: int, packet: int, zero_s2: bool = False):
    """Source packets of both end nodes for one trial."""
    s1 = np.random.default_rng([seed, packet, 0]).integers(0, 2, k, dtype=np.uint8)
    s2 = np.random.default_rng([seed, packet, 1]).integers(0, 2, k, dtype=np.uint8)
    if zero_s2:
        return s1 ^ s2, np.zeros(k, dtype=np.uint8)
    return s1, s2


def run_packet(cfg: BerConfig, spec: RaCodeSpec, snr_db: float, packet: int, trace: bool = False):
    """Simulate one uplink packet pair; return ``(bit_errors, trace_rows)``.

    Each packet draws from its own seed streams ``(seed, packet, stream)``,
    so results do not depend on how packets are distributed over workers.
    """
    label_map = make_label_map(cfg.map)
    s1, s2 = packet_sources(cfg.k, cfg.seed, packet, cfg.zero_s2)
    sigma2 = snr_to_sigma2(snr_db)
    y = transmit(
        modulate(label_map, encode(spec, s1)),
        modulate(label_map, encode(spec, s2)),
        sigma2,
        [cfg.seed, packet, 2],
    )
    truth = s1 ^ s2
    result = decode_packet(y, spec, label_map, sigma2, cfg.schedule, truth=truth, trace=trace)
    return int(np.count_nonzero(result.nc_bits != truth)), result.trace


def _run_chunk(args):
    cfg, snr_db, packets, trace = args
    spec = build_spec(cfg.k, cfg.d_v, cfg.seed)
    return [run_packet(cfg, spec, snr_db, p, trace) for p in packets]


def run_ber_sweep(cfg: BerConfig, trace_rows: list | None = None) -> list[BerRecord]:
    """BER/FER of NC decoding at every SNR point of ``cfg``.

    One code (interleaver pair) is drawn from ``cfg.seed`` and reused for
    every packet. If ``trace_rows`` is a list, per-iteration diagnostics
    ``(snr_db, packet, iteration, mean_abs_llr, bit_errors)`` are appended.
    """
    cfg.validate()
    spec = build_spec(cfg.k, cfg.d_v, cfg.seed)
    want_trace = trace_rows is not None
    records = []
    executor = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for snr_db in cfg.snr_grid_db:
            snr_db = float(snr_db)
            if executor is None:
                results = [run_packet(cfg, spec, snr_db, p, want_trace) for p in range(cfg.num_packets)]
            else:
                chunks = np.array_split(np.arange(cfg.num_packets), cfg.workers * 4)
                jobs = [(cfg, snr_db, c.tolist(), want_trace) for c in chunks if c.size]
                results = [r for part in executor.map(_run_chunk, jobs) for r in part]
            errors = [e for e, _ in results]
            if want_trace:
                for packet, (_, rows) in enumerate(results):
                    trace_rows.extend((snr_db, packet, *row) for row in rows)
            total = int(sum(errors))
            records.append(BerRecord(
                snr_db=snr_db,
                ebn0_db=float(snr_to_ebn0_db(snr_db, spec.rate)),
                map=cfg.map,
                feedback=cfg.schedule.demapper_feedback,
                k=cfg.k,
                outer_iters=cfg.schedule.outer_iters,
                inner_iters=cfg.schedule.inner_iters,
                packets=cfg.num_packets,
                bit_errors=total,
                ber=total / (cfg.k * cfg.num_packets),
                fer=sum(e > 0 for e in errors) / cfg.num_packets,
                seed=cfg.seed,
            ))
    finally:
        if executor is not None:
            executor.shutdown()
    return records


def packet_error_counts(cfg: BerConfig, snr_db: float) -> np.ndarray:
    """Per-packet NC bit-error counts at one SNR (for distributional checks)."""
    cfg.validate()
    spec = build_spec(cfg.k, cfg.d_v, cfg.seed)
    return np.array([run_packet(cfg, spec, snr_db, p)[0] for p in range(cfg.num_packets)])


# ---------------------------------------------------------------------------
# CSV


def _provenance(cfg) -> list[str]:
    out = []
    for f in dataclasses.fields(cfg):
        value = getattr(cfg, f.name)
        if dataclasses.is_dataclass(value):
            out.extend(f"# {f.name}.{g.name}={getattr(value, g.name)}" for g in dataclasses.fields(value))
        elif isinstance(value, (tuple, list)):
            out.append(f"# {f.name}={','.join(str(v) for v in value)}")
        else:
            out.append(f"# {f.name}={value}")
    return out


def ber_csv(records: list[BerRecord], cfg: BerConfig | None = None) -> str:
    buf = io.StringIO()
    if cfg is not None:
        buf.write("\n".join(_provenance(cfg)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BER_COLUMNS)
    for rec in records:
        writer.writerow(rec.row())
    return buf.getvalue()


def trace_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("snr_db", "packet", "iteration", "mean_abs_llr", "bit_errors"))
    for snr_db, packet, it, mean_abs, errors in rows:
        writer.writerow((f"{snr_db:.4f}", packet, it, f"{mean_abs:.6f}", errors))
    return buf.getvalue()


def exit_csv(curves: list[ExitCurve], operating_point: float, params=None) -> str:
    buf = io.StringIO()
    if params is not None:
        buf.write("\n".join(_provenance(params)) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(EXIT_COLUMNS)
    for curve in curves:
        for i_a, i_e in zip(curve.i_a, curve.i_e):
            writer.writerow((curve.component, curve.map_kind or "-", f"{operating_point:.4f}",
                             f"{i_a:.6f}", f"{i_e:.6f}"))
    return buf.getvalue()


def write_text(path, text: str):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# EXIT jobs


@dataclass
class ExitParams:
    """Parameters of an EXIT job. ``snr_db`` drives the demapper job and
    ``ebn0_db`` the full (inner unit + VND) job."""

    snr_db: float = 4.0
    ebn0_db: float = 1.8
    maps: tuple = (GRAY, ANTI_GRAY)
    grid: tuple = DEFAULT_GRID
    k: int = 4096
    d_v: int = 3
    inner_iters: int = 3
    n_samples: int = 100_000
    seed: int = 0


def exit_curves(kind: str, params: ExitParams) -> tuple[list[ExitCurve], float]:
    if len(params.grid) == 0:
        raise ValueError("EXIT grid is empty")
    if kind == "demapper":
        curves = [
            demapper_curve(make_label_map(m), params.snr_db, params.grid, params.n_samples, params.seed)
            for m in params.maps
        ]
        return curves, params.snr_db
    if kind == "full":
        spec = build_spec(params.k, params.d_v, params.seed)
        curves, vnd = [], None
        for m in params.maps:
            inner, vnd = inner_and_vnd_curves(
                make_label_map(m), spec, params.ebn0_db, params.grid,
                params.inner_iters, params.n_samples, params.seed,
            )
            curves.append(inner)
        return curves + [vnd], params.ebn0_db
    raise ValueError(f"unknown EXIT job kind {kind!r}, expected 'demapper' or 'full'")


def run_exit_job(kind: str, params: ExitParams, out=None) -> str:
    """Compute EXIT curves and return (and optionally write) their CSV."""
    curves, point = exit_curves(kind, params)
    text = exit_csv(curves, point, params)
    if out is not None:
        write_text(out, text)
    return text


# ---------------------------------------------------------------------------
# configuration

_BER_KEYS = {
    "k": ("k", int),
    "packets": ("num_packets", int),
    "snr": ("snr_grid_db", None),
    "map": ("map", str),
    "outer": ("outer_iters", int),
    "inner": ("inner_iters", int),
    "feedback": ("demapper_feedback", None),
    "demap_every_inner": ("demap_every_inner", None),
    "early_stop": ("early_stop", None),
    "seed": ("seed", int),
    "d_v": ("d_v", int),
    "workers": ("workers", int),
    "zero_s2": ("zero_s2", None),
}
_SCHEDULE_FIELDS = {"outer_iters", "inner_iters", "demapper_feedback", "demap_every_inner", "early_stop"}


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ParameterError(f"not a boolean: {text!r}")


def parse_grid(text) -> tuple:
    """``"1,2,3"`` or ``"start:stop:step"`` (stop inclusive) to a tuple of floats."""
    if isinstance(text, (list, tuple)):
        return tuple(float(v) for v in text)
    text = str(text).strip()
    if not text:
        return ()
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise ParameterError("grid step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    return tuple(float(v) for v in text.split(","))


def read_key_values(path) -> dict:
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file not found: {path}")
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    return values


def parse_config(path=None, overrides: dict | None = None) -> BerConfig:
    """Build a ``BerConfig`` from a key=value file plus overrides.

    Overrides (typically CLI flags; ``None`` values are ignored) take
    precedence over the file. Unknown keys raise ``ParameterError``.
    """
    values = read_key_values(path) if path is not None else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(values) - set(_BER_KEYS))
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    cfg_kwargs, sched_kwargs = {}, {}
    for key, raw in values.items():
        name, conv = _BER_KEYS[key]
        if name == "snr_grid_db":
            value = parse_grid(raw)
        elif conv is None:
            value = parse_bool(raw)
        else:
            value = conv(raw)
        (sched_kwargs if name in _SCHEDULE_FIELDS else cfg_kwargs)[name] = value
    try:
        cfg = BerConfig(schedule=Schedule(**sched_kwargs), **cfg_kwargs)
    except ValueError as exc:
        raise ParameterError(str(exc)) from exc
    cfg.validate()
    return cfg
