"""Command-line entry point: ``pnc-bicm {ber,exit,encode-selftest}``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .constellation import MAP_KINDS, make_label_map, modulate
from .harness import (
    ExitParams,
    ber_csv,
    parse_config,
    parse_grid,
    read_key_values,
    run_ber_sweep,
    run_exit_job,
    trace_csv,
    write_text,
)
from .ra_code import ParameterError, build_spec, encode
from .relay_decoder import Schedule, decode_packet

_EBN0_HELP = (
    "Eb/N0 in dB for the full job. Converted with Eb/N0 = SNR/(4R): "
    "per-node symbol energy 2, 2R information bits per symbol, N0 = 2*sigma2."
)


def _emit(text: str, out):
    if out:
        write_text(out, text)
    else:
        sys.stdout.write(text)


def cmd_ber(args) -> int:
    overrides = {
        "k": args.k, "packets": args.packets, "snr": args.snr, "map": args.map,
        "outer": args.outer, "inner": args.inner, "seed": args.seed,
        "workers": args.workers,
        "feedback": False if args.no_feedback else None,
    }
    cfg = parse_config(args.config, overrides)
    trace = [] if args.trace else None
    records = run_ber_sweep(cfg, trace)
    _emit(ber_csv(records, cfg), args.out)
    if args.trace:
        write_text(args.trace, trace_csv(trace))
    return 0


_EXIT_KEYS = {
    "snr": ("snr_db", float), "ebn0": ("ebn0_db", float), "grid": ("grid", parse_grid),
    "seed": ("seed", int), "k": ("k", int), "d_v": ("d_v", int), "inner": ("inner_iters", int),
    "samples": ("n_samples", int), "map": ("maps", lambda s: tuple(str(s).split(","))),
}


def cmd_exit(args) -> int:
    values = read_key_values(args.config) if args.config else {}
    flags = {"snr": args.snr, "ebn0": args.ebn0, "grid": args.grid, "seed": args.seed,
             "k": args.k, "inner": args.inner, "samples": args.samples, "map": args.map}
    values.update({k: v for k, v in flags.items() if v is not None})
    unknown = sorted(set(values) - set(_EXIT_KEYS))
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    params = ExitParams(**{_EXIT_KEYS[k][0]: _EXIT_KEYS[k][1](v) for k, v in values.items()})
    for m in params.maps:
        if m not in MAP_KINDS:
            raise ParameterError(f"unknown map {m!r}")
    text = run_exit_job(args.kind, params, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_selftest(args) -> int:
    """Linearity and noiseless round-trip checks on small random codes."""
    rng = np.random.default_rng(args.seed)
    failures = 0
    for trial in range(args.trials):
        k = int(rng.integers(2, 33)) * 2
        spec = build_spec(k, 3, int(rng.integers(2**32)))
        s1 = rng.integers(0, 2, k, dtype=np.uint8)
        s2 = rng.integers(0, 2, k, dtype=np.uint8)
        x1, x2 = encode(spec, s1), encode(spec, s2)
        linear = np.array_equal(x1 ^ x2, encode(spec, s1 ^ s2))
        decoded = True
        for kind in MAP_KINDS:
            label_map = make_label_map(kind)
            y = modulate(label_map, x1) + modulate(label_map, x2)
            res = decode_packet(y, spec, label_map, 1e-6, Schedule(outer_iters=3))
            decoded &= np.array_equal(res.nc_bits, s1 ^ s2)
        ok = linear and decoded
        failures += not ok
        if args.verbose or not ok:
            print(f"trial {trial} k={k}: linearity={'ok' if linear else 'FAIL'} "
                  f"decode={'ok' if decoded else 'FAIL'}")
    print(f"encode-selftest: {args.trials - failures}/{args.trials} passed")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pnc-bicm",
        description="Iterative demapping/decoding for channel-coded PNC in a two-way relay channel.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="Monte-Carlo BER sweep of the relay NC decoder",
                         description="SNR is 2/sigma2 (per-node symbol energy 2, sigma2 per real "
                                     "dimension). The ebn0_db column uses Eb/N0 = SNR/(4R).")
    ber.add_argument("--config", help="key=value file; flags override its values")
    ber.add_argument("--k", type=int, help="source packet length (default 4096)")
    ber.add_argument("--packets", type=int, help="packets per SNR point (default 1000)")
    ber.add_argument("--snr", help="SNR grid in dB: 'a,b,c' or 'start:stop:step'")
    ber.add_argument("--map", choices=MAP_KINDS)
    ber.add_argument("--outer", type=int, help="outer iterations (default 20)")
    ber.add_argument("--inner", type=int, help="inner iterations per outer (default 3)")
    ber.add_argument("--no-feedback", action="store_true",
                     help="non-iterative baseline: no demapper feedback")
    ber.add_argument("--seed", type=int)
    ber.add_argument("--workers", type=int, help="worker processes (results do not depend on it)")
    ber.add_argument("--trace", help="write per-iteration diagnostics CSV to this path")
    ber.add_argument("--out", help="output CSV path (stdout if omitted)")
    ber.set_defaults(func=cmd_ber)

    ex = sub.add_parser("exit", help="EXIT curves of the demapper or inner unit + VND")
    ex.add_argument("--kind", choices=("demapper", "full"), default="demapper")
    ex.add_argument("--config", help="key=value file; flags override its values")
    ex.add_argument("--snr", type=float, help="SNR in dB for the demapper job (default 4)")
    ex.add_argument("--ebn0", type=float, help=_EBN0_HELP + " Default 1.8.")
    ex.add_argument("--map", help="comma-separated maps (default gray,anti_gray)")
    ex.add_argument("--grid", help="a-priori MI grid: 'a,b,c' or 'start:stop:step'")
    ex.add_argument("--k", type=int, help="source length of the code for the full job")
    ex.add_argument("--inner", type=int, help="inner iterations per curve point (default 3)")
    ex.add_argument("--samples", type=int, help="symbols (demapper) or bits per point")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--out", help="output CSV path (stdout if omitted)")
    ex.set_defaults(func=cmd_exit)

    st = sub.add_parser("encode-selftest", help="check code linearity and noiseless decoding")
    st.add_argument("--trials", type=int, default=20)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--verbose", action="store_true")
    st.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
