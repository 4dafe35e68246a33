"""Command-line frontend.

Subcommands map one-to-one onto the library: construct (reliability
table), encode (1-D and 2-D codeword layouts), equiv-check (2-D vs 1-D
equivalence), simulate (Monte Carlo BER/BLER sweep), sinr-stats (MMSE
SINR moments), latency (slot arithmetic). Data goes to stdout or the
requested file, diagnostics to stderr. Exit codes: 0 success, 1 bad
usage or invalid values, 2 runtime failure.
"""

import argparse
import sys

import numpy as np

from . import codec2d, construction, harness, mimo
from .kernel import encode_1d, is_power_of_two


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser():
    parser = _Parser(prog="stpolar",
                     description="Spatiotemporal 2-D polar coding toolkit")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("construct", help="emit a GA reliability table")
    p.add_argument("--n", type=int, required=True, help="block length N")
    p.add_argument("--design-mean", type=float, required=True,
                   help="design LLR mean m0")
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("encode", help="encode a bit string")
    p.add_argument("--bits", required=True,
                   help="message as contiguous 0/1 characters, index 1 first")
    p.add_argument("--s", type=int, required=True, help="spatial streams S")
    p.add_argument("--t", type=int, help="time length T (default len/S)")
    p.add_argument("--mode", default="time-space",
                   choices=["time-space", "space-time"])

    p = sub.add_parser("equiv-check",
                       help="verify 2-D encodings against the 1-D code")
    p.add_argument("--n", type=int, required=True, help="block length N")
    p.add_argument("--exhaustive", action="store_true",
                   help="all 2^N messages (N <= 16)")
    p.add_argument("--trials", type=int, default=1000,
                   help="random messages per split when not exhaustive")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("simulate", help="run a Monte Carlo BER/BLER sweep")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--n", type=int, help="block length N")
    p.add_argument("--s", type=int, help="spatial streams S")
    p.add_argument("--t", type=int, help="time length T")
    p.add_argument("--k", type=int, help="information bits K")
    p.add_argument("--mode", choices=["time-space", "space-time"])
    p.add_argument("--channel", choices=["awgn", "mimo"])
    p.add_argument("--l", type=int, help="receive antennas L")
    p.add_argument("--gamma", type=float, help="antenna ratio S/L")
    p.add_argument("--snr-db", type=harness._parse_snr_list,
                   help="comma-separated SNR list in dB")
    p.add_argument("--design-mean", type=float,
                   help="fixed GA design mean")
    p.add_argument("--design-rule", choices=["mean-sinr"],
                   help="GA design rule (default mean-sinr)")
    p.add_argument("--max-frames", type=int)
    p.add_argument("--target-frame-errors", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--workers", type=int,
                   help="worker threads (results do not depend on this)")

    p = sub.add_parser("sinr-stats", help="MMSE SINR sample moments")
    p.add_argument("--l", type=int, required=True, help="receive antennas L")
    p.add_argument("--s", type=int, required=True, help="spatial streams S")
    p.add_argument("--snr-db", type=float, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output path (default stdout)")

    p = sub.add_parser("latency", help="slot latency of 1-D vs 2-D")
    p.add_argument("--n", type=int, required=True, help="block length N")
    p.add_argument("--s", type=int, required=True, help="spatial streams S")

    return parser


def _write_out(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_construct(args):
    if not is_power_of_two(args.n):
        raise ValueError("n must be a power of two")
    profile = construction.ga_evolve(args.design_mean, args.n.bit_length() - 1)
    _write_out(construction.profile_table(profile), args.out)
    return 0


def _cmd_encode(args):
    bits = codec2d.parse_bitstring(args.bits)
    s = args.s
    t = args.t if args.t is not None else bits.size // max(s, 1)
    u = codec2d.reshape_codeword(bits, s, t)
    x = codec2d.encode_2d(u, args.mode)
    flat = codec2d.flatten_codeword(x)
    sys.stdout.write(f"1d: {codec2d.format_bitstring(flat)}\n")
    for row in x:
        sys.stdout.write(f"2d: {codec2d.format_bitstring(row)}\n")
    return 0


def _all_splits(n):
    splits = []
    s = 1
    while s <= n:
        splits.append((s, n // s))
        s *= 2
    return splits


def _cmd_equiv_check(args):
    n = args.n
    if not is_power_of_two(n):
        raise ValueError("n must be a power of two")
    if args.exhaustive:
        if n > 16:
            raise ValueError("exhaustive checks are limited to n <= 16")
        count = 2 ** n
        shifts = np.arange(n - 1, -1, -1, dtype=np.uint32)
        messages = ((np.arange(count, dtype=np.uint32)[:, None] >> shifts) & 1
                    ).astype(np.uint8)
    else:
        if args.trials < 1:
            raise ValueError("trials must be positive")
        rng = np.random.default_rng(args.seed)
        messages = rng.integers(0, 2, size=(args.trials, n), dtype=np.uint8)
    reference = encode_1d(messages)
    failures = 0
    for s, t in _all_splits(n):
        grids = messages.reshape(-1, s, t)
        for mode in codec2d.MODES:
            flat = codec2d.encode_2d(grids, mode).reshape(-1, n)
            bad = np.nonzero((flat != reference).any(axis=1))[0]
            if bad.size:
                failures += 1
                msg = messages[bad[0]]
                report = codec2d.verify_equivalence(msg, s, t)
                print(f"S={s} T={t} {mode}: MISMATCH ({report.detail})",
                      file=sys.stderr)
            else:
                print(f"S={s} T={t} {mode}: ok ({len(messages)} messages)")
    if failures:
        print(f"{failures} split/mode combinations disagree", file=sys.stderr)
        return 2
    print("all splits and modes equal the 1-D code")
    return 0


def _cmd_simulate(args):
    file_opts = harness.load_config(args.config) if args.config else {}
    flag_opts = {
        key: getattr(args, key) for key in harness.CONFIG_KEYS
        if getattr(args, key, None) is not None
    }
    merged = dict(file_opts)
    merged.update(flag_opts)
    # A flag on one side of an exclusive pair evicts the file-supplied
    # other side; two flags still conflict downstream.
    for a, b in (("design_mean", "design_rule"), ("l", "gamma")):
        if a in flag_opts and b not in flag_opts:
            merged.pop(b, None)
        elif b in flag_opts and a not in flag_opts:
            merged.pop(a, None)
    config = harness.make_sim_config(**merged)
    results = harness.run_sim(config, workers=args.workers)
    for r in results:
        print(
            f"snr {r.snr_db:g} dB: frames={r.frames} "
            f"bit_errors={r.bit_errors} frame_errors={r.frame_errors} "
            f"ber={r.ber:.4g} bler={r.bler:.4g} [{r.elapsed_s:.1f}s]",
            file=sys.stderr,
        )
    text = harness.format_results(results)
    _write_out(text, config.out)
    if config.out:
        print(f"wrote {config.out}", file=sys.stderr)
    return 0


def _cmd_sinr_stats(args):
    if args.trials < 2:
        raise ValueError("trials must be at least 2")
    sigma2 = 10.0 ** (-args.snr_db / 10.0)
    rng = harness.frame_stream(args.seed, harness.TAG_PILOT, 0, 0)
    stats = mimo.sinr_statistics(args.l, args.s, sigma2, args.trials, rng)
    _write_out(mimo.sinr_stats_table(stats), args.out)
    return 0


def _cmd_latency(args):
    one, two = harness.latency_estimate(args.n, args.s)
    print(f"1D: {one.slots} slots ({one.latency_ms} ms); "
          f"2D: {two.slots} slots ({two.latency_ms} ms)")
    return 0


_COMMANDS = {
    "construct": _cmd_construct,
    "encode": _cmd_encode,
    "equiv-check": _cmd_equiv_check,
    "simulate": _cmd_simulate,
    "sinr-stats": _cmd_sinr_stats,
    "latency": _cmd_latency,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 2
    except Exception as exc:  # deliberate: runtime failures exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
