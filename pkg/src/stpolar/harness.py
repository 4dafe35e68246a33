"""Reproducible Monte Carlo BER/BLER harness and latency estimator.

Every frame owns a counter-derived Philox stream keyed by (master seed,
role tag, SNR point index, frame index), so the random numbers a frame
sees never depend on scheduling or worker count. Frames are processed in
fixed-size chunks and folded in frame order, which makes early stopping
bit-reproducible for any number of workers.
"""

import os
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import mimo
from .codec2d import encode_2d
from .construction import code_spec_from_profile, ga_evolve
from .decoder import L_CLAMP, sc_decode_batch
from .kernel import encode_1d, is_power_of_two

CHUNK_FRAMES = 256
PILOT_TRIALS = 500
DEFAULT_MAX_FRAMES = 10 ** 7
DEFAULT_TARGET_FE = 100

# Stream role tags (top byte of the second key word).
TAG_FRAME = 0
TAG_PILOT = 1

_MASK64 = (1 << 64) - 1
_MAX_POINTS = 1 << 16
_MAX_FRAME_INDEX = 1 << 40

CONFIG_KEYS = (
    "n", "s", "t", "k", "mode", "channel", "l", "gamma", "snr_db",
    "design_mean", "design_rule", "max_frames", "target_frame_errors",
    "seed", "out",
)


def _parse_snr_list(text):
    vals = tuple(float(part) for part in str(text).split(",") if part.strip())
    if not vals:
        raise ValueError("snr_db list is empty")
    return vals


_COERCERS = {
    "n": int, "s": int, "t": int, "k": int,
    "mode": str, "channel": str,
    "l": int, "gamma": float,
    "snr_db": _parse_snr_list,
    "design_mean": float, "design_rule": str,
    "max_frames": int, "target_frame_errors": int, "seed": int,
    "out": str,
}


def load_config(path):
    """Parse a line-oriented `key = value` configuration file.

    Blank lines and '#' comments are allowed; unknown or repeated keys are
    errors. Values come back typed per the key.
    """
    opts = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"cannot read config file {path}: {exc}") from exc
    with fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if not sep or not key or not val:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key in opts:
                raise ValueError(f"{path}:{lineno}: duplicate key {key!r}")
            try:
                opts[key] = _COERCERS[key](val)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}")
    return opts


@dataclass(frozen=True)
class SimConfig:
    """Fully resolved simulation request."""

    channel: str
    n: int
    s: int
    t: int
    k: int
    mode: str
    l: int | None
    snr_db: tuple
    design_mean: float | None
    design_rule: str
    max_frames: int
    target_frame_errors: int
    seed: int
    out: str | None


def make_sim_config(**options):
    """Validate raw options (config file and/or flags) into a SimConfig."""
    unknown = set(options) - set(CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    opts = {k: v for k, v in options.items() if v is not None}

    channel = opts.get("channel", "awgn")
    if channel not in ("awgn", "mimo"):
        raise ValueError(f"channel must be awgn or mimo, got {channel!r}")
    mode = opts.get("mode", "time-space")
    if mode not in ("time-space", "space-time"):
        raise ValueError(f"unknown mode {mode!r}")

    n = opts.get("n")
    s = opts.get("s")
    t = opts.get("t")
    if channel == "awgn":
        if s not in (None, 1):
            raise ValueError("awgn runs are single-stream (s = 1)")
        if "l" in opts or "gamma" in opts:
            raise ValueError("l and gamma require the mimo channel")
        s = 1
        if n is None:
            n = t
        if n is None:
            raise ValueError("awgn needs the block length n")
        t = n
    else:
        if s is None:
            raise ValueError("mimo needs the stream count s")
        if n is None and t is None:
            raise ValueError("mimo needs n or t")
        if t is None:
            t = n // s if n % s == 0 else 0
        if n is None:
            n = s * t
        if s * t != n:
            raise ValueError("n must equal s * t")
    for name, val in (("n", n), ("s", s), ("t", t)):
        if not is_power_of_two(val):
            raise ValueError(f"{name} must be a power of two, got {val}")

    k = opts.get("k")
    if k is None:
        raise ValueError("missing code dimension k")
    if not 1 <= int(k) <= n:
        raise ValueError(f"k must be in [1, {n}]")

    l_antennas = None
    if channel == "mimo":
        if ("l" in opts) == ("gamma" in opts):
            raise ValueError("mimo needs exactly one of l or gamma")
        if "l" in opts:
            l_antennas = int(opts["l"])
        else:
            gamma = float(opts["gamma"])
            if not 0.0 < gamma <= 1.0:
                raise ValueError("gamma must be in (0, 1]")
            l_antennas = int(round(s / gamma))
        if l_antennas < s:
            raise ValueError("need l >= s receive antennas")

    if ("design_mean" in opts) and ("design_rule" in opts):
        raise ValueError("design_mean and design_rule are mutually exclusive")
    design_mean = opts.get("design_mean")
    if design_mean is not None and float(design_mean) <= 0.0:
        raise ValueError("design_mean must be positive")
    design_rule = opts.get("design_rule", "mean-sinr")
    if design_rule != "mean-sinr":
        raise ValueError(f"unknown design_rule {design_rule!r}")

    snr_db = opts.get("snr_db")
    if not snr_db:
        raise ValueError("snr_db list is required")
    snr_db = tuple(float(v) for v in snr_db)

    max_frames = int(opts.get("max_frames", DEFAULT_MAX_FRAMES))
    target_fe = int(opts.get("target_frame_errors", DEFAULT_TARGET_FE))
    if max_frames < 1 or target_fe < 1:
        raise ValueError("max_frames and target_frame_errors must be >= 1")
    seed = int(opts.get("seed", 0))
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if len(snr_db) > _MAX_POINTS or max_frames > _MAX_FRAME_INDEX:
        raise ValueError("configuration exceeds the stream-key layout")

    return SimConfig(
        channel=channel, n=int(n), s=int(s), t=int(t), k=int(k), mode=mode,
        l=l_antennas, snr_db=snr_db,
        design_mean=None if design_mean is None else float(design_mean),
        design_rule=design_rule, max_frames=max_frames,
        target_frame_errors=target_fe, seed=seed, out=opts.get("out"),
    )


def frame_stream(master_seed, tag, point, frame):
    """Counter-derived Philox generator for one frame (or pilot) role."""
    if not 0 <= point < _MAX_POINTS or not 0 <= frame < _MAX_FRAME_INDEX:
        raise ValueError("stream coordinates out of range")
    word = (int(tag) << 56) | (int(point) << 40) | int(frame)
    key = np.array([int(master_seed) & _MASK64, word], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def pilot_mean_sinr(l_antennas, s_streams, sigma2, master_seed, point,
                    trials=PILOT_TRIALS):
    """Pooled mean SINR over a deterministic pilot ensemble of channels."""
    rng = frame_stream(master_seed, TAG_PILOT, point, 0)
    total = 0.0
    for _ in range(int(trials)):
        ch = mimo.sample_channel(l_antennas, s_streams, sigma2, rng)
        total += float(mimo.mmse_filter(ch).sinr.mean())
    return total / float(trials)


@lru_cache(maxsize=None)
def _cached_profile(n_stages, design_bucket):
    return ga_evolve(design_bucket, n_stages)


def _profile_for(n_stages, design_mean):
    # Bucket to 6 decimals so pilot jitter cannot fragment the cache.
    return _cached_profile(int(n_stages), round(float(design_mean), 6))


def _design_mean_for_point(config, sigma2, point):
    if config.design_mean is not None:
        return config.design_mean
    if config.channel == "awgn":
        return 2.0 / sigma2
    return 2.0 * pilot_mean_sinr(config.l, config.s, sigma2,
                                 config.seed, point)


@dataclass(frozen=True)
class SimResult:
    """One (configuration, SNR point) Monte Carlo record."""

    snr_db: float
    N: int
    S: int
    T: int
    K: int
    L: int
    mode: str
    frames: int
    bit_errors: int
    frame_errors: int
    ber: float
    bler: float
    seed: int
    elapsed_s: float = 0.0


def _awgn_chunk(config, spec, point, sigma2, start, count):
    info = spec.info_set
    n, k = spec.N, spec.K
    bits = np.empty((count, k), dtype=np.uint8)
    noise = np.empty((count, n), dtype=np.float64)
    for j in range(count):
        rng = frame_stream(config.seed, TAG_FRAME, point, start + j)
        bits[j] = rng.integers(0, 2, size=k, dtype=np.uint8)
        noise[j] = rng.standard_normal(n)
    u = np.zeros((count, n), dtype=np.uint8)
    u[:, info] = bits
    symbols = 1.0 - 2.0 * encode_1d(u).astype(np.float64)
    llr = (2.0 / sigma2) * (symbols + np.sqrt(sigma2) * noise)
    np.clip(llr, -L_CLAMP, L_CLAMP, out=llr)
    u_hat, _, _ = sc_decode_batch(llr, spec.frozen_mask)
    err = u_hat[:, info] != bits
    return err.sum(axis=1, dtype=np.int64), err.any(axis=1)


def _mimo_chunk(config, spec, point, sigma2, start, count):
    info = spec.info_set
    n, k = spec.N, spec.K
    s, t = spec.S, spec.T
    bits = np.empty((count, k), dtype=np.uint8)
    llr = np.empty((count, n), dtype=np.float64)
    for j in range(count):
        rng = frame_stream(config.seed, TAG_FRAME, point, start + j)
        ch = mimo.sample_channel(config.l, s, sigma2, rng)
        filt = mimo.mmse_filter(ch)
        bits[j] = rng.integers(0, 2, size=k, dtype=np.uint8)
        u = np.zeros(n, dtype=np.uint8)
        u[info] = bits[j]
        x2 = encode_2d(u.reshape(s, t), config.mode)
        y = mimo.transmit(1.0 - 2.0 * x2.astype(np.float64), ch, rng)
        llr[j] = mimo.detect_llr(y, filt, ch).reshape(-1)
    u_hat, _, _ = sc_decode_batch(llr, spec.frozen_mask)
    err = u_hat[:, info] != bits
    return err.sum(axis=1, dtype=np.int64), err.any(axis=1)


def _run_point(chunk_fn, target_fe, max_frames, workers):
    frames = 0
    bit_errors = 0
    frame_errors = 0

    def chunk_starts():
        pos = 0
        while pos < max_frames:
            cnt = min(CHUNK_FRAMES, max_frames - pos)
            yield pos, cnt
            pos += cnt

    def fold(be, fe):
        # Consume one chunk's per-frame counts in frame order; stop at the
        # exact frame where the error target is met.
        nonlocal frames, bit_errors, frame_errors
        cum = frame_errors + np.cumsum(fe, dtype=np.int64)
        hit = np.nonzero(cum >= target_fe)[0]
        upto = int(hit[0]) + 1 if hit.size else len(fe)
        frames += upto
        bit_errors += int(be[:upto].sum())
        frame_errors += int(fe[:upto].sum())
        return bool(hit.size)

    if workers <= 1:
        for pos, cnt in chunk_starts():
            if fold(*chunk_fn(pos, cnt)):
                break
    else:
        starts = chunk_starts()
        pending = deque()
        exhausted = False
        with ThreadPoolExecutor(max_workers=workers) as pool:
            while True:
                while not exhausted and len(pending) < 2 * workers:
                    try:
                        pos, cnt = next(starts)
                    except StopIteration:
                        exhausted = True
                        break
                    pending.append(pool.submit(chunk_fn, pos, cnt))
                if not pending:
                    break
                be, fe = pending.popleft().result()
                if fold(be, fe):
                    for fut in pending:
                        fut.cancel()
                    break
    return frames, bit_errors, frame_errors


def _resolve_workers(workers):
    if workers is None:
        workers = os.cpu_count() or 1
    return max(1, int(workers))


def _n_stages(n):
    return int(n).bit_length() - 1


def run_awgn_sim(config: SimConfig, workers=None):
    """BPSK over real AWGN: GA-constructed code, SC decoding, per-point
    early stopping. Returns one SimResult per SNR point in input order.
    """
    if config.channel != "awgn":
        raise ValueError("config does not select the awgn channel")
    workers = _resolve_workers(workers)
    results = []
    for point, snr in enumerate(config.snr_db):
        t0 = time.monotonic()
        sigma2 = 10.0 ** (-snr / 10.0)
        profile = _profile_for(_n_stages(config.n),
                               _design_mean_for_point(config, sigma2, point))
        spec = code_spec_from_profile(profile, config.k, S=1, T=config.n,
                                      mode=config.mode)

        def chunk(pos, cnt, _spec=spec, _p=point, _s2=sigma2):
            return _awgn_chunk(config, _spec, _p, _s2, pos, cnt)

        frames, bit_errors, frame_errors = _run_point(
            chunk, config.target_frame_errors, config.max_frames, workers)
        results.append(SimResult(
            snr_db=float(snr), N=config.n, S=1, T=config.n, K=config.k,
            L=0, mode=config.mode, frames=frames, bit_errors=bit_errors,
            frame_errors=frame_errors, ber=bit_errors / (frames * config.k),
            bler=frame_errors / frames, seed=config.seed,
            elapsed_s=time.monotonic() - t0,
        ))
    return results


def run_mimo_sim(config: SimConfig, workers=None):
    """2-D code over the quasi-static Rayleigh channel with MMSE detection.

    Per frame: fresh channel, MMSE filter, random message, 2-D encoding,
    unit-power BPSK transmit, per-stream LLRs, flatten, SC decode. The GA
    design mean follows the configured rule (fixed, or twice the pilot
    mean SINR of the point).
    """
    if config.channel != "mimo":
        raise ValueError("config does not select the mimo channel")
    workers = _resolve_workers(workers)
    results = []
    for point, snr in enumerate(config.snr_db):
        t0 = time.monotonic()
        sigma2 = 10.0 ** (-snr / 10.0)
        profile = _profile_for(_n_stages(config.n),
                               _design_mean_for_point(config, sigma2, point))
        spec = code_spec_from_profile(profile, config.k, S=config.s,
                                      T=config.t, mode=config.mode)

        def chunk(pos, cnt, _spec=spec, _p=point, _s2=sigma2):
            return _mimo_chunk(config, _spec, _p, _s2, pos, cnt)

        frames, bit_errors, frame_errors = _run_point(
            chunk, config.target_frame_errors, config.max_frames, workers)
        results.append(SimResult(
            snr_db=float(snr), N=config.n, S=config.s, T=config.t,
            K=config.k, L=config.l, mode=config.mode, frames=frames,
            bit_errors=bit_errors, frame_errors=frame_errors,
            ber=bit_errors / (frames * config.k), bler=frame_errors / frames,
            seed=config.seed, elapsed_s=time.monotonic() - t0,
        ))
    return results


def run_sim(config: SimConfig, workers=None):
    if config.channel == "mimo":
        return run_mimo_sim(config, workers=workers)
    return run_awgn_sim(config, workers=workers)


@dataclass(frozen=True)
class LatencyEstimate:
    scheme: str
    N: int
    S: int
    slots: int
    latency_ms: int


def latency_estimate(n_total, s_streams):
    """Slot counts of the 1-D and 2-D schemes at 14 symbols per 1 ms slot.

    The 1-D scheme serializes all N symbols on one stream; the 2-D scheme
    sends N/S symbols on each of S parallel streams.
    """
    n_total = int(n_total)
    s_streams = int(s_streams)
    if n_total < 1 or s_streams < 1:
        raise ValueError("need N >= 1 and S >= 1")
    if n_total % s_streams:
        raise ValueError("S must divide N")
    one = -(-n_total // 14)
    two = -(-(n_total // s_streams) // 14)
    return (
        LatencyEstimate(scheme="1-D", N=n_total, S=s_streams, slots=one,
                        latency_ms=one),
        LatencyEstimate(scheme="2-D", N=n_total, S=s_streams, slots=two,
                        latency_ms=two),
    )


CSV_HEADER = ("snr_db,N,S,T,K,L,mode,frames,bit_errors,frame_errors,"
              "ber,bler,seed")


def format_results(results):
    """Render SimResults as CSV text, rows sorted by snr_db ascending."""
    if not results:
        raise ValueError("no results to format")
    lines = [CSV_HEADER]
    for r in sorted(results, key=lambda item: item.snr_db):
        lines.append(",".join((
            repr(float(r.snr_db)), str(r.N), str(r.S), str(r.T), str(r.K),
            str(r.L), r.mode, str(r.frames), str(r.bit_errors),
            str(r.frame_errors), repr(float(r.ber)), repr(float(r.bler)),
            str(r.seed),
        )))
    return "\n".join(lines) + "\n"


def export_results(results, path):
    text = format_results(results)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def read_results(path):
    """Parse a results CSV back into SimResult records (elapsed_s is not
    serialized and comes back as 0)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh if line.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("not a results CSV")
    out = []
    for line in lines[1:]:
        f = line.split(",")
        if len(f) != 13:
            raise ValueError(f"malformed row: {line!r}")
        out.append(SimResult(
            snr_db=float(f[0]), N=int(f[1]), S=int(f[2]), T=int(f[3]),
            K=int(f[4]), L=int(f[5]), mode=f[6], frames=int(f[7]),
            bit_errors=int(f[8]), frame_errors=int(f[9]), ber=float(f[10]),
            bler=float(f[11]), seed=int(f[12]),
        ))
    return out
