"""Quasi-static Rayleigh MIMO channel with linear MMSE detection.

One channel matrix per codeword, i.i.d. unit-variance complex Gaussian
entries. The MMSE stage reports per-stream SINR, the unbiased filter, and
per-symbol LLRs for the decoder; a Monte Carlo helper collects SINR
concentration statistics across channel realizations.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .decoder import L_CLAMP


@dataclass(frozen=True)
class ChannelRealization:
    """One quasi-static channel draw: L x S matrix H and noise variance."""

    H: np.ndarray
    sigma2: float

    @property
    def L(self):
        return self.H.shape[0]

    @property
    def S(self):
        return self.H.shape[1]

    @property
    def snr_db(self):
        return -10.0 * np.log10(self.sigma2)


@dataclass(frozen=True)
class MmseOutput:
    """MMSE filter bank with per-stream SINR and signal gain (bias)."""

    filter: np.ndarray
    sinr: np.ndarray
    bias: np.ndarray


@dataclass(frozen=True)
class SinrStats:
    """Sample moments of per-stream SINR over channel realizations."""

    L: int
    S: int
    sigma2: float
    trials: int
    stream_mean: np.ndarray
    stream_var: np.ndarray
    pooled_mean: float
    pooled_var: float


def sample_channel(l_antennas, s_streams, sigma2, rng):
    """Draw one L x S channel with i.i.d. CN(0, 1) entries."""
    l, s = int(l_antennas), int(s_streams)
    if s < 1 or l < s:
        raise ValueError("need L >= S >= 1")
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    h = rng.standard_normal((l, s)) + 1j * rng.standard_normal((l, s))
    h *= np.sqrt(0.5)
    return ChannelRealization(H=h, sigma2=float(sigma2))


def mmse_filter(ch: ChannelRealization):
    """Per-stream MMSE statistics of one realization.

    With per-stream power 1/S, the normalized error matrix is
    inv(I + H'H / (S sigma2)); its diagonal gives MMSE_k, from which
    sinr_k = 1/MMSE_k - 1 and bias_k = 1 - MMSE_k. The returned filter
    has unit signal gain on each +-1 symbol after division by bias_k.
    """
    h = ch.H
    if not np.all(np.isfinite(h)):
        raise ValueError("channel matrix must be finite")
    s = h.shape[1]
    a = np.eye(s, dtype=np.complex128) + (h.conj().T @ h) / (s * ch.sigma2)
    try:
        factors = cho_factor(a, lower=True)
    except LinAlgError as exc:
        raise ValueError("numerically singular MMSE matrix") from exc
    a_inv = cho_solve(factors, np.eye(s, dtype=np.complex128))
    mmse = np.real(np.diag(a_inv)).copy()
    sinr = 1.0 / mmse - 1.0
    bias = 1.0 - mmse
    w = (a_inv @ h.conj().T) / (np.sqrt(s) * ch.sigma2)
    for arr in (w, sinr, bias):
        arr.setflags(write=False)
    return MmseOutput(filter=w, sinr=sinr, bias=bias)


def transmit(x_bpsk, ch: ChannelRealization, rng):
    """Send an S x T matrix of +-1 symbols through the channel.

    Columns are scaled by 1/sqrt(S) so every time instant radiates unit
    total power; the additive noise is i.i.d. circularly-symmetric complex
    Gaussian with variance sigma2 per receive entry.
    """
    xb = np.asarray(x_bpsk, dtype=np.float64)
    if xb.ndim != 2 or xb.shape[0] != ch.S:
        raise ValueError("symbol matrix shape does not match the channel")
    if not np.isin(xb, (-1.0, 1.0)).all():
        raise ValueError("symbols must be +-1")
    shape = (ch.L, xb.shape[1])
    noise = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    noise *= np.sqrt(ch.sigma2 / 2.0)
    return ch.H @ (xb / np.sqrt(ch.S)) + noise


def detect_llr(y, out: MmseOutput, ch: ChannelRealization):
    """Per-symbol LLRs from the filtered receive matrix.

    Each stream is unbiased to unit signal gain, its real part is taken,
    and the scalar-channel rule with effective noise variance 1/sinr_k
    gives LLR = 2 sinr_k r. Clamped to +-L_CLAMP.
    """
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim != 2 or y.shape[0] != ch.L:
        raise ValueError("receive matrix shape does not match the channel")
    z = out.filter @ y
    r = (z / out.bias[:, None]).real
    return np.clip(2.0 * out.sinr[:, None] * r, -L_CLAMP, L_CLAMP)


def sinr_statistics(l_antennas, s_streams, sigma2, trials, rng):
    """Sample per-stream and pooled SINR moments over fresh realizations."""
    if trials < 2:
        raise ValueError("need at least 2 trials")
    sinrs = np.empty((trials, int(s_streams)), dtype=np.float64)
    for i in range(int(trials)):
        ch = sample_channel(l_antennas, s_streams, sigma2, rng)
        sinrs[i] = mmse_filter(ch).sinr
    return SinrStats(
        L=int(l_antennas),
        S=int(s_streams),
        sigma2=float(sigma2),
        trials=int(trials),
        stream_mean=sinrs.mean(axis=0),
        stream_var=sinrs.var(axis=0, ddof=1),
        pooled_mean=float(sinrs.mean()),
        pooled_var=float(sinrs.var(ddof=1)),
    )


def sinr_stats_table(stats: SinrStats):
    """Plain-text table of SINR statistics, one stream per row plus the
    pooled row."""
    lines = ["L, S, sigma2, stream, mean, variance, trials"]
    for k in range(stats.S):
        lines.append(
            f"{stats.L}, {stats.S}, {stats.sigma2:.17g}, {k + 1}, "
            f"{stats.stream_mean[k]:.17g}, {stats.stream_var[k]:.17g}, "
            f"{stats.trials}"
        )
    lines.append(
        f"{stats.L}, {stats.S}, {stats.sigma2:.17g}, pooled, "
        f"{stats.pooled_mean:.17g}, {stats.pooled_var:.17g}, {stats.trials}"
    )
    return "\n".join(lines) + "\n"
