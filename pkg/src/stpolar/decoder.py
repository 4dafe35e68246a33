"""Successive-cancellation decoding of the equivalent 1-D polar code.

Operates on frames of per-bit LLRs (positive favors bit 0) in the natural
1-D index order. The recursion is batched: a (frames, N) array decodes all
frames in lockstep, which is what the Monte Carlo harness feeds it. A
brute-force maximum-likelihood decoder is included as a test oracle for
small codes.
"""

from dataclasses import dataclass

import numpy as np

from .construction import CodeSpec
from .kernel import encode_1d, is_power_of_two

# LLR magnitudes are clamped here at the decoder input. Far beyond any
# decision-relevant magnitude, but keeps the exact combine rule inside the
# comfortable range of tanh/atanh arithmetic.
L_CLAMP = 40.0

# Guard for the brute-force enumeration.
ML_MAX_K = 20
_ML_CHUNK = 4096


def f_combine(a, b):
    """Check-node LLR combine, exact rule 2*atanh(tanh(a/2)*tanh(b/2)).

    Evaluated in the log-domain form that stays finite for any finite
    inputs instead of the literal tanh product.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (
        np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
        + np.log1p(np.exp(-np.abs(a + b)))
        - np.log1p(np.exp(-np.abs(a - b)))
    )


def f_combine_minsum(a, b):
    """Min-sum approximation of f_combine."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))


def g_combine(a, b, u_partial):
    """Variable-node LLR combine: b + a if the partial sum is 0, else b - a."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    u = np.asarray(u_partial)
    return np.where(u == 0, b + a, b - a)


def _sc_recurse(llr, frozen, f):
    # llr: (batch, N) float64; frozen: (N,) bool.
    # Returns (message bits, re-encoded codeword bits, decision LLRs).
    n = llr.shape[1]
    if n == 1:
        if frozen[0]:
            u = np.zeros((llr.shape[0], 1), dtype=np.uint8)
        else:
            u = (llr < 0.0).astype(np.uint8)  # tie at exactly 0 gives bit 0
        return u, u.copy(), llr
    h = n // 2
    a = llr[:, :h]
    b = llr[:, h:]
    ul, xl, dl = _sc_recurse(f(a, b), frozen[:h], f)
    ur, xr, dr = _sc_recurse(g_combine(a, b, xl), frozen[h:], f)
    u = np.concatenate([ul, ur], axis=1)
    x = np.concatenate([xl ^ xr, xr], axis=1)
    return u, x, np.concatenate([dl, dr], axis=1)


def sc_decode_batch(llrs, frozen_mask, min_sum=False):
    """Decode a (frames, N) LLR array against a frozen mask.

    Returns (u_hat, x_hat, decision_llrs), each (frames, N). x_hat is the
    codeword implied by u_hat, handy for partial-sum checks.
    """
    llr = np.atleast_2d(np.asarray(llrs, dtype=np.float64))
    frozen = np.asarray(frozen_mask, dtype=bool)
    if llr.shape[1] != frozen.size or not is_power_of_two(frozen.size):
        raise ValueError("LLR frame length must match the frozen mask")
    if not np.all(np.isfinite(llr)):
        raise ValueError("LLRs must be finite")
    llr = np.clip(llr, -L_CLAMP, L_CLAMP)
    f = f_combine_minsum if min_sum else f_combine
    return _sc_recurse(llr, frozen, f)


@dataclass(frozen=True)
class DecodeResult:
    u_hat: np.ndarray
    info_bits: np.ndarray
    decision_llrs: np.ndarray


def sc_decode(llrs, spec: CodeSpec, min_sum=False):
    """Successive-cancellation decode of one LLR frame under a CodeSpec."""
    llr = np.asarray(llrs, dtype=np.float64)
    if llr.ndim != 1 or llr.size != spec.N:
        raise ValueError("LLR frame length must equal spec.N")
    u, _, d = sc_decode_batch(llr[None, :], spec.frozen_mask, min_sum=min_sum)
    u_hat = u[0]
    return DecodeResult(u_hat=u_hat, info_bits=u_hat[spec.info_set],
                        decision_llrs=d[0])


def ml_decode_bruteforce(llrs, spec: CodeSpec):
    """Exhaustive maximum-likelihood decoding, for small-code oracles.

    Scores every message by the codeword correlation sum((1 - 2x) * llr)
    and returns the maximizer; ties go to the smallest message value,
    reading the information bits as a big-endian integer.
    """
    if spec.K > ML_MAX_K:
        raise ValueError(f"K = {spec.K} exceeds the enumeration guard {ML_MAX_K}")
    llr = np.asarray(llrs, dtype=np.float64)
    if llr.ndim != 1 or llr.size != spec.N:
        raise ValueError("LLR frame length must equal spec.N")
    llr = np.clip(llr, -L_CLAMP, L_CLAMP)
    k = spec.K
    best_score = -np.inf
    best_msg = 0
    shifts = np.arange(k - 1, -1, -1, dtype=np.uint32) if k else None
    for start in range(0, max(1, 2 ** k), _ML_CHUNK):
        stop = min(start + _ML_CHUNK, max(1, 2 ** k))
        msgs = np.arange(start, stop, dtype=np.uint32)
        u = np.zeros((msgs.size, spec.N), dtype=np.uint8)
        if k:
            bits = (msgs[:, None] >> shifts) & 1
            u[:, spec.info_set] = bits.astype(np.uint8)
        x = encode_1d(u)
        scores = (1.0 - 2.0 * x.astype(np.float64)) @ llr
        i = int(np.argmax(scores))
        if scores[i] > best_score:
            best_score = float(scores[i])
            best_msg = start + i
    u_hat = np.zeros(spec.N, dtype=np.uint8)
    if k:
        u_hat[spec.info_set] = (
            (np.uint32(best_msg) >> shifts) & 1
        ).astype(np.uint8)
    d = np.where(u_hat == 0, L_CLAMP, -L_CLAMP)
    return DecodeResult(u_hat=u_hat, info_bits=u_hat[spec.info_set],
                        decision_llrs=d)
