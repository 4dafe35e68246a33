"""Gaussian-approximation (GA) code construction.

Tracks only the mean of each subchannel LLR through the polar transform,
assuming consistent Gaussian densities (variance equal to twice the mean).
Provides the phi function and its inverse, the mean recursion, information
set selection, per-subchannel BER estimates, a polarization diagnostic, and
the binary-input AWGN capacity needed to phrase rate conditions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .kernel import is_power_of_two

# Coefficients of the exponential branch exp(A * g**C + B), valid g <= 10.
GA_A = -0.4527
GA_B = 0.0218
GA_C = 0.86

# phi is treated as exactly 0 above this mean; the corresponding hard
# decision error estimate is below 1e-40, far outside double-precision
# relevance for any selection decision.
PHI_ZERO_CUTOFF = 400.0

# Mean saturation cap. Saturated subchannels sort above all unsaturated
# ones; ties between them resolve by natural index.
M_SAT = 1.0e4

# Tail-branch inversion controls.
_TAIL_LO = 10.0
_TAIL_HI = 1.2e4
_BISECT_ITERS = 60
_NEWTON_ITERS = 3


def _phi_exp(g):
    return np.exp(GA_A * np.power(g, GA_C) + GA_B)


def _phi_tail(g):
    return np.sqrt(np.pi / g) * np.exp(-g / 4.0) * (1.0 - 10.0 / (7.0 * g))


def _phi_tail_deriv(g):
    base = np.sqrt(np.pi / g) * np.exp(-g / 4.0)
    return base * (1.0 - 10.0 / (7.0 * g)) * (-0.5 / g - 0.25) + base * (
        10.0 / (7.0 * g * g)
    )


# Branch-selection threshold: the exponential-branch value at g = 10. Any
# target at or above this prefers the closed-form exponential inversion.
_PHI_EXP_AT_10 = float(_phi_exp(10.0))

# Smallest invertible value: phi at the zero cutoff (about 3.3e-45).
_PHI_MIN = float(_phi_tail(PHI_ZERO_CUTOFF))


def phi(gamma):
    """GA phi function of the mean LLR, piecewise over gamma >= 0.

    Exponential branch for gamma <= 10, Gaussian-tail branch above, exact
    zero above PHI_ZERO_CUTOFF. Decreasing on each branch. Note phi(0)
    is e**0.0218, slightly above 1; the approximation is kept verbatim.
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=np.float64))
    if np.any(g < 0.0) or not np.all(np.isfinite(g)):
        raise ValueError("gamma must be finite and non-negative")
    out = np.zeros_like(g)
    low = g <= 10.0
    out[low] = _phi_exp(g[low])
    mid = ~low & (g <= PHI_ZERO_CUTOFF)
    out[mid] = _phi_tail(g[mid])
    if np.ndim(gamma) == 0:
        return float(out[0])
    return out.reshape(np.shape(gamma))


def _phi_inv_tail(y):
    lo = np.full_like(y, _TAIL_LO)
    hi = np.full_like(y, _TAIL_HI)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        below = _phi_tail(mid) < y
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
    g = 0.5 * (lo + hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(_NEWTON_ITERS):
            step = (_phi_tail(g) - y) / _phi_tail_deriv(g)
            g_new = g - step
            ok = np.isfinite(g_new) & (g_new > _TAIL_LO) & (g_new < _TAIL_HI)
            g = np.where(ok, g_new, g)
    # solver overshoot past the zero cutoff is numerical, not structural
    return np.minimum(g, PHI_ZERO_CUTOFF)


def phi_inv(y):
    """Inverse of phi on [phi(PHI_ZERO_CUTOFF), phi(0)].

    The exponential branch inverts in closed form; the tail branch uses
    bracketed bisection refined by Newton steps. Where both branches can
    attain y (a narrow window near the gamma = 10 seam), the exponential
    branch wins.
    """
    yv = np.atleast_1d(np.asarray(y, dtype=np.float64))
    if np.any(yv < _PHI_MIN) or np.any(yv > _phi_exp(0.0)) or not np.all(
        np.isfinite(yv)
    ):
        raise ValueError("y outside the attainable range of phi")
    out = np.empty_like(yv)
    exp_branch = yv >= _PHI_EXP_AT_10
    if np.any(exp_branch):
        q = (np.log(yv[exp_branch]) - GA_B) / GA_A
        # ln(y) - GA_B can land a few ulp negative at y = phi(0); clip.
        # Overshoot past the branch seam at gamma = 10 is likewise
        # numerical: the exp branch is decreasing, so any y at or above
        # its value at 10 has a preimage at or below 10.
        g_exp = np.power(np.maximum(q, 0.0), 1.0 / GA_C)
        out[exp_branch] = np.minimum(g_exp, 10.0)
    if np.any(~exp_branch):
        out[~exp_branch] = _phi_inv_tail(yv[~exp_branch])
    resid = np.abs(phi(out) - yv) / yv
    if np.any(resid > 1.0e-10):
        raise RuntimeError("phi_inv failed to converge")
    if np.ndim(y) == 0:
        return float(out[0])
    return out.reshape(np.shape(y))


def ga_step(means):
    """One polarization stage of the GA mean recursion.

    Each parent mean m splits into the odd (check-side) child
    phi_inv(1 - (1 - phi(m))**2) and the even (variable-side) child 2m.
    Children interleave so that index bit 0 selects the odd child, making
    the index's binary digits (most significant first) spell the branch
    sequence. Saturation: means cap at M_SAT, and a parent with phi(m) = 0
    (m above PHI_ZERO_CUTOFF) passes its mean through as the odd child,
    which keeps children ordered around the parent.
    """
    m = np.asarray(means, dtype=np.float64)
    p = phi(m)
    odd = np.empty_like(m)
    live = p > 0.0
    if np.any(live):
        y = 2.0 * p[live] - p[live] * p[live]
        odd[live] = np.minimum(phi_inv(y), M_SAT)
    odd[~live] = m[~live]
    even = np.minimum(2.0 * m, M_SAT)
    nxt = np.empty(2 * m.size, dtype=np.float64)
    nxt[0::2] = odd
    nxt[1::2] = even
    return nxt


@dataclass(frozen=True)
class ReliabilityProfile:
    """Per-subchannel mean LLRs from GA, natural index order."""

    n: int
    design_mean: float
    means: np.ndarray

    @property
    def size(self):
        return self.means.size


def ga_evolve(design_mean, n):
    """Evolve the GA means through n stages from the channel mean.

    Returns a ReliabilityProfile of length 2**n whose entries are a
    deterministic function of (design_mean, n).
    """
    m0 = float(design_mean)
    if not np.isfinite(m0) or m0 <= 0.0:
        raise ValueError("design_mean must be positive")
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError("n must be a non-negative integer")
    means = np.array([min(m0, M_SAT)], dtype=np.float64)
    for _ in range(int(n)):
        means = ga_step(means)
    means.setflags(write=False)
    return ReliabilityProfile(n=int(n), design_mean=m0, means=means)


def q_function(x):
    """Gaussian tail probability Q(x), via the complementary error function."""
    xv = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = 0.5 * erfc(xv / np.sqrt(2.0))
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


def channel_ber_estimate(mean):
    """Hard-decision error estimate Q(sqrt(mean / 2)) of a subchannel."""
    mv = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    if np.any(mv < 0.0):
        raise ValueError("mean must be non-negative")
    out = q_function(np.sqrt(mv / 2.0))
    if np.ndim(mean) == 0:
        return float(out[0])
    return out.reshape(np.shape(mean))


def _profile_means(profile):
    if isinstance(profile, ReliabilityProfile):
        return profile.means
    return np.asarray(profile, dtype=np.float64)


def select_information_set(profile, k):
    """Indices (0-based) of the k largest means, sorted ascending.

    Ties resolve toward the smaller natural index, so the selection is
    deterministic and reproducible.
    """
    means = _profile_means(profile)
    if not isinstance(k, (int, np.integer)) or k < 0 or k > means.size:
        raise ValueError(f"k must be in [0, {means.size}]")
    order = np.argsort(-means, kind="stable")
    return np.sort(order[: int(k)])


def polarization_fraction(profile, exponent=1.165, scale=1.0):
    """Fraction of subchannels with BER estimate below scale * N**-exponent."""
    if scale <= 0.0:
        raise ValueError("scale must be positive")
    means = _profile_means(profile)
    threshold = scale * float(means.size) ** (-float(exponent))
    return float(np.mean(channel_ber_estimate(means) < threshold))


_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(128)


def bpsk_awgn_capacity(sigma2):
    """Capacity of the binary-input real AWGN channel with noise variance
    sigma2, by Gauss-Hermite quadrature of 1 - E[log2(1 + exp(-L))] with
    L drawn from the consistent Gaussian N(2/sigma2, 4/sigma2).
    """
    s2 = float(sigma2)
    if not np.isfinite(s2) or s2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    mean = 2.0 / s2
    std = 2.0 / np.sqrt(s2)
    llr = mean + std * np.sqrt(2.0) * _GH_NODES
    loss = np.logaddexp(0.0, -llr) / np.log(2.0)
    cap = 1.0 - float(np.dot(_GH_WEIGHTS, loss)) / np.sqrt(np.pi)
    return min(1.0, max(0.0, cap))


@dataclass(frozen=True)
class CodeSpec:
    """Code geometry plus the frozen/information split.

    info_set holds 0-based indices into the equivalent 1-D code, sorted
    ascending; frozen positions carry the value 0.
    """

    N: int
    S: int
    T: int
    K: int
    mode: str
    info_set: np.ndarray

    @property
    def frozen_mask(self):
        mask = np.ones(self.N, dtype=bool)
        mask[self.info_set] = False
        return mask


def make_code_spec(info_set, N, S=1, T=None, mode="time-space"):
    """Assemble a CodeSpec from an explicit information set."""
    if T is None:
        if N % S:
            raise ValueError("S must divide N")
        T = N // S
    if S * T != N:
        raise ValueError("N must equal S * T")
    for name, val in (("N", N), ("S", S), ("T", T)):
        if not is_power_of_two(val):
            raise ValueError(f"{name} must be a power of two")
    if mode not in ("time-space", "space-time"):
        raise ValueError(f"unknown mode {mode!r}")
    info = np.asarray(info_set, dtype=np.int64)
    if info.size and (info.min() < 0 or info.max() >= N):
        raise ValueError("info_set indices out of range")
    if np.unique(info).size != info.size:
        raise ValueError("info_set has duplicates")
    info = np.sort(info)
    info.setflags(write=False)
    return CodeSpec(N=int(N), S=int(S), T=int(T), K=int(info.size),
                    mode=mode, info_set=info)


def code_spec_from_profile(profile, k, S=1, T=None, mode="time-space"):
    """Select the k most reliable indices of a profile into a CodeSpec."""
    means = _profile_means(profile)
    info = select_information_set(means, k)
    return make_code_spec(info, means.size, S=S, T=T, mode=mode)


def profile_table(profile):
    """Plain-text reliability table: index, mean, ber_estimate.

    One row per subchannel with 1-based indices, full double precision.
    """
    means = _profile_means(profile)
    bers = channel_ber_estimate(means)
    lines = ["index, mean, ber_estimate"]
    for i, (m, b) in enumerate(zip(means, bers), start=1):
        lines.append(f"{i}, {m:.17g}, {b:.17g}")
    return "\n".join(lines) + "\n"
