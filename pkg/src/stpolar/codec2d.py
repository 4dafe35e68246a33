"""Spatiotemporal 2-D polar encoding.

A message matrix U has one spatial stream per row and one time instant per
column. Encoding applies the length-T polar transform along time (each row
as a row vector times F_T) and the length-S transform along space (each
column, again under the row-vector convention). The two stages act on
different axes, so either order produces the same codeword matrix, and
flattening the result row-major reproduces the equivalent 1-D code.
"""

from dataclasses import dataclass

import numpy as np

from .kernel import as_bit_array, encode_1d, is_power_of_two

MODES = ("time-space", "space-time")


def _check_matrix(a):
    m = as_bit_array(a)
    if m.ndim < 2:
        raise ValueError("expected an S x T array of bits")
    s, t = m.shape[-2:]
    if not is_power_of_two(int(s)) or not is_power_of_two(int(t)):
        raise ValueError("both dimensions must be powers of two")
    return m


def _space_stage(a):
    # Length-S transform down each column (row-vector convention).
    return np.swapaxes(encode_1d(np.swapaxes(a, -1, -2)), -1, -2)


def encode_2d(u_matrix, mode="time-space"):
    """Encode an S x T message matrix into its codeword matrix.

    mode selects which transform runs first; the result is identical
    either way because the stages operate on independent axes. Leading
    axes batch: a (frames, S, T) input encodes every frame.
    """
    u = _check_matrix(u_matrix)
    if mode == "time-space":
        return _space_stage(encode_1d(u))   # time along rows, then space
    if mode == "space-time":
        return encode_1d(_space_stage(u))
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class IndexMap:
    """Canonical bijection between (stream, time) and the 1-D index.

    All indices 0-based: k = s * T + t, i.e. row-major order of the
    codeword matrix.
    """

    S: int
    T: int

    def to_flat(self, s, t):
        s = np.asarray(s)
        t = np.asarray(t)
        if np.any(s < 0) or np.any(s >= self.S):
            raise ValueError("stream index out of range")
        if np.any(t < 0) or np.any(t >= self.T):
            raise ValueError("time index out of range")
        return s * self.T + t

    def to_grid(self, k):
        k = np.asarray(k)
        if np.any(k < 0) or np.any(k >= self.S * self.T):
            raise ValueError("flat index out of range")
        return k // self.T, k % self.T


def index_map(s, t):
    if not is_power_of_two(s) or not is_power_of_two(t):
        raise ValueError("S and T must be powers of two")
    return IndexMap(S=int(s), T=int(t))


def flatten_codeword(x_matrix):
    """Row-major flattening of a codeword matrix to the 1-D index order."""
    m = _check_matrix(x_matrix)
    if m.ndim != 2:
        raise ValueError("expected a single codeword matrix")
    return m.reshape(-1)


def reshape_codeword(x, s, t):
    """Inverse of flatten_codeword."""
    v = as_bit_array(x)
    if v.ndim != 1 or v.size != s * t:
        raise ValueError("vector length must equal S * T")
    if not is_power_of_two(s) or not is_power_of_two(t):
        raise ValueError("S and T must be powers of two")
    return v.reshape(s, t)


@dataclass(frozen=True)
class EquivalenceReport:
    ok: bool
    first_mismatch: int | None
    detail: str


def verify_equivalence(u, s, t):
    """Check that both 2-D coding orders match the 1-D code on message u.

    Compares flatten(encode_2d(U, mode)) against encode_1d(u) for both
    modes. Returns an EquivalenceReport; on failure it carries the first
    mismatching 1-D index (0-based).
    """
    uv = as_bit_array(u)
    if uv.ndim != 1 or uv.size != s * t:
        raise ValueError("message length must equal S * T")
    reference = encode_1d(uv)
    u2 = reshape_codeword(uv, s, t)
    for mode in MODES:
        flat = flatten_codeword(encode_2d(u2, mode))
        diff = np.nonzero(flat != reference)[0]
        if diff.size:
            k = int(diff[0])
            return EquivalenceReport(
                ok=False,
                first_mismatch=k,
                detail=f"mode {mode}: first mismatch at index {k}",
            )
    return EquivalenceReport(ok=True, first_mismatch=None,
                             detail="both modes match the 1-D code")


def format_codeword(x_matrix):
    """Serialize a codeword matrix as lines of '0'/'1', one stream per line."""
    m = _check_matrix(x_matrix)
    if m.ndim != 2:
        raise ValueError("expected a single codeword matrix")
    return "\n".join("".join(str(int(b)) for b in row) for row in m) + "\n"


def parse_bitstring(text):
    """Parse a contiguous '0'/'1' string into a bit vector."""
    s = text.strip()
    if not s or any(c not in "01" for c in s):
        raise ValueError("bit string must be non-empty over {0, 1}")
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def format_bitstring(bits):
    return "".join(str(int(b)) for b in np.asarray(bits).reshape(-1))
