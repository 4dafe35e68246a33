"""Binary linear algebra substrate: the 2x2 polar kernel, its Kronecker
powers, 1-D polar encoding, and the bit-reversal permutation utility.

All codes here use the natural (non-bit-reversed) index order, i.e. the
generator is the plain Kronecker power of the kernel. Bit reversal is
exposed only for cross-checking against references that use it.
"""

import numpy as np

# Largest dimension for which a dense generator matrix may be materialized.
MAX_DENSE_N = 4096

# encode_1d switches from the dense product to the butterfly network above
# this length; both paths are bit-exact.
DENSE_THRESHOLD = 32


def is_power_of_two(n):
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def as_bit_array(u):
    """Validate and convert to a uint8 array with entries in {0, 1}.

    Accepts any array-like; the trailing axis is the codeword axis, so
    batches of vectors are allowed.
    """
    a = np.asarray(u)
    if a.size == 0:
        raise ValueError("empty bit vector")
    if not np.isin(a, (0, 1)).all():
        raise ValueError("entries must be 0 or 1")
    return a.astype(np.uint8)


def kernel():
    """The 2x2 polarization kernel, rows (1,0) and (1,1)."""
    return np.array([[1, 0], [1, 1]], dtype=np.uint8)


def kron(a, b):
    """Kronecker product of two binary matrices over GF(2)."""
    a = as_bit_array(np.atleast_2d(a))
    b = as_bit_array(np.atleast_2d(b))
    return (np.kron(a, b) & 1).astype(np.uint8)


def generator_matrix(n):
    """n-fold Kronecker power of the kernel, a 2^n x 2^n binary matrix.

    No bit-reversal factor is applied. Guarded so that huge matrices are
    never materialized; encoding beyond the guard goes through encode_1d.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError("n must be a non-negative integer")
    if 2 ** n > MAX_DENSE_N:
        raise ValueError(f"2^{n} exceeds the dense matrix limit {MAX_DENSE_N}")
    g = np.array([[1]], dtype=np.uint8)
    f = kernel()
    for _ in range(int(n)):
        g = kron(g, f)
    return g


def _validate_length(m):
    if not is_power_of_two(m):
        raise ValueError(f"length {m} is not a power of two")


def encode_dense(u):
    """Reference encoder: u times the dense generator over GF(2).

    Test oracle path, limited by MAX_DENSE_N. The product is computed in
    float64 (exact for these sizes) so BLAS does the heavy lifting.
    """
    x = as_bit_array(u)
    m = x.shape[-1]
    _validate_length(m)
    g = generator_matrix(int(m).bit_length() - 1)
    prod = x.astype(np.float64) @ g.astype(np.float64)
    return (prod.astype(np.int64) & 1).astype(np.uint8)


def _butterfly(x):
    # In-place butterfly on the last axis of a uint8 array (caller copies).
    m = x.shape[-1]
    h = 1
    while h < m:
        x = x.reshape(x.shape[:-1] + (-1, 2 * h))
        x[..., :h] ^= x[..., h:]
        x = x.reshape(x.shape[:-2] + (-1,))
        h *= 2
    return x


def encode_1d(u):
    """Polar-encode u (natural order): returns u times F_N over GF(2).

    Works on the last axis, so a (batch, N) array encodes each row.
    Dense product for short blocks, butterfly network above the threshold.
    """
    x = as_bit_array(u)
    _validate_length(x.shape[-1])
    if x.shape[-1] <= DENSE_THRESHOLD:
        return encode_dense(x)
    return _butterfly(x.copy())


def bit_reversal_permutation(n):
    """Permutation p of {0..2^n-1} with p[i] = i with its n bits reversed.

    Utility for comparing against bit-reversed polar conventions; the
    canonical codes in this package do not apply it.
    """
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError("n must be a non-negative integer")
    size = 2 ** int(n)
    idx = np.arange(size, dtype=np.int64)
    rev = np.zeros(size, dtype=np.int64)
    for _ in range(int(n)):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev
