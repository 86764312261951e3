"""Dense complex linear algebra primitives.

Matrices and vectors are plain ``numpy.ndarray`` objects with dtype
complex128; matrices are row-major.  Vectorization follows the row-stacking
convention ``res(|phi><psi|) = |phi>|psi>``, under which
``res(A rho B) = (A kron B^T) res(rho)``.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels

__all__ = [
    "kron",
    "expm",
    "res",
    "unres",
    "partial_trace",
    "spectral_norm_upper",
    "dagger",
    "is_hermitian",
]


def _as_complex_matrix(m, name="m"):
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {m.shape}")
    return m


def _as_square(m, name="m"):
    m = _as_complex_matrix(m, name)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")
    return m


def dagger(m):
    """Conjugate transpose."""
    return np.conj(np.asarray(m)).T


def is_hermitian(m, tol=1e-10):
    m = _as_square(m)
    return bool(np.max(np.abs(m - dagger(m))) <= tol)


def kron(a, b):
    """Kronecker product ``(a kron b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]``."""
    a = _as_complex_matrix(a, "a")
    b = _as_complex_matrix(b, "b")
    return np.kron(a, b)


def expm(m):
    """Matrix exponential (Pade order-13 scaling and squaring).

    Dispatches to the selected kernel backend; safe up to 1-norms of about
    1e4, which covers every generator built in this package.
    """
    return _kernels.expm(_as_square(m))


def res(m):
    """Row-major vectorization: stacks the rows of ``m`` into one vector."""
    return _as_square(m).reshape(-1)


def unres(v):
    """Inverse of :func:`res`; the vector length must be a perfect square."""
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    d = math.isqrt(v.shape[0])
    if d * d != v.shape[0]:
        raise ValueError(f"vector of length {v.shape[0]} is not a square matrix")
    return v.reshape(d, d)


def partial_trace(m, dims, keep):
    """Reduced matrix after tracing out every subsystem not in ``keep``.

    ``dims`` lists the subsystem dimensions in tensor order; the kept
    subsystems retain their original relative order.
    """
    m = _as_square(m)
    dims = [int(d) for d in dims]
    total = math.prod(dims)
    if total != m.shape[0]:
        raise ValueError(
            f"subsystem dims {dims} give dimension {total}, matrix is {m.shape[0]}"
        )
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")

    tensor = m.reshape(dims + dims)
    in_idx = list(range(n)) + [
        (i if i not in keep else n + i) for i in range(n)
    ]
    out_idx = [i for i in keep] + [n + i for i in keep]
    reduced = np.einsum(tensor, in_idx, out_idx)
    d_keep = math.prod(dims[i] for i in keep)
    return reduced.reshape(d_keep, d_keep)


def spectral_norm_upper(m, rtol=1e-3, max_squarings=6):
    """Upper bound on the spectral norm ``||m||_2``.

    Refines the certified bound ``lambda_max(m^H m)^(1/2) <=
    ||(m^H m)^k||_1^(1/(2k))`` by repeated squaring (a matrix-level power
    iteration), seeded with ``sqrt(||m||_1 ||m||_inf)`` and the Frobenius
    norm.  Every intermediate is a true upper bound, so the returned value
    is always >= the exact norm; for generic spectra it is tight to about
    ``rtol``.
    """
    m = _as_square(m)
    if m.size == 0:
        return 0.0
    norm1 = float(np.max(np.sum(np.abs(m), axis=0)))
    if norm1 == 0.0:
        return 0.0
    norminf = float(np.max(np.sum(np.abs(m), axis=1)))
    best = min(math.sqrt(norm1 * norminf), float(np.linalg.norm(m)))

    # b tracks (m^H m)^k up to the accumulated scale exp(log_scale)
    b = dagger(m) @ m
    log_scale = 0.0
    k = 1
    prev = math.inf
    for _ in range(max_squarings + 1):
        nb = float(np.max(np.sum(np.abs(b), axis=0)))
        if nb == 0.0:
            return 0.0
        bound = math.exp((math.log(nb) + log_scale) / (2 * k))
        best = min(best, bound)
        if abs(prev - bound) <= rtol * bound:
            break
        prev = bound
        scaled = b / nb
        b = scaled @ scaled
        log_scale = 2.0 * (log_scale + math.log(nb))
        k *= 2
    return best
