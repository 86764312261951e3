# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled propagation kernels.

Same API as ``_pykernels``: Pade order-13 matrix exponential and the
piecewise-constant propagator chains, with BLAS/LAPACK called directly and
all scratch buffers reused across the inner loop.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, log2
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zgesv

cnp.import_array()

ctypedef double complex zcomplex

cdef double _THETA13 = 5.371920351148152
cdef double[14] _B13
_B13[0] = 64764752532480000.0
_B13[1] = 32382376266240000.0
_B13[2] = 7771770303897600.0
_B13[3] = 1187353796428800.0
_B13[4] = 129060195264000.0
_B13[5] = 10559470521600.0
_B13[6] = 670442572800.0
_B13[7] = 33522128640.0
_B13[8] = 1323241920.0
_B13[9] = 40840800.0
_B13[10] = 960960.0
_B13[11] = 16380.0
_B13[12] = 182.0
_B13[13] = 1.0


cdef char _NOTRANS = b'N'

cdef void _matmul(zcomplex* out, zcomplex* a, zcomplex* b, int n) noexcept nogil:
    # row-major out = a @ b: compute out^T = b^T a^T in column-major zgemm
    cdef zcomplex one = 1.0
    cdef zcomplex zero = 0.0
    zgemm(&_NOTRANS, &_NOTRANS, &n, &n, &n, &one, b, &n, a, &n, &zero, out, &n)


cdef void _zero(zcomplex* a, int nn) noexcept nogil:
    cdef int i
    for i in range(nn):
        a[i] = 0.0


cdef void _copy(zcomplex* dst, zcomplex* src, int nn) noexcept nogil:
    cdef int i
    for i in range(nn):
        dst[i] = src[i]


cdef double _one_norm(zcomplex* a, int n) noexcept nogil:
    cdef double best = 0.0
    cdef double col
    cdef int i, j
    for j in range(n):
        col = 0.0
        for i in range(n):
            col += abs(a[i * n + j])
        if col > best:
            best = col
    return best


cdef int _expm_inplace(zcomplex* a, zcomplex* out, int n,
                       zcomplex* work, int* ipiv) noexcept nogil:
    """out = expm(a); `a` is destroyed.  work holds 6 n*n panels."""
    cdef int nn = n * n
    cdef zcomplex* a2 = work
    cdef zcomplex* a4 = work + nn
    cdef zcomplex* a6 = work + 2 * nn
    cdef zcomplex* u = work + 3 * nn
    cdef zcomplex* v = work + 4 * nn
    cdef zcomplex* tmp = work + 5 * nn
    cdef double norm = _one_norm(a, n)
    cdef int s = 0
    cdef int i, j, k, info
    cdef double scale

    if norm > _THETA13:
        s = <int>ceil(log2(norm / _THETA13))
    if s > 0:
        scale = 2.0 ** (-s)
        for i in range(nn):
            a[i] = a[i] * scale

    _matmul(a2, a, a, n)
    _matmul(a4, a2, a2, n)
    _matmul(a6, a2, a4, n)

    # tmp = b13 a6 + b11 a4 + b9 a2 ; u = a @ (a6 @ tmp + b7 a6 + b5 a4 + b3 a2 + b1 I)
    for i in range(nn):
        tmp[i] = _B13[13] * a6[i] + _B13[11] * a4[i] + _B13[9] * a2[i]
    _matmul(v, a6, tmp, n)
    for i in range(nn):
        v[i] = v[i] + _B13[7] * a6[i] + _B13[5] * a4[i] + _B13[3] * a2[i]
    for i in range(n):
        v[i * n + i] = v[i * n + i] + _B13[1]
    _matmul(u, a, v, n)

    # v = a6 @ (b12 a6 + b10 a4 + b8 a2) + b6 a6 + b4 a4 + b2 a2 + b0 I
    for i in range(nn):
        tmp[i] = _B13[12] * a6[i] + _B13[10] * a4[i] + _B13[8] * a2[i]
    _matmul(v, a6, tmp, n)
    for i in range(nn):
        v[i] = v[i] + _B13[6] * a6[i] + _B13[4] * a4[i] + _B13[2] * a2[i]
    for i in range(n):
        v[i * n + i] = v[i * n + i] + _B13[0]

    # solve (v - u) r = (v + u); with polynomials of one matrix the left and
    # right quotients coincide, so the transposed (column-major) solve works
    # on the row-major buffers directly
    for i in range(nn):
        tmp[i] = v[i] - u[i]
        out[i] = v[i] + u[i]
    info = 0
    zgesv(&n, &n, tmp, &n, ipiv, out, &n, &info)
    if info != 0:
        return info

    for k in range(s):
        _matmul(tmp, out, out, n)
        _copy(out, tmp, nn)
    return 0


def expm(a):
    """Matrix exponential via Pade order-13 scaling and squaring."""
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] buf = np.array(
        a, dtype=np.complex128, order="C"
    )
    if buf.shape[0] != buf.shape[1]:
        raise ValueError("expm requires a square matrix")
    cdef int n = buf.shape[0]
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] out = np.empty(
        (n, n), dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=1, mode="c"] work = np.empty(
        6 * n * n, dtype=np.complex128
    )
    cdef cnp.ndarray[int, ndim=1, mode="c"] ipiv = np.empty(n, dtype=np.intc)
    cdef int info
    with nogil:
        info = _expm_inplace(&buf[0, 0], &out[0, 0], n, &work[0], &ipiv[0])
    if info != 0:
        raise np.linalg.LinAlgError(f"Pade solve failed (zgesv info={info})")
    return out


def chain_product(mats):
    """Ordered product ``mats[-1] @ ... @ mats[0]`` (index 0 applied first)."""
    cdef cnp.ndarray[zcomplex, ndim=3, mode="c"] stack = np.ascontiguousarray(
        mats, dtype=np.complex128
    )
    cdef int m = stack.shape[0]
    cdef int n = stack.shape[1]
    if stack.shape[2] != n:
        raise ValueError("chain_product requires square matrices")
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] total = np.eye(
        n, dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] tmp = np.empty(
        (n, n), dtype=np.complex128
    )
    cdef int k, nn = n * n
    with nogil:
        for k in range(m):
            _matmul(&tmp[0, 0], &stack[k, 0, 0], &total[0, 0], n)
            _copy(&total[0, 0], &tmp[0, 0], nn)
    return total


cdef int _piecewise(zcomplex* base, zcomplex* kx, zcomplex* ky,
                    double* hx, double* hy, double dt, int m, int n,
                    zcomplex* steps, zcomplex* total,
                    zcomplex* gen, zcomplex* step, zcomplex* work,
                    zcomplex* tmp, int* ipiv, bint want_total) noexcept nogil:
    """Shared driver: per-interval exponentials, optionally accumulated."""
    cdef int k, i, info
    cdef int nn = n * n
    cdef zcomplex cdt = dt
    if want_total:
        _zero(total, nn)
        for i in range(n):
            total[i * n + i] = 1.0
    for k in range(m):
        for i in range(nn):
            gen[i] = cdt * (base[i] + hx[k] * kx[i] + hy[k] * ky[i])
        info = _expm_inplace(gen, step, n, work, ipiv)
        if info != 0:
            return info
        if steps != NULL:
            _copy(steps + k * nn, step, nn)
        if want_total:
            _matmul(tmp, step, total, n)
            _copy(total, tmp, nn)
    return 0


def piecewise_steps(base, kx, ky, hx, hy, double dt):
    """Per-interval propagators ``expm(dt * (base + hx[k] kx + hy[k] ky))``."""
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] b = np.ascontiguousarray(
        base, dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] cx = np.ascontiguousarray(
        kx, dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] cy = np.ascontiguousarray(
        ky, dtype=np.complex128
    )
    cdef cnp.ndarray[double, ndim=1, mode="c"] ax = np.ascontiguousarray(
        hx, dtype=np.float64
    )
    cdef cnp.ndarray[double, ndim=1, mode="c"] ay = np.ascontiguousarray(
        hy, dtype=np.float64
    )
    cdef int n = b.shape[0]
    cdef int m = ax.shape[0]
    cdef cnp.ndarray[zcomplex, ndim=3, mode="c"] steps = np.empty(
        (m, n, n), dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=1, mode="c"] scratch = np.empty(
        8 * n * n, dtype=np.complex128
    )
    cdef cnp.ndarray[int, ndim=1, mode="c"] ipiv = np.empty(n, dtype=np.intc)
    cdef int info
    cdef zcomplex* w = &scratch[0]
    with nogil:
        info = _piecewise(&b[0, 0], &cx[0, 0], &cy[0, 0], &ax[0], &ay[0], dt,
                          m, n, &steps[0, 0, 0], NULL, w, w + n * n,
                          w + 2 * n * n, NULL, &ipiv[0], False)
    if info != 0:
        raise np.linalg.LinAlgError(f"Pade solve failed (zgesv info={info})")
    return steps


def piecewise_total(base, kx, ky, hx, hy, double dt):
    """Total propagator of a piecewise-constant generator, interval 0 first."""
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] b = np.ascontiguousarray(
        base, dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] cx = np.ascontiguousarray(
        kx, dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] cy = np.ascontiguousarray(
        ky, dtype=np.complex128
    )
    cdef cnp.ndarray[double, ndim=1, mode="c"] ax = np.ascontiguousarray(
        hx, dtype=np.float64
    )
    cdef cnp.ndarray[double, ndim=1, mode="c"] ay = np.ascontiguousarray(
        hy, dtype=np.float64
    )
    cdef int n = b.shape[0]
    cdef int m = ax.shape[0]
    cdef cnp.ndarray[zcomplex, ndim=2, mode="c"] total = np.empty(
        (n, n), dtype=np.complex128
    )
    cdef cnp.ndarray[zcomplex, ndim=1, mode="c"] scratch = np.empty(
        9 * n * n, dtype=np.complex128
    )
    cdef cnp.ndarray[int, ndim=1, mode="c"] ipiv = np.empty(n, dtype=np.intc)
    cdef int info
    cdef zcomplex* w = &scratch[0]
    with nogil:
        info = _piecewise(&b[0, 0], &cx[0, 0], &cy[0, 0], &ax[0], &ay[0], dt,
                          m, n, NULL, &total[0, 0], w, w + n * n,
                          w + 2 * n * n, w + 8 * n * n, &ipiv[0], True)
    if info != 0:
        raise np.linalg.LinAlgError(f"Pade solve failed (zgesv info={info})")
    return total
