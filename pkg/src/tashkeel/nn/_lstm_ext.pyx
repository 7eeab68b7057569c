# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled LSTM time loop: BLAS gemm for the recurrent products, C loops for the gates.

Same contract as ``_lstm_py``; works for float32 and float64 arrays.  The
element-wise loops run over raw contiguous pointers so the compiler can
vectorize the tanh calls.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh, tanhf
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport dgemm, sgemm

cnp.import_array()

ctypedef fused real:
    float
    double


cdef inline void _gemm(char ta, char tb, int m, int n, int k, real alpha, real* a, int lda,
                       real* b, int ldb, real beta, real* c, int ldc) noexcept nogil:
    # column-major BLAS call
    if real is float:
        sgemm(&ta, &tb, &m, &n, &k, &alpha, a, &lda, b, &ldb, &beta, c, &ldc)
    else:
        dgemm(&ta, &tb, &m, &n, &k, &alpha, a, &lda, b, &ldb, &beta, c, &ldc)


cdef inline real _tanh(real x) noexcept nogil:
    if real is float:
        return tanhf(x)
    else:
        return tanh(x)


cdef void _step_gates(real* z, real* g, real* c_prev, real* c_out, real* h_out, int B, int H) noexcept nogil:
    # z, g: (B, 4H); c_prev, c_out, h_out: (B, H)
    cdef int b, j, H4 = 4 * H
    cdef real* zb
    cdef real* gb
    cdef real* cp
    cdef real* co
    cdef real* ho
    for b in range(B):
        zb = z + b * H4
        gb = g + b * H4
        for j in range(H4):
            gb[j] = _tanh(zb[j] * <real>0.5) * <real>0.5 + <real>0.5
        for j in range(2 * H, 3 * H):
            gb[j] = _tanh(zb[j])
        cp = c_prev + b * H
        co = c_out + b * H
        for j in range(H):
            co[j] = gb[H + j] * cp[j] + gb[j] * gb[2 * H + j]
        ho = h_out + b * H
        for j in range(H):
            ho[j] = gb[3 * H + j] * _tanh(co[j])


def _forward(real[:, :, ::1] xproj, real[:, ::1] Wh, real[:, :, ::1] G, real[:, :, ::1] C,
             real[:, :, ::1] Hs, real[:, ::1] zeros, real[:, ::1] z):
    cdef int T = xproj.shape[0]
    cdef int B = xproj.shape[1]
    cdef int H4 = xproj.shape[2]
    cdef int H = H4 // 4
    cdef int t
    cdef real* c_prev
    with nogil:
        for t in range(T):
            memcpy(&z[0, 0], &xproj[t, 0, 0], B * H4 * sizeof(real))
            if t > 0:
                _gemm(c'N', c'N', H4, B, H, <real>1.0, &Wh[0, 0], H4, &Hs[t - 1, 0, 0], H, <real>1.0, &z[0, 0], H4)
                c_prev = &C[t - 1, 0, 0]
            else:
                c_prev = &zeros[0, 0]
            _step_gates(&z[0, 0], &G[t, 0, 0], c_prev, &C[t, 0, 0], &Hs[t, 0, 0], B, H)


cdef void _step_back(real* dh_in, real* g, real* c, real* c_prev, real* dh_next, real* dc_next,
                     real* dz, real* tc, int B, int H) noexcept nogil:
    cdef int b, j, H4 = 4 * H
    cdef real dh, dc, i, f, cg, o, t
    cdef real* gb
    cdef real* zb
    for j in range(B * H):
        tc[j] = _tanh(c[j])
    for b in range(B):
        gb = g + b * H4
        zb = dz + b * H4
        for j in range(H):
            i = gb[j]
            f = gb[H + j]
            cg = gb[2 * H + j]
            o = gb[3 * H + j]
            t = tc[b * H + j]
            dh = dh_in[b * H + j] + dh_next[b * H + j]
            dc = dc_next[b * H + j] + dh * o * (1 - t * t)
            zb[j] = dc * cg * i * (1 - i)
            zb[H + j] = dc * c_prev[b * H + j] * f * (1 - f)
            zb[2 * H + j] = dc * i * (1 - cg * cg)
            zb[3 * H + j] = dh * t * o * (1 - o)
            dc_next[b * H + j] = dc * f


def _backward(real[:, :, ::1] dH, real[:, ::1] Wh, real[:, :, ::1] G, real[:, :, ::1] C,
              real[:, :, ::1] Hs, real[:, :, ::1] dX, real[:, ::1] dWh,
              real[:, ::1] dh_next, real[:, ::1] dc_next, real[:, ::1] zeros, real[:, ::1] tc):
    cdef int T = dH.shape[0]
    cdef int B = dH.shape[1]
    cdef int H = dH.shape[2]
    cdef int H4 = 4 * H
    cdef int t
    cdef real* c_prev
    with nogil:
        for t in range(T - 1, -1, -1):
            c_prev = &C[t - 1, 0, 0] if t > 0 else &zeros[0, 0]
            _step_back(&dH[t, 0, 0], &G[t, 0, 0], &C[t, 0, 0], c_prev, &dh_next[0, 0], &dc_next[0, 0],
                       &dX[t, 0, 0], &tc[0, 0], B, H)
            if t > 0:
                # dWh += h_{t-1}^T dz
                _gemm(c'N', c'T', H4, H, B, <real>1.0, &dX[t, 0, 0], H4, &Hs[t - 1, 0, 0], H,
                      <real>1.0, &dWh[0, 0], H4)
            # dh_next = dz Wh^T
            _gemm(c'T', c'N', H, B, H4, <real>1.0, &Wh[0, 0], H4, &dX[t, 0, 0], H4,
                  <real>0.0, &dh_next[0, 0], H)


def lstm_forward(xproj, Wh):
    xproj = np.ascontiguousarray(xproj)
    Wh = np.ascontiguousarray(Wh, dtype=xproj.dtype)
    T, B, H4 = xproj.shape
    H = H4 // 4
    dtype = xproj.dtype
    G = np.empty((T, B, H4), dtype=dtype)
    C = np.empty((T, B, H), dtype=dtype)
    Hs = np.empty((T, B, H), dtype=dtype)
    if T and B and H:
        _forward(xproj, Wh, G, C, Hs, np.zeros((B, H), dtype), np.empty((B, H4), dtype))
    return Hs, C, G


def lstm_backward(dH, Wh, G, C, Hs):
    dH = np.ascontiguousarray(dH)
    dtype = dH.dtype
    Wh = np.ascontiguousarray(Wh, dtype=dtype)
    T, B, H = dH.shape
    dX = np.empty((T, B, 4 * H), dtype=dtype)
    dWh = np.zeros_like(Wh)
    if T and B and H:
        _backward(dH, Wh, np.ascontiguousarray(G, dtype=dtype), np.ascontiguousarray(C, dtype=dtype),
                  np.ascontiguousarray(Hs, dtype=dtype), dX, dWh, np.zeros((B, H), dtype),
                  np.zeros((B, H), dtype), np.zeros((B, H), dtype), np.empty((B, H), dtype))
    return dX, dWh
