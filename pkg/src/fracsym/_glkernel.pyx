# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Grünwald-Letnikov kernel: weight recurrence and history
convolution with extended-precision accumulation."""


def gl_weights(double alpha, double[::1] out):
    """w_0 = 1, w_i = w_{i-1} * (1 - (alpha+1)/i), computed in long double."""
    cdef Py_ssize_t n = out.shape[0]
    cdef Py_ssize_t i
    cdef long double w = 1.0
    cdef long double ap1 = <long double> alpha + 1.0
    if n == 0:
        return
    out[0] = 1.0
    for i in range(1, n):
        w = w * (1.0 - ap1 / <long double> i)
        out[i] = <double> w


def gl_convolve(double[::1] w, double[::1] f, double[::1] out,
                Py_ssize_t window):
    """out[j] = sum_{i=0..min(j, window-1)} w[i] * f[j-i].

    Per-point accumulation order is fixed (i ascending), so results are
    bitwise independent of any outer evaluation order.
    """
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t i, j, imax
    cdef long double acc
    for j in range(n):
        imax = j if j < window - 1 else window - 1
        acc = 0.0
        for i in range(imax + 1):
            acc += <long double> w[i] * <long double> f[j - i]
        out[j] = <double> acc
