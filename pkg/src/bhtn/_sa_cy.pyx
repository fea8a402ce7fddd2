# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulated-annealing kernel.

Chain-sequential twin of ``bhtn._sa_py.anneal``: identical RNG streams,
identical float arithmetic (including the portable Metropolis exponential),
so the two kernels return bitwise-identical states for a given seed. Any
change here must be mirrored there.
"""

from libc.math cimport floor, ldexp
from libc.stdint cimport uint8_t, uint64_t

import numpy as np

cdef double _INV53 = 1.0 / 9007199254740992.0
cdef double _LOG2E = 1.4426950408889634
cdef double _LN2 = 0.6931471805599453
cdef uint64_t _GOLDEN = <uint64_t>0x9E3779B97F4A7C15


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * <uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    s[0] = s[0] + _GOLDEN
    return _mix(s[0])


cdef inline double _metro_exp(double x) noexcept nogil:
    cdef double y, kd, f, p
    if x <= -746.0:
        return 0.0
    y = x * _LOG2E
    kd = floor(y)
    f = (y - kd) * _LN2
    p = 1.0 / 3628800.0
    p = p * f + 1.0 / 362880.0
    p = p * f + 1.0 / 40320.0
    p = p * f + 1.0 / 5040.0
    p = p * f + 1.0 / 720.0
    p = p * f + 1.0 / 120.0
    p = p * f + 1.0 / 24.0
    p = p * f + 1.0 / 6.0
    p = p * f + 0.5
    p = p * f + 1.0
    p = p * f + 1.0
    return ldexp(p, <int>kd)


def anneal(h_in, W_in, betas_in, num_reads, seed, read_offset=0):
    """See ``bhtn._sa_py.anneal``; same contract, same outputs."""
    h = np.ascontiguousarray(h_in, dtype=np.float64)
    W = np.ascontiguousarray(W_in, dtype=np.float64)
    betas = np.ascontiguousarray(betas_in, dtype=np.float64)

    cdef double[::1] h_v = h
    cdef double[:, ::1] W_v = W
    cdef double[::1] betas_v = betas
    cdef Py_ssize_t n = h_v.shape[0]
    cdef Py_ssize_t sweeps = betas_v.shape[0]
    cdef Py_ssize_t R = int(num_reads)
    cdef Py_ssize_t offs = int(read_offset)
    cdef uint64_t base_seed = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)

    best_x = np.empty((R, n), dtype=np.uint8)
    best_e = np.empty(R, dtype=np.float64)
    cur = np.empty(n, dtype=np.uint8)
    fld = np.empty(n, dtype=np.float64)
    cdef uint8_t[:, ::1] bx_v = best_x
    cdef double[::1] be_v = best_e
    cdef uint8_t[::1] cur_v = cur
    cdef double[::1] f_v = fld

    cdef Py_ssize_t rd, t, i, j
    cdef uint64_t s
    cdef double acc_f, e, be, beta, u, sgn, delta
    cdef bint acc

    with nogil:
        for rd in range(R):
            s = _mix(base_seed ^ _mix((<uint64_t>(offs + rd) + 1) * _GOLDEN))
            for i in range(n):
                cur_v[i] = <uint8_t>(_next(&s) >> 63)
            for i in range(n):
                acc_f = h_v[i]
                for j in range(n):
                    acc_f = acc_f + W_v[i, j] * cur_v[j]
                f_v[i] = acc_f
            e = 0.0
            for i in range(n):
                e = e + 0.5 * (h_v[i] + f_v[i]) * cur_v[i]
            be = e
            for i in range(n):
                bx_v[rd, i] = cur_v[i]

            for t in range(sweeps):
                beta = betas_v[t]
                for i in range(n):
                    u = <double>(_next(&s) >> 11) * _INV53
                    sgn = 1.0 - 2.0 * cur_v[i]
                    delta = sgn * f_v[i]
                    if delta <= 0.0:
                        acc = True
                    else:
                        acc = u < _metro_exp(-beta * delta)
                    if acc:
                        cur_v[i] ^= 1
                        e = e + delta
                        for j in range(n):
                            f_v[j] = f_v[j] + sgn * W_v[i, j]
                        if e < be:
                            be = e
                            for j in range(n):
                                bx_v[rd, j] = cur_v[j]
            be_v[rd] = be

    return best_x, best_e
