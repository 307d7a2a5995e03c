# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel backend.

Mirrors ``pure.py`` operation for operation.  The random path reproduces the
pure backend bit for bit (same constants, same operation order, no libm
transcendentals other than sqrt, which is correctly rounded); the spectral
sweep agrees to ~1e-12 relative because the pure lane reductions run through
BLAS.  Compiled with -ffp-contract=off so no FMA contraction changes results.
"""

from libc.math cimport sqrt, frexp
from libc.stdint cimport uint64_t, int64_t

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15UL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9UL
cdef uint64_t MIX2 = 0x94D049BB133111EBUL

cdef double LN2_HI = 6.93147180369123816490e-01
cdef double LN2_LO = 1.90821492927058770002e-10
cdef double SQRT_HALF = 0.7071067811865476
cdef double TWOM52 = 2.220446049250313e-16  # 2^-52

cdef double NQ_A0 = -3.969683028665376e+01
cdef double NQ_A1 = 2.209460984245205e+02
cdef double NQ_A2 = -2.759285104469687e+02
cdef double NQ_A3 = 1.383577518672690e+02
cdef double NQ_A4 = -3.066479806614716e+01
cdef double NQ_A5 = 2.506628277459239e+00
cdef double NQ_B0 = -5.447609879822406e+01
cdef double NQ_B1 = 1.615858368580409e+02
cdef double NQ_B2 = -1.556989798598866e+02
cdef double NQ_B3 = 6.680131188771972e+01
cdef double NQ_B4 = -1.328068155288572e+01
cdef double NQ_C0 = -7.784894002430293e-03
cdef double NQ_C1 = -3.223964580411365e-01
cdef double NQ_C2 = -2.400758277161838e+00
cdef double NQ_C3 = -2.549732539343734e+00
cdef double NQ_C4 = 4.374664141464968e+00
cdef double NQ_C5 = 2.938163982698783e+00
cdef double NQ_D0 = 7.784695709041462e-03
cdef double NQ_D1 = 3.224671290700398e-01
cdef double NQ_D2 = 2.445134137142996e+00
cdef double NQ_D3 = 3.754408661907416e+00
cdef double NQ_PLOW = 0.02425


cdef inline uint64_t _word(uint64_t seed, uint64_t k) nogil:
    cdef uint64_t z = (k + 1UL) * GOLDEN + seed
    z ^= z >> 30
    z *= MIX1
    z ^= z >> 27
    z *= MIX2
    z ^= z >> 31
    return z


cdef inline double _uniform(uint64_t w) nogil:
    return (<double> (w >> 12) + 0.5) * TWOM52


cdef inline double _plog(double x) nogil:
    cdef int e
    cdef double m = frexp(x, &e)
    cdef double ef, s, z, poly, t1, logm
    if m < SQRT_HALF:
        m = m * 2.0
        e = e - 1
    ef = <double> e
    s = (m - 1.0) / (m + 1.0)
    z = s * s
    poly = 1.0 / 23
    poly = poly * z + 1.0 / 21
    poly = poly * z + 1.0 / 19
    poly = poly * z + 1.0 / 17
    poly = poly * z + 1.0 / 15
    poly = poly * z + 1.0 / 13
    poly = poly * z + 1.0 / 11
    poly = poly * z + 1.0 / 9
    poly = poly * z + 1.0 / 7
    poly = poly * z + 1.0 / 5
    poly = poly * z + 1.0 / 3
    t1 = 2.0 * s
    logm = t1 + (t1 * z) * poly
    return ef * LN2_HI + (logm + ef * LN2_LO)


cdef inline double _normq(double u) nogil:
    cdef double q, r, num, den, p, sign
    if NQ_PLOW <= u and u <= 1.0 - NQ_PLOW:
        q = u - 0.5
        r = q * q
        num = ((((NQ_A0 * r + NQ_A1) * r + NQ_A2) * r + NQ_A3) * r + NQ_A4) * r + NQ_A5
        den = ((((NQ_B0 * r + NQ_B1) * r + NQ_B2) * r + NQ_B3) * r + NQ_B4) * r + 1.0
        return q * (num / den)
    if u < NQ_PLOW:
        p = u
        sign = 1.0
    else:
        p = 1.0 - u
        sign = -1.0
    q = sqrt(-2.0 * _plog(p))
    num = ((((NQ_C0 * q + NQ_C1) * q + NQ_C2) * q + NQ_C3) * q + NQ_C4) * q + NQ_C5
    den = (((NQ_D0 * q + NQ_D1) * q + NQ_D2) * q + NQ_D3) * q + 1.0
    return sign * (num / den)


def raw_words(seed, start, count):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t n = count
    cdef uint64_t base = <uint64_t> start
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef int64_t i
    with nogil:
        for i in range(n):
            o[i] = _word(s, base + <uint64_t> i)
    return out


def uniform_block(seed, start, count):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t n = count
    cdef uint64_t base = <uint64_t> start
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t i
    with nogil:
        for i in range(n):
            o[i] = _uniform(_word(s, base + <uint64_t> i))
    return out


def portable_log(x):
    arr = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    shape = arr.shape
    flat = arr.reshape(-1)
    out = np.empty(flat.shape[0], dtype=np.float64)
    cdef double[::1] xi = flat
    cdef double[::1] o = out
    cdef int64_t i, n = flat.shape[0]
    with nogil:
        for i in range(n):
            o[i] = _plog(xi[i])
    return out.reshape(shape)


def normal_block(seed, start, count):
    cdef uint64_t s = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    cdef int64_t n = count
    cdef uint64_t base = <uint64_t> start
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef int64_t i
    with nogil:
        for i in range(n):
            o[i] = _normq(_uniform(_word(s, base + <uint64_t> i)))
    return out


def mc_success_count(seed, mu1, mu2, sigma, a, b_const, trials, trial_start):
    cdef uint64_t sd = <uint64_t> (seed & 0xFFFFFFFFFFFFFFFF)
    m1 = np.ascontiguousarray(np.asarray(mu1, dtype=np.float64))
    m2 = np.ascontiguousarray(np.asarray(mu2, dtype=np.float64))
    av = np.ascontiguousarray(np.asarray(a, dtype=np.float64))
    cdef double[::1] mu1v = m1
    cdef double[::1] mu2v = m2
    cdef double[::1] av2 = av
    cdef double sg = sigma
    cdef double bc = b_const
    cdef int64_t nt = trials
    cdef int64_t t0 = trial_start
    cdef int dim = m1.shape[0]
    cdef int stride = dim + 1
    cdef int64_t successes = 0
    cdef int64_t t
    cdef int j
    cdef uint64_t base
    cdef double u, zj, xj, s
    cdef bint truth1, decide1
    with nogil:
        for t in range(nt):
            base = <uint64_t> ((t0 + t) * stride)
            u = _uniform(_word(sd, base))
            truth1 = u < 0.5
            s = bc
            for j in range(dim):
                zj = _normq(_uniform(_word(sd, base + 1UL + <uint64_t> j)))
                if truth1:
                    xj = mu1v[j] + sg * zj
                else:
                    xj = mu2v[j] + sg * zj
                s = s + av2[j] * xj
            decide1 = s > 0.0
            if decide1 == truth1:
                successes += 1
    return int(successes)


def secular_sweep(lam, bproj, wproj, s_c, s_b, re_k, k2, bisect_iters=64):
    lamc = np.ascontiguousarray(np.asarray(lam, dtype=np.float64))
    bp = np.ascontiguousarray(np.asarray(bproj, dtype=np.float64))
    wp = np.ascontiguousarray(np.asarray(wproj, dtype=np.float64))
    rk = np.ascontiguousarray(np.asarray(re_k, dtype=np.float64))
    kk = np.ascontiguousarray(np.asarray(k2, dtype=np.float64))
    cdef double[::1] lamv = lamc
    cdef int n = lamc.shape[0]
    b2a = bp * bp
    bwa = bp * wp
    w2a = wp * wp
    cdef double[::1] b2 = b2a
    cdef double[::1] bw = bwa
    cdef double[::1] w2 = w2a
    cdef double[::1] rkv = rk
    cdef double[::1] kkv = kk
    cdef int64_t lanes = rk.shape[0]
    out = np.empty(lanes, dtype=np.float64)
    cdef double[::1] o = out
    cdef double scv = s_c
    cdef double sbv = s_b
    cdef double lmax = lamv[n - 1]
    cdef double delta = 1e-12 * (1.0 + (lmax if lmax >= 0 else -lmax))
    cdef double lo0 = lmax + delta
    cdef double sig_d = sqrt(lmax if lmax > 0.0 else 0.0)
    cdef double bt = b2[n - 1]
    cdef double btwt = bw[n - 1]
    cdef int iters = bisect_iters
    cdef int64_t lane
    cdef int i, it
    cdef double twore, k11, k2l, amp, hi, lo, mid, ray, f
    with nogil:
        for lane in range(lanes):
            twore = 2.0 * rkv[lane]
            k2l = kkv[lane]
            k11 = k2l * scv
            amp = sqrt(k2l * (scv * sbv))
            hi = (sig_d + amp) * (sig_d + amp)
            if hi < lo0 + 1.0:
                hi = lo0 + 1.0
            for it in range(8):
                if _fval(lamv, b2, bw, w2, n, twore, k11, k2l, hi) <= 0.0:
                    hi = lo0 + (hi - lo0) * 4.0
                else:
                    break
            if _fval(lamv, b2, bw, w2, n, twore, k11, k2l, lo0) < 0.0:
                lo = lo0
                for it in range(iters):
                    mid = 0.5 * (lo + hi)
                    f = _fval(lamv, b2, bw, w2, n, twore, k11, k2l, mid)
                    if f < 0.0:
                        lo = mid
                    else:
                        hi = mid
                o[lane] = hi
            else:
                ray = lmax + (k11 * bt + twore * btwt)
                if ray < 0.0:
                    ray = 0.0
                o[lane] = ray
    return out


cdef inline double _fval(double[::1] lam, double[::1] b2, double[::1] bw,
                         double[::1] w2, int n, double twore, double k11,
                         double k2l, double x) nogil:
    cdef double r11 = 0.0
    cdef double r12 = 0.0
    cdef double r22 = 0.0
    cdef double inv, f
    cdef int i
    for i in range(n):
        inv = 1.0 / (lam[i] - x)
        r11 += b2[i] * inv
        r12 += bw[i] * inv
        r22 += w2[i] * inv
    f = 1.0 + twore * r12
    f = f + k11 * r11
    return f + k2l * (r12 * r12 - r11 * r22)
