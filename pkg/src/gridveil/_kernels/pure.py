"""Pure NumPy kernel backend.

This module is the reference implementation of the hot kernels; the compiled
extension (``_core``) mirrors it operation for operation.  The random-number
path (counter words, uniforms, normal deviates, Monte Carlo trial counts) is
bit-identical between the two backends because every floating-point operation
is written in the same order with the same constants and no library
transcendentals; the spectral-sweep solver agrees to ~1e-12 relative (its
lane reductions are delegated to BLAS here).

Stream layout
-------------
The generator is counter-based: word ``k`` of stream ``seed`` is
``mix64(seed + (k + 1) * GOLDEN)`` where ``mix64`` is the splitmix64
finalizer.  Any subsequence can therefore be produced independently, which is
what makes sharded Monte Carlo exactly independent of the shard layout.
"""

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# ln(2) split for the portable logarithm (head + tail, head carries ~32 bits)
_LN2_HI = 6.93147180369123816490e-01
_LN2_LO = 1.90821492927058770002e-10
_SQRT_HALF = 0.7071067811865476
# atanh series 1/3, 1/5, ..., 1/23, highest order first
_ATANH = (
    1.0 / 23, 1.0 / 21, 1.0 / 19, 1.0 / 17, 1.0 / 15,
    1.0 / 13, 1.0 / 11, 1.0 / 9, 1.0 / 7, 1.0 / 5, 1.0 / 3,
)

# Rational approximation of the standard normal quantile (Acklam), absolute
# error below 1.2e-9 over (0, 1); tails switch at 0.02425.
_NQ_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_NQ_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01)
_NQ_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
         -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_NQ_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
         3.754408661907416e+00)
_NQ_PLOW = 0.02425


def raw_words(seed, start, count):
    """Counter words ``start .. start+count-1`` of the stream, as uint64."""
    seed = np.uint64(seed & MASK64)
    k = np.arange(start, start + count, dtype=np.uint64)
    z = (k + np.uint64(1)) * np.uint64(GOLDEN) + seed
    z ^= z >> np.uint64(30)
    z *= np.uint64(_MIX1)
    z ^= z >> np.uint64(27)
    z *= np.uint64(_MIX2)
    z ^= z >> np.uint64(31)
    return z


def uniform_block(seed, start, count):
    """Uniform doubles strictly inside (0, 1), 52 significant bits each."""
    w = raw_words(seed, start, count)
    return ((w >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52


def portable_log(x):
    """Natural log via frexp + atanh series; identical on every platform.

    Accepts positive finite arrays.  Max observed relative error ~3e-16.
    """
    x = np.asarray(x, dtype=np.float64)
    m, e = np.frexp(x)
    small = m < _SQRT_HALF
    m = np.where(small, m * 2.0, m)
    e = (e - small).astype(np.float64)
    s = (m - 1.0) / (m + 1.0)
    z = s * s
    poly = np.full_like(s, _ATANH[0])
    for c in _ATANH[1:]:
        poly = poly * z + c
    t1 = 2.0 * s
    logm = t1 + (t1 * z) * poly
    return e * _LN2_HI + (logm + e * _LN2_LO)


def _normal_from_uniform(u):
    out = np.empty_like(u)
    central = (u >= _NQ_PLOW) & (u <= 1.0 - _NQ_PLOW)
    if central.any():
        q = u[central] - 0.5
        r = q * q
        num = ((((_NQ_A[0] * r + _NQ_A[1]) * r + _NQ_A[2]) * r + _NQ_A[3]) * r
               + _NQ_A[4]) * r + _NQ_A[5]
        den = ((((_NQ_B[0] * r + _NQ_B[1]) * r + _NQ_B[2]) * r + _NQ_B[3]) * r
               + _NQ_B[4]) * r + 1.0
        out[central] = q * (num / den)
    for mask, sign in ((u < _NQ_PLOW, 1.0), (u > 1.0 - _NQ_PLOW, -1.0)):
        if mask.any():
            p = u[mask] if sign > 0 else 1.0 - u[mask]
            q = np.sqrt(-2.0 * portable_log(p))
            num = ((((_NQ_C[0] * q + _NQ_C[1]) * q + _NQ_C[2]) * q + _NQ_C[3]) * q
                   + _NQ_C[4]) * q + _NQ_C[5]
            den = (((_NQ_D[0] * q + _NQ_D[1]) * q + _NQ_D[2]) * q + _NQ_D[3]) * q + 1.0
            out[mask] = sign * (num / den)
    return out


def normal_block(seed, start, count):
    """Standard normal deviates for counter positions ``start .. start+count-1``."""
    return _normal_from_uniform(uniform_block(seed, start, count))


def mc_success_count(seed, mu1, mu2, sigma, a, b_const, trials, trial_start):
    """Count correct likelihood-ratio classifications over seeded trials.

    Trial ``t`` (global index) consumes words ``t*(T+1) .. t*(T+1)+T``: one
    label uniform, then T observation normals.  The count is exact and
    additive over disjoint trial ranges, so any sharding reproduces the
    single-pass result.
    """
    mu1 = np.asarray(mu1, dtype=np.float64)
    mu2 = np.asarray(mu2, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    dim = mu1.shape[0]
    stride = dim + 1
    successes = 0
    chunk = 1 << 18
    done = 0
    while done < trials:
        n = min(chunk, trials - done)
        base = (trial_start + done) * stride
        w = raw_words(seed, base, n * stride).reshape(n, stride)
        u_label = ((w[:, 0] >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52
        truth1 = u_label < 0.5
        s = np.full(n, b_const)
        for j in range(dim):
            uj = ((w[:, j + 1] >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52
            zj = _normal_from_uniform(uj)
            xj = np.where(truth1, mu1[j], mu2[j]) + sigma * zj
            s = s + a[j] * xj
        decide1 = s > 0.0
        successes += int(np.sum(decide1 == truth1))
        done += n
    return successes


def secular_sweep(lam, bproj, wproj, s_c, s_b, re_k, k2, bisect_iters=64):
    """Largest eigenvalue of ``M0 + P K(omega) P^T`` for each lane.

    ``lam`` are the ascending eigenvalues of the base Gram matrix, ``bproj``
    and ``wproj`` the eigenbasis projections of the two update directions,
    and ``re_k``/``k2`` the per-lane Re(kappa) and |kappa|^2.  Lanes where no
    eigenvalue rises above ``lam[-1]`` return a Rayleigh lower bound; callers
    take a max against ``lam[-1]`` afterwards, which is exact in that regime.
    """
    re_k = np.asarray(re_k, dtype=np.float64)
    k2 = np.asarray(k2, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    b2 = bproj * bproj
    bw = bproj * wproj
    w2 = wproj * wproj
    p3 = np.stack([b2, bw, w2], axis=1)
    lmax = float(lam[-1])
    delta = 1e-12 * (1.0 + abs(lmax))
    lo0 = lmax + delta
    twore = 2.0 * re_k
    k11 = k2 * s_c

    def fval(x):
        inv = 1.0 / (lam[None, :] - x[:, None])
        r = inv @ p3
        r11, r12, r22 = r[:, 0], r[:, 1], r[:, 2]
        f = 1.0 + twore * r12
        f = f + k11 * r11
        return f + k2 * (r12 * r12 - r11 * r22)

    sig_d = np.sqrt(max(lmax, 0.0))
    amp = np.sqrt(k2 * (s_c * s_b))
    hi = (sig_d + amp) ** 2
    hi = np.maximum(hi, lo0 + 1.0)
    for _ in range(8):
        grow = fval(hi) <= 0.0
        if not grow.any():
            break
        hi = np.where(grow, lo0 + (hi - lo0) * 4.0, hi)
    lo = np.full_like(hi, lo0)
    case_a = fval(lo) < 0.0
    bt = float(bproj[-1])
    wt = float(wproj[-1])
    ray = lmax + (k11 * (bt * bt) + twore * (bt * wt))
    ray = np.maximum(ray, 0.0)
    for _ in range(bisect_iters):
        mid = 0.5 * (lo + hi)
        neg = fval(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return np.where(case_a, hi, ray)
