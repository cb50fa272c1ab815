# cython: language_level=3, boundscheck=False, wraparound=False
# cython: cdivision=True, initializedcheck=False
"""Compiled simulation kernel.

Scalar per-trial loops over an inlined Philox4x64-10 generator. Mirrors
the pure kernel decision for decision (see _kernel_py for the parity
contract); the per-trial output arrays it fills are reduced by shared
evaluator code, so block results are identical for either kernel up to
the exponential transform's one-ulp slack.
"""

from libc.math cimport INFINITY, log1p
from libc.stdlib cimport free, malloc

cdef extern from *:
    """
    static inline unsigned long long _mulhi64(unsigned long long a,
                                              unsigned long long b) {
        unsigned __int128 p = (unsigned __int128)a * (unsigned __int128)b;
        return (unsigned long long)(p >> 64);
    }
    """
    unsigned long long _mulhi64(unsigned long long a, unsigned long long b) noexcept nogil

ctypedef unsigned long long u64

cdef u64 _M0 = 0xD2E7470EE14C6C93ULL
cdef u64 _M1 = 0xCA5A826395121157ULL
cdef u64 _W0 = 0x9E3779B97F4A7C15ULL
cdef u64 _W1 = 0xBB67AE8584CAA73BULL
cdef double _SCALE = 1.0 / 9007199254740992.0

cdef u64 _P_SAMPLES = 0
cdef u64 _P_VALUES = 1
cdef u64 _P_RULE = 2

cdef enum:
    _K_SECRETARY = 0
    _K_SECRETARY_SAMPLES = 1
    _K_SINGLE_THRESHOLD = 2
    _K_FRESH_SAMPLES = 3
    _K_THRESHOLDS = 4
    _K_QUANTILE_EMPIRICAL = 5
    _K_CONSTANT_ALPHA = 6

KIND_SECRETARY = _K_SECRETARY
KIND_SECRETARY_SAMPLES = _K_SECRETARY_SAMPLES
KIND_SINGLE_THRESHOLD = _K_SINGLE_THRESHOLD
KIND_FRESH_SAMPLES = _K_FRESH_SAMPLES
KIND_THRESHOLDS = _K_THRESHOLDS
KIND_QUANTILE_EMPIRICAL = _K_QUANTILE_EMPIRICAL
KIND_CONSTANT_ALPHA = _K_CONSTANT_ALPHA


cdef inline void _philox4(u64 c0, u64 c1, u64 c2, u64 c3,
                          u64 k0, u64 k1, u64* out) noexcept nogil:
    cdef int r
    cdef u64 hi0, lo0, hi1, lo1
    for r in range(10):
        hi0 = _mulhi64(_M0, c0)
        lo0 = _M0 * c0
        hi1 = _mulhi64(_M1, c2)
        lo1 = _M1 * c2
        c0 = hi1 ^ c1 ^ k0
        c1 = lo1
        c2 = hi0 ^ c3 ^ k1
        c3 = lo0
        k0 += _W0
        k1 += _W1
    out[0] = c0
    out[1] = c1
    out[2] = c2
    out[3] = c3


cdef inline void _fill_u(double* dst, Py_ssize_t count, u64 seed,
                         u64 purpose, u64 trial) noexcept nogil:
    cdef Py_ssize_t w = 0
    cdef int lane
    cdef u64 words[4]
    while w < count:
        _philox4(<u64>(w >> 2), trial, purpose, 0, seed, 0, words)
        lane = 0
        while lane < 4 and w < count:
            dst[w] = <double>(words[lane] >> 11) * _SCALE
            lane += 1
            w += 1


cdef struct RStream:
    u64 seed
    u64 trial
    u64 word
    u64 buf[4]


cdef inline void _rs_init(RStream* rs, u64 seed, u64 trial) noexcept nogil:
    rs.seed = seed
    rs.trial = trial
    rs.word = 0


cdef inline double _rs_next(RStream* rs) noexcept nogil:
    cdef u64 w = rs.word
    if (w & 3) == 0:
        _philox4(w >> 2, rs.trial, _P_RULE, 0, rs.seed, 0, rs.buf)
    rs.word = w + 1
    return <double>(rs.buf[w & 3] >> 11) * _SCALE


cdef inline double _xform(double u, int did, double rate,
                          const double* dval, const double* dcum,
                          Py_ssize_t dlen) noexcept nogil:
    cdef Py_ssize_t lo, hi, mid
    if did == 0:
        return u
    if did == 1:
        return -log1p(-u) / rate
    # discrete: first atom whose cumulative weight exceeds u
    lo = 0
    hi = dlen - 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if dcum[mid] > u:
            hi = mid
        else:
            lo = mid + 1
    return dval[lo]


cdef inline void _xform_buf(double* buf, Py_ssize_t count, int did,
                            double rate, const double* dval,
                            const double* dcum, Py_ssize_t dlen) noexcept nogil:
    cdef Py_ssize_t i
    if did == 0:
        return
    for i in range(count):
        buf[i] = _xform(buf[i], did, rate, dval, dcum, dlen)


cdef inline double _buf_max(const double* buf, Py_ssize_t count) noexcept nogil:
    cdef Py_ssize_t i
    cdef double m = -INFINITY
    for i in range(count):
        if buf[i] > m:
            m = buf[i]
    return m


cdef inline void _select(double* a, Py_ssize_t length, Py_ssize_t pos) noexcept nogil:
    """Partition a so a[pos] holds its sorted-order value."""
    cdef Py_ssize_t lo = 0, hi = length - 1, i, j
    cdef double pivot, tmp
    while lo < hi:
        pivot = a[(lo + hi) >> 1]
        i = lo
        j = hi
        while i <= j:
            while a[i] < pivot:
                i += 1
            while a[j] > pivot:
                j -= 1
            if i <= j:
                tmp = a[i]
                a[i] = a[j]
                a[j] = tmp
                i += 1
                j -= 1
        if pos <= j:
            hi = j
        elif pos >= i:
            lo = i
        else:
            return


def run_block(int kind, u64 seed, long long t0, long long t1,
              long long n, long long k,
              int did, double rate,
              double[::1] dval, double[::1] dcum,
              long long cutoff_count, double eligible_from, int strict,
              double[::1] thresholds,
              long long[::1] ranks, long long kskip,
              double alpha, double high_value,
              double[::1] out_reward, double[::1] out_max,
              int[::1] out_stop, unsigned char[::1] out_stopmax,
              unsigned char[::1] out_viol):
    cdef Py_ssize_t dlen = dval.shape[0]
    cdef const double* dv = NULL
    cdef const double* dc = NULL
    cdef const double* thr = NULL
    cdef const long long* rk = NULL
    if dlen:
        dv = &dval[0]
        dc = &dcum[0]
    if thresholds.shape[0]:
        thr = &thresholds[0]
    if ranks.shape[0]:
        rk = &ranks[0]

    cdef double* vbuf = <double*> malloc(n * sizeof(double))
    cdef double* sbuf = <double*> malloc((k if k > 0 else 1) * sizeof(double))
    cdef long long* selbuf = NULL
    cdef long long nsel = 0, si
    if kind == _K_QUANTILE_EMPIRICAL:
        # distinct order-statistic positions, ascending; the first
        # (smallest) select pays O(k), the rest walk a short suffix
        sel = sorted({int(ranks[i]) for i in range(1, n + 1) if ranks[i] >= 1})
        nsel = len(sel)
        selbuf = <long long*> malloc((nsel if nsel else 1) * sizeof(long long))
        if selbuf != NULL:
            for si in range(nsel):
                selbuf[si] = sel[si]
    if vbuf == NULL or sbuf == NULL or \
            (kind == _K_QUANTILE_EMPIRICAL and selbuf == NULL):
        free(vbuf)
        free(sbuf)
        free(selbuf)
        raise MemoryError()

    cdef long long t, idx, stop, j, i, off, pos
    cdef double x, reward, realized, combined, smax, prev, pool_max
    cdef double last_thr, evicted, u
    cdef unsigned char viol
    cdef RStream rs

    try:
        with nogil:
            for t in range(t0, t1):
                idx = t - t0
                _fill_u(vbuf, n, seed, _P_VALUES, <u64> t)
                _xform_buf(vbuf, n, did, rate, dv, dc, dlen)
                if k > 0:
                    _fill_u(sbuf, k, seed, _P_SAMPLES, <u64> t)
                    _xform_buf(sbuf, k, did, rate, dv, dc, dlen)
                    smax = _buf_max(sbuf, k)
                else:
                    smax = -INFINITY
                realized = _buf_max(vbuf, n)
                combined = realized if realized > smax else smax

                stop = 0
                reward = 0.0
                viol = 0

                if kind == _K_SECRETARY:
                    prev = -INFINITY
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if i > cutoff_count and x > prev:
                            stop = i
                            reward = x
                            break
                        if x > prev:
                            prev = x

                elif kind == _K_SECRETARY_SAMPLES:
                    prev = smax
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if <double>(k + i) >= eligible_from and x > prev:
                            stop = i
                            reward = x
                            break
                        if x > prev:
                            prev = x

                elif kind == _K_SINGLE_THRESHOLD:
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if i == n or x >= smax:
                            stop = i
                            reward = x
                            break

                elif kind == _K_FRESH_SAMPLES:
                    _rs_init(&rs, seed, <u64> t)
                    pool_max = smax
                    last_thr = INFINITY
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if pool_max > last_thr:
                            viol = 1
                        last_thr = pool_max
                        if x >= pool_max:
                            stop = i
                            reward = x
                            break
                        u = _rs_next(&rs)
                        j = <long long>(u * n)
                        if j < n - 1:
                            evicted = sbuf[j]
                            sbuf[j] = x
                            if evicted == pool_max:
                                pool_max = _buf_max(sbuf, k)

                elif kind == _K_THRESHOLDS:
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if (x > thr[i - 1]) if strict else (x >= thr[i - 1]):
                            stop = i
                            reward = x
                            break

                elif kind == _K_QUANTILE_EMPIRICAL:
                    off = 0
                    for si in range(nsel):
                        pos = selbuf[si] - 1
                        _select(sbuf + off, k - off, pos - off)
                        off = pos + 1
                    for i in range(1, n + 1):
                        if rk[i] == -1:
                            continue
                        x = vbuf[i - 1]
                        if rk[i] == 0 or x > sbuf[rk[i] - 1]:
                            stop = i
                            reward = x
                            break

                else:  # _K_CONSTANT_ALPHA
                    _rs_init(&rs, seed, <u64> t)
                    for i in range(1, n + 1):
                        x = vbuf[i - 1]
                        if x == high_value:
                            stop = i
                            reward = x
                            break
                        if x == 1.0 and high_value != 1.0:
                            if _rs_next(&rs) < alpha:
                                stop = i
                                reward = x
                                break

                out_reward[idx] = reward if stop else 0.0
                out_max[idx] = realized
                out_stop[idx] = <int> stop
                out_stopmax[idx] = 1 if (stop and reward == combined) else 0
                out_viol[idx] = viol
    finally:
        free(vbuf)
        free(sbuf)
        free(selbuf)
