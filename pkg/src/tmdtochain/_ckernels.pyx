# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors _pykernels function for function."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t
from libc.string cimport memcpy
from libc.stdlib cimport malloc, free

cnp.import_array()

NAME = "compiled"

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t x) nogil:
    cdef uint64_t z = x + _GOLDEN
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _low_mask(int bits) nogil:
    if bits >= 64:
        return 0xFFFFFFFFFFFFFFFFULL
    return ((<uint64_t>1) << bits) - 1


cdef inline uint64_t _step(uint64_t key, uint64_t mask_n) nogil:
    return _mix(_mix(key) ^ mask_n) & mask_n


def mix64(x):
    return _mix(<uint64_t>x)


def oneway_step(k, int n):
    return _step(<uint64_t>k, _low_mask(n))


def chain_ends(const uint64_t[:] starts, long t, int n, int ell, bint constrained):
    cdef uint64_t mask_n = _low_mask(n)
    cdef uint64_t preset = (mask_n ^ _low_mask(ell)) if constrained else 0
    cdef Py_ssize_t m = starts.shape[0], i
    cdef long s
    cdef uint64_t x
    out = np.empty(m, dtype=np.uint64)
    cdef uint64_t[:] ends = out
    with nogil:
        for i in range(m):
            x = starts[i]
            for s in range(t):
                x = _step(x | preset, mask_n)
            ends[i] = x
    return out


def chain_image_suffixes(const uint64_t[:] starts, long t, int n, int ell, bint constrained):
    cdef uint64_t mask_n = _low_mask(n)
    cdef uint64_t mask_ell = _low_mask(ell)
    cdef uint64_t preset = (mask_n ^ mask_ell) if constrained else 0
    cdef Py_ssize_t m = starts.shape[0], i, pos = 0
    cdef long s
    cdef uint64_t x
    out = np.empty(m * t, dtype=np.uint64)
    cdef uint64_t[:] res = out
    with nogil:
        for i in range(m):
            x = starts[i]
            for s in range(t):
                x = _step(x | preset, mask_n)
                res[pos] = x & mask_ell
                pos += 1
    return out


def prepare(starts, ends, suffix_keys, suffix_rows):
    return (np.ascontiguousarray(starts, dtype=np.uint64),
            np.ascontiguousarray(ends, dtype=np.uint64),
            np.ascontiguousarray(suffix_keys, dtype=np.uint64),
            np.ascontiguousarray(suffix_rows, dtype=np.int64))


cdef inline Py_ssize_t _lower(const uint64_t[:] a, uint64_t v) nogil:
    cdef Py_ssize_t lo = 0, hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline Py_ssize_t _upper(const uint64_t[:] a, uint64_t v, Py_ssize_t lo) nogil:
    cdef Py_ssize_t hi = a.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline bint _rewalk(uint64_t start, long t, uint64_t c, uint64_t mask_n,
                         uint64_t mask_ell, uint64_t preset,
                         uint64_t* key_out, long* steps) nogil:
    cdef uint64_t x = start, key
    cdef long s
    for s in range(t):
        key = x | preset
        x = _step(key, mask_n)
        steps[0] += 1
        if (x & mask_ell) == c:
            key_out[0] = key
            return True
    return False


def invert(view, c, long t, int n, int ell, bint constrained):
    """Returns (key or None, chain steps evaluated)."""
    cdef const uint64_t[:] starts = view[0]
    cdef const uint64_t[:] ends = view[1]
    cdef const uint64_t[:] suffix_keys = view[2]
    cdef const long long[:] suffix_rows = view[3]
    cdef uint64_t mask_n = _low_mask(n)
    cdef uint64_t mask_ell = _low_mask(ell)
    cdef uint64_t preset = (mask_n ^ mask_ell) if constrained else 0
    cdef uint64_t cc = <uint64_t>c
    cdef uint64_t key = 0, x
    cdef long steps = 0
    cdef long s
    cdef Py_ssize_t lo, hi, i, row
    cdef set tried = set()

    lo = _lower(suffix_keys, cc)
    hi = _upper(suffix_keys, cc, lo)
    for i in range(lo, hi):
        row = suffix_rows[i]
        tried.add(row)
        if _rewalk(starts[row], t, cc, mask_n, mask_ell, preset, &key, &steps):
            return key, steps

    x = (mask_n ^ mask_ell) | cc
    for s in range(t):
        x = _step(x | preset, mask_n)
        steps += 1
        lo = _lower(ends, x)
        hi = _upper(ends, x, lo)
        for row in range(lo, hi):
            if row in tried:
                continue
            tried.add(row)
            if _rewalk(starts[row], t, cc, mask_n, mask_ell, preset, &key, &steps):
                return key, steps
    return None, steps


cdef uint64_t _digest(const unsigned char* buf, Py_ssize_t size) nogil:
    cdef uint64_t h = 0, w
    cdef Py_ssize_t i, j, full = size - size % 8
    for i in range(0, full, 8):
        w = 0
        for j in range(8):
            w |= (<uint64_t>buf[i + j]) << (8 * j)
        h = _mix(h ^ w)
    if size % 8:
        w = 0
        for j in range(size - full):
            w |= (<uint64_t>buf[full + j]) << (8 * j)
        h = _mix(h ^ w)
    return _mix(h ^ <uint64_t>size)


def block_digest(data):
    cdef const unsigned char[:] buf = bytes(data)
    if buf.shape[0] == 0:
        return _mix(0)
    return _digest(&buf[0], buf.shape[0])


def mini_pow(prefix, nonce_seed, int d, long long cap):
    """First nonce from nonce_seed whose digest has a d-bit zero prefix.

    Returns (nonce, digest, trials), or None when cap trials fail.
    """
    cdef bytes head = bytes(prefix)
    cdef Py_ssize_t plen = len(head), size = plen + 8, j
    cdef unsigned char* buf = <unsigned char*>malloc(size)
    cdef uint64_t seed = <uint64_t>nonce_seed, nonce = 0, digest = 0
    cdef long long trial
    cdef bint found = False
    if buf == NULL:
        raise MemoryError()
    if plen:
        memcpy(buf, <const char*>head, plen)
    try:
        with nogil:
            for trial in range(cap):
                nonce = seed + <uint64_t>trial
                for j in range(8):
                    buf[plen + j] = (nonce >> (8 * j)) & 0xFF
                digest = _digest(buf, size)
                if d == 0 or (d >= 64 and digest == 0) or (d < 64 and (digest >> (64 - d)) == 0):
                    found = True
                    break
    finally:
        free(buf)
    if not found:
        return None
    return nonce, digest, trial + 1
