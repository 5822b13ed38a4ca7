"""Pure-Python kernels. Same signatures and results as the compiled module."""
from bisect import bisect_left, bisect_right

import numpy as np

NAME = "python"

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x):
    z = (x + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def oneway_step(k, n):
    mask = (1 << n) - 1
    return mix64(mix64(k) ^ mask) & mask


def _masks(n, ell, constrained):
    mask_n = (1 << n) - 1
    mask_ell = (1 << ell) - 1
    preset = (mask_n ^ mask_ell) if constrained else 0
    return mask_n, mask_ell, preset


def chain_ends(starts, t, n, ell, constrained):
    mask_n, _, preset = _masks(n, ell, constrained)
    ends = []
    for x in starts.tolist():
        for _ in range(t):
            x = mix64(mix64(x | preset) ^ mask_n) & mask_n
        ends.append(x)
    return np.array(ends, dtype=np.uint64)


def chain_image_suffixes(starts, t, n, ell, constrained):
    mask_n, mask_ell, preset = _masks(n, ell, constrained)
    out = []
    for x in starts.tolist():
        for _ in range(t):
            x = mix64(mix64(x | preset) ^ mask_n) & mask_n
            out.append(x & mask_ell)
    return np.array(out, dtype=np.uint64)


def prepare(starts, ends, suffix_keys, suffix_rows):
    return starts.tolist(), ends.tolist(), suffix_keys.tolist(), suffix_rows.tolist()


def invert(view, c, t, n, ell, constrained):
    """Returns (key or None, chain steps evaluated)."""
    starts, ends, suffix_keys, suffix_rows = view
    mask_n, mask_ell, preset = _masks(n, ell, constrained)
    steps = 0
    tried = set()

    def rewalk(row):
        nonlocal steps
        tried.add(row)
        x = starts[row]
        for _ in range(t):
            key = x | preset
            x = mix64(mix64(key) ^ mask_n) & mask_n
            steps += 1
            if x & mask_ell == c:
                return key
        return None

    lo = bisect_left(suffix_keys, c)
    hi = bisect_right(suffix_keys, c, lo)
    for i in range(lo, hi):
        key = rewalk(suffix_rows[i])
        if key is not None:
            return key, steps

    x = (mask_n ^ mask_ell) | c
    for _ in range(t):
        x = mix64(mix64(x | preset) ^ mask_n) & mask_n
        steps += 1
        lo = bisect_left(ends, x)
        hi = bisect_right(ends, x, lo)
        for row in range(lo, hi):
            if row in tried:
                continue
            key = rewalk(row)
            if key is not None:
                return key, steps
    return None, steps


def block_digest(data):
    data = bytes(data)
    size = len(data)
    h = 0
    full = size - size % 8
    for i in range(0, full, 8):
        h = mix64(h ^ int.from_bytes(data[i:i + 8], "little"))
    if size % 8:
        h = mix64(h ^ int.from_bytes(data[full:], "little"))
    return mix64(h ^ size)


def mini_pow(prefix, nonce_seed, d, cap):
    """First nonce from nonce_seed whose digest has a d-bit zero prefix.

    Returns (nonce, digest, trials), or None when cap trials fail.
    """
    prefix = bytes(prefix)
    shift = 64 - d
    for trial in range(cap):
        nonce = (nonce_seed + trial) & _MASK64
        digest = block_digest(prefix + nonce.to_bytes(8, "little"))
        if d == 0 or digest >> shift == 0:
            return nonce, digest, trial + 1
    return None
