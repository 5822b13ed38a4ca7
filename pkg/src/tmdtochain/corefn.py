"""Bit-exact primitives: the 64-bit mixer, the keyed one-way step, block digests.

Every state fits in one 64-bit word. The one-way step plays the role of
E_K(1^n): the key is mixed, XORed with the all-ones n-bit message and mixed
again, keeping the low n bits.
"""
from ._backend import kernels

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _check_width(n):
    if not 1 <= n <= 64:
        raise ValueError(f"state width must be in [1, 64], got {n}")


def mask(bits):
    """Low-bit mask with `bits` ones."""
    return (1 << bits) - 1


def mix64(x):
    """SplitMix64 finalizer applied to x + golden ratio. Bijective on 64-bit words."""
    return kernels.mix64(x & MASK64)


def oneway_step(key, n):
    _check_width(n)
    if not 0 <= key < (1 << n):
        raise ValueError(f"key {key:#x} does not fit in {n} bits")
    return kernels.oneway_step(key, n)


def constrain(x, n, ell):
    """Set the top n - ell bits of x to one; the low ell bits pass through."""
    _check_width(n)
    if not 1 <= ell <= n:
        raise ValueError(f"ell must be in [1, {n}], got {ell}")
    return (x & mask(n)) | (mask(n) ^ mask(ell))


def block_digest(data):
    """Fold mix64 over 8-byte little-endian words, zero padded, then the byte length."""
    return kernels.block_digest(bytes(data))


def has_zero_prefix(h, d):
    if not 0 <= d <= 64:
        raise ValueError(f"prefix length must be in [0, 64], got {d}")
    return (h & MASK64) >> (64 - d) == 0 if d else True


def extract_challenge(h, ell):
    if not 1 <= ell <= 64:
        raise ValueError(f"challenge length must be in [1, 64], got {ell}")
    return h & mask(ell)


def u64_bytes(value):
    return (value & MASK64).to_bytes(8, "little")
