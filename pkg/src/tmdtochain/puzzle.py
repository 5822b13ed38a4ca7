"""Challenge construction by a small proof of work, and solution checks."""
from dataclasses import dataclass

from . import corefn
from ._backend import kernels as _default_kernels


class ChallengeError(RuntimeError):
    """The nonce search ran out of trials; d is probably misconfigured."""


@dataclass(frozen=True)
class Challenge:
    nonce: int
    digest: int
    C: int
    j: int
    d: int
    trials: int = 1


@dataclass(frozen=True)
class PuzzleSolution:
    key: int
    challenge: Challenge


def make_challenge(block_bytes, params, j, nonce_seed, max_trials=None, kernels=None):
    """Try nonces nonce_seed, nonce_seed + 1, ... until the digest of
    block_bytes || nonce starts with d zero bits; the challenge is its low ell^j bits.
    """
    ell = params.ell(j)
    d = params.d
    cap = max_trials if max_trials is not None else 1 << min(d + 8, 62)
    k = kernels or _default_kernels
    found = k.mini_pow(bytes(block_bytes), nonce_seed & corefn.MASK64, d, cap)
    if found is None:
        raise ChallengeError(f"no nonce with a {d}-bit zero prefix in {cap} trials")
    nonce, digest, trials = found
    return Challenge(nonce=nonce, digest=digest, C=corefn.extract_challenge(digest, ell), j=j, d=d, trials=trials)


def challenge_for(block_bytes, nonce, params, j):
    """Rebuild the challenge a given nonce produces, without checking the prefix."""
    digest = corefn.block_digest(bytes(block_bytes) + corefn.u64_bytes(nonce))
    return Challenge(nonce=nonce, digest=digest, C=corefn.extract_challenge(digest, params.ell(j)), j=j, d=params.d)


def verify_solution(sol, block_bytes, params):
    ch = sol.challenge
    try:
        ell = params.ell(ch.j)
    except ValueError:
        return False
    n = params.n
    digest = corefn.block_digest(bytes(block_bytes) + corefn.u64_bytes(ch.nonce))
    if digest != ch.digest or not corefn.has_zero_prefix(digest, params.d):
        return False
    if ch.C != corefn.extract_challenge(digest, ell):
        return False
    if not 0 <= sol.key < (1 << n):
        return False
    if corefn.oneway_step(sol.key, n) & corefn.mask(ell) != ch.C:
        return False
    if params.constrained and sol.key >> ell != corefn.mask(n - ell):
        return False
    return True
