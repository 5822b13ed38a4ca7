"""Two-column trade-off tables and the inversion search over them.

A table row keeps only the start and end of a chain of t one-way steps.
Lookups go through two sorted orders: by full end value, and by the low
ell bits of the end (the challenge suffix).

In constrained mode every key fed to the one-way step has its top n - ell
bits forced to one, so chains and solutions live in a 2^ell subspace.
"""
import enum
import random
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import corefn
from ._backend import kernels as _default_kernels

MAGIC = b"TMDT"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIQQIQ")
ENUMERATION_CAP = 1 << 24


class Mode(str, enum.Enum):
    UNCONSTRAINED = "unconstrained"
    CONSTRAINED = "constrained"


_MODE_CODES = {Mode.UNCONSTRAINED: 0, Mode.CONSTRAINED: 1}


class MatrixStoppingRuleWarning(UserWarning):
    """M * t^2 exceeds the space the chains live in; coverage will suffer from merges."""


class TableFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TableSpec:
    j: int
    ell: int
    M: int
    t: int
    mode: Mode = Mode.CONSTRAINED
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.M < 0:
            raise ValueError(f"row count must be nonnegative, got {self.M}")
        if self.t < 1:
            raise ValueError(f"chain length must be at least 1, got {self.t}")
        if self.ell < 1:
            raise ValueError(f"ell must be positive, got {self.ell}")

    @property
    def constrained(self):
        return self.mode is Mode.CONSTRAINED

    def space_bits(self, n):
        """Bits of the space the chain keys are drawn from."""
        return self.ell if self.constrained else n


def _check(spec, n):
    if not 1 <= n <= 64:
        raise ValueError(f"state width must be in [1, 64], got {n}")
    if spec.ell > n:
        raise ValueError(f"ell={spec.ell} exceeds state width n={n}")


def chain_step(x, spec, n):
    """One chain evaluation: the one-way step, after the prefix preset in constrained mode."""
    _check(spec, n)
    if not 0 <= x < (1 << n):
        raise ValueError(f"state {x:#x} does not fit in {n} bits")
    key = corefn.constrain(x, n, spec.ell) if spec.constrained else x
    return corefn.oneway_step(key, n)


@dataclass(eq=False)
class TradeoffTable:
    spec: TableSpec
    n: int
    starts: np.ndarray
    ends: np.ndarray
    suffix_keys: np.ndarray = field(repr=False)
    suffix_rows: np.ndarray = field(repr=False)
    _views: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_rows(cls, spec, n, starts, ends):
        """Sort rows by (end, start) and derive the suffix index."""
        starts = np.asarray(starts, dtype=np.uint64)
        ends = np.asarray(ends, dtype=np.uint64)
        order = np.lexsort((starts, ends))
        starts, ends = starts[order], ends[order]
        suffix = ends & np.uint64(corefn.mask(spec.ell))
        rows = np.argsort(suffix, kind="stable").astype(np.int64)
        return cls(spec, n, starts, ends, suffix[rows], rows)

    def __len__(self):
        return len(self.starts)

    def __eq__(self, other):
        if not isinstance(other, TradeoffTable):
            return NotImplemented
        return self.to_bytes() == other.to_bytes()

    def view(self, kernels=None):
        k = kernels or _default_kernels
        if k.NAME not in self._views:
            self._views[k.NAME] = k.prepare(self.starts, self.ends, self.suffix_keys, self.suffix_rows)
        return self._views[k.NAME]

    def rows(self):
        return list(zip(self.starts.tolist(), self.ends.tolist()))

    def to_bytes(self):
        spec = self.spec
        header = _HEADER.pack(MAGIC, VERSION, self.n, spec.j, spec.ell, len(self),
                              spec.t, _MODE_CODES[spec.mode], spec.seed)
        body = np.column_stack((self.starts, self.ends)).astype("<u8").tobytes()
        return header + body

    @classmethod
    def from_bytes(cls, data):
        if len(data) < _HEADER.size:
            raise TableFormatError("truncated header")
        magic, version, n, j, ell, m, t, mode, seed = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise TableFormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise TableFormatError(f"unsupported version {version}")
        if len(data) != _HEADER.size + 16 * m:
            raise TableFormatError(f"expected {m} records, file has {len(data) - _HEADER.size} body bytes")
        modes = {code: name for name, code in _MODE_CODES.items()}
        if mode not in modes:
            raise TableFormatError(f"unknown mode code {mode}")
        spec = TableSpec(j=j, ell=ell, M=m, t=t, mode=modes[mode], seed=seed)
        _check(spec, n)
        records = np.frombuffer(data, dtype="<u8", offset=_HEADER.size).reshape(m, 2).astype(np.uint64)
        starts, ends = records[:, 0].copy(), records[:, 1].copy()
        if m > 1 and np.any((ends[1:] < ends[:-1]) | ((ends[1:] == ends[:-1]) & (starts[1:] <= starts[:-1]))):
            raise TableFormatError("records are not sorted by end")
        if len(np.unique(starts)) != m:
            raise TableFormatError("duplicate start values")
        return cls.from_rows(spec, n, starts, ends)

    def save(self, path):
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path):
        return cls.from_bytes(Path(path).read_bytes())


def _sample_starts(spec, n):
    bits = spec.space_bits(n)
    if spec.M > (1 << bits):
        raise ValueError(f"cannot draw {spec.M} distinct starts from a 2^{bits} space")
    rng = random.Random(spec.seed)
    preset = corefn.mask(n) ^ corefn.mask(spec.ell) if spec.constrained else 0
    seen = set()
    starts = []
    while len(starts) < spec.M:
        x = rng.getrandbits(bits) | preset
        if x not in seen:
            seen.add(x)
            starts.append(x)
    return starts


def build_table(spec, n, kernels=None):
    """Draw M distinct starts from the seeded generator and walk each t steps."""
    _check(spec, n)
    k = kernels or _default_kernels
    starts = np.array(_sample_starts(spec, n), dtype=np.uint64)
    if spec.M * spec.t * spec.t > 1 << spec.space_bits(n):
        warnings.warn(
            f"M*t^2 = {spec.M * spec.t ** 2} exceeds the 2^{spec.space_bits(n)} chain space",
            MatrixStoppingRuleWarning,
            stacklevel=2,
        )
    ends = k.chain_ends(starts, spec.t, n, spec.ell, spec.constrained)
    return TradeoffTable.from_rows(spec, n, starts, ends)


@dataclass(frozen=True)
class Inversion:
    key: int | None
    steps: int

    @property
    def found(self):
        return self.key is not None


def invert_counted(table, challenge, kernels=None):
    """Inversion search that also reports how many chain steps it spent."""
    spec = table.spec
    if not 0 <= challenge < (1 << spec.ell):
        raise ValueError(f"challenge {challenge:#x} does not fit in {spec.ell} bits")
    k = kernels or _default_kernels
    key, steps = k.invert(table.view(k), challenge, spec.t, table.n, spec.ell, spec.constrained)
    return Inversion(key, steps)


def invert(table, challenge, kernels=None):
    """Find a key whose one-way image ends in `challenge`, or None on a miss.

    Rows whose end already carries the challenge suffix are rewalked first.
    Otherwise the walk starts from the challenge padded with ones and, after
    every step, rewalks each row whose end equals the walk state. A rewalk
    that runs t steps without producing the suffix is a false alarm and the
    walk continues. Each row is rewalked at most once.
    """
    return invert_counted(table, challenge, kernels).key


def is_valid_key(key, challenge, n, ell, constrained):
    if not 0 <= key < (1 << n):
        return False
    if constrained and key >> ell != corefn.mask(n - ell):
        return False
    return corefn.oneway_step(key, n) & corefn.mask(ell) == challenge


def covered_set(table, cap=ENUMERATION_CAP, kernels=None):
    """Suffixes of every image along every chain of the table."""
    spec = table.spec
    if len(table) * spec.t > cap:
        raise ValueError(f"{len(table)} rows x {spec.t} steps exceeds the enumeration cap {cap}")
    k = kernels or _default_kernels
    images = k.chain_image_suffixes(table.starts, spec.t, table.n, spec.ell, spec.constrained)
    return frozenset(np.unique(images).tolist())


def endpoint_suffixes(table):
    """Distinct ell-bit suffixes of the end column."""
    return frozenset(np.unique(table.suffix_keys).tolist())
