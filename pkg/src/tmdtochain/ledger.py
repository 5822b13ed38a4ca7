"""Blocks, the block tree, and longest-chain fork choice."""
import enum
import json
import struct
from dataclasses import dataclass

from . import corefn, puzzle


class Verdict(str, enum.Enum):
    ACCEPTED = "accepted"
    UNKNOWN_PARENT = "unknown-parent"
    BAD_SOLUTION = "bad-solution"
    DUPLICATE_TRANSACTION = "duplicate-transaction"
    BAD_HEIGHT = "bad-height"

    def __bool__(self):
        return self is Verdict.ACCEPTED


@dataclass(frozen=True)
class Block:
    height: int
    prev_digest: int
    tx_ids: tuple
    miner: int
    j: int
    nonce: int
    solution_key: int
    this_digest: int

    @staticmethod
    def header_bytes(height, prev_digest, miner, j, tx_ids):
        """Serialization prefix the challenge is computed over (no nonce, no key)."""
        return struct.pack(f"<{5 + len(tx_ids)}Q", height, prev_digest, miner, j, len(tx_ids), *tx_ids)

    @classmethod
    def assemble(cls, height, prev_digest, tx_ids, miner, j, nonce, solution_key):
        tx_ids = tuple(tx_ids)
        body = cls.header_bytes(height, prev_digest, miner, j, tx_ids) + struct.pack("<QQ", nonce, solution_key)
        return cls(height, prev_digest, tx_ids, miner, j, nonce, solution_key, corefn.block_digest(body))

    @property
    def header(self):
        return self.header_bytes(self.height, self.prev_digest, self.miner, self.j, self.tx_ids)

    def to_bytes(self):
        return self.header + struct.pack("<QQ", self.nonce, self.solution_key)

    def digest_ok(self):
        return corefn.block_digest(self.to_bytes()) == self.this_digest

    def solution(self, params):
        ch = puzzle.challenge_for(self.header, self.nonce, params, self.j)
        return puzzle.PuzzleSolution(self.solution_key, ch)

    def to_record(self):
        return {
            "height": self.height,
            "prev_digest": f"{self.prev_digest:016x}",
            "miner": self.miner,
            "j": self.j,
            "tx_ids": [f"{tx:016x}" for tx in self.tx_ids],
            "nonce": f"{self.nonce:016x}",
            "solution_key": f"{self.solution_key:016x}",
            "digest": f"{self.this_digest:016x}",
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            height=int(rec["height"]),
            prev_digest=int(rec["prev_digest"], 16),
            tx_ids=tuple(int(tx, 16) for tx in rec["tx_ids"]),
            miner=int(rec["miner"]),
            j=int(rec["j"]),
            nonce=int(rec["nonce"], 16),
            solution_key=int(rec["solution_key"], 16),
            this_digest=int(rec["digest"], 16),
        )


def genesis_block():
    """Fixed genesis: height 0, all-zero parent digest, no transactions, no solution."""
    return Block.assemble(0, 0, (), 0, 0, 0, 0)


def check_block(block, params):
    """Stateless part of validation: digest and puzzle solution."""
    return block.digest_ok() and puzzle.verify_solution(block.solution(params), block.header, params)


class Ledger:
    """Tree of accepted blocks keyed by digest. Single writer."""

    def __init__(self, params, genesis=None):
        self.params = params
        self.genesis = genesis or genesis_block()
        self.blocks = {self.genesis.this_digest: self.genesis}
        self.tips = {self.genesis.this_digest}
        self._tx_index = {}

    def __len__(self):
        return len(self.blocks)

    def __contains__(self, digest):
        return digest in self.blocks

    def _is_ancestor(self, digest, of):
        """True if block `digest` lies on the path from genesis to block `of` (inclusive)."""
        target = self.blocks[digest]
        node = self.blocks[of]
        while node.height > target.height:
            node = self.blocks[node.prev_digest]
        return node.this_digest == digest

    def append_block(self, block):
        parent = self.blocks.get(block.prev_digest)
        if parent is None:
            return Verdict.UNKNOWN_PARENT
        if block.height != parent.height + 1:
            return Verdict.BAD_HEIGHT
        if block.this_digest in self.blocks:
            # identical block already on this branch: its transactions are included
            return Verdict.DUPLICATE_TRANSACTION
        if not check_block(block, self.params):
            return Verdict.BAD_SOLUTION
        if len(set(block.tx_ids)) != len(block.tx_ids):
            return Verdict.DUPLICATE_TRANSACTION
        for tx in block.tx_ids:
            for holder in self._tx_index.get(tx, ()):
                if self._is_ancestor(holder, parent.this_digest):
                    return Verdict.DUPLICATE_TRANSACTION
        self.blocks[block.this_digest] = block
        self.tips.discard(parent.this_digest)
        self.tips.add(block.this_digest)
        for tx in block.tx_ids:
            self._tx_index.setdefault(tx, []).append(block.this_digest)
        return Verdict.ACCEPTED

    def tip(self):
        """Highest tip; equal heights go to the numerically smaller digest."""
        return min((self.blocks[d] for d in self.tips), key=lambda b: (-b.height, b.this_digest))

    def branch(self, digest):
        out = []
        block = self.blocks[digest]
        while True:
            out.append(block)
            if block.height == 0:
                break
            block = self.blocks[block.prev_digest]
        return out[::-1]

    def canonical_chain(self):
        return self.branch(self.tip().this_digest)

    def export_lines(self):
        return [json.dumps(b.to_record(), sort_keys=True) for b in self.canonical_chain()[1:]]


def read_chain(lines):
    """Parse exported chain records; blank lines are skipped."""
    return [Block.from_record(json.loads(line)) for line in lines if line.strip()]


def verify_chain(blocks, params):
    """Replay exported blocks on a fresh ledger.

    Returns (None, None) when every block is accepted, else the first offending
    block's height and the verdict.
    """
    ledger = Ledger(params)
    head = ledger.genesis.this_digest
    for block in blocks:
        verdict = ledger.append_block(block) if block.prev_digest == head else Verdict.UNKNOWN_PARENT
        if not verdict:
            return block.height, verdict
        head = block.this_digest
    return None, None
