"""Small-parameter fixtures shared across test modules."""
from tmdtochain import puzzle, tmdto
from tmdtochain.ledger import Block
from tmdtochain.params import SystemParams

PARAMS = SystemParams(n=16, difficulties={0: 8}, d=2, slot_ticks=200, challenge_ticks=4, mode="constrained")
TABLE = tmdto.build_table(tmdto.TableSpec(j=0, ell=8, M=4, t=8, mode="constrained", seed=3), 16)


def mine_block(parent, txs, miner=0, params=PARAMS, table=TABLE, seed=0):
    """Brute-force a valid child of `parent` by scanning nonce seeds."""
    header = Block.header_bytes(parent.height + 1, parent.this_digest, miner, 0, tuple(txs))
    for s in range(seed, seed + 100_000):
        ch = puzzle.make_challenge(header, params, 0, s * 1_000_003)
        key = tmdto.invert(table, ch.C)
        if key is not None:
            return Block.assemble(parent.height + 1, parent.this_digest, txs, miner, 0, ch.nonce, key)
    raise AssertionError("no block found")


def extend(ledger, parent, length, tx_base, miner=0):
    """Append `length` blocks on top of `parent`; returns the new blocks."""
    out = []
    for i in range(length):
        b = mine_block(parent, (tx_base + i,), miner=miner)
        assert ledger.append_block(b)
        out.append(b)
        parent = b
    return out
