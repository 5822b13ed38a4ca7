import pytest

from helpers import PARAMS, TABLE
from tmdtochain import node as nd
from tmdtochain import puzzle, tmdto
from tmdtochain.ledger import Block, Ledger, genesis_block
from tmdtochain.node import NodeConfig, Role, mine_round
from tmdtochain.params import SystemParams


def empty_table(t, ell=8, n=16):
    return tmdto.build_table(tmdto.TableSpec(j=0, ell=ell, M=0, t=t, mode="constrained"), n)


def test_node_config_validation():
    cfg = NodeConfig(id=1, role="malicious", budgets={"0": [4, 8]})
    assert cfg.role is Role.MALICIOUS and cfg.budgets == {0: (4, 8)}
    assert cfg.participates(0) and not cfg.participates(1)
    assert not NodeConfig(id=2, budgets={0: (0, 0)}).participates(0)
    with pytest.raises(ValueError):
        NodeConfig(id=3, budgets={0: (-1, 4)})


@pytest.mark.parametrize("slot,cost,t,expected", [(1000, 10, 90, 10), (99, 10, 90, 0), (100, 0, 7, 14)])
def test_attempt_budget(slot, cost, t, expected):
    p = SystemParams(n=16, difficulties={0: 8}, slot_ticks=slot, challenge_ticks=cost)
    outcome = mine_round(NodeConfig(id=0), empty_table(t), genesis_block(), (1,), p, 0)
    assert not outcome.solved
    assert outcome.attempts_used == expected
    assert outcome.ticks_used == expected * (cost + t) <= slot


def test_engineered_first_attempt_solves():
    covered = tmdto.covered_set(TABLE)
    g = genesis_block()
    header = Block.header_bytes(1, g.this_digest, 0, 0, (9,))
    for seed in range(1000):
        ch = puzzle.make_challenge(header, PARAMS, 0, nd.derive_seed(seed, 0, g.this_digest, 0))
        if ch.C in covered:
            break
    else:
        raise AssertionError("no seed lands in the covered set")
    outcome = mine_round(NodeConfig(id=0, seed=seed), TABLE, g, (9,), PARAMS, 0)
    assert outcome.solved and outcome.attempts_used == 1
    assert outcome.ticks_used == PARAMS.challenge_ticks + TABLE.spec.t
    assert Ledger(PARAMS).append_block(outcome.block)


def test_solved_blocks_always_accepted():
    solved = 0
    for seed in range(40):
        cfg = NodeConfig(id=seed % 3, seed=seed)
        chain = Ledger(PARAMS)
        out = mine_round(cfg, TABLE, chain.genesis, (seed, seed + 1), PARAMS, 0)
        if out.solved:
            solved += 1
            assert chain.append_block(out.block)
            assert out.block.miner == cfg.id
    assert solved > 10


def test_attempts_are_distinct_challenges(monkeypatch):
    seen = []
    real = puzzle.make_challenge

    def spy(*args, **kw):
        ch = real(*args, **kw)
        seen.append(ch.nonce)
        return ch

    monkeypatch.setattr(puzzle, "make_challenge", spy)
    out = mine_round(NodeConfig(id=0, seed=5), empty_table(8), genesis_block(), (1,), PARAMS, 0)
    assert out.attempts_used == len(seen) == len(set(seen)) == PARAMS.slot_ticks // (PARAMS.challenge_ticks + 8)


def test_errors():
    g = genesis_block()
    with pytest.raises(nd.NoTableError):
        mine_round(NodeConfig(id=0), None, g, (1,), PARAMS, 0)
    with pytest.raises(ValueError):
        mine_round(NodeConfig(id=0), TABLE, g, (), PARAMS, 0)
    other = tmdto.build_table(tmdto.TableSpec(j=0, ell=6, M=2, t=2, mode="constrained"), 16)
    with pytest.raises(ValueError):
        mine_round(NodeConfig(id=0), other, g, (1,), PARAMS, 0)


def test_relevance_check_stops_attempts():
    calls = []

    def relevant(txs):
        calls.append(txs)
        return len(calls) <= 2

    out = mine_round(NodeConfig(id=0), empty_table(8), genesis_block(), (1, 2), PARAMS, 0, still_relevant=relevant)
    assert out.attempts_used == 2
    assert calls[0] == (1, 2)


def test_node_builds_its_table():
    cfg = NodeConfig(id=4, budgets={0: (4, 8)}, seed=77)
    a = cfg.build_table(0, PARAMS, salt=1)
    assert a == cfg.build_table(0, PARAMS, salt=1)
    assert a != cfg.build_table(0, PARAMS, salt=2)
    assert a.spec.ell == 8 and len(a) == 4
