"""Round-synchronous simulation of an honest and a malicious pool.

Each round is one slot. By default each pool extends its own branch, both
forking from genesis, so the canonical chain is whichever pool's branch is
longer. With honest_strategy="longest-chain" honest nodes instead extend the
canonical tip. Every solved block is published at the end of the round, in
node-id order.
"""
import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import analysis
from .ledger import Ledger
from .node import NodeConfig, Role, derive_seed, mine_round


@dataclass(frozen=True)
class SimConfig:
    params: object
    nodes: tuple
    rounds: int
    j: int = 0
    seed: int = 0
    tx_stream_seed: int = 0
    txs_per_block: int = 4
    honest_strategy: str = "pool-branch"

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(n if isinstance(n, NodeConfig) else NodeConfig(**n) for n in self.nodes))
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not any(n.role is Role.HONEST for n in self.nodes):
            raise ValueError("at least one honest node is required")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        if self.honest_strategy not in ("pool-branch", "longest-chain"):
            raise ValueError(f"unknown honest strategy {self.honest_strategy!r}")
        if self.txs_per_block < 1:
            raise ValueError("txs_per_block must be at least 1")
        self.params.ell(self.j)

    def pool(self, role):
        return [n for n in self.nodes if n.role is role]

    def budgets(self, role):
        return [n.budgets[self.j] for n in self.pool(role) if n.participates(self.j)]


@dataclass(frozen=True)
class NodeRound:
    node: int
    role: Role
    attempts: int
    solved: bool
    ticks: int


@dataclass(frozen=True)
class RoundRecord:
    round: int
    outcomes: tuple
    honest_blocks: int
    malicious_blocks: int
    canonical_tip_pool: str


@dataclass
class SimResult:
    config: SimConfig
    records: list
    ledger: Ledger
    tables: dict = field(repr=False, default_factory=dict)

    def totals(self):
        return {
            "honest_blocks": sum(r.honest_blocks for r in self.records),
            "malicious_blocks": sum(r.malicious_blocks for r in self.records),
        }

    def tip_pool(self):
        return self.records[-1].canonical_tip_pool

    def rounds_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["round", "node", "role", "attempts", "solved", "ticks"])
        for rec in self.records:
            for o in rec.outcomes:
                w.writerow([rec.round, o.node, o.role.value, o.attempts, int(o.solved), o.ticks])
        return buf.getvalue()

    def summary(self, factor=2.0):
        cfg = self.config
        params, j = cfg.params, cfg.j
        chain = self.ledger.canonical_chain()
        roles = {n.id: n.role for n in cfg.nodes}
        canon = {"honest": 0, "malicious": 0}
        for b in chain[1:]:
            canon[roles[b.miner].value] += 1
        attempts = {"honest": 0, "malicious": 0}
        for rec in self.records:
            for o in rec.outcomes:
                attempts[o.role.value] += o.attempts
        totals = self.totals()
        pools = {}
        for role, bound in ((Role.HONEST, "lower"), (Role.MALICIOUS, "upper")):
            budgets = cfg.budgets(role)
            predicted = analysis.pool_expected_blocks(budgets, params, j, bound) if budgets else 0.0
            pools[role.value] = {
                "nodes": len(cfg.pool(role)),
                "accepted_blocks": totals[f"{role.value}_blocks"],
                "canonical_blocks": canon[role.value],
                "attempts": attempts[role.value],
                "predicted_blocks_per_round": predicted,
                "predicted_blocks": predicted * cfg.rounds,
                "predicted_blocks_per_round_N_2^ell": predicted * params.solution_space(j) / (1 << params.ell(j)),
                "empirical_blocks_per_round": totals[f"{role.value}_blocks"] / cfg.rounds,
            }
        honest, malicious = cfg.budgets(Role.HONEST), cfg.budgets(Role.MALICIOUS)
        if honest and malicious:
            cond = analysis.security_condition(honest, malicious, params, j, factor)
            theorem1 = {"lhs": cond.lhs, "rhs": cond.rhs, "margin": cond.margin, "holds": cond.holds, "factor": factor}
        else:
            theorem1 = None
        return {
            "rounds": cfg.rounds,
            "difficulty": j,
            "seed": cfg.seed,
            "canonical_height": chain[-1].height,
            "canonical_tip": f"{chain[-1].this_digest:016x}",
            "canonical_tip_pool": self.tip_pool(),
            "pools": pools,
            "theorem1": theorem1,
        }


def tx_batch(cfg, rnd, node_id):
    return tuple(derive_seed(cfg.tx_stream_seed, rnd, node_id, k) for k in range(cfg.txs_per_block))


def build_tables(cfg, kernels=None):
    return {
        n.id: n.build_table(cfg.j, cfg.params, salt=cfg.seed, kernels=kernels)
        for n in cfg.nodes
        if n.participates(cfg.j)
    }


def run_simulation(cfg, tables=None, workers=None, kernels=None):
    """Run cfg.rounds slots. Deterministic given the seeds, whatever `workers` is."""
    if tables is None:
        tables = build_tables(cfg, kernels)
    for n in cfg.nodes:
        if n.participates(cfg.j) and n.id not in tables:
            raise ValueError(f"node {n.id} has a budget for difficulty {cfg.j} but no table")
    params, j = cfg.params, cfg.j
    ledger = Ledger(params)
    branch_tip = {Role.HONEST: ledger.genesis, Role.MALICIOUS: ledger.genesis}
    nodes = sorted(cfg.nodes, key=lambda n: n.id)
    miners = [n for n in nodes if n.participates(j)]
    roles = {n.id: n.role for n in nodes}
    records = []
    pool = ThreadPoolExecutor(workers) if workers and workers > 1 else None
    try:
        for rnd in range(cfg.rounds):
            parents = dict(branch_tip)
            if cfg.honest_strategy == "longest-chain":
                parents[Role.HONEST] = ledger.tip()

            def work(n, rnd=rnd, parents=parents):
                parent = parents[n.role]
                return mine_round(n, tables[n.id], parent, tx_batch(cfg, rnd, n.id), params, j,
                                  salt=cfg.seed, kernels=kernels)

            outcomes = list(pool.map(work, miners)) if pool else [work(n) for n in miners]
            counts = {Role.HONEST: 0, Role.MALICIOUS: 0}
            summaries = []
            fresh = {Role.HONEST: [], Role.MALICIOUS: []}
            done = {n.id: o for n, o in zip(miners, outcomes)}
            for n in nodes:
                o = done.get(n.id)
                if o is None:
                    summaries.append(NodeRound(n.id, n.role, 0, False, 0))
                    continue
                summaries.append(NodeRound(n.id, n.role, o.attempts_used, o.solved, o.ticks_used))
                if o.solved and ledger.append_block(o.block):
                    counts[n.role] += 1
                    fresh[n.role].append(o.block)
            for role, blocks in fresh.items():
                if blocks:
                    branch_tip[role] = min(blocks, key=lambda b: b.this_digest)
            tip = ledger.tip()
            records.append(RoundRecord(
                rnd, tuple(summaries), counts[Role.HONEST], counts[Role.MALICIOUS],
                roles[tip.miner].value if tip.height else "none",
            ))
    finally:
        if pool:
            pool.shutdown()
    return SimResult(cfg, records, ledger, tables)


def summary_json(result, factor=2.0):
    return json.dumps(result.summary(factor), indent=2, sort_keys=True) + "\n"
