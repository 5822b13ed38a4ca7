"""Per-node mining: repeated challenge construction and inversion within one slot."""
import enum
from dataclasses import dataclass, field

from . import corefn, puzzle, tmdto
from .ledger import Block


class Role(str, enum.Enum):
    HONEST = "honest"
    MALICIOUS = "malicious"


class NoTableError(LookupError):
    pass


@dataclass(frozen=True)
class NodeConfig:
    """One elementary node. `budgets` maps difficulty j to (M, t); (0, 0) opts out."""

    id: int
    role: Role = Role.HONEST
    budgets: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "role", Role(self.role))
        budgets = {int(j): (int(m), int(t)) for j, (m, t) in self.budgets.items()}
        for j, (m, t) in budgets.items():
            if m < 0 or t < 0:
                raise ValueError(f"node {self.id}: negative budget for difficulty {j}")
        object.__setattr__(self, "budgets", budgets)

    def participates(self, j):
        m, t = self.budgets.get(j, (0, 0))
        return m > 0 and t > 0

    def table_spec(self, j, params, salt=0):
        m, t = self.budgets[j]
        return tmdto.TableSpec(j=j, ell=params.ell(j), M=m, t=t, mode=params.mode,
                               seed=derive_seed(self.seed, salt, j))

    def build_table(self, j, params, salt=0, kernels=None):
        return tmdto.build_table(self.table_spec(j, params, salt), params.n, kernels=kernels)


def derive_seed(*parts):
    h = 0
    for p in parts:
        h = corefn.mix64(h ^ (p & corefn.MASK64))
    return h


@dataclass(frozen=True)
class MiningOutcome:
    block: Block | None
    attempts_used: int
    ticks_used: int

    @property
    def solved(self):
        return self.block is not None


def attempt_budget(params, t):
    """D = floor(slot / (challenge cost + t))."""
    return params.slot_ticks // (params.challenge_ticks + t)


def mine_round(config, table, parent, txs, params, j, still_relevant=None, salt=0, kernels=None):
    """Up to D attempts at extending `parent` with a block of `txs`.

    Each attempt builds a challenge over the candidate header with a fresh nonce
    seed, then runs one inversion search. An attempt is charged the challenge
    cost plus t ticks even when the search stops early. `still_relevant`, when
    given, is consulted before every attempt with the transaction ids.
    """
    if table is None or table.spec.j != j:
        raise NoTableError(f"node {config.id} holds no table for difficulty {j}")
    if table.spec.ell != params.ell(j) or table.n != params.n or table.spec.mode != params.mode:
        raise ValueError(f"node {config.id}: table for difficulty {j} does not match the system parameters")
    txs = tuple(txs)
    if not txs:
        raise ValueError("a block needs at least one transaction")
    cost = params.challenge_ticks + table.spec.t
    height = parent.height + 1
    header = Block.header_bytes(height, parent.this_digest, config.id, j, txs)
    attempts = 0
    for attempt in range(attempt_budget(params, table.spec.t)):
        if still_relevant is not None and not still_relevant(txs):
            break
        nonce_seed = derive_seed(config.seed, salt, parent.this_digest, attempt)
        ch = puzzle.make_challenge(header, params, j, nonce_seed, kernels=kernels)
        key = tmdto.invert(table, ch.C, kernels=kernels)
        attempts += 1
        if key is not None:
            block = Block.assemble(height, parent.this_digest, txs, config.id, j, ch.nonce, key)
            return MiningOutcome(block, attempts, attempts * cost)
    return MiningOutcome(None, attempts, attempts * cost)
