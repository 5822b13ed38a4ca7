"""Experiment configuration files (JSON)."""
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .node import NodeConfig, Role
from .params import SystemParams
from .sim import SimConfig

_PARAM_KEYS = {"n", "d", "slot_ticks", "challenge_ticks", "mode", "difficulties"}
_NODE_KEYS = {"id", "role", "seed", "budgets"}
_RUN_KEYS = {
    "rounds", "seed", "tx_stream_seed", "difficulty", "trials", "txs_per_block",
    "safety_factor", "honest_strategy", "estimate_node", "mine_node", "out_dir",
}


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class RunSettings:
    rounds: int = 1
    seed: int = 0
    tx_stream_seed: int | None = None
    difficulty: int | None = None
    trials: int = 10000
    txs_per_block: int = 4
    safety_factor: float = 2.0
    honest_strategy: str = "pool-branch"
    estimate_node: int | None = None
    mine_node: int | None = None
    out_dir: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    params: SystemParams
    nodes: tuple
    run: RunSettings = field(default_factory=RunSettings)

    @property
    def difficulty(self):
        if self.run.difficulty is not None:
            return self.run.difficulty
        return min(self.params.difficulties)

    def node(self, node_id):
        if node_id is None:
            return self.nodes[0]
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise ConfigError(f"no node with id {node_id}")

    def with_overrides(self, seed=None, trials=None):
        run = self.run
        if seed is not None:
            run = replace(run, seed=seed, tx_stream_seed=seed)
        if trials is not None:
            run = replace(run, trials=trials)
        return replace(self, run=run)

    def sim_config(self):
        run = self.run
        return SimConfig(
            params=self.params,
            nodes=self.nodes,
            rounds=run.rounds,
            j=self.difficulty,
            seed=run.seed,
            tx_stream_seed=run.seed if run.tx_stream_seed is None else run.tx_stream_seed,
            txs_per_block=run.txs_per_block,
            honest_strategy=run.honest_strategy,
        )


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(str(key)), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _check_keys(obj, allowed, where, text):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object", _line_of(text, where))
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key {extra[0]!r} in {where}", _line_of(text, extra[0]))


def _budgets(raw, text):
    out = {}
    for j, b in raw.items():
        if isinstance(b, dict):
            if set(b) != {"M", "t"}:
                raise ConfigError(f"budget for difficulty {j} needs exactly M and t", _line_of(text, j))
            out[int(j)] = (b["M"], b["t"])
        else:
            m, t = b
            out[int(j)] = (m, t)
    return out


def parse_config(text):
    """Parse and validate a config document; every failure is a ConfigError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(e.msg, e.lineno) from None
    _check_keys(doc, {"params", "nodes", "run"}, "config", text)
    for key in ("params", "nodes"):
        if key not in doc:
            raise ConfigError(f"missing section {key!r}")
    p = doc["params"]
    _check_keys(p, _PARAM_KEYS, "params", text)
    try:
        params = SystemParams(**p)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"params: {e}", _line_of(text, "params")) from None
    if not params.difficulties:
        raise ConfigError("params.difficulties is empty", _line_of(text, "difficulties"))
    if not isinstance(doc["nodes"], list) or not doc["nodes"]:
        raise ConfigError("nodes must be a non-empty list", _line_of(text, "nodes"))
    nodes = []
    for i, raw in enumerate(doc["nodes"]):
        _check_keys(raw, _NODE_KEYS, "nodes", text)
        try:
            node = NodeConfig(id=raw["id"], role=Role(raw.get("role", "honest")),
                              budgets=_budgets(raw.get("budgets", {}), text), seed=raw.get("seed", 0))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"node #{i}: {e}", _line_of(text, "nodes")) from None
        for j, (m, t) in node.budgets.items():
            if j not in params.difficulties:
                raise ConfigError(f"node {node.id}: unknown difficulty {j}", _line_of(text, "budgets"))
            if m > 0 and t == 0:
                raise ConfigError(f"node {node.id}: M={m} rows need a positive t", _line_of(text, "budgets"))
            space = params.ell(j) if params.constrained else params.n
            if m > (1 << space):
                raise ConfigError(f"node {node.id}: M={m} exceeds the 2^{space} start space", _line_of(text, "budgets"))
        nodes.append(node)
    r = doc.get("run", {})
    _check_keys(r, _RUN_KEYS, "run", text)
    try:
        run = RunSettings(**r)
    except TypeError as e:
        raise ConfigError(f"run: {e}", _line_of(text, "run")) from None
    cfg = ExperimentConfig(params, tuple(nodes), run)
    if cfg.difficulty not in params.difficulties:
        raise ConfigError(f"run.difficulty {cfg.difficulty} is not a configured difficulty", _line_of(text, "difficulty"))
    try:
        cfg.sim_config()
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def load_config(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    return parse_config(text)
