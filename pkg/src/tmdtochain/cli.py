"""Command line: build tables, mine, simulate, estimate, verify, report.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import analysis, ledger
from ._backend import BACKEND
from .config import ConfigError, load_config
from .node import Role, mine_round
from .sim import run_simulation, summary_json, tx_batch

EXIT_OK, EXIT_INVALID, EXIT_CONFIG = 0, 1, 2


def write_atomic(path, data):
    """Write via a temp file in the same directory, then rename over `path`."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def _dump(doc):
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _out_dir(args, cfg=None):
    if args.out:
        return Path(args.out)
    if os.environ.get("TMDTO_OUT_DIR"):
        return Path(os.environ["TMDTO_OUT_DIR"])
    if cfg is not None and cfg.run.out_dir:
        return Path(cfg.run.out_dir)
    return Path("out")


def _load(args):
    if not args.config:
        raise ConfigError("--config is required")
    return load_config(args.config).with_overrides(seed=args.seed, trials=args.trials)


def cmd_tables_build(args):
    cfg = _load(args)
    out = _out_dir(args, cfg)
    written = []
    for node in cfg.nodes:
        for j in sorted(node.budgets):
            if not node.participates(j):
                continue
            table = node.build_table(j, cfg.params, salt=cfg.run.seed)
            written.append(write_atomic(out / f"node{node.id}_j{j}.tmt", table.to_bytes()))
    for p in written:
        print(p)
    return EXIT_OK


def cmd_simulate(args):
    cfg = _load(args)
    out = _out_dir(args, cfg)
    result = run_simulation(cfg.sim_config())
    write_atomic(out / "rounds.csv", result.rounds_csv())
    write_atomic(out / "summary.json", summary_json(result, cfg.run.safety_factor))
    write_atomic(out / "chain.jsonl", "".join(line + "\n" for line in result.ledger.export_lines()))
    summary = result.summary(cfg.run.safety_factor)
    print(f"height {summary['canonical_height']}, tip owned by {summary['canonical_tip_pool']}, "
          f"honest blocks {summary['pools']['honest']['accepted_blocks']}, "
          f"malicious blocks {summary['pools']['malicious']['accepted_blocks']}")
    return EXIT_OK


def estimate_report(cfg):
    """The estimate document plus the raw per-trial outcomes as CSV text."""
    j = cfg.difficulty
    node = cfg.node(cfg.run.estimate_node)
    if not node.participates(j):
        raise ConfigError(f"node {node.id} has no budget for difficulty {j}")
    table = node.build_table(j, cfg.params, salt=cfg.run.seed)
    lemma1, est = analysis.lemma1_report(table, cfg.run.trials, seed=cfg.run.seed)
    m, t = node.budgets[j]
    honest = [n.budgets[j] for n in cfg.nodes if n.role is Role.HONEST and n.participates(j)]
    malicious = [n.budgets[j] for n in cfg.nodes if n.role is Role.MALICIOUS and n.participates(j)]
    if honest and malicious:
        c = analysis.security_condition(honest, malicious, cfg.params, j, cfg.run.safety_factor)
        theorem1 = {"lhs": c.lhs, "rhs": c.rhs, "margin": c.margin, "holds": c.holds, "factor": c.factor}
    else:
        theorem1 = None
    complexity = {
        "node": analysis.node_complexity(m, t, cfg.params),
        "system": {k: v for k, v in analysis.system_complexity(cfg.nodes, cfg.params).items()},
        "comparison": analysis.comparison_table(m).as_dict(),
    }
    complexity["system"]["processing_time"] = {str(k): v for k, v in complexity["system"]["processing_time"].items()}
    doc = {"node": node.id, "difficulty": j, "seed": cfg.run.seed, "lemma1": lemma1,
           "theorem1": theorem1, "complexity": complexity}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "challenge", "hit", "key"])
    for i, (c, key) in enumerate(est.outcomes):
        w.writerow([i, f"{c:x}", int(key is not None), "" if key is None else f"{key:x}"])
    return doc, buf.getvalue()


def cmd_estimate(args):
    cfg = _load(args)
    out = _out_dir(args, cfg)
    doc, trials = estimate_report(cfg)
    write_atomic(out / "estimate.json", _dump(doc))
    write_atomic(out / "trials.csv", trials)
    l1 = doc["lemma1"]
    print(f"oracle {l1['oracle']}, empirical {l1['empirical']:.6f} "
          f"[{l1['interval'][0]:.6f}, {l1['interval'][1]:.6f}], predicted {l1['predicted']}")
    return EXIT_OK


def cmd_mine(args):
    cfg = _load(args)
    j = cfg.difficulty
    node = cfg.node(cfg.run.mine_node)
    if not node.participates(j):
        raise ConfigError(f"node {node.id} has no budget for difficulty {j}")
    table = node.build_table(j, cfg.params, salt=cfg.run.seed)
    txs = tx_batch(cfg.sim_config(), 0, node.id)
    outcome = mine_round(node, table, ledger.genesis_block(), txs, cfg.params, j, salt=cfg.run.seed)
    if outcome.solved:
        doc = {"result": "solved", "block": outcome.block.to_record()}
    else:
        doc = {"result": "exhausted"}
    doc.update(attempts=outcome.attempts_used, ticks=outcome.ticks_used)
    print(json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_verify(args):
    cfg = _load(args)
    try:
        lines = Path(args.chain).read_text().splitlines()
        blocks = ledger.read_chain(lines)
    except OSError as e:
        raise ConfigError(f"cannot read {args.chain}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        print(f"malformed chain file: {e}", file=sys.stderr)
        return EXIT_INVALID
    height, verdict = ledger.verify_chain(blocks, cfg.params)
    if verdict is not None:
        print(f"block at height {height} rejected: {verdict.value}", file=sys.stderr)
        return EXIT_INVALID
    print(f"{len(blocks)} blocks verified")
    return EXIT_OK


def _flatten(doc, prefix=""):
    if isinstance(doc, dict):
        for k in sorted(doc):
            yield from _flatten(doc[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(doc, list):
        for i, v in enumerate(doc):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, doc


def cmd_report(args):
    try:
        doc = json.loads(Path(args.report).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {args.report}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{args.report}: {e.msg}", e.lineno) from None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(doc):
        w.writerow([k, "" if v is None else v])
    out = _out_dir(args)
    path = write_atomic(out / (Path(args.report).stem + ".csv"), buf.getvalue())
    print(path)
    return EXIT_OK


def _u64(text):
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit value")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--out", help="output directory (default: $TMDTO_OUT_DIR, run.out_dir, ./out)")
    common.add_argument("--seed", type=_u64, help="override the run seed")
    common.add_argument("--trials", type=int, help="override the estimate trial count")

    parser = argparse.ArgumentParser(prog="tmdtochain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    tables = sub.add_parser("tables", help="table files")
    tsub = tables.add_subparsers(dest="action", required=True)
    tsub.add_parser("build", parents=[common], help="one .tmt per node and difficulty").set_defaults(func=cmd_tables_build)

    sub.add_parser("simulate", parents=[common], help="multi-round pool simulation").set_defaults(func=cmd_simulate)
    sub.add_parser("estimate", parents=[common], help="success probability and security report").set_defaults(func=cmd_estimate)
    sub.add_parser("mine", parents=[common], help="one node, one round on genesis").set_defaults(func=cmd_mine)

    verify = sub.add_parser("verify", parents=[common], help="re-check an exported chain")
    verify.add_argument("chain", help="chain file (one JSON record per line)")
    verify.set_defaults(func=cmd_verify)

    report = sub.add_parser("report", parents=[common], help="flatten a JSON report to CSV")
    report.add_argument("report", help="JSON report to re-render")
    report.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
