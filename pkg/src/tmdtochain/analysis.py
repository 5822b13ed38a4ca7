"""Closed-form predictors for success probability, the pool security condition,
and complexity accounting, with the empirical and exact counterparts they are
checked against.
"""
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import sympy as sp

from . import tmdto
from .node import attempt_budget
from .tmdto import Mode


@dataclass(frozen=True)
class Lemma1Prediction:
    D: int
    M: int
    t: int
    N: int
    P: Fraction
    clamped: bool = False

    @property
    def probability(self):
        return float(self.P)


def predict_success(D, M, t, mode, n, ell):
    """P = D*M*t/N with N = 2^ell unconstrained and 2^n constrained, clamped at 1."""
    for name, v in (("D", D), ("M", M), ("t", t), ("n", n), ("ell", ell)):
        if v <= 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if ell > n or n > 64:
        raise ValueError(f"need ell <= n <= 64, got ell={ell}, n={n}")
    N = 1 << (n if Mode(mode) is Mode.CONSTRAINED else ell)
    raw = Fraction(D * M * t, N)
    return Lemma1Prediction(D, M, t, N, min(raw, Fraction(1)), raw > 1)


def coverage_reference(M, t, N):
    """Collision-corrected coverage 1 - exp(-M t / N); reference curve only."""
    return -math.expm1(-M * t / N)


def _pool(budgets, name):
    budgets = [(m, t) for m, t in budgets]
    if not budgets:
        raise ValueError(f"{name} pool is empty")
    if any(t <= 0 for _, t in budgets):
        raise ValueError(f"{name} pool has a nonpositive t")
    return budgets


def pool_expected_blocks(budgets, params, j, bound="lower"):
    """floor(slot/(delta + t_bound)) * sum(M_i t_i) / N.

    bound="lower" uses the pool's largest t (honest guarantee), "upper" its
    smallest t (adversary ceiling).
    """
    budgets = _pool(budgets, "given")
    ts = [t for _, t in budgets]
    t_bound = {"lower": max(ts), "upper": min(ts)}[bound]
    work = sum(m * t for m, t in budgets)
    return attempt_budget(params, t_bound) * work / params.solution_space(j)


@dataclass(frozen=True)
class SecurityConditionReport:
    lhs: int
    rhs: int
    margin: float
    holds: bool
    factor: float = 2.0


def security_condition(honest, malicious, params, j, factor=2.0):
    """Compare floor(slot/(delta+t_max,H)) * sum_H M t against
    floor(slot/(delta+t_min,M)) * sum_M M t; holds when the ratio exceeds `factor`."""
    honest = _pool(honest, "honest")
    malicious = _pool(malicious, "malicious")
    lhs = attempt_budget(params, max(t for _, t in honest)) * sum(m * t for m, t in honest)
    rhs = attempt_budget(params, min(t for _, t in malicious)) * sum(m * t for m, t in malicious)
    margin = lhs / rhs if rhs else math.inf
    return SecurityConditionReport(lhs, rhs, margin, margin > factor, factor)


def wilson_interval(hits, trials, alpha=0.05):
    from statsmodels.stats.proportion import proportion_confint

    low, high = proportion_confint(hits, trials, alpha=alpha, method="wilson")
    return float(low), float(high)


@dataclass
class SuccessEstimate:
    hits: int
    trials: int
    low: float
    high: float
    outcomes: list = field(default_factory=list, repr=False)

    @property
    def probability(self):
        return self.hits / self.trials if self.trials else 0.0

    def contains(self, p):
        return self.low <= p <= self.high


def empirical_success(table, trials, seed=0, exhaustive=False, keep_outcomes=False, kernels=None):
    """Fraction of uniformly drawn challenges the table inverts, with a Wilson 95% interval.

    exhaustive=True sweeps every ell-bit challenge once instead of sampling.
    Every returned key is re-verified; a bad key raises AssertionError.
    """
    ell, n = table.spec.ell, table.n
    if exhaustive:
        challenges = range(1 << ell)
    else:
        if trials < 1:
            raise ValueError("trials must be at least 1")
        rng = random.Random(seed)
        challenges = [rng.getrandbits(ell) for _ in range(trials)]
    hits = 0
    outcomes = []
    for c in challenges:
        key = tmdto.invert(table, c, kernels=kernels)
        if key is not None:
            if not tmdto.is_valid_key(key, c, n, ell, table.spec.constrained):
                raise AssertionError(f"inversion returned an invalid key {key:#x} for {c:#x}")
            hits += 1
        if keep_outcomes:
            outcomes.append((c, key))
    total = len(challenges)
    low, high = wilson_interval(hits, total)
    return SuccessEstimate(hits, total, low, high, outcomes)


def lemma1_report(table, trials, seed=0, D=1, kernels=None):
    """Prediction under both N choices, the exact covered fraction, and a sampled estimate."""
    spec, n = table.spec, table.n
    work = D * len(table) * spec.t
    by_ell = Fraction(work, 1 << spec.ell)
    by_n = Fraction(work, 1 << n)
    try:
        oracle = len(tmdto.covered_set(table, kernels=kernels)) / (1 << spec.ell)
    except ValueError:
        oracle = None
    est = empirical_success(table, trials, seed, keep_outcomes=True, kernels=kernels)
    report = {
        "mode": spec.mode.value,
        "n": n,
        "ell": spec.ell,
        "M": len(table),
        "t": spec.t,
        "D": D,
        "predicted": {
            "N=2^ell": float(min(by_ell, 1)),
            "N=2^n": float(min(by_n, 1)),
            "mode_choice": "N=2^n" if spec.constrained else "N=2^ell",
            "clamped": bool(by_ell > 1),
        },
        "reference_coverage": coverage_reference(len(table), spec.t, 1 << spec.ell),
        "oracle": oracle,
        "empirical": est.probability,
        "interval": [est.low, est.high],
        "hits": est.hits,
        "trials": est.trials,
    }
    if oracle is not None:
        report["closer"] = min(("N=2^ell", "N=2^n"), key=lambda k: abs(report["predicted"][k] - oracle))
        report["oracle_in_interval"] = est.contains(oracle)
    return report, est


N_SYM, P_SYM = sp.symbols("N P", positive=True)


@dataclass(frozen=True)
class ComplexityReport:
    rows: dict
    time_reduction_vs_pow: object
    space_reduction_vs_pos: object

    def as_dict(self):
        return {
            "rows": {name: {"time": str(r[0]), "space": str(r[1])} for name, r in self.rows.items()},
            "time_reduction_vs_pow": str(self.time_reduction_vs_pow),
            "space_reduction_vs_pos": str(self.space_reduction_vs_pos),
        }


def comparison_table(M, N=None, P=None):
    """Time/space orders of PoW, PoS and table-based inversion at equal success P.

    N and P stay symbolic unless given. The proposed scheme spends time N P / M
    and space M, so it saves a factor M of time against PoW and a factor N P / M
    of space against PoS.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    N = N_SYM if N is None else sp.nsimplify(N)
    P = P_SYM if P is None else sp.nsimplify(P)
    M = sp.Integer(M)
    rows = {
        "PoW": (N * P, sp.Integer(1)),
        "PoS": (sp.Integer(1), N * P),
        "proposed": (N * P / M, M),
    }
    return ComplexityReport(
        rows,
        sp.simplify(rows["PoW"][0] / rows["proposed"][0]),
        sp.simplify(rows["PoS"][1] / rows["proposed"][1]),
    )


def node_complexity(M, t, params):
    """Per-node orders: precomputation M t steps and M rows, per-slot D t steps."""
    d = attempt_budget(params, t)
    return {"preprocessing_time": M * t, "space": M, "processing_time": d * t, "attempts": d}


def system_complexity(nodes, params):
    """Totals over elementary nodes: per-slot time for each difficulty, rows summed over all."""
    time_by_j = {}
    space = 0
    pre = 0
    for node in nodes:
        for j, (m, t) in node.budgets.items():
            if m <= 0 or t <= 0:
                continue
            c = node_complexity(m, t, params)
            time_by_j[j] = time_by_j.get(j, 0) + c["processing_time"]
            space += m
            pre += c["preprocessing_time"]
    return {"processing_time": time_by_j, "space": space, "preprocessing_time": pre}
