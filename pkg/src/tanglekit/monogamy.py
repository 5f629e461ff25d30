"""Monogamy identities and inequalities for the focus qubit of a pure state.

All quantities are evaluated on the state relabeled so that the focus is
qubit 1; reports list partners under their original labels. Three-tangles
of three-qubit marginals (N > 3) come from :mod:`tanglekit.convexroof` and
are upper bounds, so every verdict that uses them is flagged conservative
and can pass or be inconclusive, never be a violation.

Verdict kinds:

- ``identity``: pass iff ``|lhs - rhs| <= tol``.
- ``inequality``: pass iff ``lhs - rhs >= -tol``.
- ``report``: value only, ``passed`` is None.
- ``criterion``: ``passed`` carries the witness flag; never a violation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .convexroof import ConvexRoofConfig, ConvexRoofResult, three_tangle_mixed
from .invariants import (
    PairInvariants,
    focus_first,
    n4_relation_rhs,
    one_tangle,
    pair_invariants,
    three_tangle_pure,
)
from .qstate import PureState, StateError, derive_seed, marginal

CRITERION_THRESHOLD = 1e-9
CHECKS = ("ckw", "ov", "n4sum", "n8sum", "residual3", "criterion", "all")


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-8
    inequality: float = 1e-9
    roof: float = 1e-6
    consistency: float = 1e-7

    def __post_init__(self):
        for name in ("identity", "inequality", "roof", "consistency"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be > 0")


@dataclass(frozen=True)
class ConstraintVerdict:
    id: str
    lhs: float
    rhs: float
    residual: float
    passed: bool | None
    conservative: bool
    kind: str  # identity | inequality | report | criterion
    status: str  # pass | violation | inconclusive | reported
    tolerance: float | None = None

    @property
    def hard_violation(self):
        return self.status == "violation"

    def to_json(self):
        return {
            "id": self.id,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "pass": self.passed,
            "conservative": self.conservative,
            "kind": self.kind,
            "status": self.status,
            "tolerance": self.tolerance,
        }


def _identity(vid, lhs, rhs, tol, conservative=False):
    lhs, rhs = float(lhs), float(rhs)
    residual = lhs - rhs
    ok = abs(residual) <= tol
    status = "pass" if ok else ("inconclusive" if conservative else "violation")
    return ConstraintVerdict(vid, lhs, rhs, residual, ok, conservative, "identity", status, tol)


def _inequality(vid, lhs, rhs, tol, conservative=False):
    lhs, rhs = float(lhs), float(rhs)
    residual = lhs - rhs
    ok = residual >= -tol
    status = "pass" if ok else ("inconclusive" if conservative else "violation")
    return ConstraintVerdict(vid, lhs, rhs, residual, ok, conservative, "inequality", status, tol)


def _report(vid, lhs, rhs, conservative=False):
    lhs, rhs = float(lhs), float(rhs)
    return ConstraintVerdict(vid, lhs, rhs, lhs - rhs, None, conservative, "report", "reported")


@dataclass(frozen=True)
class PairEntry:
    j: int
    invariants: PairInvariants


@dataclass(frozen=True)
class TripleEntry:
    j: int
    k: int
    three_tangle: float
    conservative: bool
    roof: ConvexRoofResult | None = None


@dataclass(frozen=True)
class SumRuleReport:
    sum_n4: float
    x_sum: float
    delta_1j: dict | None = None  # partner label -> delta
    Delta_1j: dict | None = None  # partner label -> delta + active chi


@dataclass(frozen=True)
class CriterionResult:
    flags: dict  # partner label -> bool
    witnessed: bool
    threshold: float


@dataclass(frozen=True)
class TangleReport:
    n_qubits: int
    focus: int
    state_meta: dict
    one_tangle: float
    pairs: tuple
    triples: tuple
    sums: SumRuleReport
    criterion: CriterionResult
    verdicts: tuple = field(default_factory=tuple)

    @property
    def hard_violations(self):
        return [v for v in self.verdicts if v.hard_violation]

    def to_json(self):
        return {
            "state_meta": dict(self.state_meta),
            "n_qubits": self.n_qubits,
            "focus": self.focus,
            "one_tangle": self.one_tangle,
            "pairs": [
                {
                    "j": p.j,
                    "n4": p.invariants.n4,
                    "n8": p.invariants.n8,
                    "n12": p.invariants.n12,
                    "n16": p.invariants.n16,
                    "chi_active": p.invariants.active_chi,
                    "two_tangle": p.invariants.two_tangle,
                }
                for p in self.pairs
            ],
            "triples": [
                {
                    "j": t.j,
                    "k": t.k,
                    "three_tangle": t.three_tangle,
                    "conservative": t.conservative,
                    "roof": None
                    if t.roof is None
                    else {
                        "restarts_used": t.roof.restarts_used,
                        "iterations": t.roof.iterations,
                        "converged": t.roof.converged,
                        "ensemble_size": t.roof.ensemble_size,
                        "eigen_value": t.roof.eigen_value,
                    },
                }
                for t in self.triples
            ],
            "sums": {
                "sum_n4": self.sums.sum_n4,
                "x_sum": self.sums.x_sum,
                "delta_1j": {str(j): v for j, v in (self.sums.delta_1j or {}).items()},
                "Delta_1j": {str(j): v for j, v in (self.sums.Delta_1j or {}).items()},
            },
            "criterion": {
                "flags": {str(j): v for j, v in self.criterion.flags.items()},
                "witnessed": self.criterion.witnessed,
                "threshold": self.criterion.threshold,
            },
            "verdicts": [v.to_json() for v in self.verdicts],
        }


_NUM = {"type": "number"}
REPORT_SCHEMA = {
    "type": "object",
    "required": ["state_meta", "focus", "one_tangle", "pairs", "triples", "verdicts"],
    "properties": {
        "state_meta": {"type": "object", "additionalProperties": {"type": "string"}},
        "focus": {"type": "integer", "minimum": 1},
        "one_tangle": _NUM,
        "pairs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["j", "n4", "n8", "n12", "n16", "chi_active", "two_tangle"],
                "properties": {"j": {"type": "integer"}, **{k: _NUM for k in ("n4", "n8", "n12", "n16", "chi_active", "two_tangle")}},
            },
        },
        "triples": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["j", "k", "three_tangle", "conservative"],
                "properties": {
                    "j": {"type": "integer"},
                    "k": {"type": "integer"},
                    "three_tangle": _NUM,
                    "conservative": {"type": "boolean"},
                },
            },
        },
        "verdicts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "lhs", "rhs", "residual", "pass", "conservative"],
                "properties": {
                    "id": {"type": "string"},
                    "lhs": _NUM,
                    "rhs": _NUM,
                    "residual": _NUM,
                    "pass": {"type": ["boolean", "null"]},
                    "conservative": {"type": "boolean"},
                },
            },
        },
    },
}


class FocusAnalysis:
    """Lazily computed tangles of a pure state seen from one focus qubit.

    Internally the state is relabeled so the focus is qubit 1 and partner
    ``p`` (new position) has original label ``labels[p - 1]``. Roof seeds
    depend on the relabeled positions, so the analysis of ``state`` with
    focus ``f`` and of the relabeled state with focus 1 are identical.
    """

    def __init__(self, state, focus=1, roof_config=None, tolerances=None):
        if not isinstance(state, PureState):
            raise StateError("monogamy analysis needs a PureState")
        if state.n_qubits < 3:
            raise StateError(f"monogamy analysis needs N >= 3, got {state.n_qubits}")
        self.state = state
        self.focus = int(focus)
        self.relabeled, self.labels = focus_first(state, self.focus)
        self.n = state.n_qubits
        self.roof_config = roof_config or ConvexRoofConfig()
        self.tol = tolerances or Tolerances()

    @property
    def partners(self):
        return range(2, self.n + 1)

    def label(self, p):
        return self.labels[p - 1]

    @property
    def conservative(self):
        """True when three-tangles are convex-roof upper bounds."""
        return self.n > 3

    @cached_property
    def one_tangle(self):
        return one_tangle(self.relabeled, 1)

    @cached_property
    def pairs(self):
        """New position -> PairInvariants of rho_1p."""
        return {p: pair_invariants(marginal(self.relabeled, [1, p])) for p in self.partners}

    @cached_property
    def triples(self):
        """(j, k) new positions, j < k -> TripleEntry (labels are original)."""
        out = {}
        for j in self.partners:
            for k in range(j + 1, self.n + 1):
                if self.n == 3:
                    value, roof = three_tangle_pure(self.relabeled), None
                else:
                    cfg = replace(self.roof_config, seed=derive_seed(self.roof_config.seed, j, k))
                    roof = three_tangle_mixed(marginal(self.relabeled, [1, j, k]), cfg)
                    value = roof.value
                out[(j, k)] = TripleEntry(self.label(j), self.label(k), value, self.conservative, roof)
        return out

    def tau3_sq_sum(self, p):
        """sum over k != p of tau_{1|p|k}^2."""
        return sum(t.three_tangle**2 for key, t in self.triples.items() if p in key)

    def tau3_sq_pairs(self):
        """sum over j < k of tau_{1|j|k}^2."""
        return sum(t.three_tangle**2 for t in self.triples.values())

    @cached_property
    def sum_n4(self):
        return math.fsum(inv.n4 for inv in self.pairs.values())

    @cached_property
    def x_sum(self):
        return self.sum_n4 - self.one_tangle

    def two_tangle_sq_sum(self):
        return math.fsum(inv.two_tangle**2 for inv in self.pairs.values())

    def delta(self, p):
        """4 n8(rho_1p) - 1/4 sum_k tau_{1|p|k}^2."""
        return 4.0 * self.pairs[p].n8 - 0.25 * self.tau3_sq_sum(p)

    def sum_report(self, with_deltas=True):
        if not with_deltas:
            return SumRuleReport(self.sum_n4, self.x_sum)
        d = {self.label(p): self.delta(p) for p in self.partners}
        big = {self.label(p): d[self.label(p)] + self.pairs[p].active_chi for p in self.partners}
        return SumRuleReport(self.sum_n4, self.x_sum, d, big)

    # -- verdicts ------------------------------------------------------------

    def ckw(self):
        if self.n != 3:
            raise StateError(f"CKW equality needs N = 3, got {self.n}")
        t = self.triples[(2, 3)].three_tangle
        rhs = self.two_tangle_sq_sum() + t
        return _identity("ckw", self.one_tangle, rhs, self.tol.identity)

    def ov(self):
        return _inequality("ov", self.one_tangle, self.two_tangle_sq_sum(), self.tol.inequality)

    def n4sum(self):
        if self.n % 2:
            return _identity("n4sum", self.sum_n4, self.one_tangle, self.tol.identity)
        return _report("n4sum", self.sum_n4, self.one_tangle)

    def n8sum(self):
        out = []
        for p in self.partners:
            n8 = self.pairs[p].n8
            vid = f"n8sum:{self.label(p)}"
            if self.n == 3:
                t = self.triples[(2, 3)].three_tangle
                out.append(_identity(vid, 16.0 * n8, t * t, self.tol.identity))
            else:
                out.append(_report(vid, 4.0 * n8, 0.25 * self.tau3_sq_sum(p), conservative=True))
        lhs = 4.0 * math.fsum(inv.n8 for inv in self.pairs.values())
        rhs = 0.25 * sum(self.tau3_sq_sum(p) for p in self.partners)
        if self.n == 3:
            out.append(_identity("n8sum", lhs, rhs, self.tol.identity))
        else:
            out.append(_report("n8sum", lhs, rhs, conservative=True))
        return out

    def two_three(self):
        lhs = math.fsum((inv.n4 - inv.two_tangle**2) ** 2 for inv in self.pairs.values()) - 0.5 * self.tau3_sq_pairs()
        if self.n == 3:
            # delta vanishes for N = 3, so the sum of Delta is the sum of chi
            rhs = math.fsum(inv.active_chi for inv in self.pairs.values())
            return _identity("two_three", lhs, rhs, self.tol.identity)
        return _inequality("two_three", lhs, 0.0, self.tol.roof, conservative=True)

    def residual3(self):
        lhs = self.one_tangle - self.two_tangle_sq_sum()
        rhs = 0.5 * math.sqrt(2.0 * self.tau3_sq_pairs())
        return _inequality("residual3", lhs, rhs, self.tol.roof, conservative=self.conservative)

    def n4_relations(self):
        # 1/4 sum_k tau^2 + Delta = 4 n8 + chi by the definition of delta,
        # so the right side is evaluated without roof values
        return [
            _identity(f"n4_relation:{self.label(p)}", inv.n4 - inv.two_tangle**2, n4_relation_rhs(inv), self.tol.consistency)
            for p, inv in self.pairs.items()
        ]

    def one_tangle_constraint(self):
        lhs = self.one_tangle + self.x_sum - self.two_tangle_sq_sum()
        rhs = math.fsum(n4_relation_rhs(inv) for inv in self.pairs.values())
        return _identity("one_tangle_constraint", lhs, rhs, self.tol.consistency)

    def criterion(self, threshold=CRITERION_THRESHOLD):
        flags = {self.label(p): bool(inv.n4 > threshold and 2.0 * inv.n8 > threshold) for p, inv in self.pairs.items()}
        return CriterionResult(flags, all(flags.values()), threshold)

    def criterion_verdicts(self, threshold=CRITERION_THRESHOLD):
        out = []
        for p, inv in self.pairs.items():
            lhs, rhs = inv.n4, 2.0 * inv.n8
            ok = bool(lhs > threshold and rhs > threshold)
            out.append(ConstraintVerdict(f"criterion:{self.label(p)}", lhs, rhs, min(lhs, rhs) - threshold, ok, False, "criterion", "reported", threshold))
        ok = all(v.passed for v in out)
        low = min(v.residual for v in out)
        out.append(ConstraintVerdict("criterion", low + threshold, threshold, low, ok, False, "criterion", "reported", threshold))
        return out

    def verdicts(self, check="all"):
        """Verdicts for one check id (see ``CHECKS``)."""
        if check not in CHECKS:
            raise ValueError(f"unknown check {check!r}; choose from {', '.join(CHECKS)}")
        if check == "ckw":
            return [self.ckw()]
        if check == "ov":
            return [self.ov()]
        if check == "n4sum":
            return [self.n4sum()]
        if check == "n8sum":
            return self.n8sum()
        if check == "residual3":
            return [self.residual3()]
        if check == "criterion":
            return self.criterion_verdicts()
        out = [self.ckw()] if self.n == 3 else []
        out += [self.ov(), self.n4sum(), *self.n8sum(), self.two_three(), self.residual3()]
        out += [*self.n4_relations(), self.one_tangle_constraint(), *self.criterion_verdicts()]
        return out

    def report(self):
        pairs = tuple(PairEntry(self.label(p), inv) for p, inv in self.pairs.items())
        return TangleReport(
            n_qubits=self.n,
            focus=self.focus,
            state_meta=dict(self.state.meta),
            one_tangle=self.one_tangle,
            pairs=pairs,
            triples=tuple(self.triples.values()),
            sums=self.sum_report(),
            criterion=self.criterion(),
            verdicts=tuple(self.verdicts("all")),
        )


# -- functional interface -------------------------------------------------------


def ckw_check(state3, focus=1, tolerances=None):
    """tau_1|23 - tau_12^2 - tau_13^2 - tau_123 for a three-qubit pure state."""
    if isinstance(state3, PureState) and state3.n_qubits != 3:
        raise StateError(f"CKW equality needs N = 3, got {state3.n_qubits}")
    return FocusAnalysis(state3, focus, tolerances=tolerances).ckw()


def ov_check(state, focus=1, tolerances=None):
    """tau_1 - sum_j tau_1j^2 >= 0."""
    return FocusAnalysis(state, focus, tolerances=tolerances).ov()


def n4_sum_rule(state, focus=1, tolerances=None):
    """x_sum = sum_j n4(rho_1j) - tau_1; asserted zero for odd N, reported for even N."""
    a = FocusAnalysis(state, focus, tolerances=tolerances)
    return a.sum_report(with_deltas=False), a.n4sum()


def n8_sum_rule(state, focus=1, roof_config=None, tolerances=None):
    """Per-pair delta_1j and their sum; verdicts per pair and for the total."""
    a = FocusAnalysis(state, focus, roof_config, tolerances)
    return a.sum_report(), tuple(a.n8sum())


def two_three_constraint(state, focus=1, roof_config=None, tolerances=None):
    """sum_j (n4 - tau_1j^2)^2 - 1/2 sum_{j<k} tau_1jk^2, the estimate of sum_j Delta_1j."""
    return FocusAnalysis(state, focus, roof_config, tolerances).two_three()


def residual_beyond_three(state, focus=1, roof_config=None, tolerances=None):
    """tau_1 - sum_j tau_1j^2 - 1/2 (sum_j sum_{k!=j} tau_1jk^2)^(1/2) >= 0."""
    return FocusAnalysis(state, focus, roof_config, tolerances).residual3()


def multipartite_criterion(state, focus=1, threshold=CRITERION_THRESHOLD):
    """Per-pair flags n4 > threshold and 2 n8 > threshold, plus their conjunction."""
    return FocusAnalysis(state, focus).criterion(threshold)


def full_report(state, focus=1, roof_config=None, tolerances=None):
    return FocusAnalysis(state, focus, roof_config, tolerances).report()


def exit_status(verdicts):
    """0 when no verdict is a hard violation, else 1."""
    return int(any(v.hard_violation for v in verdicts))


def max_abs_residual(verdicts, kinds=("identity", "inequality")):
    vals = [abs(v.residual) for v in verdicts if v.kind in kinds]
    return float(np.max(vals)) if vals else 0.0
