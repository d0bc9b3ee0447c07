"""Confidence scores for ancestral features via paired constrained solves.

The confidence of a feature is the minimum loss with the feature forced
false minus the minimum loss with it forced true. Under hard inputs the
score is +inf exactly when the feature holds in every consistent joint
assignment and -inf exactly when it holds in none, which
``identifiability_oracle`` verifies by exhaustive enumeration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence, Union

from ancestral.core import (
    AncStatement,
    Ancestry,
    CiStatement,
    enumerate_ancestral_structures,
)
from ancestral.rules import clause_holds, ground
from ancestral.solver import (
    SolveOptions,
    _Compiled,
    _feature_pins,
    _Search,
    _validate_n,
)


class BothInfeasibleError(ValueError):
    """Both forced solves are infeasible: the hard background knowledge is
    contradictory."""


class NoConsistentModelError(ValueError):
    """No joint assignment satisfies the hard inputs."""


class Identifiability(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Prediction:
    cause: int
    effect: int
    score: Union[int, float]


def _want_reach(feature: AncStatement, hold: bool) -> bool:
    return (feature.polarity is Ancestry.CAUSES) == hold


class PairScorer:
    """Scores features over one input list, compiling the instance once.

    With ``share_bounds`` the unconstrained optimum is solved first and
    reused: a forced solve whose constraint the unconstrained witness
    already satisfies must have the same minimum, so it is skipped. The
    scores are identical to the uncached path.
    """

    def __init__(self, inputs: Sequence, n: int, options: Optional[SolveOptions] = None):
        self.options = options or SolveOptions()
        _validate_n(n, self.options)
        self.n = n
        self._pins = _feature_pins(n, self.options.forced_features)
        self._comp = _Compiled(list(inputs), n)
        self._base = None

    def _deadline(self):
        if self.options.time_limit is None:
            return None
        return time.monotonic() + self.options.time_limit

    def _forced_min(self, var: int, value: bool, phase=None, act0=None) -> Optional[int]:
        search = _Search(
            self._comp, self._pins + ((1, var, value),), self._deadline(), phase, act0
        )
        best, _ = search.run_min()
        return best

    def _base_solve(self):
        if self._base is None:
            search = _Search(self._comp, self._pins, self._deadline())
            best, snap = search.run_min()
            self._base = (best, snap, tuple(search.act))
        return self._base

    def confidence(self, feature: AncStatement, share_bounds: bool = False) -> Union[int, float]:
        if feature.cause >= self.n or feature.effect >= self.n:
            raise ValueError("feature references variables >= n")
        var = feature.cause * self.n + feature.effect
        loss_true = loss_false = "pending"
        phase = act0 = None
        if share_bounds:
            base, snap, act0 = self._base_solve()
            if base is not None:
                phase = snap
                reached = snap[0][var] == 1
                if reached == _want_reach(feature, True):
                    loss_true = base
                else:
                    loss_false = base
        if loss_true == "pending":
            loss_true = self._forced_min(var, _want_reach(feature, True), phase, act0)
        if loss_false == "pending":
            loss_false = self._forced_min(var, _want_reach(feature, False), phase, act0)
        if loss_true is None and loss_false is None:
            raise BothInfeasibleError(
                "both forced solves are infeasible; the hard inputs contradict"
            )
        if loss_false is None:
            return math.inf
        if loss_true is None:
            return -math.inf
        return loss_false - loss_true

    def all_pairs(self, share_bounds: bool = False) -> list[Prediction]:
        preds = []
        for x in range(self.n):
            for y in range(self.n):
                if x == y:
                    continue
                feature = AncStatement(x, y, Ancestry.CAUSES)
                preds.append(Prediction(x, y, self.confidence(feature, share_bounds)))
        preds.sort(key=lambda p: (-p.score, p.cause, p.effect))
        return preds


def confidence(
    inputs: Sequence,
    n: int,
    feature: AncStatement,
    options: Optional[SolveOptions] = None,
) -> Union[int, float]:
    """Minimum loss with the feature forced false minus the minimum with it
    forced true; +inf / -inf when exactly one side is infeasible."""
    return PairScorer(inputs, n, options).confidence(feature)


def score_all_pairs(
    inputs: Sequence,
    n: int,
    options: Optional[SolveOptions] = None,
    share_bounds: bool = False,
) -> list[Prediction]:
    """One prediction per ordered pair, sorted by score descending with
    ties broken by (cause, effect)."""
    return PairScorer(inputs, n, options).all_pairs(share_bounds)


def identifiability_oracle(
    hard_inputs: Iterable, n: int, feature: AncStatement
) -> Identifiability:
    """Classify a feature by enumerating every consistent joint assignment.

    All inputs must be hard, so the polarity assignment is pinned to the
    stated facts and only structures vary. Intended for n <= 4; n = 5 works
    but enumerates 4231 structures per call.
    """
    if n > 5:
        raise ValueError("identifiability oracle is limited to n <= 5")
    truth = {}
    require_reach: dict[tuple[int, int], bool] = {}
    consistent_ci = True
    for item in hard_inputs:
        if not item.weight.is_hard:
            raise ValueError("identifiability oracle requires hard inputs only")
        stmt = item.statement
        if isinstance(stmt, CiStatement):
            if stmt.y >= n or stmt.cond >> n:
                raise ValueError("statement references variables >= n")
            prev = truth.setdefault(stmt.triple, stmt.polarity)
            if prev is not stmt.polarity:
                consistent_ci = False
        elif isinstance(stmt, AncStatement):
            if stmt.cause >= n or stmt.effect >= n:
                raise ValueError("statement references variables >= n")
            want = stmt.polarity is Ancestry.CAUSES
            prev = require_reach.setdefault((stmt.cause, stmt.effect), want)
            if prev != want:
                consistent_ci = False
        else:
            raise TypeError(f"unsupported statement type {type(stmt)!r}")
    if not consistent_ci:
        raise NoConsistentModelError("contradictory hard inputs")
    grounding = ground([(t, p) for t, p in truth.items()], n)
    if any((t, p.flipped()) in grounding.facts for t, p in truth.items()):
        raise NoConsistentModelError("hard facts derive their own negation")

    holds_in = total = 0
    want_feature = feature.polarity is Ancestry.CAUSES
    for s in enumerate_ancestral_structures(n):
        if any(s.reach(x, y) != want for (x, y), want in require_reach.items()):
            continue
        if not all(clause_holds(c, s) for c in grounding.clauses):
            continue
        total += 1
        if s.reach(feature.cause, feature.effect) == want_feature:
            holds_in += 1
    if total == 0:
        raise NoConsistentModelError("no consistent joint assignment")
    if holds_in == total:
        return Identifiability.TRUE
    if holds_in == 0:
        return Identifiability.FALSE
    return Identifiability.UNKNOWN
