import math
import random

import pytest

from ancestral.core import (
    Ancestry,
    AncStatement,
    Weight,
    causes,
    dep,
    indep,
    not_causes,
)
from ancestral.scoring import (
    BothInfeasibleError,
    Identifiability,
    NoConsistentModelError,
    confidence,
    identifiability_oracle,
    score_all_pairs,
)

from helpers import dag_oracle_inputs, random_dag

W = Weight.finite
CHAIN_ORACLE = [
    dep(0, 1),
    dep(0, 1, (2,)),
    dep(1, 2),
    dep(1, 2, (0,)),
    dep(0, 2),
    indep(0, 2, (1,)),
]


def feat(x, y, wanted=True):
    return AncStatement(x, y, Ancestry.CAUSES if wanted else Ancestry.NOT_CAUSES)


# -- confidence ----------------------------------------------------------------

def test_single_supporting_input():
    assert confidence([causes(0, 1, W(2000))], 2, feat(0, 1)) == 2000


def test_contradictory_pair_difference():
    inputs = [causes(0, 1, W(3000)), causes(1, 0, W(1000))]
    assert confidence(inputs, 2, feat(0, 1)) == 2000
    assert confidence(inputs, 2, feat(1, 0)) == -2000


def test_no_inputs_scores_zero():
    assert confidence([], 2, feat(0, 1)) == 0
    assert confidence([], 2, feat(1, 0, wanted=False)) == 0


def test_hard_input_gives_infinite_score():
    assert confidence([causes(0, 1)], 2, feat(0, 1)) == math.inf
    assert confidence([causes(0, 1)], 2, feat(1, 0)) == -math.inf


def test_both_infeasible_raises():
    with pytest.raises(BothInfeasibleError):
        confidence([causes(0, 1), not_causes(0, 1)], 2, feat(0, 1))


def test_antisymmetry_of_scores():
    rng = random.Random(12)
    for _ in range(8):
        inputs = []
        for _ in range(rng.randint(1, 8)):
            x, y = rng.sample(range(4), 2)
            others = [v for v in range(4) if v not in (x, y)]
            cond = rng.sample(others, rng.randint(0, 1))
            w = W(rng.randint(0, 4000))
            inputs.append(
                indep(x, y, cond, w) if rng.random() < 0.5 else dep(x, y, cond, w)
            )
        for x in range(4):
            for y in range(4):
                if x == y:
                    continue
                plus = confidence(inputs, 4, feat(x, y))
                minus = confidence(inputs, 4, feat(x, y, wanted=False))
                assert plus == -minus


def test_monotone_evidence():
    rng = random.Random(77)
    for _ in range(6):
        inputs = []
        for _ in range(rng.randint(1, 6)):
            x, y = rng.sample(range(3), 2)
            w = W(rng.randint(0, 3000))
            inputs.append(causes(x, y, w) if rng.random() < 0.5 else not_causes(x, y, w))
        base = confidence(inputs, 3, feat(0, 1))
        w = rng.randint(1, 2500)
        boosted = confidence(inputs + [causes(0, 1, W(w))], 3, feat(0, 1))
        if isinstance(base, int):
            assert boosted == base + w
        else:
            assert boosted == base


# -- score_all_pairs --------------------------------------------------------------

def test_all_pairs_with_no_inputs():
    preds = score_all_pairs([], 3)
    assert len(preds) == 6
    assert all(p.score == 0 for p in preds)


def test_all_pairs_ordering():
    inputs = [causes(0, 1, W(3000)), causes(1, 0, W(1000))]
    preds = score_all_pairs(inputs, 2)
    assert [(p.cause, p.effect, p.score) for p in preds] == [
        (0, 1, 2000),
        (1, 0, -2000),
    ]


def test_chain_oracle_leaves_every_pair_unidentified():
    preds = score_all_pairs(CHAIN_ORACLE, 3)
    assert all(p.score == 0 for p in preds)


def test_all_pairs_insensitive_to_input_order():
    rng = random.Random(5)
    inputs = [
        dep(0, 1, (), W(100)),
        indep(0, 2, (), W(200)),
        dep(1, 2, (), W(300)),
        causes(0, 2, W(400)),
        indep(1, 2, (0,), W(500)),
    ]
    baseline = score_all_pairs(inputs, 3)
    for _ in range(4):
        shuffled = inputs[:]
        rng.shuffle(shuffled)
        assert score_all_pairs(shuffled, 3) == baseline


def test_share_bounds_is_bit_identical():
    rng = random.Random(41)
    for _ in range(6):
        inputs = []
        for _ in range(rng.randint(2, 9)):
            x, y = rng.sample(range(4), 2)
            others = [v for v in range(4) if v not in (x, y)]
            cond = rng.sample(others, rng.randint(0, 1))
            w = W(rng.randint(0, 4000))
            inputs.append(
                indep(x, y, cond, w) if rng.random() < 0.5 else dep(x, y, cond, w)
            )
        assert score_all_pairs(inputs, 4, share_bounds=True) == score_all_pairs(
            inputs, 4, share_bounds=False
        )


# -- identifiability oracle -----------------------------------------------------------

def test_chain_oracle_identifies_nothing_pairwise():
    for x in range(3):
        for y in range(3):
            if x != y:
                got = identifiability_oracle(CHAIN_ORACLE, 3, feat(x, y))
                assert got is Identifiability.UNKNOWN


def test_hard_statement_identified():
    assert (
        identifiability_oracle([causes(0, 1)], 2, feat(0, 1)) is Identifiability.TRUE
    )
    assert (
        identifiability_oracle([causes(0, 1)], 2, feat(1, 0)) is Identifiability.FALSE
    )


def test_transitive_consequence_identified():
    got = identifiability_oracle([causes(0, 1), causes(1, 2)], 3, feat(0, 2))
    assert got is Identifiability.TRUE


def test_contradictory_hard_inputs_have_no_model():
    with pytest.raises(NoConsistentModelError):
        identifiability_oracle([causes(0, 1), not_causes(0, 1)], 2, feat(0, 1))


def test_oracle_rejects_soft_inputs():
    with pytest.raises(ValueError):
        identifiability_oracle([causes(0, 1, W(5))], 2, feat(0, 1))


def test_oracle_enumeration_guard():
    with pytest.raises(ValueError):
        identifiability_oracle([causes(0, 1)], 6, feat(0, 1))


def test_soundness_infinite_scores_agree_with_enumeration():
    rng = random.Random(1)
    for _ in range(10):
        adj = random_dag(4 + rng.randint(0, 2), 0.4, rng)
        inputs = dag_oracle_inputs(adj, 4, 1)
        for x in range(4):
            for y in range(4):
                if x == y:
                    continue
                score = confidence(inputs, 4, feat(x, y))
                verdict = identifiability_oracle(inputs, 4, feat(x, y))
                if verdict is Identifiability.TRUE:
                    assert score == math.inf
                elif verdict is Identifiability.FALSE:
                    assert score == -math.inf
                else:
                    assert score == 0
