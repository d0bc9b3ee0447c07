import math
import random

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from ancestral.core import Polarity, Weight
from ancestral.stats import (
    CiTestConfig,
    Dataset,
    DatasetMismatchError,
    DegenerateColumnError,
    ParseError,
    ShapeError,
    SingularError,
    ancestral_inputs_from_intervention,
    ci_inputs_from_data,
    clamp_correlation,
    fisher_z_pvalue,
    frequentist_weight,
    load_dataset,
    partial_correlation,
    welch_t_test,
    write_dataset,
    _partial_corr_recursion,
)


def make_dataset(values, names=None):
    values = np.asarray(values, dtype=np.float64)
    names = tuple(names or (f"X{i}" for i in range(values.shape[1])))
    return Dataset(names, values)


# -- loading --------------------------------------------------------------------

def test_load_roundtrip(tmp_path):
    rng = np.random.default_rng(0)
    d = make_dataset(rng.normal(size=(50, 3)))
    path = tmp_path / "d.csv"
    write_dataset(d, path)
    loaded = load_dataset(path)
    assert loaded.names == d.names
    assert np.array_equal(loaded.values, d.values)


def test_load_skips_comments(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("# header comment\na,b\n1,2\n# mid comment\n3,4\n")
    d = load_dataset(path)
    assert d.n_samples == 2 and d.names == ("a", "b")


def test_load_rejects_constant_column(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,5\n2,5\n3,5\n")
    with pytest.raises(DegenerateColumnError):
        load_dataset(path)


def test_load_reports_ragged_line(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n3\n")
    with pytest.raises(ParseError, match="line 3"):
        load_dataset(path)


def test_load_rejects_single_row(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ShapeError):
        load_dataset(path)


# -- partial correlation -----------------------------------------------------------

def test_duplicated_column_correlates_fully():
    rng = np.random.default_rng(1)
    col = rng.normal(size=120)
    d = make_dataset(np.column_stack([col, col, rng.normal(size=120)]))
    assert partial_correlation(d, 0, 1, 0) == pytest.approx(1.0, abs=1e-12)


def test_first_order_recursion_frozen_value():
    corr = np.array([[1.0, 0.8, 0.5], [0.8, 1.0, 0.5], [0.5, 0.5, 1.0]])
    got = _partial_corr_recursion(corr, 0, 1, (2,), {})
    assert got == pytest.approx(0.55 / 0.75, abs=1e-12)


def test_methods_agree_to_1e10():
    rng = np.random.default_rng(2)
    for _ in range(20):
        vals = rng.normal(size=(400, 5))
        vals[:, 1] += 0.6 * vals[:, 0]
        vals[:, 2] += 0.5 * vals[:, 1] - 0.2 * vals[:, 0]
        vals[:, 4] += 0.3 * vals[:, 2]
        d = make_dataset(vals)
        x, y = rng.choice(5, size=2, replace=False)
        others = [v for v in range(5) if v not in (x, y)]
        cond = 0
        for v in rng.choice(others, size=rng.integers(0, 3), replace=False):
            cond |= 1 << int(v)
        a = partial_correlation(d, int(x), int(y), cond)
        b = partial_correlation(d, int(x), int(y), cond, method="recursion")
        assert a == pytest.approx(b, abs=1e-10)


def test_affine_invariance():
    rng = np.random.default_rng(3)
    vals = rng.normal(size=(300, 4))
    vals[:, 2] += 0.7 * vals[:, 0]
    d1 = make_dataset(vals)
    scaled = vals.copy()
    scaled[:, 0] = 3.5 * scaled[:, 0] - 11.0
    scaled[:, 2] = 0.25 * scaled[:, 2] + 4.0
    d2 = make_dataset(scaled)
    r1 = partial_correlation(d1, 0, 2, 0b10)
    r2 = partial_correlation(d2, 0, 2, 0b10)
    assert r1 == pytest.approx(r2, abs=1e-10)


def test_collinear_conditioning_is_singular():
    rng = np.random.default_rng(4)
    base = rng.normal(size=200)
    vals = np.column_stack(
        [rng.normal(size=200), rng.normal(size=200), base, 2.0 * base]
    )
    d = make_dataset(vals)
    with pytest.raises(SingularError):
        partial_correlation(d, 0, 1, 0b1100)


def test_independent_columns_have_small_correlation():
    rng = np.random.default_rng(5)
    d = make_dataset(rng.normal(size=(10000, 2)))
    assert abs(partial_correlation(d, 0, 1, 0)) < 0.05


def test_sample_guard():
    d = make_dataset(np.random.default_rng(0).normal(size=(5, 4)))
    with pytest.raises(ValueError):
        partial_correlation(d, 0, 1, 0b1100)


# -- Fisher z ------------------------------------------------------------------------

def test_zero_correlation_gives_p_one():
    assert fisher_z_pvalue(0.0, 100, 0) == 1.0


def test_frozen_example_value():
    # z = atanh(0.5), stat = sqrt(96) z ~ 5.382, two-sided normal tail
    assert fisher_z_pvalue(0.5, 100, 1) == pytest.approx(7.363e-8, rel=1e-3)


def test_monotone_in_correlation_magnitude():
    ps = [fisher_z_pvalue(r, 200, 1) for r in (0.05, 0.1, 0.2, 0.4, 0.6)]
    assert all(a > b for a, b in zip(ps, ps[1:]))


@given(st.floats(-0.999, 0.999), st.integers(10, 5000), st.integers(0, 4))
@settings(max_examples=100)
def test_symmetric_in_sign(r, n_samples, order):
    assert fisher_z_pvalue(r, n_samples, order) == fisher_z_pvalue(-r, n_samples, order)


def test_agrees_with_reference_normal_tail():
    rng = random.Random(6)
    for _ in range(100):
        r = rng.uniform(-0.95, 0.95)
        n_samples = rng.randint(10, 2000)
        order = rng.randint(0, 3)
        stat = math.sqrt(n_samples - order - 3) * math.atanh(r)
        want = 2.0 * scipy.stats.norm.sf(abs(stat))
        got = fisher_z_pvalue(r, n_samples, order)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-300)


def test_guards():
    with pytest.raises(ValueError):
        fisher_z_pvalue(1.0, 100, 0)
    with pytest.raises(ValueError):
        fisher_z_pvalue(0.5, 4, 1)


# -- frequentist weights ----------------------------------------------------------------

def test_weight_below_threshold_is_dependent():
    polarity, w = frequentist_weight(0.01, 0.05)
    assert polarity is Polarity.DEPENDENT
    assert w == Weight.finite(1609)


def test_weight_at_threshold_is_zero():
    polarity, w = frequentist_weight(0.05, 0.05)
    assert polarity is Polarity.INDEPENDENT
    assert w == Weight.finite(0)


def test_weight_of_p_one():
    polarity, w = frequentist_weight(1.0, 0.05)
    assert polarity is Polarity.INDEPENDENT
    assert w == Weight.finite(2996)


def test_weight_clamps_underflowed_p():
    _, w = frequentist_weight(0.0, 0.05)
    assert w == Weight.finite(round(1000 * (700 + math.log(0.05))))


@given(st.floats(1e-12, 1 - 1e-12), st.floats(0.01, 0.2))
@settings(max_examples=100)
def test_weight_shrinks_toward_threshold(p, alpha):
    _, w = frequentist_weight(p, alpha)
    mid = math.sqrt(p * alpha)
    _, w_mid = frequentist_weight(min(max(mid, 1e-300), 1.0), alpha)
    assert w_mid.millis <= w.millis or p == alpha


# -- statement construction ------------------------------------------------------------

def test_statement_count_formula():
    rng = np.random.default_rng(7)
    for n, c in ((3, 1), (4, 0), (4, 2), (5, 1)):
        d = make_dataset(rng.normal(size=(60, n)))
        inputs = ci_inputs_from_data(d, CiTestConfig(alpha=0.05, max_order=c))
        expected = (n * (n - 1) // 2) * sum(math.comb(n - 2, k) for k in range(c + 1))
        assert len(inputs) == expected
        keys = {(w.statement.x, w.statement.y, w.statement.cond) for w in inputs}
        assert len(keys) == len(inputs)


def test_statement_weights_match_pipeline():
    rng = np.random.default_rng(8)
    d = make_dataset(rng.normal(size=(80, 3)))
    cfg = CiTestConfig(alpha=0.05, max_order=0)
    inputs = ci_inputs_from_data(d, cfg)
    for item in inputs:
        r = clamp_correlation(partial_correlation(d, item.statement.x, item.statement.y, 0))
        p = fisher_z_pvalue(r, 80, 0)
        polarity, w = frequentist_weight(p, 0.05)
        assert item.statement.polarity is polarity
        assert item.weight == w


# -- two-sample tests --------------------------------------------------------------------

def test_identical_samples_p_one():
    rng = np.random.default_rng(9)
    a = rng.normal(size=50)
    assert welch_t_test(a, a) == pytest.approx(1.0)


def test_separated_means_tiny_p():
    rng = np.random.default_rng(10)
    a = rng.normal(0, 1, 1000)
    b = rng.normal(5, 1, 1000)
    assert welch_t_test(a, b) < 1e-10


def test_symmetric_in_samples():
    rng = np.random.default_rng(11)
    a = rng.normal(0, 1, 80)
    b = rng.normal(0.4, 2, 120)
    assert welch_t_test(a, b) == pytest.approx(welch_t_test(b, a), rel=1e-12)


def test_welch_agrees_with_scipy():
    rng = np.random.default_rng(12)
    for _ in range(20):
        a = rng.normal(0, 1, rng.integers(5, 200))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 3), rng.integers(5, 200))
        want = scipy.stats.ttest_ind(a, b, equal_var=False).pvalue
        assert welch_t_test(a, b) == pytest.approx(want, rel=1e-9)


def test_welch_guards():
    with pytest.raises(ValueError):
        welch_t_test(np.array([1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        welch_t_test(np.array([1.0, 1.0]), np.array([2.0, 2.0]))


# -- intervention statements ----------------------------------------------------------------

def test_identical_datasets_give_notcauses_at_2996():
    rng = np.random.default_rng(13)
    d = make_dataset(rng.normal(size=(60, 4)))
    cfg = CiTestConfig(alpha=0.05)
    out = ancestral_inputs_from_intervention(d, d, 1, cfg)
    assert len(out) == 3
    for item in out:
        assert item.statement.cause == 1
        assert item.statement.effect != 1
        assert item.weight == Weight.finite(2996)
        assert item.statement.polarity.name == "NOT_CAUSES"


def test_shifted_target_detected_as_cause():
    rng = np.random.default_rng(14)
    obs = make_dataset(rng.normal(size=(300, 3)))
    shifted = obs.values.copy()
    shifted[:, 2] += 3.0
    interv = make_dataset(shifted)
    out = ancestral_inputs_from_intervention(obs, interv, 0, CiTestConfig())
    by_effect = {item.statement.effect: item for item in out}
    assert by_effect[2].statement.polarity.name == "CAUSES"
    assert by_effect[1].statement.polarity.name == "NOT_CAUSES"


def test_mismatched_variables_rejected():
    rng = np.random.default_rng(15)
    a = make_dataset(rng.normal(size=(30, 2)), names=("a", "b"))
    b = make_dataset(rng.normal(size=(30, 2)), names=("a", "c"))
    with pytest.raises(DatasetMismatchError):
        ancestral_inputs_from_intervention(a, b, 0, CiTestConfig())
