"""Statistical front-end: turn observational and interventional data into
weighted input statements.

Conditional independence is tested with partial correlations and the
Fisher z transform; two-sided p-values become weights via
``round(1000 * |ln p - ln alpha|)``, dependent below the threshold and
independent above it. Ancestral statements come from a two-sided Welch
test comparing each variable's interventional sample to its observational
one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.special import stdtr

from ancestral.core import (
    Polarity,
    Weight,
    WeightedInput,
    canonicalize,
    causes,
    condset_members,
    not_causes,
)

CLAMP_EPS = 1e-12


class ParseError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class DegenerateColumnError(ValueError):
    pass


class SingularError(ValueError):
    """The conditioning covariance is numerically singular."""


class DatasetMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    names: tuple[str, ...]
    values: np.ndarray  # N x n, rows are samples

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ShapeError("values must be an N x n matrix matching the names")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown variable name {name!r}") from None


@dataclass(frozen=True)
class CiTestConfig:
    alpha: float = 0.05
    max_order: int = 1
    log_p_floor: float = -700.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.max_order < 0:
            raise ValueError("max_order must be nonnegative")


def load_dataset(path) -> Dataset:
    """Parse a CSV dataset: a header of variable names, then float rows.

    Lines starting with '#' are ignored. Columns of constants are rejected
    so every downstream correlation is well defined.
    """
    names: Optional[tuple[str, ...]] = None
    rows: list[list[float]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            cells = [c.strip() for c in line.split(",")]
            if names is None:
                names = tuple(cells)
                if len(set(names)) != len(names):
                    raise ParseError(f"line {lineno}: duplicate variable names")
                for name in names:
                    if not name or any(ch.isspace() for ch in name) or set(name) & {"|", ":", "#"}:
                        raise ParseError(f"line {lineno}: invalid variable name {name!r}")
                continue
            if len(cells) != len(names):
                raise ParseError(
                    f"line {lineno}: expected {len(names)} values, found {len(cells)}"
                )
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
    if names is None:
        raise ParseError("empty dataset: no header line")
    if len(rows) < 2:
        raise ShapeError("a dataset needs at least two sample rows")
    values = np.asarray(rows, dtype=np.float64)
    for i, name in enumerate(names):
        if np.ptp(values[:, i]) == 0.0:
            raise DegenerateColumnError(f"column {name!r} has zero variance")
    return Dataset(names, values)


def write_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(dataset.names) + "\n")
        for row in dataset.values:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


# ---------------------------------------------------------------------------
# Partial correlation


def partial_correlation(
    data: Dataset, x: int, y: int, cond: int, method: str = "residuals"
) -> float:
    """Sample partial correlation of columns x and y given the columns in
    ``cond``, unclamped. ``method`` is 'residuals' (regress both endpoints
    on the conditioning block plus intercept and correlate the residuals)
    or 'recursion' (first-order recursion over the correlation matrix);
    the two agree to float precision on nondegenerate data."""
    if x == y:
        raise ValueError("x and y must differ")
    if (cond >> x) & 1 or (cond >> y) & 1:
        raise ValueError("conditioning set must exclude x and y")
    ks = condset_members(cond)
    if data.n_samples <= len(ks) + 3:
        raise ValueError("need more than |cond| + 3 samples")
    if method == "residuals":
        return _partial_corr_residuals(data.values, x, y, ks)
    if method == "recursion":
        cols = (x, y) + ks
        corr = np.corrcoef(data.values[:, cols], rowvar=False)
        return _partial_corr_recursion(corr, 0, 1, tuple(range(2, 2 + len(ks))), {})
    raise ValueError(f"unknown method {method!r}")


def _partial_corr_residuals(values: np.ndarray, x: int, y: int, ks: Sequence[int]) -> float:
    n_rows = values.shape[0]
    design = np.column_stack([np.ones(n_rows)] + [values[:, k] for k in ks])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularError("conditioning columns are collinear")
    bx, *_ = np.linalg.lstsq(design, values[:, x], rcond=None)
    by, *_ = np.linalg.lstsq(design, values[:, y], rcond=None)
    rx = values[:, x] - design @ bx
    ry = values[:, y] - design @ by
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0 or not math.isfinite(denom):
        raise SingularError("residual variance vanished under conditioning")
    return float(rx @ ry) / denom


def _partial_corr_recursion(corr, i: int, j: int, ks: tuple[int, ...], memo: dict) -> float:
    if not ks:
        return float(corr[i, j])
    key = (min(i, j), max(i, j), ks)
    if key in memo:
        return memo[key]
    z = ks[-1]
    rest = ks[:-1]
    r_ij = _partial_corr_recursion(corr, i, j, rest, memo)
    r_iz = _partial_corr_recursion(corr, i, z, rest, memo)
    r_jz = _partial_corr_recursion(corr, j, z, rest, memo)
    denom_sq = (1.0 - r_iz * r_iz) * (1.0 - r_jz * r_jz)
    if denom_sq <= 0.0:
        raise SingularError("conditioning correlation reached unity")
    out = (r_ij - r_iz * r_jz) / math.sqrt(denom_sq)
    memo[key] = out
    return out


def clamp_correlation(r: float) -> float:
    return max(-1.0 + CLAMP_EPS, min(1.0 - CLAMP_EPS, r))


def fisher_z_pvalue(r: float, n_samples: int, order: int) -> float:
    """Two-sided p-value for zero partial correlation of the given order:
    sqrt(N - order - 3) * atanh(r) against the standard normal."""
    if not abs(r) < 1:
        raise ValueError("|r| must be strictly below 1")
    dof = n_samples - order - 3
    if dof <= 0:
        raise ValueError("need N - order - 3 > 0")
    stat = math.sqrt(dof) * math.atanh(r)
    return math.erfc(abs(stat) / math.sqrt(2.0))


def frequentist_weight(p: float, alpha: float, log_p_floor: float = -700.0) -> tuple[Polarity, Weight]:
    """Polarity and weight for a test outcome: dependent when p < alpha,
    weight round(1000 * |ln p - ln alpha|) with ln p clamped from below."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    polarity = Polarity.DEPENDENT if p < alpha else Polarity.INDEPENDENT
    log_p = log_p_floor if p == 0.0 else max(math.log(p), log_p_floor)
    millis = round(1000.0 * abs(log_p - math.log(alpha)))
    return polarity, Weight.finite(millis)


def ci_inputs_from_data(
    data: Dataset,
    config: CiTestConfig,
    skipped: Optional[list] = None,
) -> list[WeightedInput]:
    """One weighted statement per canonical triple up to the configured
    order. Triples whose test fails are skipped with a warning (and
    recorded in ``skipped`` when given) rather than aborting the run."""
    n = data.n_vars
    if data.n_samples <= config.max_order + 3:
        raise ShapeError("need more than max_order + 3 samples")
    out: list[WeightedInput] = []
    for x in range(n):
        for y in range(x + 1, n):
            others = [v for v in range(n) if v != x and v != y]
            masks = [0]
            for k in range(1, config.max_order + 1):
                masks.extend(_k_subsets(others, k))
            for cond in masks:
                try:
                    r = clamp_correlation(partial_correlation(data, x, y, cond))
                    p = fisher_z_pvalue(r, data.n_samples, cond.bit_count())
                except (SingularError, ValueError) as exc:
                    if skipped is not None:
                        skipped.append((x, y, cond, str(exc)))
                    warnings.warn(
                        f"skipping test ({x}, {y} | {cond:#x}): {exc}", stacklevel=2
                    )
                    continue
                polarity, weight = frequentist_weight(p, config.alpha, config.log_p_floor)
                out.append(WeightedInput(canonicalize(x, y, cond, polarity), weight))
    return out


def _k_subsets(items: Sequence[int], k: int) -> list[int]:
    # bitmasks of all k-subsets, ascending
    masks = []

    def rec(start: int, left: int, acc: int) -> None:
        if left == 0:
            masks.append(acc)
            return
        for i in range(start, len(items)):
            rec(i + 1, left - 1, acc | (1 << items[i]))

    rec(0, k, 0)
    return sorted(masks)


# ---------------------------------------------------------------------------
# Two-sample tests for interventions


def welch_t_test(sample_a: np.ndarray, sample_b: np.ndarray) -> float:
    """Two-sided Welch t-test p-value with Welch-Satterthwaite degrees of
    freedom."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("both samples need at least two observations")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise ValueError("both samples are degenerate")
    sa, sb = va / a.size, vb / b.size
    se = math.sqrt(sa + sb)
    t = (float(a.mean()) - float(b.mean())) / se
    dof = (sa + sb) ** 2 / (
        (sa * sa / (a.size - 1)) + (sb * sb / (b.size - 1))
    )
    return 2.0 * float(stdtr(dof, -abs(t)))


def ancestral_inputs_from_intervention(
    obs: Dataset,
    interv: Dataset,
    target: int,
    config: CiTestConfig,
) -> list[WeightedInput]:
    """Weighted ancestral statements from one intervention: for every other
    variable, test whether its interventional distribution differs from the
    observational one; a significant change yields causes(target, y)."""
    if obs.names != interv.names:
        raise DatasetMismatchError("observational and interventional variables differ")
    if not 0 <= target < obs.n_vars:
        raise ValueError("target index out of range")
    out: list[WeightedInput] = []
    for y in range(obs.n_vars):
        if y == target:
            continue
        p = welch_t_test(obs.column(y), interv.column(y))
        polarity, weight = frequentist_weight(p, config.alpha, config.log_p_floor)
        if polarity is Polarity.DEPENDENT:
            out.append(causes(target, y, weight))
        else:
            out.append(not_causes(target, y, weight))
    return out
