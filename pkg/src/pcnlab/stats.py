"""Regression and t-test machinery linking network measures to outcomes.

Implements exactly the analysis shapes the pipeline needs: simple OLS of one
outcome on one network measure, a moderated model whose terms are the measure
and measure x moderator product (the moderator enters only through the
product; a flag adds its main effect for comparison), and a pooled-variance
two-sample t-test. p-values come from a regularized-incomplete-beta Student-t
survival function implemented here, so the package has no stats dependency
beyond numpy's linear algebra.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np


class CollinearityError(ValueError):
    """Design matrix is rank deficient; names the collinear terms."""

    def __init__(self, terms: list[str]):
        self.terms = terms
        super().__init__(f"collinear design columns: {', '.join(terms)}")


@dataclass(frozen=True)
class RegressionFit:
    """OLS estimates with per-term two-sided p-values."""

    coefficients: dict[str, float]
    standard_errors: dict[str, float]
    p_values: dict[str, float]
    r_squared: float
    n_observations: int
    residual_df: int


@dataclass(frozen=True)
class TTestResult:
    t_value: float
    degrees_of_freedom: float
    p_value: float
    group_means: tuple[float, float]
    group_standard_errors: tuple[float, float]
    zero_variance: bool = False


# --- Student-t tail probability via the regularized incomplete beta ---------

_BETA_MAX_ITER = 400
_BETA_EPS = 1e-15


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Lentz continued fraction for the incomplete beta integral."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    result = d
    for m in range(1, _BETA_MAX_ITER + 1):
        m2 = 2 * m
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        result *= d * c
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + coeff / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        result *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return result
    return result


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("beta parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b


def t_distribution_sf(t: float, df: float) -> float:
    """Upper-tail probability P(T > t) for Student's t with df > 0."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    x = df / (df + t * t)
    tail = 0.5 * regularized_incomplete_beta(df / 2.0, 0.5, x)
    return tail if t >= 0 else 1.0 - tail


def _two_sided_p(t: float, df: float) -> float:
    if math.isnan(t):
        return 1.0
    return min(1.0, 2.0 * t_distribution_sf(abs(t), df))


# --- OLS ---------------------------------------------------------------------


def _fit_ols(y: np.ndarray, design: np.ndarray, names: list[str]) -> RegressionFit:
    n, p = design.shape
    if n <= p:
        raise ValueError(f"need more than {p} observations, got {n}")
    rank = np.linalg.matrix_rank(design)
    if rank < p:
        raise CollinearityError(_collinear_terms(design, names))

    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    fitted = design @ beta
    residuals = y - fitted
    ss_res = float(residuals @ residuals)
    centered = y - y.mean()
    ss_tot = float(centered @ centered)
    r_squared = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot

    df = n - p
    sigma2 = ss_res / df
    xtx_inv = np.linalg.inv(design.T @ design)
    se = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))

    coefficients = {}
    standard_errors = {}
    p_values = {}
    for j, name in enumerate(names):
        b = float(beta[j])
        s = float(se[j])
        coefficients[name] = b
        standard_errors[name] = s
        if s == 0.0:
            p_values[name] = 1.0 if b == 0.0 else 0.0
        else:
            p_values[name] = _two_sided_p(b / s, df)
    return RegressionFit(
        coefficients=coefficients,
        standard_errors=standard_errors,
        p_values=p_values,
        r_squared=max(0.0, min(1.0, r_squared)),
        n_observations=n,
        residual_df=df,
    )


def _collinear_terms(design: np.ndarray, names: list[str]) -> list[str]:
    """Name every column that lies in the span of the others."""
    culprits = []
    p = design.shape[1]
    for j in range(p):
        others = np.delete(design, j, axis=1)
        if others.shape[1] == 0:
            continue
        coef, _, _, _ = np.linalg.lstsq(others, design[:, j], rcond=None)
        residual = design[:, j] - others @ coef
        scale = max(1.0, float(np.abs(design[:, j]).max()))
        if float(np.abs(residual).max()) < 1e-10 * scale:
            culprits.append(names[j])
    return culprits or list(names)


def ols_simple(y: Sequence[float], x: Sequence[float]) -> RegressionFit:
    """Least-squares line y = intercept + beta * x with slope inference.

    The slope p-value is two-sided from Student's t with n - 2 degrees of
    freedom (identical to the model F-test for a single predictor).
    """
    y_arr = np.asarray(y, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if y_arr.shape != x_arr.shape or y_arr.ndim != 1:
        raise ValueError("y and x must be equal-length vectors")
    if len(y_arr) < 3:
        raise ValueError("need at least 3 observations")
    if np.ptp(x_arr) == 0.0:
        raise CollinearityError(["x"])
    design = np.column_stack([np.ones_like(x_arr), x_arr])
    return _fit_ols(y_arr, design, ["intercept", "x"])


def ols_moderation(
    y: Sequence[float],
    x: Sequence[float],
    moderator: Sequence[float],
    include_moderator_main_effect: bool = False,
) -> RegressionFit:
    """Fit y on {intercept, x, x*moderator}, testing a moderation effect.

    The moderator enters only through the product term by default;
    ``include_moderator_main_effect`` switches to the full {x, m, x*m} model.
    Moderation holds when the product term's p-value clears the caller's
    significance threshold.
    """
    y_arr = np.asarray(y, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    m_arr = np.asarray(moderator, dtype=float)
    if not (y_arr.shape == x_arr.shape == m_arr.shape) or y_arr.ndim != 1:
        raise ValueError("y, x and moderator must be equal-length vectors")
    min_n = 5 if include_moderator_main_effect else 4
    if len(y_arr) < min_n:
        raise ValueError(f"need at least {min_n} observations")

    columns = [np.ones_like(x_arr), x_arr]
    names = ["intercept", "x"]
    if include_moderator_main_effect:
        columns.append(m_arr)
        names.append("moderator")
    columns.append(x_arr * m_arr)
    names.append("x_moderator")
    return _fit_ols(y_arr, np.column_stack(columns), names)


# --- Two-sample t-test -------------------------------------------------------


def two_sample_ttest(
    a: Sequence[float], b: Sequence[float], welch: bool = False
) -> TTestResult:
    """Two-sided two-sample t-test, pooled-variance Student by default.

    Two identical constant samples give t = 0, p = 1. Zero pooled variance
    with unequal means is reported as p = 0 with the zero_variance flag set.
    """
    a_arr = np.asarray(a, dtype=float)
    b_arr = np.asarray(b, dtype=float)
    na, nb = len(a_arr), len(b_arr)
    if na < 2 or nb < 2:
        raise ValueError("each sample needs at least 2 observations")

    mean_a = float(a_arr.mean())
    mean_b = float(b_arr.mean())
    var_a = float(a_arr.var(ddof=1))
    var_b = float(b_arr.var(ddof=1))
    se_a = math.sqrt(var_a / na)
    se_b = math.sqrt(var_b / nb)

    if welch:
        se2 = var_a / na + var_b / nb
        if se2 == 0.0:
            return _degenerate_ttest(mean_a, mean_b, se_a, se_b, float(na + nb - 2))
        df = se2 * se2 / (
            (var_a / na) ** 2 / (na - 1) + (var_b / nb) ** 2 / (nb - 1)
        )
        t = (mean_a - mean_b) / math.sqrt(se2)
    else:
        df = float(na + nb - 2)
        pooled = ((na - 1) * var_a + (nb - 1) * var_b) / df
        se2 = pooled * (1.0 / na + 1.0 / nb)
        if se2 == 0.0:
            return _degenerate_ttest(mean_a, mean_b, se_a, se_b, df)
        t = (mean_a - mean_b) / math.sqrt(se2)

    return TTestResult(
        t_value=t,
        degrees_of_freedom=df,
        p_value=_two_sided_p(t, df),
        group_means=(mean_a, mean_b),
        group_standard_errors=(se_a, se_b),
    )


def _degenerate_ttest(
    mean_a: float, mean_b: float, se_a: float, se_b: float, df: float
) -> TTestResult:
    if mean_a == mean_b:
        return TTestResult(
            t_value=0.0,
            degrees_of_freedom=df,
            p_value=1.0,
            group_means=(mean_a, mean_b),
            group_standard_errors=(se_a, se_b),
        )
    return TTestResult(
        t_value=math.inf if mean_a > mean_b else -math.inf,
        degrees_of_freedom=df,
        p_value=0.0,
        group_means=(mean_a, mean_b),
        group_standard_errors=(se_a, se_b),
        zero_variance=True,
    )


# --- Report table ------------------------------------------------------------

REGRESSION_REPORT_COLUMNS = [
    "model",
    "dependent",
    "independent",
    "r_squared",
    "beta",
    "constant",
    "significance",
]


def write_regression_report(
    rows: Sequence[dict], target: IO[str] | str
) -> None:
    """Write fitted models as one CSV row per non-intercept term.

    Each row dict needs: model (int), dependent, independent, r_squared,
    beta, constant, significance. Moderated fits contribute one row per term
    sharing the model number, R-squared and constant.
    """
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_regression_report(rows, fh)
            return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(REGRESSION_REPORT_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row["model"],
                row["dependent"],
                row["independent"],
                repr(row["r_squared"]),
                repr(row["beta"]),
                repr(row["constant"]),
                repr(row["significance"]),
            ]
        )


def regression_report_rows(
    model_number: int, dependent: str, term_labels: dict[str, str], fit: RegressionFit
) -> list[dict]:
    """Flatten one fit into report rows (one per labelled non-intercept term)."""
    rows = []
    for term, label in term_labels.items():
        rows.append(
            {
                "model": model_number,
                "dependent": dependent,
                "independent": label,
                "r_squared": fit.r_squared,
                "beta": fit.coefficients[term],
                "constant": fit.coefficients["intercept"],
                "significance": fit.p_values[term],
            }
        )
    return rows
