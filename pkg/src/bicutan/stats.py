"""Designed-experiment statistics for the scheme comparisons.

One-way and randomized-complete-block ANOVA with F p-values, Duncan's
multiple range test with letter groupings, and simple linear regression
with two-tailed coefficient t-tests.  F and t tail probabilities share a
single regularized incomplete beta implementation (continued fractions
with the standard symmetry switch), so the identity
``f_pvalue(F, 1, d) == t_pvalue(sqrt(F), d)`` holds to float precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

_SS_REL_TOL = 1e-9
# Render threshold only; raw p-values keep full precision.
P_RENDER_FLOOR = 1e-4


class StatsError(ValueError):
    """Invalid input to a statistical routine."""


# ---------------------------------------------------------------------------
# special functions


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    return h  # converged to working precision for all practical (a, b)


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise StatsError("incomplete beta requires a, b > 0")
    if x < 0.0 or x > 1.0:
        raise StatsError("incomplete beta requires x in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_pvalue(f: float, df1: int, df2: int) -> float:
    """Upper-tail probability of the F distribution."""
    if df1 < 1 or df2 < 1:
        raise StatsError("degrees of freedom must be >= 1")
    if f < 0:
        raise StatsError("F statistic must be >= 0")
    if math.isinf(f):
        return 0.0
    x = df2 / (df2 + df1 * f)
    return regularized_incomplete_beta(df2 / 2.0, df1 / 2.0, x)


def t_pvalue(t: float, df: int) -> float:
    """Two-tailed probability for a t statistic."""
    if df < 1:
        raise StatsError("degrees of freedom must be >= 1")
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


# ---------------------------------------------------------------------------
# ANOVA


@dataclass(frozen=True)
class AnovaRow:
    source: str
    df: int
    ss: float
    ms: Optional[float] = None
    f: Optional[float] = None
    p: Optional[float] = None


@dataclass(frozen=True)
class AnovaTable:
    rows: Tuple[AnovaRow, ...]
    degenerate: bool = False  # zero error SS with a nonzero effect

    def row(self, source: str) -> AnovaRow:
        for r in self.rows:
            if r.source == source:
                return r
        raise KeyError(source)

    @property
    def error(self) -> AnovaRow:
        return self.row("Error")

    @property
    def total(self) -> AnovaRow:
        return self.row("Total")


def _f_and_p(ms_num: float, ms_err: float, df_num: int, df_err: int):
    """F = MS/MS_error with the degenerate zero-error case flagged."""
    if ms_err > 0.0:
        f = ms_num / ms_err
        return f, f_pvalue(f, df_num, df_err), False
    if ms_num == 0.0:
        return 0.0, 1.0, False
    return math.inf, 0.0, True


def one_way_anova(groups: Sequence[Tuple[str, Sequence[float]]]) -> AnovaTable:
    """One-way fixed-effects ANOVA over labelled groups."""
    if len(groups) < 2:
        raise StatsError("one-way ANOVA needs at least 2 groups")
    arrays = []
    for label, values in groups:
        arr = np.asarray(values, dtype=float)
        if arr.size < 2:
            raise StatsError(f"group {label!r}: needs at least 2 values")
        arrays.append(arr)
    k = len(arrays)
    all_values = np.concatenate(arrays)
    n_total = all_values.size
    grand = all_values.mean()

    ss_treat = sum(a.size * (a.mean() - grand) ** 2 for a in arrays)
    ss_error = sum(((a - a.mean()) ** 2).sum() for a in arrays)
    ss_total = ((all_values - grand) ** 2).sum()

    df_treat = k - 1
    df_error = n_total - k
    ms_treat = ss_treat / df_treat
    ms_error = ss_error / df_error
    f, p, degenerate = _f_and_p(ms_treat, ms_error, df_treat, df_error)

    rows = (
        AnovaRow("T", df_treat, ss_treat, ms_treat, f, p),
        AnovaRow("Error", df_error, ss_error, ms_error),
        AnovaRow("Total", n_total - 1, ss_total),
    )
    return AnovaTable(rows=rows, degenerate=degenerate)


def rcbd_anova(table) -> AnovaTable:
    """Randomized-complete-block ANOVA of a blocks x treatments matrix."""
    data = np.asarray(table, dtype=float)
    if data.ndim != 2:
        raise StatsError("RCBD input must be a 2-D blocks x treatments matrix")
    b, t = data.shape
    if b < 2 or t < 2:
        raise StatsError("RCBD needs at least 2 blocks and 2 treatments")

    grand = data.mean()
    block_means = data.mean(axis=1)
    treat_means = data.mean(axis=0)

    ss_block = t * ((block_means - grand) ** 2).sum()
    ss_treat = b * ((treat_means - grand) ** 2).sum()
    ss_total = ((data - grand) ** 2).sum()
    ss_error = ss_total - ss_block - ss_treat

    df_block = b - 1
    df_treat = t - 1
    df_error = (b - 1) * (t - 1)
    ms_block = ss_block / df_block
    ms_treat = ss_treat / df_treat
    ms_error = ss_error / df_error

    f_b, p_b, degen_b = _f_and_p(ms_block, ms_error, df_block, df_error)
    f_t, p_t, degen_t = _f_and_p(ms_treat, ms_error, df_treat, df_error)

    rows = (
        AnovaRow("Replication", df_block, ss_block, ms_block, f_b, p_b),
        AnovaRow("Treatment", df_treat, ss_treat, ms_treat, f_t, p_t),
        AnovaRow("Error", df_error, ss_error, ms_error),
        AnovaRow("Total", b * t - 1, ss_total),
    )
    return AnovaTable(rows=rows, degenerate=degen_b or degen_t)


# ---------------------------------------------------------------------------
# Duncan's multiple range test

# Significant ranges r(p, df) for Duncan's multiple range test at the 5%
# level (Duncan 1955, Harter's corrected values), p = number of means
# spanned.  Intermediate df interpolate linearly in 1/df.
_DUNCAN_ALPHA = 0.05
_DUNCAN_P = tuple(range(2, 11))
_DUNCAN_TABLE = {
    1: (17.97, 17.97, 17.97, 17.97, 17.97, 17.97, 17.97, 17.97, 17.97),
    2: (6.085, 6.085, 6.085, 6.085, 6.085, 6.085, 6.085, 6.085, 6.085),
    3: (4.501, 4.516, 4.516, 4.516, 4.516, 4.516, 4.516, 4.516, 4.516),
    4: (3.927, 4.013, 4.033, 4.033, 4.033, 4.033, 4.033, 4.033, 4.033),
    5: (3.635, 3.749, 3.797, 3.814, 3.814, 3.814, 3.814, 3.814, 3.814),
    6: (3.461, 3.587, 3.649, 3.680, 3.694, 3.697, 3.697, 3.697, 3.697),
    7: (3.344, 3.477, 3.548, 3.588, 3.611, 3.622, 3.626, 3.626, 3.626),
    8: (3.261, 3.399, 3.475, 3.521, 3.549, 3.566, 3.575, 3.579, 3.579),
    9: (3.199, 3.339, 3.420, 3.470, 3.502, 3.523, 3.536, 3.544, 3.547),
    10: (3.151, 3.293, 3.376, 3.430, 3.465, 3.489, 3.505, 3.516, 3.522),
    11: (3.113, 3.256, 3.342, 3.397, 3.435, 3.462, 3.480, 3.493, 3.501),
    12: (3.082, 3.225, 3.313, 3.370, 3.410, 3.439, 3.459, 3.474, 3.484),
    13: (3.055, 3.200, 3.289, 3.348, 3.389, 3.419, 3.442, 3.458, 3.470),
    14: (3.033, 3.178, 3.268, 3.329, 3.372, 3.403, 3.426, 3.444, 3.457),
    15: (3.014, 3.160, 3.250, 3.312, 3.356, 3.389, 3.413, 3.432, 3.446),
    16: (2.998, 3.144, 3.235, 3.298, 3.343, 3.376, 3.402, 3.422, 3.437),
    17: (2.984, 3.130, 3.222, 3.285, 3.331, 3.366, 3.392, 3.412, 3.429),
    18: (2.971, 3.118, 3.210, 3.274, 3.321, 3.356, 3.383, 3.405, 3.421),
    19: (2.960, 3.107, 3.199, 3.264, 3.311, 3.347, 3.375, 3.397, 3.415),
    20: (2.950, 3.097, 3.190, 3.255, 3.303, 3.339, 3.368, 3.391, 3.409),
    24: (2.919, 3.066, 3.160, 3.226, 3.276, 3.315, 3.345, 3.370, 3.390),
    30: (2.888, 3.035, 3.131, 3.199, 3.250, 3.290, 3.322, 3.349, 3.371),
    40: (2.858, 3.006, 3.102, 3.171, 3.224, 3.266, 3.300, 3.328, 3.352),
    60: (2.829, 2.976, 3.073, 3.143, 3.198, 3.241, 3.277, 3.307, 3.333),
    120: (2.800, 2.947, 3.045, 3.116, 3.172, 3.217, 3.254, 3.287, 3.314),
}
_DUNCAN_INF = (2.772, 2.918, 3.017, 3.089, 3.146, 3.193, 3.232, 3.265, 3.294)
_DUNCAN_DF = sorted(_DUNCAN_TABLE)


def duncan_range(p: int, df_error: int, alpha: float = 0.05) -> float:
    """Significant range r_alpha(p, df) from the embedded 5% table."""
    if alpha != _DUNCAN_ALPHA:
        raise StatsError(f"alpha {alpha} not in the embedded Duncan table (only 0.05)")
    if p < 2:
        raise StatsError("range span p must be >= 2")
    if df_error < 1:
        raise StatsError("df_error must be >= 1")
    col = min(p, _DUNCAN_P[-1]) - 2
    if df_error in _DUNCAN_TABLE:
        return _DUNCAN_TABLE[df_error][col]
    if df_error > _DUNCAN_DF[-1]:
        lo_df, lo = _DUNCAN_DF[-1], _DUNCAN_TABLE[_DUNCAN_DF[-1]][col]
        hi_inv, hi = 0.0, _DUNCAN_INF[col]
        w = (1.0 / df_error - 1.0 / lo_df) / (hi_inv - 1.0 / lo_df)
        return lo + w * (hi - lo)
    lo_df = max(d for d in _DUNCAN_DF if d < df_error)
    hi_df = min(d for d in _DUNCAN_DF if d > df_error)
    lo = _DUNCAN_TABLE[lo_df][col]
    hi = _DUNCAN_TABLE[hi_df][col]
    w = (1.0 / df_error - 1.0 / lo_df) / (1.0 / hi_df - 1.0 / lo_df)
    return lo + w * (hi - lo)


@dataclass(frozen=True)
class DmrtGrouping:
    """Means sorted descending with their shared-letter groups."""

    labels: Tuple[str, ...]
    means: Tuple[float, ...]
    letters: Tuple[str, ...]  # per mean, e.g. "a", "ab"
    alpha: float
    df_error: int
    ms_error: float
    n_per_group: int

    def letters_for(self, label: str) -> str:
        return self.letters[self.labels.index(label)]

    def shares_letter(self, label_a: str, label_b: str) -> bool:
        return bool(set(self.letters_for(label_a)) & set(self.letters_for(label_b)))

    def top_group(self) -> Tuple[str, ...]:
        """Labels sharing a letter with the highest mean."""
        first = set(self.letters[0])
        return tuple(
            lab for lab, let in zip(self.labels, self.letters) if set(let) & first
        )

    def bottom_group(self) -> Tuple[str, ...]:
        """Labels sharing a letter with the lowest mean."""
        last = set(self.letters[-1])
        return tuple(
            lab for lab, let in zip(self.labels, self.letters) if set(let) & last
        )


def dmrt(
    means: Sequence[Tuple[str, float]],
    n: int,
    ms_error: float,
    df_error: int,
    alpha: float = 0.05,
) -> DmrtGrouping:
    """Duncan's multiple range test over group means.

    ``n`` is the (equal) replication count behind each mean and
    ``ms_error``/``df_error`` come from the source ANOVA.  Two means share
    a letter iff they lie in a common range whose spread is below the
    critical range for its span.
    """
    if n < 1:
        raise StatsError("n per group must be >= 1")
    if ms_error < 0:
        raise StatsError("ms_error must be >= 0")
    k = len(means)
    if k < 2:
        raise StatsError("DMRT needs at least 2 means")

    order = sorted(range(k), key=lambda i: (-means[i][1], means[i][0]))
    labels = tuple(means[i][0] for i in order)
    vals = tuple(float(means[i][1]) for i in order)
    se = math.sqrt(ms_error / n)
    crit = {p: duncan_range(p, df_error, alpha) * se for p in range(2, k + 1)}

    # Maximal non-significant stretches of the sorted means; any stretch
    # inside a declared-nonsignificant one is protected (never significant).
    # Exact ties always share a letter, even when the critical range is 0.
    intervals: List[Tuple[int, int]] = []
    for i in range(k):
        j_best = i
        for j in range(i + 1, k):
            span = j - i + 1
            diff = vals[i] - vals[j]
            if diff < crit[span] - 1e-12 or diff <= 1e-12:
                j_best = j
        intervals.append((i, j_best))
    maximal = [
        (i, j)
        for (i, j) in intervals
        if not any((i2 <= i and j <= j2) and (i2, j2) != (i, j) for (i2, j2) in intervals)
    ]
    maximal.sort()

    alphabet = "abcdefghijklmnopqrstuvwxyz"
    letters = ["" for _ in range(k)]
    for idx, (i, j) in enumerate(maximal):
        letter = alphabet[idx % len(alphabet)]
        for m in range(i, j + 1):
            letters[m] += letter

    return DmrtGrouping(
        labels=labels,
        means=vals,
        letters=tuple(letters),
        alpha=alpha,
        df_error=df_error,
        ms_error=ms_error,
        n_per_group=n,
    )


# ---------------------------------------------------------------------------
# simple linear regression


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    slope_p: float
    intercept_p: float
    slope_se: float
    intercept_se: float
    residual_df: int

    def significance_mark(self, p: float, alpha: float = 0.05) -> str:
        return "*" if p < alpha else "ns"

    def equation(self, y_name: str, x_name: str = "V(+)") -> str:
        s_mark = self.significance_mark(self.slope_p)
        i_mark = self.significance_mark(self.intercept_p)
        sign = "-" if self.intercept < 0 else "+"
        return (
            f"{y_name} = {self.slope:.2f}{s_mark} {x_name} {sign} "
            f"{abs(self.intercept):.2f}{i_mark}, r^2 = {self.r_squared:.2f}"
        )


def linear_regression(points: Sequence[Tuple[float, float]]) -> RegressionFit:
    """Ordinary least squares y = slope*x + intercept with t-tested terms."""
    if len(points) < 3:
        raise StatsError("regression needs at least 3 points")
    x = np.asarray([p[0] for p in points], dtype=float)
    y = np.asarray([p[1] for p in points], dtype=float)
    n = x.size
    sxx = ((x - x.mean()) ** 2).sum()
    if sxx == 0.0:
        raise StatsError("regression needs at least 2 distinct x values")
    sxy = ((x - x.mean()) * (y - y.mean())).sum()
    slope = sxy / sxx
    intercept = y.mean() - slope * x.mean()

    resid = y - (slope * x + intercept)
    sse = (resid**2).sum()
    sst = ((y - y.mean()) ** 2).sum()
    r_squared = 1.0 if sst == 0.0 else max(0.0, min(1.0, 1.0 - sse / sst))

    df = n - 2
    mse = sse / df
    slope_se = math.sqrt(mse / sxx)
    intercept_se = math.sqrt(mse * (1.0 / n + x.mean() ** 2 / sxx))
    slope_p = t_pvalue(slope / slope_se, df) if slope_se > 0 else (1.0 if slope == 0 else 0.0)
    intercept_p = (
        t_pvalue(intercept / intercept_se, df)
        if intercept_se > 0
        else (1.0 if intercept == 0 else 0.0)
    )
    return RegressionFit(
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        slope_p=slope_p,
        intercept_p=intercept_p,
        slope_se=slope_se,
        intercept_se=intercept_se,
        residual_df=df,
    )


# ---------------------------------------------------------------------------
# rendering


def format_p(p: float) -> str:
    if p < P_RENDER_FLOOR:
        return "< 0.0001"
    return f"{p:.4f}"


def render_anova(table: AnovaTable, title: str) -> str:
    """Aligned plain-text ANOVA table."""
    header = ("SOV", "DF", "Sum of Squares", "Mean Square", "F", "alpha_F")
    body = []
    for r in table.rows:
        body.append(
            (
                r.source,
                str(r.df),
                f"{r.ss:,.2f}",
                "" if r.ms is None else f"{r.ms:,.2f}",
                "" if r.f is None else ("inf" if math.isinf(r.f) else f"{r.f:.2f}"),
                "" if r.p is None else format_p(r.p),
            )
        )
    widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(header)]
    lines = [title]
    lines.append("  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip())
    for row in body:
        lines.append("  ".join(row[i].ljust(widths[i]) for i in range(len(header))).rstrip())
    if table.degenerate:
        lines.append("(degenerate: zero error variance)")
    return "\n".join(lines)


def render_dmrt(grouping: DmrtGrouping, title: str, unit: str = "") -> str:
    lines = [
        f"{title} (DMRT, alpha={grouping.alpha:.2f}; means sharing a letter "
        "are not significantly different)"
    ]
    width = max(len(lab) for lab in grouping.labels)
    for lab, mean, letters in zip(grouping.labels, grouping.means, grouping.letters):
        suffix = f" {unit}" if unit else ""
        lines.append(f"  {lab.ljust(width)}  {mean:10.3f}{suffix}  {letters}")
    return "\n".join(lines)
