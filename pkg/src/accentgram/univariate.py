"""Per-feature two-group comparisons.

For each feature the battery runs normality checks (Shapiro-Wilk and a
Lilliefors-corrected Kolmogorov-Smirnov test, since mean and SD are
estimated), Levene's variance test, and an independent-samples t-test that
switches to Welch's form when Levene rejects at 0.05. Effect sizes are
Cohen's d on the pooled SD; the multiple-comparison flag uses a Bonferroni
threshold of alpha / n_features.

Group "a" is whichever group the caller passes first; p-values are
order-invariant while t and d flip sign.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .special import f_cdf, normal_cdf, normal_ppf, t_cdf, t_ppf

STUDENT = "student"
WELCH = "welch"

# Levene gate for choosing Welch over Student; conventional fixed level,
# independent of the reporting alpha.
_VARIANCE_GATE_P = 0.05


@dataclass(frozen=True)
class GroupSample:
    """One feature's values for every speaker of one group."""

    label: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 2:
            raise DataError(f"group {self.label!r}: need at least 2 values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError(f"group {self.label!r}: values must be finite")

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def mean(self) -> float:
        return float(self.values.mean())

    @property
    def sd(self) -> float:
        return float(self.values.std(ddof=1))


@dataclass(frozen=True)
class TTestRow:
    """One feature's comparison: moments, test, CI, effect size, flag."""

    feature: int
    mean_a: float
    sd_a: float
    mean_b: float
    sd_b: float
    test_used: str
    t: float
    df: float
    p_two_sided: float
    p_one_sided: float
    ci_low: float
    ci_high: float
    cohens_d: float
    significant_bonferroni: bool = False


@dataclass(frozen=True)
class NormalityReport:
    feature: int
    group: str
    shapiro_w: float
    shapiro_p: float
    ks_d: float
    ks_p: float


@dataclass(frozen=True)
class VarianceTestResult:
    feature: int
    levene_w: float
    levene_p: float


@dataclass(frozen=True)
class FeatureTestReport:
    """Full battery over all features of a two-group dataset."""

    label_a: str
    label_b: str
    alpha: float
    bonferroni_alpha: float
    rows: tuple[TTestRow, ...]
    normality: tuple[NormalityReport, ...]
    variance: tuple[VarianceTestResult, ...]


def shapiro_wilk(x) -> tuple[float, float]:
    """Shapiro-Wilk W and p for 3 <= n <= 5000.

    Royston's AS R94 approximation: Blom-style normal scores, polynomial
    corrections for the two outermost weights, and a normalizing
    transformation of 1 - W whose parameters depend on the branch
    (n = 3 exact, 4 <= n <= 11, n >= 12).
    """
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    if not np.all(np.isfinite(x)):
        raise DataError("shapiro_wilk: values must be finite")
    if not 3 <= n <= 5000:
        raise DataError(f"shapiro_wilk: n must be in [3, 5000], got {n}")
    ss = float(np.sum((x - x.mean()) ** 2))
    if ss <= 0.0:
        raise DataError("shapiro_wilk: sample is constant, W undefined")

    m = np.array([normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)])
    mm = float(m @ m)
    a = m / np.sqrt(mm)
    if n > 5:
        u = 1.0 / np.sqrt(n)
        a_n = a[-1] + u * (0.221157 + u * (-0.147981 + u * (-2.071190 + u * (4.434685 - 2.706056 * u))))
        a_n1 = a[-2] + u * (0.042981 + u * (-0.293762 + u * (-1.752461 + u * (5.682633 - 3.582633 * u))))
        phi = (mm - 2.0 * m[-1] ** 2 - 2.0 * m[-2] ** 2) / (1.0 - 2.0 * a_n**2 - 2.0 * a_n1**2)
        a = m / np.sqrt(phi)
        a[-1], a[-2] = a_n, a_n1
        a[0], a[1] = -a_n, -a_n1
    elif n > 3:
        u = 1.0 / np.sqrt(n)
        a_n = a[-1] + u * (0.221157 + u * (-0.147981 + u * (-2.071190 + u * (4.434685 - 2.706056 * u))))
        phi = (mm - 2.0 * m[-1] ** 2) / (1.0 - 2.0 * a_n**2)
        a = m / np.sqrt(phi)
        a[-1] = a_n
        a[0] = -a_n
    else:
        a = np.array([-np.sqrt(0.5), 0.0, np.sqrt(0.5)])

    w = float(a @ (x - x.mean())) ** 2 / ss
    w = min(w, 1.0)

    if n == 3:
        p = 6.0 / np.pi * (np.arcsin(np.sqrt(w)) - np.arcsin(np.sqrt(0.75)))
        return w, float(min(max(p, 0.0), 1.0))
    one_minus = max(1.0 - w, 1e-15)
    if n <= 11:
        gamma = -2.273 + 0.459 * n
        arg = gamma - np.log(one_minus)
        if arg <= 0.0:  # beyond the fitted range; W this low is decisive
            return w, 0.0
        z_w = -np.log(arg)
        mu = 0.5440 + n * (-0.39978 + n * (0.025054 - 0.0006714 * n))
        sigma = np.exp(1.3822 + n * (-0.77857 + n * (0.062767 - 0.0020322 * n)))
    else:
        ln_n = np.log(n)
        z_w = np.log(one_minus)
        mu = -1.5861 + ln_n * (-0.31082 + ln_n * (-0.083751 + 0.0038915 * ln_n))
        sigma = np.exp(-0.4803 + ln_n * (-0.082676 + 0.0030302 * ln_n))
    p = 1.0 - normal_cdf((z_w - mu) / sigma)
    return w, float(min(max(p, 0.0), 1.0))


# Stephens' polynomial fit of the Lilliefors null distribution, applied to
# the modified statistic (sqrt(n) - 0.01 + 0.85/sqrt(n)) * D. Valid where
# the Dallal-Wilkinson formula is not (p > 0.1).
_STEPHENS_SEGMENTS = (
    (0.500, (2.76773, -19.828315, 80.709644, -138.55152, 81.218052)),
    (0.900, (-4.901232, 40.662806, -97.490286, 94.029866, -32.355711)),
    (1.310, (6.198765, -19.558097, 23.186922, -12.234627, 2.423045)),
)


def ks_lilliefors(x) -> tuple[float, float]:
    """Kolmogorov-Smirnov D against the fitted normal, with Lilliefors p.

    D compares the empirical CDF to Phi((x - mean)/sd) with both parameters
    estimated from the sample. The p-value uses the Dallal-Wilkinson
    formula (statistic rescaled by (n/100)^0.49 when n > 100), falling back
    to Stephens' table fit when that formula leaves its p <= 0.1 validity
    range.
    """
    x = np.sort(np.asarray(x, dtype=np.float64))
    n = x.size
    if not np.all(np.isfinite(x)):
        raise DataError("ks_lilliefors: values must be finite")
    if n < 4:
        raise DataError(f"ks_lilliefors: n must be at least 4, got {n}")
    sd = float(x.std(ddof=1))
    if sd <= 0.0:
        raise DataError("ks_lilliefors: sample is constant, D undefined")

    cdf = np.array([normal_cdf(z) for z in (x - x.mean()) / sd])
    steps = np.arange(1, n + 1) / n
    d = float(max(np.max(steps - cdf), np.max(cdf - (steps - 1.0 / n))))

    if n > 100:
        d_eff, n_eff = d * (n / 100.0) ** 0.49, 100.0
    else:
        d_eff, n_eff = d, float(n)
    p = np.exp(
        -7.01256 * d_eff**2 * (n_eff + 2.78019)
        + 2.99587 * d_eff * np.sqrt(n_eff + 2.78019)
        - 0.122119
        + 0.974598 / np.sqrt(n_eff)
        + 1.67997 / n_eff
    )
    if p > 0.1:
        kk = (np.sqrt(n) - 0.01 + 0.85 / np.sqrt(n)) * d
        if kk <= 0.302:
            p = 1.0
        else:
            for upper, coeffs in _STEPHENS_SEGMENTS:
                if kk <= upper:
                    p = coeffs[0] + kk * (coeffs[1] + kk * (coeffs[2] + kk * (coeffs[3] + kk * coeffs[4])))
                    break
            else:
                p = 0.0
    return d, float(min(max(float(p), 0.0), 1.0))


def levene(a: GroupSample, b: GroupSample, feature: int = 0) -> VarianceTestResult:
    """Levene's equality-of-variances test, mean-centered variant.

    W is the one-way ANOVA F on Z_ij = |x_ij - group mean|, referred to
    F(1, N-2).
    """
    z_a = np.abs(a.values - a.mean)
    z_b = np.abs(b.values - b.mean)
    grand = (z_a.sum() + z_b.sum()) / (a.n + b.n)
    between = a.n * (z_a.mean() - grand) ** 2 + b.n * (z_b.mean() - grand) ** 2
    within = float(np.sum((z_a - z_a.mean()) ** 2) + np.sum((z_b - z_b.mean()) ** 2))
    if within <= 0.0:
        raise NumericalError("levene: within-group deviations are constant in both groups")
    df2 = a.n + b.n - 2
    w = df2 * between / within
    return VarianceTestResult(feature=feature, levene_w=float(w), levene_p=1.0 - f_cdf(w, 1.0, float(df2)))


def pooled_sd(sd_a: float, n_a: int, sd_b: float, n_b: int) -> float:
    return float(np.sqrt(((n_a - 1) * sd_a**2 + (n_b - 1) * sd_b**2) / (n_a + n_b - 2)))


def cohens_d(a: GroupSample, b: GroupSample) -> float:
    """Standardized mean difference (a - b) over the pooled SD."""
    sp = pooled_sd(a.sd, a.n, b.sd, b.n)
    if sp <= 0.0:
        return 0.0 if a.mean == b.mean else np.inf * np.sign(a.mean - b.mean)
    return (a.mean - b.mean) / sp


def t_test_from_stats(
    mean_a: float,
    sd_a: float,
    n_a: int,
    mean_b: float,
    sd_b: float,
    n_b: int,
    variant: str = WELCH,
    feature: int = 0,
) -> TTestRow:
    """Two-sample t-test from summary statistics.

    Student pools variances with df = n_a + n_b - 2; Welch uses separate
    variances with Welch-Satterthwaite df. The 95% CI covers the mean
    difference (a - b); p_one_sided is the tail in the direction of the
    observed difference (half of p_two_sided).
    """
    if n_a < 2 or n_b < 2:
        raise DataError(f"t-test needs n >= 2 per group, got {n_a} and {n_b}")
    var_a, var_b = sd_a**2, sd_b**2
    if variant == STUDENT:
        df = float(n_a + n_b - 2)
        se = pooled_sd(sd_a, n_a, sd_b, n_b) * np.sqrt(1.0 / n_a + 1.0 / n_b)
    elif variant == WELCH:
        ua, ub = var_a / n_a, var_b / n_b
        se = np.sqrt(ua + ub)
        if se <= 0.0:
            raise NumericalError("t-test: zero standard error")
        df = (ua + ub) ** 2 / (ua**2 / (n_a - 1) + ub**2 / (n_b - 1))
    else:
        raise ValueError(f"unknown t-test variant {variant!r}")
    if se <= 0.0:
        raise NumericalError("t-test: zero standard error")

    diff = mean_a - mean_b
    t = diff / se
    tail = 1.0 - t_cdf(abs(t), df)
    half_width = t_ppf(0.975, df) * se
    sp = pooled_sd(sd_a, n_a, sd_b, n_b)
    return TTestRow(
        feature=feature,
        mean_a=float(mean_a),
        sd_a=float(sd_a),
        mean_b=float(mean_b),
        sd_b=float(sd_b),
        test_used=variant,
        t=float(t),
        df=float(df),
        p_two_sided=float(min(2.0 * tail, 1.0)),
        p_one_sided=float(tail),
        ci_low=float(diff - half_width),
        ci_high=float(diff + half_width),
        cohens_d=float(diff / sp) if sp > 0.0 else 0.0,
    )


def t_test(a: GroupSample, b: GroupSample, variant: str = WELCH, feature: int = 0) -> TTestRow:
    return t_test_from_stats(a.mean, a.sd, a.n, b.mean, b.sd, b.n, variant, feature)


def bonferroni_threshold(alpha: float, m: int) -> float:
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if m < 1:
        raise ValueError(f"comparison count must be positive, got {m}")
    return alpha / m


def run_feature_tests(
    values_a: np.ndarray,
    values_b: np.ndarray,
    label_a: str,
    label_b: str,
    alpha: float = 0.05,
) -> FeatureTestReport:
    """Run the full battery over every column of two (n_i x p) matrices.

    Per feature: Levene decides Student vs Welch (gate at p < 0.05), then
    the t-test row is flagged against the Bonferroni threshold alpha / p.
    Normality statistics are reported per group and feature. Features are
    numbered from 1 in column order.
    """
    values_a = np.asarray(values_a, dtype=np.float64)
    values_b = np.asarray(values_b, dtype=np.float64)
    if values_a.ndim != 2 or values_b.ndim != 2 or values_a.shape[1] != values_b.shape[1]:
        raise DataError("feature matrices must be 2-D with matching column counts")
    if values_a.shape[0] < 2 or values_b.shape[0] < 2:
        raise DataError(
            f"need at least 2 speakers per group, got {values_a.shape[0]} ({label_a}) "
            f"and {values_b.shape[0]} ({label_b})"
        )
    n_features = values_a.shape[1]
    threshold = bonferroni_threshold(alpha, n_features)

    rows = []
    normality = []
    variance = []
    for j in range(n_features):
        feature = j + 1
        a = GroupSample(label_a, values_a[:, j])
        b = GroupSample(label_b, values_b[:, j])
        var_result = levene(a, b, feature=feature)
        variance.append(var_result)
        variant = WELCH if var_result.levene_p < _VARIANCE_GATE_P else STUDENT
        row = t_test(a, b, variant, feature=feature)
        rows.append(dataclasses.replace(row, significant_bonferroni=row.p_two_sided < threshold))
        for sample in (a, b):
            w, p_w = shapiro_wilk(sample.values)
            d, p_d = ks_lilliefors(sample.values)
            normality.append(
                NormalityReport(
                    feature=feature, group=sample.label, shapiro_w=w, shapiro_p=p_w, ks_d=d, ks_p=p_d
                )
            )
    return FeatureTestReport(
        label_a=label_a,
        label_b=label_b,
        alpha=alpha,
        bonferroni_alpha=threshold,
        rows=tuple(rows),
        normality=tuple(normality),
        variance=tuple(variance),
    )
