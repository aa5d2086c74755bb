"""Evaluation statistics for the tactile-pattern study and the workload survey.

Covers the full pipeline from raw trial logs to the numbers a study report
quotes: confusion matrix and recognition rate, one-way ANOVA (plus the
repeated-measures variant, labeled), all pairwise paired t-tests, and NASA
TLX scoring.  Distribution CDFs are computed in-repo via the regularized
incomplete beta function so p-values carry no external dependency.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, IncompleteDesign, ParameterError, ValidationError

N_PATTERNS = 8

TLX_SUBSCALES = ("mental", "physical", "temporal", "performance", "effort", "frustration")


# ---------------------------------------------------------------------------
# records

@dataclass
class TrialRecord:
    """One pattern-presentation trial: what was played vs. what was reported."""

    subject: str
    actual: int
    perceived: int
    response_time_s: float

    def __post_init__(self):
        if not (1 <= self.actual <= N_PATTERNS and 1 <= self.perceived <= N_PATTERNS):
            raise ValidationError(
                f"pattern ids must be in 1..{N_PATTERNS}, got actual={self.actual} perceived={self.perceived}"
            )
        if self.response_time_s <= 0:
            raise ValidationError(f"response_time_s must be > 0, got {self.response_time_s}")


@dataclass
class ConfusionMatrix:
    """Row-stochastic actual-vs-perceived matrix with raw counts alongside.

    ``normalized`` rows sum to 1 when built from trials; a matrix ingested
    from a rounded published table may be off by up to ±0.03 per row.
    """

    counts: np.ndarray
    normalized: np.ndarray


@dataclass
class AnovaResult:
    F: float
    df1: int
    df2: int
    p: float
    kind: str = "oneway"


@dataclass
class TTestResult:
    t: float
    df: int
    p: float
    degenerate: bool = False


@dataclass
class TlxResponse:
    """Six-subscale workload response, optionally with pairwise weights.

    The standard weighting scheme distributes 15 pairwise wins over the six
    subscales, so weights (when given) must sum to 15.
    """

    mental: float
    physical: float
    temporal: float
    performance: float
    effort: float
    frustration: float
    weights: dict | None = None

    def subscales(self):
        return {name: getattr(self, name) for name in TLX_SUBSCALES}

    def validate(self, scale=(0.0, 10.0)):
        lo, hi = scale
        for name, value in self.subscales().items():
            if not (lo <= value <= hi):
                raise ValidationError(f"subscale {name}={value} outside scale [{lo}, {hi}]")
        if self.weights is not None:
            missing = [n for n in TLX_SUBSCALES if n not in self.weights]
            if missing:
                raise ValidationError(f"weights missing subscales: {missing}")
            total = sum(self.weights[n] for n in TLX_SUBSCALES)
            if abs(total - 15.0) > 1e-9:
                raise ValidationError(f"weights must sum to 15, got {total}")


# ---------------------------------------------------------------------------
# confusion matrix and recognition rate

def confusion_matrix(trials) -> ConfusionMatrix:
    """Tally trials into an 8x8 counts matrix and row-normalize it.

    Every actual pattern must appear at least once, otherwise the design is
    incomplete and normalization would divide by zero.
    """
    if not trials:
        raise IncompleteDesign("no trials given")
    counts = np.zeros((N_PATTERNS, N_PATTERNS), dtype=np.int64)
    for tr in trials:
        counts[tr.actual - 1, tr.perceived - 1] += 1
    row_totals = counts.sum(axis=1)
    missing = np.nonzero(row_totals == 0)[0]
    if missing.size:
        raise IncompleteDesign(
            f"actual pattern(s) never presented: {[int(i) + 1 for i in missing]}"
        )
    normalized = counts / row_totals[:, None]
    return ConfusionMatrix(counts=counts, normalized=normalized)


def confusion_matrix_from_table(cells, row_total=100.0) -> ConfusionMatrix:
    """Ingest an already-aggregated table (e.g. a published one).

    ``cells`` is an 8x8 array of per-row counts out of ``row_total``
    presentations.  Cells are divided by ``row_total`` as given, *not*
    re-normalized, so a table whose rounded rows sum to 1.02 keeps its
    published diagonal values.  Row sums are still sanity-checked to be
    within rounding distance of 1.
    """
    cells = np.asarray(cells, dtype=float)
    if cells.shape != (N_PATTERNS, N_PATTERNS):
        raise ValidationError(f"expected an {N_PATTERNS}x{N_PATTERNS} table, got {cells.shape}")
    normalized = cells / float(row_total)
    row_sums = normalized.sum(axis=1)
    if np.any(row_sums < 0.97) or np.any(row_sums > 1.03):
        raise ValidationError(f"table row sums {row_sums.round(3).tolist()} too far from 1")
    return ConfusionMatrix(counts=np.rint(cells).astype(np.int64), normalized=normalized)


def recognition_rate(cm: ConfusionMatrix) -> float:
    """Unweighted mean of the diagonal of the normalized matrix."""
    return float(np.mean(np.diag(cm.normalized)))


def subject_accuracy(trials):
    """Per-subject, per-pattern fraction of correct answers.

    Returns (subjects, table) where table[i, p] is subject i's accuracy on
    pattern p+1.  This is the layout both ANOVA variants and the pairwise
    t-tests consume.
    """
    subjects = sorted({tr.subject for tr in trials})
    index = {s: i for i, s in enumerate(subjects)}
    correct = np.zeros((len(subjects), N_PATTERNS))
    total = np.zeros((len(subjects), N_PATTERNS))
    for tr in trials:
        i = index[tr.subject]
        total[i, tr.actual - 1] += 1
        if tr.perceived == tr.actual:
            correct[i, tr.actual - 1] += 1
    if np.any(total == 0):
        raise IncompleteDesign("every subject must see every pattern at least once")
    return subjects, correct / total


# ---------------------------------------------------------------------------
# distribution CDFs (regularized incomplete beta, continued fraction)

_BETA_TOL = 1e-12
_BETA_MAX_ITER = 500


def _betacf(a, b, x):
    # Lentz's continued fraction for the incomplete beta integral.
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITER + 1):
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
        if abs(delta - 1.0) < _BETA_TOL:
            return h
    raise ParameterError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def betainc_reg(a, b, x) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ParameterError(f"beta parameters must be positive, got a={a}, b={b}")
    if x < 0.0 or x > 1.0:
        raise ParameterError(f"x must be in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_cdf(x, df) -> float:
    """CDF of Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ParameterError(f"df must be positive, got {df}")
    if x == 0.0:
        return 0.5
    tail = 0.5 * betainc_reg(df / 2.0, 0.5, df / (df + x * x))
    return 1.0 - tail if x > 0 else tail


def f_cdf(x, df1, df2) -> float:
    """CDF of the F distribution with (df1, df2) degrees of freedom."""
    if df1 <= 0 or df2 <= 0:
        raise ParameterError(f"dfs must be positive, got ({df1}, {df2})")
    if x <= 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    return betainc_reg(df1 / 2.0, df2 / 2.0, df1 * x / (df1 * x + df2))


def dist_cdf(kind, x) -> float:
    """Dispatch on ("t", df) or ("f", df1, df2)."""
    name = kind[0].lower()
    if name == "t":
        return t_cdf(x, kind[1])
    if name == "f":
        return f_cdf(x, kind[1], kind[2])
    raise ParameterError(f"unknown distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# ANOVA and t-tests

def anova_oneway(groups) -> AnovaResult:
    """One-way between-groups ANOVA over k groups of observations."""
    if len(groups) < 2:
        raise ParameterError("need at least 2 groups")
    groups = [np.asarray(g, dtype=float) for g in groups]
    if any(g.size < 2 for g in groups):
        raise ParameterError("each group needs at least 2 values")
    k = len(groups)
    n_total = sum(g.size for g in groups)
    grand = sum(g.sum() for g in groups) / n_total
    ssb = sum(g.size * (g.mean() - grand) ** 2 for g in groups)
    ssw = sum(((g - g.mean()) ** 2).sum() for g in groups)
    df1, df2 = k - 1, n_total - k
    if ssw == 0.0 and ssb == 0.0:
        raise DegenerateInput("all observations identical; F undefined")
    if ssw == 0.0:
        return AnovaResult(F=math.inf, df1=df1, df2=df2, p=0.0)
    F = (ssb / df1) / (ssw / df2)
    return AnovaResult(F=F, df1=df1, df2=df2, p=1.0 - f_cdf(F, df1, df2))


def anova_repeated_measures(table) -> AnovaResult:
    """Single-factor repeated-measures ANOVA on an (n_subjects, k) table.

    Error df is (k-1)(n-1), which for 7 subjects x 8 conditions gives 42,
    not the 48 a between-groups layout produces; both variants are exposed
    and labeled so reports can state which one they used.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[0] < 2 or table.shape[1] < 2:
        raise ParameterError("need an (n_subjects >= 2, k >= 2) table")
    n, k = table.shape
    grand = table.mean()
    ss_cond = n * ((table.mean(axis=0) - grand) ** 2).sum()
    ss_subj = k * ((table.mean(axis=1) - grand) ** 2).sum()
    ss_total = ((table - grand) ** 2).sum()
    ss_err = ss_total - ss_cond - ss_subj
    df1, df2 = k - 1, (k - 1) * (n - 1)
    if ss_err <= 0.0 and ss_cond == 0.0:
        raise DegenerateInput("no residual variance; F undefined")
    if ss_err <= 0.0:
        return AnovaResult(F=math.inf, df1=df1, df2=df2, p=0.0, kind="repeated_measures")
    F = (ss_cond / df1) / (ss_err / df2)
    return AnovaResult(F=F, df1=df1, df2=df2, p=1.0 - f_cdf(F, df1, df2), kind="repeated_measures")


def paired_ttest(a, b) -> TTestResult:
    """Two-sided paired t-test on equal-length samples."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ParameterError("samples must be 1-d and of equal length")
    n = a.size
    if n < 2:
        raise ParameterError("need at least 2 pairs")
    d = a - b
    mean = d.mean()
    sd = d.std(ddof=1)
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            raise DegenerateInput("all differences are zero; t undefined")
        # constant nonzero shift: infinitely significant, flagged as degenerate
        return TTestResult(t=math.copysign(math.inf, mean), df=df, p=0.0, degenerate=True)
    t = mean / (sd / math.sqrt(n))
    p = 2.0 * (1.0 - t_cdf(abs(t), df))
    return TTestResult(t=t, df=df, p=p)


def pairwise_ttests(accuracy_table):
    """Paired t-tests between every pattern pair on a per-subject table.

    Returns {(i, j): TTestResult} for 1 <= i < j <= 8; degenerate pairs
    (identical columns) are skipped.
    """
    table = np.asarray(accuracy_table, dtype=float)
    results = {}
    for i in range(N_PATTERNS):
        for j in range(i + 1, N_PATTERNS):
            try:
                results[(i + 1, j + 1)] = paired_ttest(table[:, i], table[:, j])
            except DegenerateInput:
                continue
    return results


# ---------------------------------------------------------------------------
# NASA TLX

def tlx_score(resp: TlxResponse, scale=(0.0, 10.0)) -> dict:
    """Raw (mean of six) and, when weights exist, weighted TLX score."""
    resp.validate(scale=scale)
    values = resp.subscales()
    raw = sum(values.values()) / len(TLX_SUBSCALES)
    weighted = None
    if resp.weights is not None:
        weighted = sum(values[n] * resp.weights[n] for n in TLX_SUBSCALES) / 15.0
    return {"raw": raw, "weighted": weighted}


def aggregate_tlx(responses, scale=(0.0, 10.0)) -> dict:
    """Per-subscale means plus the overall mean, Table-style."""
    if not responses:
        raise ParameterError("need at least one response")
    for resp in responses:
        resp.validate(scale=scale)
    means = {
        name: float(np.mean([getattr(r, name) for r in responses]))
        for name in TLX_SUBSCALES
    }
    means["overall_raw"] = sum(means[n] for n in TLX_SUBSCALES) / len(TLX_SUBSCALES)
    return means


def format_tlx_table(means) -> str:
    label = {
        "mental": "Mental Demand",
        "physical": "Physical Demand",
        "temporal": "Temporal Demand",
        "performance": "Performance",
        "effort": "Effort",
        "frustration": "Frustration",
    }
    lines = [f"{label[n]:<18} {means[n]:6.2f}" for n in TLX_SUBSCALES]
    lines.append(f"{'Raw TLX Score':<18} {means['overall_raw']:6.2f}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# CSV ingestion

TRIALS_HEADER = ["subject", "actual", "perceived", "response_time_s"]


def load_trials_csv(path):
    """Load a trials log: ``subject,actual,perceived,response_time_s``."""
    trials = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != TRIALS_HEADER:
            raise ValidationError(
                f"expected header {','.join(TRIALS_HEADER)}, got {reader.fieldnames}"
            )
        for row in reader:
            trials.append(
                TrialRecord(
                    subject=row["subject"].strip(),
                    actual=int(row["actual"]),
                    perceived=int(row["perceived"]),
                    response_time_s=float(row["response_time_s"]),
                )
            )
    return trials


def load_table_csv(path, row_total=100.0) -> ConfusionMatrix:
    """Load an 8x8 aggregated counts table (header row optional)."""
    rows = []
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            record = [c for c in record if c.strip() != ""]
            if not record:
                continue
            try:
                rows.append([float(c) for c in record])
            except ValueError:
                continue  # header row
    return confusion_matrix_from_table(rows, row_total=row_total)


def sniff_trials_file(path) -> str:
    """Distinguish a per-trial log from an aggregated table by its header."""
    with open(path, newline="") as fh:
        first = fh.readline()
    fields = [f.strip() for f in first.strip().split(",")]
    return "trials" if fields == TRIALS_HEADER else "table"


def load_tlx_csv(path):
    """Load TLX responses; weight columns ``w_<subscale>`` are optional."""
    responses = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        fields = reader.fieldnames or []
        missing = [n for n in TLX_SUBSCALES if n not in fields]
        if missing:
            raise ValidationError(f"TLX csv missing columns: {missing}")
        weight_cols = {n: f"w_{n}" for n in TLX_SUBSCALES if f"w_{n}" in fields}
        for row in reader:
            weights = None
            if len(weight_cols) == len(TLX_SUBSCALES):
                weights = {n: float(row[c]) for n, c in weight_cols.items()}
            responses.append(
                TlxResponse(
                    **{n: float(row[n]) for n in TLX_SUBSCALES},
                    weights=weights,
                )
            )
    return responses
