import math

import numpy as np
import pytest
from scipy import integrate

from cobot.analytics import (
    TlxResponse,
    TrialRecord,
    aggregate_tlx,
    anova_oneway,
    anova_repeated_measures,
    betainc_reg,
    confusion_matrix,
    confusion_matrix_from_table,
    dist_cdf,
    f_cdf,
    load_table_csv,
    load_tlx_csv,
    load_trials_csv,
    paired_ttest,
    pairwise_ttests,
    recognition_rate,
    sniff_trials_file,
    subject_accuracy,
    t_cdf,
    tlx_score,
)
from cobot.errors import DegenerateInput, IncompleteDesign, ParameterError, ValidationError

# published aggregate, counts per 100 presentations of each pattern
TABLE1 = [
    [70, 10, 15, 5, 0, 0, 0, 0],
    [5, 83, 5, 0, 0, 3, 3, 3],
    [8, 8, 55, 28, 3, 0, 0, 0],
    [3, 5, 10, 75, 8, 0, 0, 0],
    [3, 0, 0, 3, 80, 13, 3, 0],
    [3, 0, 0, 0, 10, 73, 13, 3],
    [5, 0, 0, 0, 0, 0, 78, 18],
    [3, 0, 0, 0, 0, 0, 10, 88],
]


def perfect_log(n_subjects=7, reps=5):
    return [
        TrialRecord(subject=f"s{s}", actual=p, perceived=p, response_time_s=1.0)
        for s in range(n_subjects)
        for p in range(1, 9)
        for _ in range(reps)
    ]


# ---------------------------------------------------------------------------
# confusion matrix

def test_all_correct_gives_identity():
    cm = confusion_matrix(perfect_log())
    assert np.allclose(cm.normalized, np.eye(8))
    assert recognition_rate(cm) == 1.0


def test_published_table_row_sums_within_rounding():
    cm = confusion_matrix_from_table(TABLE1, row_total=100.0)
    sums = cm.normalized.sum(axis=1)
    assert np.all(sums >= 0.98) and np.all(sums <= 1.03)


def test_published_table_diagonal_mean():
    cm = confusion_matrix_from_table(TABLE1, row_total=100.0)
    assert recognition_rate(cm) == pytest.approx(0.7525, abs=1e-9)


def test_uniform_matrix_rate():
    cm = confusion_matrix_from_table(np.full((8, 8), 12.5), row_total=100.0)
    assert recognition_rate(cm) == pytest.approx(0.125)


def test_trial_count_matches_design():
    trials = perfect_log(n_subjects=7, reps=5)  # 40 per subject
    cm = confusion_matrix(trials)
    assert cm.counts.sum() == 280


def test_missing_pattern_is_incomplete_design():
    trials = [t for t in perfect_log() if t.actual != 5]
    with pytest.raises(IncompleteDesign):
        confusion_matrix(trials)


def test_corrupting_one_trial_moves_one_count():
    trials = perfect_log()
    base = confusion_matrix(trials).counts.copy()
    trials[0] = TrialRecord(subject="s0", actual=1, perceived=2, response_time_s=1.0)
    changed = confusion_matrix(trials).counts
    diff = changed - base
    assert diff[0, 0] == -1 and diff[0, 1] == 1
    assert np.count_nonzero(diff) == 2


def test_trial_record_validation():
    with pytest.raises(ValidationError):
        TrialRecord(subject="s", actual=0, perceived=1, response_time_s=1.0)
    with pytest.raises(ValidationError):
        TrialRecord(subject="s", actual=1, perceived=9, response_time_s=1.0)
    with pytest.raises(ValidationError):
        TrialRecord(subject="s", actual=1, perceived=1, response_time_s=0.0)


# ---------------------------------------------------------------------------
# distribution CDFs

def test_t_cdf_symmetry_at_zero():
    for df in (1, 2, 7, 48):
        assert t_cdf(0.0, df) == 0.5


def test_f_survival_matches_published_p():
    # the study's headline statistic: F(7,48) = 2.077 -> p = 0.064
    p = 1.0 - f_cdf(2.077, 7, 48)
    assert p == pytest.approx(0.064, abs=0.002)


def _t_pdf(x, df):
    c = math.exp(math.lgamma((df + 1) / 2) - math.lgamma(df / 2)) / math.sqrt(df * math.pi)
    return c * (1 + x * x / df) ** (-(df + 1) / 2)


def _f_pdf(x, d1, d2):
    if x <= 0:
        return 0.0
    lognum = (d1 / 2) * math.log(d1 / d2) + (d1 / 2 - 1) * math.log(x)
    logden = ((d1 + d2) / 2) * math.log(1 + d1 * x / d2)
    logbeta = math.lgamma(d1 / 2) + math.lgamma(d2 / 2) - math.lgamma((d1 + d2) / 2)
    return math.exp(lognum - logden - logbeta)


def test_t_cdf_against_quadrature():
    # independent oracle: adaptive quadrature of the density
    for df in (2, 5, 10, 48):
        for x in (-3.0, -1.0, -0.2, 0.5, 1.3, 2.077, 4.0):
            oracle, err = integrate.quad(_t_pdf, -np.inf, x, args=(df,))
            assert abs(t_cdf(x, df) - oracle) < 1e-8, (df, x)


def test_f_cdf_against_quadrature():
    for d1, d2 in ((1, 2), (7, 48), (3, 10), (20, 5)):
        for x in (0.1, 0.5, 1.0, 2.077, 5.0):
            oracle, err = integrate.quad(_f_pdf, 0, x, args=(d1, d2))
            assert abs(f_cdf(x, d1, d2) - oracle) < 1e-8, (d1, d2, x)


def test_cdf_monotone_on_grid():
    for kind in (("t", 7), ("f", 7, 48), ("f", 1, 2)):
        xs = np.linspace(0.01, 10.0, 200)
        vals = [dist_cdf(kind, float(x)) for x in xs]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert all(0.0 <= v <= 1.0 for v in vals)


def test_betainc_bounds_and_params():
    assert betainc_reg(2.0, 3.0, 0.0) == 0.0
    assert betainc_reg(2.0, 3.0, 1.0) == 1.0
    with pytest.raises(ParameterError):
        betainc_reg(-1.0, 1.0, 0.5)
    with pytest.raises(ParameterError):
        t_cdf(1.0, 0)
    with pytest.raises(ParameterError):
        f_cdf(1.0, 7, -1)


# ---------------------------------------------------------------------------
# ANOVA

def test_anova_hand_fixture():
    # SSB = 1, SSW = 4 -> F = (1/1)/(4/2) = 0.5
    res = anova_oneway([[1, 3], [2, 4]])
    assert res.df1 == 1 and res.df2 == 2
    assert res.F == pytest.approx(0.5, abs=1e-9)


def test_anova_df_structure_eight_by_seven():
    rng = np.random.default_rng(42)
    groups = [rng.uniform(0, 1, size=7) for _ in range(8)]
    res = anova_oneway(groups)
    assert (res.df1, res.df2) == (7, 48)
    assert 0.0 <= res.p <= 1.0


def test_anova_location_and_scale_invariance():
    rng = np.random.default_rng(7)
    groups = [rng.normal(size=6) for _ in range(4)]
    base = anova_oneway(groups).F
    shifted = anova_oneway([g + 13.7 for g in groups]).F
    scaled = anova_oneway([g * -2.5 for g in groups]).F
    assert shifted == pytest.approx(base, abs=1e-9)
    assert scaled == pytest.approx(base, rel=1e-9)


def test_anova_degenerate_constant_groups():
    with pytest.raises(DegenerateInput):
        anova_oneway([[2.0, 2.0], [2.0, 2.0]])


def test_anova_matches_scipy():
    from scipy import stats

    rng = np.random.default_rng(3)
    groups = [rng.normal(loc=i * 0.2, size=7) for i in range(8)]
    res = anova_oneway(groups)
    ref = stats.f_oneway(*groups)
    assert res.F == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p == pytest.approx(ref.pvalue, abs=1e-10)


def test_repeated_measures_df():
    rng = np.random.default_rng(11)
    table = rng.uniform(0, 1, size=(7, 8))
    res = anova_repeated_measures(table)
    assert res.kind == "repeated_measures"
    assert (res.df1, res.df2) == (7, 42)


# ---------------------------------------------------------------------------
# paired t-test

def test_paired_t_hand_fixture():
    # d = (1,2,3): t = 2 / (1/sqrt(3)) = 3.4641
    res = paired_ttest([2, 4, 6], [1, 2, 3])
    assert res.df == 2
    assert res.t == pytest.approx(3.4641, abs=1e-4)


def test_paired_t_swap_negates_t():
    rng = np.random.default_rng(5)
    a, b = rng.normal(size=9), rng.normal(size=9)
    r1, r2 = paired_ttest(a, b), paired_ttest(b, a)
    assert r1.t == pytest.approx(-r2.t, rel=1e-12)
    assert r1.p == pytest.approx(r2.p, rel=1e-12)


def test_paired_t_degenerate_paths():
    with pytest.raises(DegenerateInput):
        paired_ttest([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    res = paired_ttest([2.0, 3.0, 4.0], [1.0, 2.0, 3.0])  # constant shift
    assert res.degenerate and res.p == 0.0 and math.isinf(res.t)


def test_paired_t_matches_scipy():
    from scipy import stats

    rng = np.random.default_rng(8)
    a, b = rng.normal(size=12), rng.normal(size=12)
    res = paired_ttest(a, b)
    ref = stats.ttest_rel(a, b)
    assert res.t == pytest.approx(ref.statistic, rel=1e-12)
    assert res.p == pytest.approx(ref.pvalue, abs=1e-10)


def test_pairwise_ttests_cover_all_pairs():
    rng = np.random.default_rng(2)
    table = rng.uniform(0, 1, size=( 7, 8))
    results = pairwise_ttests(table)
    assert len(results) == 28
    assert all(r.df == 6 for r in results.values())


# ---------------------------------------------------------------------------
# subject accuracy

def test_subject_accuracy_perfect():
    subjects, table = subject_accuracy(perfect_log())
    assert len(subjects) == 7
    assert np.allclose(table, 1.0)


# ---------------------------------------------------------------------------
# TLX

def test_tlx_zero_response():
    r = TlxResponse(0, 0, 0, 0, 0, 0)
    assert tlx_score(r)["raw"] == 0.0


def test_tlx_published_means_raw_score():
    r = TlxResponse(mental=1.33, physical=2.08, temporal=1.58,
                    performance=1.67, effort=1.75, frustration=0.92)
    # (1.33+2.08+1.58+1.67+1.75+0.92)/6, computed by hand: 9.33/6
    assert tlx_score(r)["raw"] == pytest.approx(1.5550, abs=1e-6)


def test_tlx_uniform_weights_equal_raw():
    w = {n: 2.5 for n in ("mental", "physical", "temporal", "performance", "effort", "frustration")}
    r = TlxResponse(3, 4, 5, 6, 7, 8, weights=w)
    scores = tlx_score(r)
    assert scores["weighted"] == pytest.approx(scores["raw"], abs=1e-12)


def test_tlx_out_of_scale_rejected():
    with pytest.raises(ValidationError):
        tlx_score(TlxResponse(11, 0, 0, 0, 0, 0))


def test_tlx_bad_weights_rejected():
    w = {n: 1.0 for n in ("mental", "physical", "temporal", "performance", "effort", "frustration")}
    with pytest.raises(ValidationError):
        tlx_score(TlxResponse(1, 1, 1, 1, 1, 1, weights=w))


def test_aggregate_single_response_is_itself():
    r = TlxResponse(1, 2, 3, 4, 5, 6)
    means = aggregate_tlx([r])
    assert means["mental"] == 1 and means["frustration"] == 6


def test_aggregate_two_responses_midpoint():
    r1 = TlxResponse(0, 0, 0, 0, 0, 0)
    r2 = TlxResponse(2, 4, 6, 8, 10, 1)
    means = aggregate_tlx([r1, r2])
    assert means["physical"] == 2.0 and means["effort"] == 5.0


def test_aggregate_matches_spreadsheet_oracle():
    # independent recomputation with plain python sums
    rng = np.random.default_rng(31)
    rows = rng.uniform(0, 10, size=(8, 6)).round(2)
    responses = [TlxResponse(*row) for row in rows]
    means = aggregate_tlx(responses)
    for j, name in enumerate(("mental", "physical", "temporal", "performance", "effort", "frustration")):
        oracle = sum(rows[i][j] for i in range(8)) / 8
        assert means[name] == pytest.approx(oracle, abs=1e-12)


# ---------------------------------------------------------------------------
# CSV round trips

def test_csv_loaders(tmp_path):
    trials_path = tmp_path / "trials.csv"
    trials_path.write_text(
        "subject,actual,perceived,response_time_s\n"
        "s1,1,1,2.5\n"
        "s1,2,3,1.5\n"
    )
    assert sniff_trials_file(trials_path) == "trials"
    trials = load_trials_csv(trials_path)
    assert len(trials) == 2 and trials[1].perceived == 3

    table_path = tmp_path / "table.csv"
    table_path.write_text("\n".join(",".join(str(c) for c in row) for row in TABLE1))
    assert sniff_trials_file(table_path) == "table"
    cm = load_table_csv(table_path)
    assert recognition_rate(cm) == pytest.approx(0.7525, abs=1e-9)

    tlx_path = tmp_path / "tlx.csv"
    tlx_path.write_text(
        "subject,mental,physical,temporal,performance,effort,frustration\n"
        "s1,1.33,2.08,1.58,1.67,1.75,0.92\n"
    )
    responses = load_tlx_csv(tlx_path)
    assert tlx_score(responses[0])["raw"] == pytest.approx(1.5550, abs=1e-6)
