"""Study statistics walkthrough: the published aggregate plus a synthetic cohort."""

from importlib import resources

import numpy as np

from cobot import analytics

# the aggregated recognition table (counts per 100 presentations of each pattern)
table_path = resources.files("cobot").joinpath("data", "table1_counts.csv")
cm = analytics.load_table_csv(table_path)
print("published aggregate:")
print("  diagonal:", np.round(np.diag(cm.normalized), 2).tolist())
print(f"  recognition rate: {analytics.recognition_rate(cm):.4f}")

# a synthetic 7-subject study with the protocol's 5 presentations per pattern
rng = np.random.default_rng(11)
trials = []
for s in range(7):
    skill = rng.uniform(0.6, 0.9)
    for pattern in range(1, 9):
        for _ in range(5):
            if rng.random() < skill:
                perceived = pattern
            else:
                perceived = int(rng.integers(1, 9))
            trials.append(analytics.TrialRecord(
                subject=f"s{s}", actual=pattern, perceived=perceived,
                response_time_s=float(rng.uniform(1.0, 6.0))))

cm_s = analytics.confusion_matrix(trials)
subjects, accuracy = analytics.subject_accuracy(trials)
print(f"\nsynthetic cohort: {len(trials)} trials from {len(subjects)} subjects")
print(f"  recognition rate: {analytics.recognition_rate(cm_s):.3f}")

oneway = analytics.anova_oneway([accuracy[:, j] for j in range(8)])
rm = analytics.anova_repeated_measures(accuracy)
print(f"  one-way ANOVA:          F({oneway.df1},{oneway.df2}) = {oneway.F:.3f}, "
      f"p = {oneway.p:.3f}")
print(f"  repeated-measures ANOVA: F({rm.df1},{rm.df2}) = {rm.F:.3f}, p = {rm.p:.3f}")

ttests = analytics.pairwise_ttests(accuracy)
significant = sorted((pair, r.p) for pair, r in ttests.items() if r.p < 0.05)
print(f"  paired t-tests: {len(ttests)} pairs, {len(significant)} below 0.05")
for (i, j), p in significant[:5]:
    print(f"    pattern {i} vs {j}: p = {p:.3f}")

# NASA TLX: published subscale means and a uniform-weights check
resp = analytics.TlxResponse(mental=1.33, physical=2.08, temporal=1.58,
                             performance=1.67, effort=1.75, frustration=0.92)
scores = analytics.tlx_score(resp)
print(f"\nTLX raw score from the published means: {scores['raw']:.4f}")
means = analytics.aggregate_tlx([resp])
print(analytics.format_tlx_table(means))
