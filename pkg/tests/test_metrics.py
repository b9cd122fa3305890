import numpy as np
import pytest

from wfbench.metrics import (
    EvaluationReport,
    MetricError,
    closed_world_accuracy,
    closed_world_report,
    curve_csv,
    open_world_metrics,
    open_world_report,
    tpr_fpr_curve,
)


def oracle_closed(preds, labels):
    return sum(1 for p, l in zip(preds, labels) if p == l) / len(labels)


def oracle_open(preds, labels, um):
    mon = [(p, l) for p, l in zip(preds, labels) if l != um]
    unm = [(p, l) for p, l in zip(preds, labels) if l == um]
    two = sum(1 for p, _ in mon if p != um) / len(mon)
    multi = sum(1 for p, l in mon if p == l) / len(mon)
    fpr = sum(1 for p, _ in unm if p != um) / len(unm)
    return two, multi, fpr


def test_closed_examples():
    assert closed_world_accuracy([0, 1, 1], [0, 1, 2]) == pytest.approx(2 / 3)
    assert closed_world_accuracy([5, 3], [5, 3]) == 1.0


def test_closed_brute_force(rng):
    preds = rng.integers(0, 20, size=1000)
    labels = rng.integers(0, 20, size=1000)
    assert closed_world_accuracy(preds, labels) == oracle_closed(preds, labels)


def test_closed_validation():
    with pytest.raises(MetricError):
        closed_world_accuracy([0, 1], [0])
    with pytest.raises(MetricError):
        closed_world_accuracy([], [])


def test_open_hand_count():
    # preds [A, B, UM, A], labels [A, A, A, UM] with A=0, B=1, UM=2
    two, multi, fpr = open_world_metrics([0, 1, 2, 0], [0, 0, 0, 2], 2)
    assert two == pytest.approx(2 / 3)
    assert multi == pytest.approx(1 / 3)
    assert fpr == 1.0


def test_open_all_unmonitored_predictions():
    preds = [3, 3, 3, 3]
    labels = [0, 1, 2, 3]
    assert open_world_metrics(preds, labels, 3) == (0.0, 0.0, 0.0)


def test_open_brute_force(rng):
    preds = rng.integers(0, 11, size=10_000)
    labels = rng.integers(0, 11, size=10_000)
    got = open_world_metrics(preds, labels, 10)
    assert got == oracle_open(preds, labels, 10)
    two, multi, _ = got
    assert multi <= two


def test_open_requires_both_populations():
    with pytest.raises(MetricError):
        open_world_metrics([0, 1], [0, 1], 5)  # no unmonitored labels
    with pytest.raises(MetricError):
        open_world_metrics([0, 1], [5, 5], 5)  # no monitored labels


def test_rates_permutation_invariant(rng):
    preds = rng.integers(0, 6, size=300)
    labels = rng.integers(0, 6, size=300)
    perm = rng.permutation(300)
    assert open_world_metrics(preds, labels, 5) == open_world_metrics(
        preds[perm], labels[perm], 5
    )
    assert closed_world_accuracy(preds, labels) == closed_world_accuracy(
        preds[perm], labels[perm]
    )


def test_reports_carry_counts(rng):
    preds = np.array([0, 1, 2, 0])
    labels = np.array([0, 0, 0, 2])
    report = open_world_report(preds, labels, 2, threshold=0.4)
    assert report.counts == {
        "n_monitored_test": 3,
        "n_unmonitored_test": 1,
        "two_class_true_positives": 2,
        "multi_class_true_positives": 1,
        "false_positives": 1,
    }
    decoded = __import__("json").loads(report.to_json())
    assert decoded["threshold"] == 0.4
    assert decoded["two_tpr"] == pytest.approx(2 / 3)
    closed = closed_world_report([0, 1], [0, 1])
    assert closed.to_dict()["accuracy"] == 1.0


def test_curve_endpoints(rng):
    n_classes = 4  # 3 monitored + unmonitored
    probs = rng.dirichlet(np.ones(n_classes), size=400)
    labels = rng.integers(0, n_classes, size=400)
    reports = tpr_fpr_curve(probs, labels, [0.0, 1.0])
    unconstrained = probs.argmax(axis=1)
    two, multi, fpr = oracle_open(unconstrained, labels, 3)
    assert reports[0].multi_tpr == pytest.approx(multi)
    assert reports[0].fpr == pytest.approx(fpr)
    # at threshold 1 only certainty-1 rows stay monitored
    assert reports[1].fpr <= reports[0].fpr
    assert reports[1].multi_tpr <= reports[0].multi_tpr


def test_curve_monotone(rng):
    probs = rng.dirichlet(np.ones(5) * 0.5, size=500)
    labels = rng.integers(0, 5, size=500)
    reports = tpr_fpr_curve(probs, labels, [0.0, 0.25, 0.5, 0.75, 0.9, 1.0])
    for earlier, later in zip(reports, reports[1:]):
        assert later.multi_tpr <= earlier.multi_tpr + 1e-12
        assert later.two_tpr <= earlier.two_tpr + 1e-12
        assert later.fpr <= earlier.fpr + 1e-12


def test_curve_recompute_each_point(rng):
    from wfbench.ensemble import apply_threshold

    probs = rng.dirichlet(np.ones(4), size=200)
    labels = rng.integers(0, 4, size=200)
    reports = tpr_fpr_curve(probs, labels, [0.1, 0.6])
    for report in reports:
        preds = apply_threshold(probs, report.threshold, 3)
        assert (report.two_tpr, report.multi_tpr, report.fpr) == oracle_open(
            preds, labels, 3
        )


def test_curve_requires_sorted_thresholds(rng):
    probs = rng.dirichlet(np.ones(3), size=10)
    labels = rng.integers(0, 3, size=10)
    with pytest.raises(MetricError):
        tpr_fpr_curve(probs, labels, [0.5, 0.1])


def test_curve_csv_format():
    report = EvaluationReport(
        setting="open", threshold=0.5, counts={}, two_tpr=0.75, multi_tpr=0.5, fpr=0.125
    )
    text = curve_csv([report])
    assert text == "threshold,two_tpr,multi_tpr,fpr\n0.5,0.750000,0.500000,0.125000\n"
