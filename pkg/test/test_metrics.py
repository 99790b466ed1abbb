import numpy as np
import pytest
from numpy.testing import assert_allclose

from fairgm.gmmetrics import RunSummary, compare_runs, pcee, pcee_gap_report


@pytest.fixture
def truth():
    return np.array([[1.0, -0.5, 0.0], [-0.5, 1.0, 0.2], [0.0, 0.2, 1.0]])


def test_pcee_perfect_and_empty(truth):
    assert pcee(truth, truth, 0.1) == 1.0
    assert pcee(np.zeros((3, 3)), truth, 0.1) == 0.0
    # 7 true entries, the estimate finds the diagonal only
    assert pcee(np.eye(3), truth, 0.1) == pytest.approx(3 / 7)


def test_pcee_undefined_without_true_edges(truth):
    assert np.isnan(pcee(truth, np.zeros((3, 3)), 0.1))


def test_pcee_absolute_and_literal(truth):
    # negative entries only count in the absolute variant
    assert pcee(truth, truth, 0.1, absolute=False) == pytest.approx(5 / 7)
    assert pcee(truth, truth, 0.1, absolute=True) == 1.0


def test_pcee_shape_mismatch(truth):
    with pytest.raises(ValueError):
        pcee(np.eye(2), truth, 0.1)


def test_pcee_gap_report(truth):
    other = np.eye(3)
    report = pcee_gap_report(truth, [truth, other], 0.1)
    # against the identity truth only the three diagonal entries are true edges
    assert_allclose(report.per_group, [1.0, 1.0])
    assert report.gap == 0.0

    report = pcee_gap_report([np.eye(3), truth], [truth, truth], 0.1)
    assert_allclose(report.per_group, [3 / 7, 1.0])
    assert report.gap == pytest.approx(4 / 7)
    frame = report.to_frame()
    assert list(frame["group"]) == [1, 2]

    with pytest.raises(ValueError):
        pcee_gap_report([truth], [truth, truth], 0.1)


def test_compare_runs():
    standard = RunSummary(F1=10.0, delta_total=2.0, runtime=1.0)
    fair = RunSummary(F1=10.5, delta_total=0.2, runtime=3.0)
    report = compare_runs(standard, fair)
    assert report.pct_F1 == pytest.approx(-5.0)
    assert report.pct_delta == pytest.approx(90.0)
    assert report.pct_F1_defined and report.pct_delta_defined
    row = report.to_row()
    assert row["runtime_Fair"] == 3.0
    assert not any(key.startswith("PCEE") for key in row)


def test_compare_runs_with_zero_baseline():
    report = compare_runs(RunSummary(F1=10.0, delta_total=0.0), RunSummary(F1=10.0, delta_total=0.0))
    assert report.pct_F1 == 0.0
    assert np.isnan(report.pct_delta)
    assert not report.pct_delta_defined
    summary = report.to_dict()
    assert summary["pct_Delta_defined"] is False
    assert summary["pcee_variant"] == "abs"


def test_report_rows_carry_pcee_columns():
    standard = RunSummary(F1=1.0, delta_total=1.0, pcee_per_group=np.array([0.9, 0.5]))
    fair = RunSummary(F1=1.0, delta_total=0.5, pcee_per_group=np.array([0.8, 0.7]))
    row = compare_runs(standard, fair, pcee_abs=False).to_row()
    assert row["PCEE_GM_2"] == 0.5
    assert row["PCEE_Fair_1"] == 0.8
    assert row["PCEE_gap_GM"] == pytest.approx(0.4)
    assert row["PCEE_gap_Fair"] == pytest.approx(0.1)
    assert np.isnan(RunSummary(F1=1.0, delta_total=1.0).pcee_gap)


def test_pcee_small_case():
    theta_hat = np.array([[1.0, 0.2, 0.0], [0.2, 1.0, 0.0], [0.0, 0.0, 1.0]])
    theta = np.array([[1.0, 0.3, 0.3], [0.3, 1.0, 0.0], [0.3, 0.0, 1.0]])
    assert pcee(theta_hat, theta, 0.1) == pytest.approx(5 / 7)


def test_compare_runs_with_negative_objective():
    # F1 is negative for well-conditioned Gaussian fits; a higher F1 is still a loss
    report = compare_runs(RunSummary(F1=-10.0, delta_total=2.0), RunSummary(F1=-5.0, delta_total=1.0))
    assert report.pct_F1 == pytest.approx(-50.0)
    report = compare_runs(RunSummary(F1=-10.0, delta_total=2.0), RunSummary(F1=-10.1, delta_total=1.0))
    assert report.pct_F1 == pytest.approx(1.0)
