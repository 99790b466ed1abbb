import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def pcee(theta_hat: np.ndarray, theta_true: np.ndarray, lam: float, absolute: bool = True) -> float:
    """
    Proportion of correctly estimated edges at level ``lam``.

    An entry counts when the truth has |theta| >= lam and the estimate passes the same test;
    ``absolute=False`` compares the signed estimate with lam instead. NaN when the truth has no
    entry at level ``lam``.
    """
    theta_hat = np.asarray(theta_hat)
    theta_true = np.asarray(theta_true)
    if theta_hat.shape != theta_true.shape:
        msg = f"Invalid shapes of 'theta_hat' and 'theta_true', (got {theta_hat.shape} and {theta_true.shape})"
        raise ValueError(msg)
    true_edges = np.abs(theta_true) >= lam
    denominator = int(true_edges.sum())
    if denominator == 0:
        logger.warning("pcee undefined: no true entry with |theta| >= %g", lam)
        return float("nan")
    found = (np.abs(theta_hat) if absolute else theta_hat) >= lam
    return float(np.sum(found & true_edges)) / denominator


@dataclass(frozen=True)
class PceeGapReport:
    per_group: np.ndarray
    gap: float

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"group": np.arange(1, self.per_group.size + 1), "pcee": self.per_group})


def pcee_gap_report(
    estimates: np.ndarray | Sequence[np.ndarray],
    ground_truth: Sequence[np.ndarray],
    lam: float,
    absolute: bool = True,
) -> PceeGapReport:
    """PCEE of an estimate against every group's truth, with the max - min gap across groups."""
    if isinstance(estimates, np.ndarray) and estimates.ndim == 2:
        estimates = [estimates] * len(ground_truth)
    if len(estimates) != len(ground_truth):
        msg = f"Invalid number of estimates, (expected {len(ground_truth)}, got {len(estimates)})"
        raise ValueError(msg)
    per_group = np.array([pcee(est, truth, lam, absolute) for est, truth in zip(estimates, ground_truth)])
    gap = float(np.max(per_group) - np.min(per_group)) if per_group.size else float("nan")
    return PceeGapReport(per_group=per_group, gap=gap)


@dataclass(frozen=True)
class RunSummary:
    """What one fit contributes to a comparison: its pooled objective, disparity and runtime."""

    F1: float
    delta_total: float
    runtime: float = float("nan")
    pcee_per_group: np.ndarray | None = None

    @property
    def pcee_gap(self) -> float:
        if self.pcee_per_group is None:
            return float("nan")
        return float(np.max(self.pcee_per_group) - np.min(self.pcee_per_group))


def _pct_change(baseline: float, other: float, name: str) -> float:
    if baseline == 0 or not np.isfinite(baseline):
        logger.warning("%%%s undefined: baseline value is %g", name, baseline)
        return float("nan")
    return -(other - baseline) / abs(baseline) * 100.0


@dataclass(frozen=True)
class EvalReport:
    """
    A standard and a fair run side by side. Percentages are positive when the fair run lowers
    the quantity, so a fairness gain shows as a positive pct_delta and an objective loss as a
    negative pct_F1.
    """

    standard: RunSummary
    fair: RunSummary
    pct_F1: float
    pct_delta: float
    pcee_abs: bool = True

    @property
    def pct_F1_defined(self) -> bool:
        return bool(np.isfinite(self.pct_F1))

    @property
    def pct_delta_defined(self) -> bool:
        return bool(np.isfinite(self.pct_delta))

    def to_row(self) -> dict:
        row = {
            "F1_GM": self.standard.F1,
            "F1_Fair": self.fair.F1,
            "pct_F1": self.pct_F1,
            "Delta_GM": self.standard.delta_total,
            "Delta_Fair": self.fair.delta_total,
            "pct_Delta": self.pct_delta,
            "runtime_GM": self.standard.runtime,
            "runtime_Fair": self.fair.runtime,
        }
        if self.standard.pcee_per_group is not None and self.fair.pcee_per_group is not None:
            for k, (a, b) in enumerate(zip(self.standard.pcee_per_group, self.fair.pcee_per_group)):
                row[f"PCEE_GM_{k + 1}"] = float(a)
                row[f"PCEE_Fair_{k + 1}"] = float(b)
            row["PCEE_gap_GM"] = self.standard.pcee_gap
            row["PCEE_gap_Fair"] = self.fair.pcee_gap
        return row

    def to_dict(self) -> dict:
        report = self.to_row()
        report["pct_F1_defined"] = self.pct_F1_defined
        report["pct_Delta_defined"] = self.pct_delta_defined
        report["pcee_variant"] = "abs" if self.pcee_abs else "literal"
        return report


def compare_runs(standard: RunSummary, fair: RunSummary, pcee_abs: bool = True) -> EvalReport:
    return EvalReport(
        standard=standard,
        fair=fair,
        pct_F1=_pct_change(standard.F1, fair.F1, "F1"),
        pct_delta=_pct_change(standard.delta_total, fair.delta_total, "Delta"),
        pcee_abs=pcee_abs,
    )
