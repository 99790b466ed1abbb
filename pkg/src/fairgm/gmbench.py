import logging
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm
from tqdm.contrib.concurrent import process_map

from .gmconfig import FitConfig
from .gmdata import GroupedDataset
from .gmdisparity import DisparityReport, LocalSolutions, disparity_report, objective_vector
from .gmestimate import GraphEstimate
from .gmmetrics import EvalReport, RunSummary, compare_runs, pcee_gap_report
from .gmmodels import model_inputs
from .gmsolver import fit_fair, fit_locals, fit_single
from .gmsynth import GroundTruth, simulate_gaussian, simulate_ising
from .gmtype import ModelName, SuiteName

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Cell:
    """One (dataset, config) point of a benchmark suite."""

    suite: SuiteName
    model: ModelName
    P: int
    K: int
    sizes: tuple[int, ...]
    seed: int
    lam: float
    Q: int = 5
    n_reset: int = 2
    H: int = 3
    label: dict = field(default_factory=dict)

    def simulate(self) -> tuple[GroupedDataset, GroundTruth]:
        if self.model == "binnet":
            return simulate_ising(self.P, self.H, self.K, self.sizes, self.seed)
        return simulate_gaussian(self.P, self.Q, self.K, self.sizes, self.seed, n_reset=self.n_reset)


@dataclass
class PairResult:
    standard: GraphEstimate
    standard_report: DisparityReport
    fair: GraphEstimate
    fair_report: DisparityReport
    local: LocalSolutions
    evaluation: EvalReport


def pooled_objective(theta: np.ndarray, model: ModelName, ds: GroupedDataset, config: FitConfig) -> float:
    """F_1 = L(theta; X) + lam * ||theta||_1 on the pooled data."""
    pooled, groups = model_inputs(ds)
    return float(objective_vector(theta, model, config, None, pooled, groups).values[0])


def run_pair(
    model: ModelName, ds: GroupedDataset, config: FitConfig, truth: GroundTruth | None = None
) -> PairResult:
    """Standard fit, fair fit and their comparison on the same data and configuration."""
    pooled, groups = model_inputs(ds)
    local = fit_locals(model, ds, config)
    standard = fit_single(model, pooled, config)
    standard_report = disparity_report(standard.matrix, local, groups, config.penalty_kind, config.tau)
    fair, fair_report = fit_fair(model, ds, config, local=local)

    pcee_std = pcee_fair = None
    if truth is not None:
        graphs = truth.graphs_for(model)
        pcee_std = pcee_gap_report(standard.matrix, graphs, config.lam, config.pcee_abs).per_group
        pcee_fair = pcee_gap_report(fair.matrix, graphs, config.lam, config.pcee_abs).per_group

    evaluation = compare_runs(
        RunSummary(
            pooled_objective(standard.matrix, model, ds, config), standard_report.total, standard.runtime, pcee_std
        ),
        RunSummary(pooled_objective(fair.matrix, model, ds, config), fair_report.total, fair.runtime, pcee_fair),
        pcee_abs=config.pcee_abs,
    )
    return PairResult(standard, standard_report, fair, fair_report, local, evaluation)


def suite_cells(
    suite: SuiteName,
    seed: int = 0,
    ps: Sequence[int] | None = None,
    ns: Sequence[int] | None = None,
    ks: Sequence[int] | None = None,
    ratios: Sequence[float] | None = None,
) -> list[Cell]:
    """Grid of a named suite; the sensitivity grids default to their reduced desk-scale versions."""
    if suite == "sim-glasso":
        return [Cell(suite, "glasso", 100, 2, (1000, 1000), seed, 0.01)]
    if suite == "sim-covgraph":
        return [Cell(suite, "covgraph", 100, 2, (1000, 1000), seed, 0.01)]
    if suite == "sim-binnet":
        return [Cell(suite, "binnet", 50, 2, (500, 1000), seed, 1e-5, H=3)]
    if suite == "sens-P":
        return [
            Cell(suite, "glasso", p, 2, (1000, 1000), seed, 0.01, n_reset=1, label={"P": p})
            for p in (ps or (50, 100, 200))
        ]
    if suite == "sens-N":
        return [
            Cell(suite, "glasso", 50, 2, (n, n), seed, 0.01, n_reset=1, label={"N": n}) for n in (ns or (100, 300, 500))
        ]
    if suite == "sens-ratio":
        return [
            Cell(suite, "glasso", 50, 2, (int(round(r * 100)), 100), seed, 0.01, n_reset=1, label={"ratio": r})
            for r in (ratios or (1, 4, 10))
        ]
    if suite == "sens-K":
        return [
            Cell(suite, "glasso", 100, k, (1000,) * k, seed, 0.01, Q=10, n_reset=1, label={"K": k})
            for k in (ks or (2, 3, 4, 5, 6))
        ]
    msg = f"Invalid value of 'suite', (got {suite!r})"
    raise ValueError(msg)


def run_cell(cell: Cell, config: FitConfig) -> dict:
    """Generate, fit both ways and evaluate one cell; failures are recorded in the row."""
    row = {"suite": cell.suite, "model": cell.model, "P": cell.P, "K": cell.K, "seed": cell.seed, **cell.label}
    row["sizes"] = ",".join(str(n) for n in cell.sizes)
    tic = time.perf_counter()
    try:
        ds, truth = cell.simulate()
        result = run_pair(cell.model, ds, config.replace(lam=cell.lam, seed=cell.seed), truth)
    except Exception as e:
        # any failure stays inside its cell, the other rows of the suite still get written
        logger.error("cell %s failed: %s: %s", row, type(e).__name__, e)
        row["error"] = f"{type(e).__name__}: {e}"
        return row
    row.update(result.evaluation.to_row())
    row["converged_GM"] = result.standard.converged
    row["converged_Fair"] = result.fair.converged
    row["iterations_Fair"] = result.fair.iterations
    row["gamma"] = result.fair.info.get("gamma", 0.0)
    row["wall_time"] = time.perf_counter() - tic
    row["error"] = ""
    return row


def run_suite(
    suite: SuiteName,
    config: FitConfig,
    seed: int = 0,
    workers: int = 1,
    **grid,
) -> pd.DataFrame:
    cells = suite_cells(suite, seed, **grid)
    logger.info("benchmark %s: %d cells, %d workers", suite, len(cells), workers)
    if workers > 1:
        rows = process_map(partial(run_cell, config=config), cells, max_workers=workers, desc=suite)
    else:
        rows = [run_cell(cell, config) for cell in tqdm(cells, desc=suite, disable=not config.progress)]
    return pd.DataFrame(rows)
