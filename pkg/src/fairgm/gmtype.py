from typing import Literal, TypedDict, get_args

import numpy as np


class TraceRecord(TypedDict):
    iteration: int
    objectives: np.ndarray
    delta_total: float
    rho: np.ndarray
    ell: float
    residual: float


class ObjectiveParts(TypedDict):
    smooth: np.ndarray
    l1: float
    frob: np.ndarray


ModelName = Literal["glasso", "covgraph", "binnet"]
PenaltyName = Literal["square", "exp", "abs"]
FeasibleSet = Literal["symmetric_pd", "symmetric"]
StopRule = Literal["gradient_map", "raw_gradient"]
InitRule = Literal["max_disparity", "pooled", "identity"]
TruthKind = Literal["gaussian", "ising"]
SuiteName = Literal[
    "sim-glasso",
    "sim-covgraph",
    "sim-binnet",
    "sens-P",
    "sens-N",
    "sens-ratio",
    "sens-K",
]

MODEL_NAMES: tuple[ModelName, ...] = get_args(ModelName)
PENALTY_NAMES: tuple[PenaltyName, ...] = get_args(PenaltyName)
SUITE_NAMES: tuple[SuiteName, ...] = get_args(SuiteName)
