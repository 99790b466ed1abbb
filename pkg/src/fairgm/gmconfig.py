import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import get_args

import numpy as np

from .gmtype import InitRule, PenaltyName, StopRule

MAX_ITER_CEILING = 10_000_000


@dataclass(frozen=True)
class PenaltyKind:
    """Penalty applied to differences of graph disparity errors."""

    name: PenaltyName = "square"

    def __post_init__(self) -> None:
        if self.name not in get_args(PenaltyName):
            msg = f"Invalid value of 'penalty', (expected one of {get_args(PenaltyName)}, got {self.name!r})"
            raise ValueError(msg)

    @property
    def smooth(self) -> bool:
        return self.name != "abs"

    def value(self, x: np.ndarray | float) -> np.ndarray | float:
        if self.name == "square":
            return 0.5 * np.square(x)
        elif self.name == "exp":
            return np.exp(x)
        else:
            return np.abs(x)

    def derivative(self, x: np.ndarray | float) -> np.ndarray | float:
        # abs is handled by the caller, it has no gradient to offer
        if self.name == "square":
            return x
        elif self.name == "exp":
            return np.exp(x)
        msg = f"Penalty {self.name!r} has no derivative"
        raise ValueError(msg)


@dataclass(frozen=True)
class FitConfig:
    """
    Hyperparameters shared by the single-objective and the fair solvers.

    The single-objective solver backtracks its step from ``step0``, shrinking it by
    ``step_shrink`` on every rejection and restarting from ``step0`` at each iteration.
    The fair solver works with ``ell`` (the inverse step) instead: ``ell_decay`` multiplies
    the last accepted ``ell`` at the start of each outer iteration, values above one read the
    decay as growth and 1.0 keeps ``ell`` where it was.
    """

    lam: float = 0.01
    tau: float = 0.01
    gamma: float | None = None
    step0: float = 1.0
    step_shrink: float = 0.5
    ell0: float = 1e-2
    ell_growth: float = 10.0
    ell_decay: float = 0.1
    ell_max: float = 1e12
    eps: float = 1e-5
    max_iter: int = 50_000
    penalty: PenaltyName = "square"
    seed: int = 0
    stop_rule: StopRule = "gradient_map"
    dual_max_iter: int = 500
    dual_tol: float = 1e-8
    init: InitRule = "max_disparity"
    pcee_abs: bool = True
    progress: bool = False

    def __post_init__(self) -> None:
        checks = [
            ("lam", self.lam >= 0, ">= 0"),
            ("tau", self.tau > 0, "> 0"),
            ("gamma", self.gamma is None or self.gamma >= 0, "None or >= 0"),
            ("step0", self.step0 > 0 and 1.0 / self.step0 <= self.ell_max, f"> 1/ell_max ({1.0 / self.ell_max:.3g})"),
            ("step_shrink", 0 < self.step_shrink < 1, "in (0, 1)"),
            ("ell0", self.ell0 > 0, "> 0"),
            ("ell_growth", self.ell_growth > 1, "> 1"),
            ("ell_decay", self.ell_decay > 0, "> 0"),
            ("ell_max", self.ell_max >= self.ell0, f">= ell0 ({self.ell0})"),
            ("eps", self.eps > 0, "> 0"),
            ("max_iter", 1 <= self.max_iter <= MAX_ITER_CEILING, f"in [1, {MAX_ITER_CEILING}]"),
            ("dual_max_iter", self.dual_max_iter >= 1, ">= 1"),
            ("dual_tol", self.dual_tol > 0, "> 0"),
        ]
        for name, ok, expected in checks:
            if not ok:
                msg = f"Invalid value of '{name}', (expected {expected}, got {getattr(self, name)})"
                raise ValueError(msg)

        for name, alias in [("penalty", PenaltyName), ("stop_rule", StopRule), ("init", InitRule)]:
            if getattr(self, name) not in get_args(alias):
                msg = f"Invalid value of '{name}', (expected one of {get_args(alias)}, got {getattr(self, name)!r})"
                raise ValueError(msg)

    @property
    def penalty_kind(self) -> PenaltyKind:
        return PenaltyKind(self.penalty)

    def replace(self, **kwargs) -> "FitConfig":
        return dataclasses.replace(self, **kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, config: dict) -> "FitConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(config) - known)
        if unknown:
            msg = f"Invalid keys of config, (expected a subset of {sorted(known)}, got {unknown})"
            raise ValueError(msg)
        return cls(**config)

    @classmethod
    def from_file(cls, filepath: str | Path) -> "FitConfig":
        with open(filepath, "r", encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


def worker_count(default: int = 1) -> int:
    """Number of workers allowed by ``FAIRGM_THREADS``."""
    value = os.environ.get("FAIRGM_THREADS")
    if value is None:
        return default
    try:
        n = int(value)
    except ValueError:
        msg = f"Invalid value of 'FAIRGM_THREADS', (expected a positive integer, got {value!r})"
        raise ValueError(msg) from None
    return max(n, 1)
