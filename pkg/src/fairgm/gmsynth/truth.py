from dataclasses import dataclass, field

import numpy as np

from ..gmtype import ModelName, TruthKind


@dataclass(frozen=True)
class GroundTruth:
    """
    True per-group graphs of a synthetic experiment, ordered by group id.

    Gaussian truths keep both the covariances and their inverses; Ising truths keep the
    parameter matrices in ``matrices`` and ``precisions`` alike.
    """

    kind: TruthKind
    matrices: tuple[np.ndarray, ...]
    precisions: tuple[np.ndarray, ...]
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.matrices)

    @property
    def P(self) -> int:
        return self.matrices[0].shape[0]

    def graphs_for(self, model: ModelName) -> tuple[np.ndarray, ...]:
        """The matrices an estimate of ``model`` should be compared with."""
        if model == "covgraph":
            return self.matrices
        return self.precisions
