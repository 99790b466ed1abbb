from .binnet import binnet_grad, binnet_loss
from .covgraph import covgraph_grad, covgraph_loss
from .dispatch import ModelInput, initial_matrix, model_grad, model_inputs, model_loss
from .feasible import ModelKind, is_positive_definite, project_feasible, smat, svec, symmetrize
from .glasso import glasso_grad, glasso_loss

__all__ = [
    "ModelKind",
    "ModelInput",
    "glasso_loss",
    "glasso_grad",
    "covgraph_loss",
    "covgraph_grad",
    "binnet_loss",
    "binnet_grad",
    "model_inputs",
    "model_loss",
    "model_grad",
    "initial_matrix",
    "project_feasible",
    "is_positive_definite",
    "symmetrize",
    "svec",
    "smat",
]
