from . import gmbench, gmconfig, gmdata, gmdisparity, gmerror, gmestimate, gmmetrics, gmmodels, gmread
from . import gmsolver, gmsynth, gmtype
from .gmconfig import FitConfig
from .gmdata import GroupedDataset, validate_dataset
from .gmestimate import GraphEstimate
from .gmsolver import fit_fair, fit_locals, fit_single

__all__ = [
    "gmbench",
    "gmconfig",
    "gmdata",
    "gmdisparity",
    "gmerror",
    "gmestimate",
    "gmmetrics",
    "gmmodels",
    "gmread",
    "gmsolver",
    "gmsynth",
    "gmtype",
    "FitConfig",
    "GroupedDataset",
    "GraphEstimate",
    "validate_dataset",
    "fit_single",
    "fit_locals",
    "fit_fair",
]
