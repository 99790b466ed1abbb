from .blocks import gen_block_covariances
from .exact import binary_states, exact_ising_distribution, exact_ising_marginals, state_index
from .hubs import gen_hub_networks
from .sampler import gibbs_sample_ising, group_rngs, sample_mvn
from .simulate import simulate_gaussian, simulate_ising
from .truth import GroundTruth

__all__ = [
    "GroundTruth",
    "gen_block_covariances",
    "gen_hub_networks",
    "sample_mvn",
    "gibbs_sample_ising",
    "group_rngs",
    "exact_ising_distribution",
    "exact_ising_marginals",
    "binary_states",
    "state_index",
    "simulate_gaussian",
    "simulate_ising",
]
