"""Generalized modularity, Poisson block-model likelihoods, and resolution-parameter estimation."""

from .graph import (Graph, GraphError, Partition, build_graph, load_edgelist, move_node,
                    new_partition)
from .optimize import AnnealSchedule, SearchMode, anneal, exhaustive_best, greedy_refine, optimize
from .quality import (EquivalenceConstants, NullModel, PlantedPartitionParams, dcsbm_log_likelihood,
                      delta_modularity, equivalence_constants, modularity, pp_log_likelihood,
                      sbm_log_likelihood)
from .resolution import GammaTrace, estimate_omegas, gamma_from_omegas, iterate_gamma
from .synth import SyntheticSpec, generate_dc_planted_partition, generate_planted_partition, spec_to_rates

__version__ = "0.1.0"
