"""Maximal-entropy (Ruelle-Bowen) random walks on directed graphs, in discrete and continuous time."""

from .chain import (
    DiscreteChain,
    EntropyConfig,
    Generator,
    build_discrete_rb,
    build_rb_generator,
    differential_entropy_rate,
    discrete_entropy_rate,
    path_probability_formula,
    scale_generator,
    stationary_of_generator,
)
from .graph import (
    DirectedGraph,
    GraphMode,
    complete_graph,
    count_paths,
    cycle_graph,
    load_edge_list,
    plastic_graph,
    random_strongly_connected,
    validate,
)
from .jumps import (
    EmbeddedChainSpec,
    Trajectory,
    discretize,
    embed,
    sample_ensemble,
    sample_trajectory,
    small_delta_entropy,
    transition_kernel,
)
from .spectral import PerronData, perron, stationary_rb

__version__ = "0.1.0"
