"""Probabilistic finite-state automata and directional causality between symbol streams."""
from .algebra import (
    product,
    projected_distribution,
    projective_composition,
    stream_run,
    synchronous_composition,
)
from .automata import (
    Alphabet,
    CoupledSystemSpec,
    LabeledGraph,
    Pfsa,
    SymbolStream,
    Xpfsa,
    entropy,
    driven_pair_spec,
    pfsa_distance,
    propagate_distribution,
    sample_stream,
    simulate_coupled,
    stationary_distribution,
    symbol_frequencies,
    transformation_matrix,
    transition_matrix,
    validate_pfsa,
    validate_xpfsa,
)
from .causality import (
    CausalityNetwork,
    GammaResult,
    causality_network,
    error_bound,
    fuse_predictions,
    gamma_analytic,
    gamma_empirical,
    predict_next,
)
from .errors import *  # noqa: F401,F403
from .estimators import (
    build_cross_heap,
    build_heap,
    cross_count,
    cross_derivative,
    hull_vertex_string,
    symbolic_count,
    symbolic_derivative,
)
from .self_inference import InferenceConfig, infer_pfsa, infer_pfsa_detailed
from .cross_inference import infer_xpfsa

__version__ = "0.1.0"
