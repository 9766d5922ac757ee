"""Exact secret-key rate bounds and scheme verification for hypergraphical sources."""

from .model import Hypergraph, entropy, cond_entropy, is_pin, load, loads, validate, weight_function
from .partitions import Partition, alpha, enumerate_partitions
from .bounds import (
    LaminationParams,
    ep_bound,
    ep_bound_tightest,
    lamination_bound_eval,
    lamination_bound_search,
    vp_bound,
    vp_tau,
)
from .capacity import cs_infinity, pin_capacity_curve, rco, tree_packing_number, upper_envelope
from .protocol import LinearScheme, check_perfect_secrecy, check_recoverability, scheme_rates, tree_protocol
from .catalog import builtin_examples

__version__ = "0.1.0"
