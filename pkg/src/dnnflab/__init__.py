"""Decision-DNNF laboratory: layered hard instances, compilation, target triples,
and the edge-orientation probability space."""

from .assignments import (
    Assignment,
    AssignmentSet,
    breaks,
    finest_partition,
    is_product_split,
    product,
    project,
    restrict,
)
from .compiler import compile_cnf, imbalance_profile
from .dnnf import (
    DecisionDnnf,
    SizeClass,
    carried_through,
    mainstream_path,
    model_count,
    parse_ddnnf,
    path_profile,
    restriction_decomposition,
    semantics,
    validate,
    write_ddnnf,
)
from .errors import (
    CapacityError,
    ContractError,
    DnnfLabError,
    StructuralError,
    UndefinedPartitionError,
    VariableCollisionError,
)
from .instances import Graph, LayeredGraph, build_thk, cartesian_product, encode_cnf
from .permwidth import Permutation, analyze
from .probability import distinct_nodes_ledger, mc_carried, pr_set
from .triples import TargetTriple, bottleneck_set, validate_triple

__version__ = "0.1.0"
