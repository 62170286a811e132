"""Dynamic forests via tree contraction: UFO trees, topology trees and baselines."""

from .aggregates import MAX, MIN, SUM, AggregateSpec, product
from .errors import (
    BadSpec,
    CycleError,
    DegreeError,
    DuplicateEdge,
    ForestError,
    MissingEdge,
    NotConnected,
    ParseError,
)
from .batch import batch_update, topo_batch_update, ufo_batch_update, work_meter
from .forest import OracleForest, oracle_cut, oracle_from_edges, oracle_link, oracle_query
from .linkcut import LinkCutTree
from .ternarization import Ternarized, tern_cut, tern_link, tern_translate_query, ternarize
from .topology import TopologyTree
from .ufo import UFOTree
from .workloads import WorkloadSpec, generate, spanning_forest

__all__ = [
    "AggregateSpec",
    "BadSpec",
    "CycleError",
    "DegreeError",
    "DuplicateEdge",
    "LinkCutTree",
    "ForestError",
    "MAX",
    "MIN",
    "MissingEdge",
    "NotConnected",
    "OracleForest",
    "ParseError",
    "SUM",
    "Ternarized",
    "TopologyTree",
    "UFOTree",
    "WorkloadSpec",
    "batch_update",
    "generate",
    "oracle_cut",
    "oracle_from_edges",
    "oracle_link",
    "oracle_query",
    "product",
    "spanning_forest",
    "tern_cut",
    "tern_link",
    "tern_translate_query",
    "ternarize",
    "topo_batch_update",
    "ufo_batch_update",
    "work_meter",
]
