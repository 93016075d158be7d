"""
Core functionality for rlcpart
"""

from .bitvec import AppendablePlaBitVector, PackedIntArray, RankBitVector
from .cpi import AssignmentIndex, BatchedRlcVector, PlainArrayIndex, RlcVector
from .errors import (
    BalanceError,
    GeneratorConfigError,
    GraphFormatError,
    PartitionFileError,
    RlcPartError,
    SequencingError,
    StreamOrderError,
    UnsupportedFormatError,
)
from .extpq import ExternalPriorityQueue, ExtPqConfig
from .generator import GenConfig, GraphModel, generate_stream, radius_for_average_degree
from .graph_io import GraphHeader, NodeRecord, NodeStream, open_metis_stream, read_partition, write_partition
from .metrics import PartitionReport, build_report, compare_runs, compute_cut_offline, evaluate_partition, imbalance
from .partitioner import (
    BackendConfig,
    BackendKind,
    FennelPartitioner,
    HashingPartitioner,
    PartitionParams,
    PartitionResult,
    run_partition,
)

__all__ = [
    "AppendablePlaBitVector",
    "PackedIntArray",
    "RankBitVector",
    "AssignmentIndex",
    "BatchedRlcVector",
    "PlainArrayIndex",
    "RlcVector",
    "BalanceError",
    "GeneratorConfigError",
    "GraphFormatError",
    "PartitionFileError",
    "RlcPartError",
    "SequencingError",
    "StreamOrderError",
    "UnsupportedFormatError",
    "ExternalPriorityQueue",
    "ExtPqConfig",
    "GenConfig",
    "GraphModel",
    "generate_stream",
    "radius_for_average_degree",
    "GraphHeader",
    "NodeRecord",
    "NodeStream",
    "open_metis_stream",
    "read_partition",
    "write_partition",
    "PartitionReport",
    "build_report",
    "compare_runs",
    "compute_cut_offline",
    "evaluate_partition",
    "imbalance",
    "BackendConfig",
    "BackendKind",
    "FennelPartitioner",
    "HashingPartitioner",
    "PartitionParams",
    "PartitionResult",
    "run_partition",
]
