"""
rlcpart - streaming graph partitioning with a run-length compressed index

Assigns the nodes of a one-pass node stream to k balanced blocks with the
Fennel objective while keeping the block assignments in a compressed,
appendable index instead of a plain length-n array.
"""
__version__ = "0.1.0"
__description__ = "Streaming graph partitioner with a compressed partition index"

__all__ = [
    "__version__",
    "__description__",
]
