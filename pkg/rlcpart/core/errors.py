"""
Exception hierarchy for rlcpart
"""


class RlcPartError(Exception):
    """Base class for all rlcpart errors"""


class GraphFormatError(RlcPartError, ValueError):
    """Malformed graph input (header, adjacency line, degree sum)"""


class UnsupportedFormatError(GraphFormatError):
    """Valid METIS, but a variant we do not handle (weights)"""


class StreamOrderError(RlcPartError):
    """Records arrived out of id order, or a one-pass stream was reused"""


class PartitionFileError(RlcPartError, ValueError):
    """Partition file does not match its graph"""


class GeneratorConfigError(RlcPartError, ValueError):
    """Infeasible generator configuration"""


class BalanceError(RlcPartError):
    """No block can take another node under L_max"""


class SequencingError(RlcPartError):
    """External priority queue used against its monotone contract"""
