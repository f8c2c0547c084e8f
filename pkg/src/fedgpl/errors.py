"""Exception types shared across the package.

Every contract violation raises one of these instead of a bare ValueError so
callers can tell malformed input apart from library bugs.
"""


class FedgplError(Exception):
    """Base class for all package errors."""


# graph construction / induction
class MismatchedFeatureRows(FedgplError):
    """Feature matrix row count differs from the node count."""


class DanglingEdgeEndpoint(FedgplError):
    """Edge references a node index outside the graph."""


class SelfLoop(FedgplError):
    """Edge connects a node to itself."""


class InvalidCenter(FedgplError):
    """Ego-network center is not a valid node index."""


class EmptyEmbedding(FedgplError):
    """Readout over an empty embedding matrix."""


# dataset parsing / task construction
class ParseError(FedgplError):
    """Malformed dataset or config text."""


class UnknownNodeReference(FedgplError):
    """Edge file references a node id absent from the node file."""


class MissingLabel(FedgplError):
    """Node line lacks a label field."""


class NoEligibleEdges(FedgplError):
    """Edge-level task found no adjacent same-label pair."""


class EmptyClass(FedgplError):
    """Partition input contains no samples at all."""


class InvalidParam(FedgplError):
    """Parameter outside its documented range."""


# numerics / parameter handling
class DimMismatch(FedgplError):
    """Operand dimensions disagree."""


class ShapeMismatch(FedgplError):
    """Array shapes disagree with the declared block layout."""


class StaleCache(FedgplError):
    """Backward pass invoked with a cache from a different forward pass."""


class LabelOutOfRange(FedgplError):
    """Class label outside [0, n_classes)."""


# prompting
class ZeroScoreVector(FedgplError):
    """Prompt score vector has zero norm."""


class EmptyKeepSet(FedgplError):
    """Significance selection kept no nodes."""


class InconsistentVpg(FedgplError):
    """Virtual prompt graph references nodes or edges it cannot."""


# aggregation
class EmptyTask(FedgplError):
    """Task model requested for a task with no clients."""


# privacy
class NonFiniteInput(FedgplError):
    """Privatization input contains NaN or infinity."""


# wire protocol
class BadMagic(FedgplError):
    """Message does not start with the protocol magic."""


class TruncatedPayload(FedgplError):
    """Message shorter than its header-declared payload length."""


class UnknownKind(FedgplError):
    """Message kind byte is not a known schema."""


class DecodeError(FedgplError):
    """Payload bytes do not match the kind's schema."""


class StaleState(FedgplError):
    """Protocol step received a message for the wrong round or client."""


class MissingCache(FedgplError):
    """Backward step arrived before the matching forward step."""


# configuration / CLI
class ConfigError(FedgplError):
    """Invalid or contradictory configuration."""


class LengthMismatch(FedgplError):
    """Paired sequences have different lengths."""


class UsageError(FedgplError):
    """Command line used incorrectly."""
