"""Exception hierarchy for the smlrt runtime.

Everything raised on purpose derives from SmlrtError so callers (and the
CLI) can distinguish validation failures from genuine bugs. I/O-flavored
failures derive from IoError and map to a different CLI exit code.
"""


class SmlrtError(Exception):
    """Base class for all runtime errors."""


# --- directive parsing ------------------------------------------------------

class DirectiveError(SmlrtError):
    """Base for errors raised while parsing or validating directives."""


class DirectiveSyntaxError(DirectiveError):
    """Illegal token while parsing a directive.

    `offset` is the byte offset within the parsed text at which the first
    illegal token begins.
    """

    def __init__(self, message, offset, expected=None):
        self.offset = offset
        self.expected = expected
        super().__init__(f"{message} (at offset {offset})")


class SemanticError(DirectiveError):
    """Structurally valid directive that violates a semantic rule."""


class UnboundVariableError(DirectiveError):
    """Identifier used in a concrete slice bound with no value supplied."""

    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        super().__init__(f"unbound variable {name!r} in slice bound")


class EmptyRangeError(DirectiveError):
    """Concrete slice with start >= stop."""


class UnsupportedConstructError(DirectiveError):
    """Grammar construct recognized but deliberately unsupported."""


class MissingClauseError(DirectiveError):
    """ml directive lacking a clause its mode requires."""


# --- data bridge ------------------------------------------------------------

class BridgeError(SmlrtError):
    """Base for memory-concretization errors."""


class ArityMismatchError(BridgeError):
    """Slice/dimension counts disagree between functor, target, and array."""


class OutOfBoundsError(BridgeError):
    """A swept index falls outside the bound array."""


class FeatureMismatchError(BridgeError):
    """Sum of RHS feature counts differs from the LHS feature size."""


class ShapeMismatchError(BridgeError):
    """Tensor shape does not match what the mapping requires."""


class NonInjectiveScatterError(BridgeError):
    """A reverse mapping would write some array element more than once."""


# --- execution runtime ------------------------------------------------------

class RuntimeApiError(SmlrtError):
    """Base for execution-control errors."""


class DuplicateRegionError(RuntimeApiError):
    """Region name re-registered with a different descriptor."""


class UnknownRegionError(RuntimeApiError):
    """Handle does not name a registered region."""


class MissingPredicateError(RuntimeApiError):
    """Predicated/conditional region invoked without the host boolean."""


class InvalidScheduleError(RuntimeApiError):
    """Interleave schedule with zero total period."""


class ModelLoadError(RuntimeApiError):
    """Surrogate model could not be loaded for inference."""


class ModelShapeMismatchError(RuntimeApiError):
    """Model feature counts disagree with the region's mapped tensors."""


# --- inference engine -------------------------------------------------------

class EngineError(SmlrtError):
    """Base for model-format and forward-pass errors."""


class ManifestError(EngineError):
    """model.json malformed or inconsistent with weights.bin."""


class DimChainError(EngineError):
    """Layer dimensions do not chain input -> hidden -> output."""


class NonFiniteWeightsError(EngineError):
    """Model parameters contain NaN or infinity."""


class NonFiniteOutputError(EngineError):
    """Forward pass overflowed to NaN or infinity."""


# --- record store -----------------------------------------------------------

class StoreError(SmlrtError):
    """Base for database errors."""


class CorruptManifestError(StoreError):
    """Manifest disagrees with payload file lengths or is unreadable."""


class VersionMismatchError(StoreError):
    """Database written with an unsupported format version."""


class ShapeDriftError(StoreError):
    """Record shape or dtype differs from the region's first record."""


class RangeOutOfBoundsError(StoreError):
    """Record range outside [0, record_count)."""


class IoError(SmlrtError):
    """Filesystem-level failure (lock held, unwritable path, ...)."""


# --- benchmarks -------------------------------------------------------------

class BenchError(SmlrtError):
    """Base for benchmark harness errors."""


class LengthMismatchError(BenchError):
    """Metric inputs of unequal length."""


class EmptyInputError(BenchError):
    """Metric over zero elements."""
