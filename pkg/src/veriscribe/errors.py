"""Exception hierarchy for the veriscribe package.

Everything raised on purpose derives from :class:`VeriscribeError`, so a
caller (notably the CLI) can catch one type and map it to a nonzero exit
code without swallowing genuine bugs.
"""


class VeriscribeError(Exception):
    """Base class for all errors raised by veriscribe."""


class ParseError(VeriscribeError):
    """A document could not be parsed (malformed line, bad token, ...)."""


class ValidationError(VeriscribeError):
    """Parsed data violates an invariant (bad cardinality, range, sum, ...)."""


class OutOfRange(ValidationError):
    """A class index or distance code lies outside its feature's range."""


class SchemaMismatch(ValidationError):
    """Two objects were built against incompatible feature schemas."""


class MissingSoft(ValidationError):
    """An operation needed soft probability vectors the record lacks."""


class ZeroVector(ValidationError):
    """Cosine similarity requested for an all-zero vector."""


class NonconformantVector(ValidationError):
    """A distance vector does not fit the network's schema."""


class HypothesisMismatch(ValidationError):
    """Same/different-writer networks passed in the wrong roles."""


class LengthMismatch(ValidationError):
    """Two aligned sequences differ in length."""


class CyclicStructure(ValidationError):
    """A proposed network structure contains a directed cycle."""


class InsufficientData(VeriscribeError):
    """Too little data for the requested operation (split, pairing, ...)."""


class EmptyTrainingSet(InsufficientData):
    """Network fitting was asked to run on zero pairs."""


class DegenerateLabels(VeriscribeError):
    """Calibration needs both pair labels but only one is present."""
