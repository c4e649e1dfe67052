"""Exception types shared across the toolkit."""


class CaopError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(CaopError):
    """Instance or weight document is structurally malformed (unknown keys,
    missing fields, inconsistent cost mode)."""


class BadReference(CaopError):
    """A vertex or edge id points at nothing."""


class NegativeValue(CaopError):
    """A cost, reward, capacity, or coordinate field violates its sign constraint."""


class Disconnected(CaopError):
    """The graph is not connected under the union of all edges."""


class ZeroSpeed(CaopError):
    """A travel speed must be strictly positive."""


class MissingGeometry(CaopError):
    """An operation needs vertex coordinates that are not available."""


class AlreadyServiced(CaopError):
    """Attempt to insert an edge that the route already services."""


class InfeasibleSolution(CaopError):
    """A solution violates capacity or services an edge more than once."""


class NoPositiveReward(CaopError):
    """The objective scaling factor is undefined because no edge has reward > 0."""


class IOFailure(CaopError):
    """Reading or writing a model/instance file failed."""


class TooLarge(CaopError):
    """Instance exceeds the exact oracle's enumeration limits."""


class TooManyClusters(CaopError):
    """Requested more depot clusters than there are service edges."""
