"""Exception hierarchy shared by all versionage modules."""


class VersionAgeError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(VersionAgeError, ValueError):
    """A distribution or operation parameter violates its constraints."""


class InfiniteSecondMoment(VersionAgeError):
    """An operation requires a finite second moment but the distribution lacks one."""


# The statistical verifiers reject any distribution with a divergent moment,
# first or second; same condition, friendlier name at those call sites.
InfiniteMoment = InfiniteSecondMoment


class NoFutureEvent(VersionAgeError):
    """A recurrence-time query needs an event strictly after t, but the stream
    was not advanced far enough."""


class NetworkError(VersionAgeError):
    """Base class for cache-network validation failures."""


class UnknownNode(NetworkError):
    """A link or target references a node id that was never declared."""


class SelfLoop(NetworkError):
    """A link connects a node to itself."""


class DuplicateLink(NetworkError):
    """Two links share the same (from, to) pair."""


class DuplicatePriority(NetworkError):
    """Two links into the same node carry the same priority."""


class SourceHasIncoming(NetworkError):
    """A link terminates at the source node."""


class CycleThroughSource(NetworkError):
    """A link would close a cycle back into the source node."""


class UnreachableNode(NetworkError):
    """A declared node cannot be reached from the source."""


class NotATree(NetworkError):
    """An operation requiring a PATH or TREE network was given a general graph."""


class ConfigError(VersionAgeError):
    """A run configuration file is malformed; message carries field context."""
