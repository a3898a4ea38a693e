"""Exception hierarchy shared across the package."""


class DtfscError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(DtfscError):
    """A POMDP violates a structural invariant."""


class SchemaError(DtfscError):
    """A JSON document does not match the expected format.

    Messages carry a JSON-path-like location, e.g. ``transitions[3].up``.
    """


class UnknownObservationError(DtfscError):
    """No state of the model carries the requested observation."""


class MissingChoiceError(DtfscError):
    """A policy has no entry for a reachable observation."""

    def __init__(self, observation):
        self.observation = observation
        super().__init__(f"no policy entry for reachable observation {observation}")


class UndefinedGammaError(DtfscError):
    """The controller's action map has no entry for (node, observation)."""

    def __init__(self, node, observation):
        self.node = node
        self.observation = observation
        super().__init__(f"gamma undefined at node {node}, observation {observation}")


class UndefinedDeltaError(DtfscError):
    """The controller's transition map has no entry for (node, obs, obs')."""

    def __init__(self, node, observation, posterior):
        self.node = node
        self.observation = observation
        self.posterior = posterior
        super().__init__(
            f"delta undefined at node {node}, observation {observation}, "
            f"posterior {posterior}"
        )


class ClosureError(DtfscError):
    """A realizable (node, obs, obs') triple has no transition entry."""

    def __init__(self, node, observation, posterior):
        self.node = node
        self.observation = observation
        self.posterior = posterior
        super().__init__(
            f"controller not closed for the model: missing transition at node "
            f"{node} for observation pair ({observation} -> {posterior})"
        )


class ChainViolationError(DtfscError):
    """The controller does not have the layered structure skip conversion needs."""


class DatasetError(DtfscError):
    """A decision-tree dataset is empty or contradicts itself."""


class SynthesisError(DtfscError):
    """No winning controller was found for the initial observation."""
