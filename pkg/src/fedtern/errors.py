"""Exception types shared across the package."""


class FedternError(Exception):
    """Base class for all protocol and encoding errors."""


class ParamGenerationError(FedternError):
    """No valid (p, q) pair found within the attempt budget."""


class EncodeOverflow(FedternError):
    """Fixed-point value exceeds the reserved integer range."""


class DecodeDeadZone(FedternError):
    """Encoded value falls between the positive and negative bands."""


class MessageOutOfRange(FedternError):
    """Plaintext for encryption is negative or >= q."""


class WrongCount(FedternError):
    """Partial-decryption combination got the wrong number of inputs."""


class DuplicatePartial(FedternError):
    """Two partial decryptions claim the same client index."""


class NotFound(FedternError):
    """Linear-search recovery exhausted its bound without a match."""


class NotPowerOfBase(FedternError):
    """Log recovery target is not an exact power of the encoding base."""


class MissingShare(FedternError):
    """A private-share computation lacks a share from a qualified dealer."""


class AbortInsufficientQual(FedternError):
    """Fewer qualified clients than the threshold; key generation must restart."""


class AbortDisputeUnresolvable(FedternError):
    """A commitment dispute could not gather enough verified shares."""


class ShapeMismatch(FedternError):
    """Tensor shapes disagree during aggregation."""


class InfeasiblePartition(FedternError):
    """Requested label-skewed partition cannot be satisfied."""


class PlanViolatesHonestMajority(FedternError):
    """Adversary plan leaves fewer honest clients than the threshold."""


class ProtocolAbort(FedternError):
    """A round failed permanently after bounded retries."""
