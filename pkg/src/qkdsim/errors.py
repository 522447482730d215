"""Exception hierarchy shared across the package.

The CLI maps ValidationError to exit code 2 and CalibrationError to exit
code 3; everything else is a plain failure.
"""


class QkdSimError(Exception):
    """Base class for all package errors."""


class DomainError(QkdSimError):
    """A mathematical argument is outside its defined domain."""


class ValidationError(QkdSimError):
    """An input value, file, or document violates a structural invariant."""


class InvalidArgumentError(QkdSimError):
    """An operation argument is outside its supported range."""


class CalibrationError(QkdSimError):
    """The fit could not produce parameters meeting the hard constraints."""


class UnderDeterminedError(CalibrationError):
    """Fewer anchors than the fit has free parameters."""


class KmsError(QkdSimError):
    """Base class for key-delivery failures."""


class PairNotFoundError(KmsError):
    """The requested SAE pairing is not registered."""


class KeyExhaustedError(KmsError):
    """Not enough stored keys to satisfy the request; nothing was reserved."""


class KeyNotFoundError(KmsError):
    """One or more requested key ids are unknown or already delivered."""

    def __init__(self, missing_ids: list) -> None:
        self.missing_ids = list(missing_ids)
        ids = ", ".join(str(k) for k in self.missing_ids)
        super().__init__(f"unknown or already-consumed key ids: {ids}")


class ChannelError(QkdSimError):
    """Base class for secure-channel failures."""


class EstablishmentError(ChannelError):
    """A channel session could not obtain its initial key."""


class UnknownKeyIdError(ChannelError):
    """A frame names a key id the session does not hold."""


class FrameAuthError(ChannelError):
    """Frame authentication failed; the frame must be discarded."""


class OneTimeKeyReuseError(QkdSimError):
    """A one-time authentication key was offered for a second use."""


class InsufficientSharesError(QkdSimError):
    """Fewer distinct shares than the reconstruction threshold."""
