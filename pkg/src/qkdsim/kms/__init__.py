"""Paired key-delivery service with an HTTP front end."""

from qkdsim.kms.store import LinkKeyStore
from qkdsim.kms.service import KeyContainer, KmeStatus, KmsService, PairHandle

__all__ = [
    "LinkKeyStore",
    "KeyContainer",
    "KmeStatus",
    "KmsService",
    "PairHandle",
]
