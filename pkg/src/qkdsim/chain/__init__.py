"""Secret-sharing consensus transport over the quantum-secured links."""

from qkdsim.chain.fields import GF7, GF251, GF256, GF2_64, BinaryField, PrimeField
from qkdsim.chain.wegman_carter import AuthKey, blocks_from_bytes, poly_hash, wc_tag, wc_verify
from qkdsim.chain.shamir import Share, shamir_reconstruct, shamir_split
from qkdsim.chain.consensus import ConsensusResult, propagate
from qkdsim.chain.demo import run_demo

__all__ = [
    "GF7",
    "GF251",
    "GF256",
    "GF2_64",
    "BinaryField",
    "PrimeField",
    "AuthKey",
    "blocks_from_bytes",
    "poly_hash",
    "wc_tag",
    "wc_verify",
    "Share",
    "shamir_reconstruct",
    "shamir_split",
    "ConsensusResult",
    "propagate",
    "run_demo",
]
