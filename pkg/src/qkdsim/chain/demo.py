"""Self-contained consensus demo: keys from a simulated link, sessions
between every node pair, one transaction through split and recovery.

The transcript is plain text with fully deterministic content for a given
(nodes, k, tamper, seed) tuple, so runs are diff-testable.
"""

from __future__ import annotations

import hashlib
import itertools

from qkdsim.errors import InvalidArgumentError
from qkdsim.chain.consensus import Transaction, propagate
from qkdsim.chain.wegman_carter import AuthKey
from qkdsim.kms.service import KmsService
from qkdsim.kms.store import LinkKeyStore
from qkdsim.physmodel.calibrate import REFERENCE_PARAMS_TEXT, uniform_plan
from qkdsim.physmodel.model import link_observables
from qkdsim.physmodel.types import FiberSpan, params_from_text
from qkdsim.securechannel import establish
from qkdsim.session import LinkEndpoint

DEMO_DISTANCE_KM = 70.0
DEMO_CHANNELS = 10
PAYLOAD_OCTETS = 48


def _payload(seed: int) -> bytes:
    out = b""
    counter = 0
    while len(out) < PAYLOAD_OCTETS:
        out += hashlib.sha256(
            b"qkdsim-demo-payload:" + seed.to_bytes(8, "big", signed=True)
            + counter.to_bytes(4, "big")
        ).digest()
        counter += 1
    return out[:PAYLOAD_OCTETS]


def run_demo(nodes: int, k: int, tamper: int | None, seed: int) -> str:
    """Build the network, push one transaction, return the transcript."""
    if nodes < 1:
        raise InvalidArgumentError(f"nodes must be >= 1, got {nodes}")
    if not 1 <= k <= nodes:
        raise InvalidArgumentError(f"need 1 <= k <= nodes={nodes}, got k={k}")
    if tamper is not None and not 1 <= tamper <= nodes:
        raise InvalidArgumentError(f"tamper index must be in [1, {nodes}]")

    params = params_from_text(REFERENCE_PARAMS_TEXT)
    plan = uniform_plan(DEMO_CHANNELS)
    span = FiberSpan(DEMO_DISTANCE_KM)
    model_qber, model_skr = link_observables(plan, span, params)

    origin = "node0"
    validators = [f"node{i}" for i in range(1, nodes + 1)]
    all_nodes = [origin] + validators

    lines: list[str] = []
    tamper_label = tamper if tamper is not None else "none"
    lines.append(f"chain-demo nodes={nodes} k={k} tamper={tamper_label} seed={seed}")
    lines.append(
        f"link {DEMO_DISTANCE_KM:g} km, {DEMO_CHANNELS} channels: "
        f"skr={model_skr:.6g} bps qber={model_qber:.6g}"
    )

    service = KmsService()
    audit_ids = []
    for a, b in itertools.combinations(all_nodes, 2):
        store = LinkKeyStore()
        endpoint = LinkEndpoint(seed, link_id=f"{a}|{b}")
        endpoint.tick(model_skr, model_qber, 1.0)
        store.ingest(endpoint.carve_keys())
        service.register_pair(a, b, store, token_a=f"tok-{a}-{b}", token_b=f"tok-{b}-{a}")

    sessions = {}
    for a, b in itertools.combinations(all_nodes, 2):
        pair = establish(a, b, service)
        sessions[(a, b)] = pair
        audit_ids.append(pair.master_session.current_key_id)
    lines.append(f"sessions established: {len(sessions)} pairs")

    auth_keys = {}
    for validator in validators:
        container = service.get_enc_keys(origin, validator, 1)
        kid, material = container.entries[0]
        peer = service.get_dec_keys(validator, origin, [kid])
        auth_keys[validator] = (
            AuthKey.from_material(material),
            AuthKey.from_material(peer.entries[0][1]),
        )
        audit_ids.append(kid)
    lines.append(f"auth keys issued: {len(auth_keys)}")

    tx = Transaction(_payload(seed), origin, 1)
    result = propagate(
        tx,
        validators,
        k,
        sessions,
        auth_keys,
        seed=seed,
        tamper_index=tamper,
        transcript=lines,
    )

    distinct = len(set(audit_ids)) == len(audit_ids)
    lines.append(
        f"audit: {len(audit_ids)} key ids, all distinct: {'OK' if distinct else 'FAIL'}"
    )
    lines.append(f"accepted={result.accepted}")
    return "\n".join(lines) + "\n"
