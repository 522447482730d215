"""Acceptance gate: the nine release criteria, one test and one printed
PASS/FAIL line each.

Run with plain pytest; the verdict lines bypass output capture so they
always appear, e.g.:

    ACCEPTANCE 1 PASS: calibration fidelity (four anchors within 15%, < 60 s)
"""

import contextlib
import math
import random
import threading
import time

import pytest
from conftest import PAPER_SKR_BPS, SCENARIOS_DIR

from qkdsim.chain.demo import run_demo
from qkdsim.chain.fields import GF7, GF251
from qkdsim.chain.shamir import poly_eval
from qkdsim.chain.wegman_carter import AuthKey, wc_tag, wc_verify
from qkdsim.cli import main
from qkdsim.errors import (
    ChannelError,
    KeyExhaustedError,
    ValidationError,
)
from qkdsim.kms import KmsService, LinkKeyStore
from qkdsim.physmodel.model import skr, sop_factor
from qkdsim.physmodel.types import CALM_SOP, FiberSpan, SopState, params_from_text
from qkdsim.physmodel.calibrate import uniform_plan
from qkdsim.scenario.engine import run, write_csv
from qkdsim.scenario.schema import load_scenario
from qkdsim.securechannel import (
    channels_supported,
    decode_frame,
    encode_frame,
    establish,
)
from qkdsim.session import KeyStream


@contextlib.contextmanager
def criterion(capsys, number: int, title: str):
    failed = False
    try:
        yield
    except BaseException:
        failed = True
        raise
    finally:
        with capsys.disabled():
            print(f"ACCEPTANCE {number} {'FAIL' if failed else 'PASS'}: {title}")


def test_criterion_1_calibration_fidelity(capsys, tmp_path):
    with criterion(capsys, 1, "calibration fidelity (four anchors within 15%, < 60 s)"):
        out = tmp_path / "fit.params"
        start = time.monotonic()
        code = main(
            ["calibrate", "--anchors", str(SCENARIOS_DIR / "anchors.txt"), "--out", str(out)]
        )
        elapsed = time.monotonic() - start
        assert code == 0
        assert elapsed < 60.0, f"calibration took {elapsed:.1f} s"
        params = params_from_text(out.read_text())
        plan = uniform_plan(10)
        for distance, measured in PAPER_SKR_BPS.items():
            modeled = skr(plan, FiberSpan(distance), CALM_SOP, params)
            rel = abs(modeled - measured) / measured
            assert rel <= 0.15, f"{distance} km off by {rel:.1%}"


def test_criterion_2_interchannel_interference(capsys, run_log):
    with criterion(
        capsys, 2, "inter-channel interference (+0.20 +/- 0.05 pp, monotone QBER)"
    ):
        log = run_log("channel_add_up")
        last_per_count = {}
        for row in log.rows:
            last_per_count[row.channel_count] = row.qber
        rise_pp = (last_per_count[10] - last_per_count[2]) * 100.0
        assert 0.15 <= rise_pp <= 0.25, f"rise {rise_pp:.3f} pp"
        qbers = [row.qber for row in log.rows]
        assert all(b >= a for a, b in zip(qbers, qbers[1:])), "QBER decreased"


def test_criterion_3_attenuation_ceiling(capsys, run_log):
    with criterion(
        capsys, 3, "attenuation ceiling (alive at +9 dB, Halted at +10 dB, warned first)"
    ):
        log = run_log("attenuation_ramp")
        by_step: dict[float, list] = {}
        for row in log.rows:
            by_step.setdefault(row.extra_loss_db, []).append(row)
        assert all(row.skr_bps > 0.0 for row in by_step[9.0]), "dead inside +9 dB"
        assert any(row.status == "Halted" for row in by_step[10.0]), "never Halted"
        first_halt = next(i for i, row in enumerate(log.rows) if row.status == "Halted")
        warned_before = any(
            "QberWarn" in row.active_alarms or "SkrLow" in row.active_alarms
            for row in log.rows[:first_halt]
        )
        assert warned_before, "no warning alarm before the halt"
        closing_rates = [by_step[db][-1].skr_bps for db in sorted(by_step)]
        assert all(
            b <= a for a, b in zip(closing_rates, closing_rates[1:])
        ), "SKR rose across an attenuation step"


def test_criterion_4_capacity_arithmetic(capsys, run_log):
    with criterion(
        capsys, 4, "capacity (258 channels exactly; 300 s at full load, no starvation)"
    ):
        assert channels_supported(66163, 256, 1) == 258
        log = run_log("capacity")
        assert len(log.rows) == 300
        assert all("KeyStarvation" not in row.active_alarms for row in log.rows)
        assert all(row.status == "Running" for row in log.rows)
        assert log.rows[-1].keys_consumed_total == 258 * 300  # one key/channel/s


def test_criterion_5_sop_gate(capsys, run_log):
    with criterion(
        capsys, 5, "SOP gate (sustained 50 rad/s halts; 5.1 Mrad/s x 0.5 ms never)"
    ):
        assert sop_factor(SopState(50.0, 3600.0)) == 0
        assert sop_factor(SopState(5.1e6, 0.0005)) == 1
        log = run_log("sop_transients")
        halted_at = [row.sim_time_s for row in log.rows if row.status == "Halted"]
        assert halted_at, "sustained burst never halted the link"
        assert all(60 <= t < 180 for t in halted_at), "halt outside the burst window"
        spike_rows = [row for row in log.rows if row.sim_time_s >= 300]
        assert any(row.sop_rad_s == 5.1e6 for row in spike_rows)
        assert all(row.status != "Halted" for row in spike_rows)


def test_criterion_6_kms_conformance(capsys):
    with criterion(
        capsys, 6, "KMS conformance (1000-key concurrent stress, exact conservation)"
    ):
        stream = KeyStream(99, "acceptance-stress")
        blocks = [stream.block(i) for i in range(1000)]
        by_id = {b.key_id: b.material for b in blocks}
        store = LinkKeyStore()
        store.ingest(blocks)
        svc = KmsService()
        svc.register_pair("sae-a", "sae-b", store)

        delivered: list[list] = [[] for _ in range(8)]
        errors: list[Exception] = []

        def worker(idx: int) -> None:
            rng = random.Random(1000 + idx)
            try:
                while True:
                    try:
                        enc = svc.get_enc_keys("sae-a", "sae-b", rng.randint(1, 5))
                    except KeyExhaustedError:
                        try:
                            enc = svc.get_enc_keys("sae-a", "sae-b", 1)
                        except KeyExhaustedError:
                            return
                    ids = [kid for kid, _ in enc.entries]
                    delivered[idx].extend(svc.get_dec_keys("sae-b", "sae-a", ids).entries)
            except Exception as exc:  # noqa: BLE001 - checked after join
                errors.append(exc)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()

        assert errors == []
        entries = [e for per_thread in delivered for e in per_thread]
        assert len(entries) == 1000, "key count not conserved"
        assert len({kid for kid, _ in entries}) == 1000, "double delivery"
        assert all(material == by_id[kid] for kid, material in entries)
        assert store.available_count() == 0


def test_criterion_7_secure_channel(capsys):
    with criterion(
        capsys, 7, "secure channel (10k frames round-trip, all corruptions rejected)"
    ):
        store = LinkKeyStore()
        stream = KeyStream(7, "acceptance-channel")
        store.ingest([stream.block(i) for i in range(128)])
        svc = KmsService()
        svc.register_pair("alice", "bob", store)
        pair = establish("alice", "bob", svc)

        rng = random.Random(4321)
        seen: set = set()
        for i in range(10_000):
            plaintext = rng.randbytes(rng.randrange(0, 128))
            aad = rng.randbytes(rng.randrange(0, 16))
            frame = pair.master_session.seal(plaintext, aad)
            assert (frame.key_id, frame.nonce) not in seen, "(key, nonce) collision"
            seen.add((frame.key_id, frame.nonce))
            assert pair.slave_session.open(decode_frame(encode_frame(frame))) == plaintext
            if i % 100 == 99:
                assert pair.refresh_tick()
        assert len(seen) == 10_000

        wire = encode_frame(pair.master_session.seal(bytes(range(24)), b"hdr4"))
        for bit in range(len(wire) * 8):
            corrupted = bytearray(wire)
            corrupted[bit // 8] ^= 1 << (bit % 8)
            try:
                mangled = decode_frame(bytes(corrupted))
            except ValidationError:
                continue
            with pytest.raises(ChannelError):
                pair.slave_session.open(mangled)


def test_criterion_8_crypto_oracles(capsys):
    with criterion(
        capsys, 8, "crypto oracles (exact GF(7) secrecy and GF(251) forgery counts, < 10 s)"
    ):
        start = time.monotonic()
        # Secret sharing: one share under k=2 fits every secret exactly once.
        for x in range(1, 7):
            for v in range(7):
                for secret in range(7):
                    fits = sum(
                        1 for a1 in range(7) if poly_eval(GF7, [secret, a1], x) == v
                    )
                    assert fits == 1
        shamir_elapsed = time.monotonic() - start
        assert shamir_elapsed < 10.0

        # Forgery: delta polynomial k1(k1-1)(k1-2) has 3 roots, so over all
        # 251^2 keys exactly 3 * 251 forgeries verify: the d/|F| bound.
        start = time.monotonic()
        successes = 0
        for k1 in range(251):
            for k2 in range(251):
                tag = wc_tag(AuthKey(k1, k2, GF251), (3, 1, 4))
                if wc_verify(AuthKey(k1, k2, GF251), (4, 249, 6), tag):
                    successes += 1
        forgery_elapsed = time.monotonic() - start
        assert successes == 3 * 251
        assert successes / (251 * 251) == 3 / 251
        assert forgery_elapsed < 10.0


def test_criterion_9_determinism(capsys, paper_params, tmp_path):
    with criterion(
        capsys, 9, "determinism (same seed: byte-identical CSV and transcripts)"
    ):
        scenario = load_scenario(SCENARIOS_DIR / "sop_transients.json")
        paths = [tmp_path / "first.csv", tmp_path / "second.csv"]
        for path in paths:
            write_csv(run(scenario, paper_params), path)
        assert paths[0].read_bytes() == paths[1].read_bytes()

        assert run_demo(4, 3, None, 11) == run_demo(4, 3, None, 11)
        assert run_demo(4, 3, 2, 11) == run_demo(4, 3, 2, 11)
