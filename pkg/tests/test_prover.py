import copy
import json
import random

import pytest

from lucaspower import prover
from lucaspower.errors import CertificateError
from lucaspower.sequences import FIBONACCI, LUCAS, RecurrenceSpec, Kind, SolutionTriple


def tamper_fields(doc):
    """Paths to every string leaf inside stage claims."""
    paths = []
    for si, stage in enumerate(doc["stages"]):
        for ci, c in enumerate(stage["claims"]):
            for key in ("description", "value", "paper_value"):
                if isinstance(c.get(key), str):
                    paths.append((si, ci, key, None))
                elif isinstance(c.get(key), list):
                    paths += [(si, ci, key, i) for i in range(len(c[key]))]
            for key in ("approx", "err"):
                if "enclosure" in c:
                    paths.append((si, ci, "enclosure", key))
    return paths


def flip_bit(doc, path, rng):
    si, ci, key, sub = path
    c = doc["stages"][si]["claims"][ci]
    holder, k = (c, key) if sub is None else (c[key], sub)
    text = holder[k]
    if not text:
        return False
    pos = rng.randrange(len(text))
    ch = chr(ord(text[pos]) ^ (1 << rng.randrange(6)))
    holder[k] = text[:pos] + ch + text[pos + 1:]
    return True


def test_canonical_proof(canonical_cert):
    assert canonical_cert.valid
    assert canonical_cert.conclusion == [SolutionTriple(1, 0, 1), SolutionTriple(4, 0, 2)]
    assert [s.name for s in canonical_cert.stages] == list(prover.STAGE_NAMES)


def test_round_trip_json(canonical_doc):
    text = prover.dumps(canonical_doc)
    assert prover.verify_certificate(json.loads(text))


def test_body_is_deterministic(canonical_doc):
    again = prover.prove(LUCAS, 3, 200).to_json(timestamp="1999-12-31T00:00:00+00:00")
    assert prover.certificate_body(again) == prover.certificate_body(canonical_doc)
    assert again["environment"]["body_sha256"] == canonical_doc["environment"]["body_sha256"]


def test_schema(canonical_doc):
    assert canonical_doc["cert_version"] == 1
    for key in ("equation", "stages", "conclusion", "notes", "environment"):
        assert key in canonical_doc
    for stage in canonical_doc["stages"]:
        assert set(stage) == {"name", "title", "claims", "status"}
        for c in stage["claims"]:
            assert {"key", "description"} <= set(c)
            if "enclosure" in c:
                assert set(c["enclosure"]) == {"approx", "err"}


def test_random_single_bit_tampers_are_caught(canonical_doc):
    rng = random.Random(7)
    paths = tamper_fields(canonical_doc)
    done = 0
    while done < 25:
        doc = copy.deepcopy(canonical_doc)
        if flip_bit(doc, rng.choice(paths), rng):
            assert prover.verify_certificate(doc) is False
            done += 1


def test_removed_solution_is_caught(canonical_doc):
    doc = copy.deepcopy(canonical_doc)
    doc["conclusion"] = doc["conclusion"][:1]
    assert prover.verify_certificate(doc) is False


def test_fake_solution_is_caught(canonical_doc):
    doc = copy.deepcopy(canonical_doc)
    doc["conclusion"].append(["5", "0", "2"])
    assert prover.verify_certificate(doc) is False


def test_rehashed_tamper_still_caught(canonical_doc):
    # forging the hash does not help: the chain checks and replay still differ
    doc = copy.deepcopy(canonical_doc)
    for c in doc["stages"][4]["claims"]:
        if c["key"] == "bound_M":
            c["value"] = "1000"
    doc["environment"]["body_sha256"] = prover.body_hash(doc)
    assert prover.verify_certificate(doc) is False


def test_structural_errors_raise(canonical_doc):
    doc = copy.deepcopy(canonical_doc)
    del doc["notes"]
    with pytest.raises(CertificateError):
        prover.verify_certificate(doc)
    doc = copy.deepcopy(canonical_doc)
    doc["stages"] = doc["stages"][:-1]
    with pytest.raises(CertificateError):
        prover.verify_certificate(doc)


def test_small_limit_is_invalid():
    cert = prover.prove(LUCAS, 3, 50)
    assert cert.status == "invalid" and cert.failed_stage == "S7"
    assert prover.verify_certificate(cert.to_json()) is False


def test_non_template_sequences_give_partial_certificates():
    for spec, p in ((FIBONACCI, 3), (LUCAS, 2), (RecurrenceSpec(Kind.LUCAS, 2), 3)):
        cert = prover.prove(spec, p, 200)
        assert cert.status == "partial"
        assert [s.name for s in cert.stages] == ["S1", "S2", "S3"]
        assert prover.verify_certificate(cert.to_json()) is False


@pytest.mark.parametrize("p", [5, 7])
def test_other_odd_primes_close(p):
    cert = prover.prove(LUCAS, p, 200)
    assert cert.valid
    assert prover.verify_certificate(cert.to_json())


def test_paper_values_and_notes(canonical_cert):
    s6 = {c["key"]: c for c in canonical_cert.stage("S6").claims}
    assert s6["q_prev"]["value"] == s6["q_prev"]["paper_value"] == "4977896525362041575"
    assert s6["G"]["value"] == "110"
    assert any("partial quotients" in n for n in canonical_cert.notes)
    assert any("1.26e12" in n for n in canonical_cert.notes)
