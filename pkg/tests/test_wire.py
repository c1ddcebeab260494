import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kap.errors import BadLength, BadType, NotCanonical, OrderError, ParseError, ValidationError, WireError
from kap.field import Modulus
from kap.params import gen_public_params
from kap.protocol import Round1Msg, Round4Msg, run_handshake
from kap.wire import (
    Frame,
    decode_field,
    decode_msg,
    decode_msg_bytes,
    encode_field,
    encode_msg,
    encode_msg_bytes,
    params_from_file,
    params_from_json,
    params_to_dict,
    params_to_file,
    transcript_from_jsonl,
    transcript_read,
    transcript_to_jsonl,
    transcript_write,
)

P257, P5 = Modulus(257), Modulus(5)


@pytest.mark.parametrize("m,x,b", [(P257, 5, b"\x00\x05"), (P257, 256, b"\x01\x00"), (P5, 4, b"\x04")])
def test_encode_field(m, x, b):
    assert encode_field(x, m) == b
    assert decode_field(b, m) == x


def test_decode_field_errors():
    with pytest.raises(NotCanonical):
        decode_field(b"\x01\x01", P257)
    with pytest.raises(BadLength):
        decode_field(b"\x01", P257)


@settings(max_examples=10_000, deadline=None)
@given(st.sampled_from([2, 5, 257, 65537, 2 ** 61 - 1]), st.integers(min_value=0))
def test_field_roundtrip(p, x):
    m = Modulus(p)
    x %= p
    assert decode_field(encode_field(x, m), m) == x


def test_round4_layout():
    pp = gen_public_params(4, b"\x01")
    assert encode_msg_bytes(Round4Msg(0), pp) == bytes.fromhex("04" "00000004" "00000000")


def test_round1_layout(toy_pp):
    f = encode_msg(Round1Msg((3, 6)), toy_pp)
    assert f.payload == b"\x03\x06" and f.length == 2
    assert f.to_bytes() == b"\x01\x00\x00\x00\x02\x03\x06"


def test_frame_errors(toy_pp):
    with pytest.raises(BadType):
        Frame.from_bytes(b"\x09\x00\x00\x00\x00")
    with pytest.raises(BadLength):
        Frame.from_bytes(b"\x01\x00\x00\x00\x03\x03\x06")
    with pytest.raises(BadLength):
        Frame.from_bytes(b"\x01\x00")
    with pytest.raises(BadLength):
        decode_msg(Frame(1, b"\x03"), toy_pp)
    with pytest.raises(NotCanonical):
        decode_msg(Frame(1, b"\x03\x07"), toy_pp)
    with pytest.raises(NotCanonical):
        decode_msg(Frame(4, (toy_pp.K + 1).to_bytes(4, "big")), toy_pp)


def _transcripts(count, n=6):
    pp = gen_public_params(n, b"wire")
    for k in range(count):
        yield pp, run_handshake(pp, b"a" + k.to_bytes(2, "big"), b"b" + k.to_bytes(2, "big"))[2]


def test_message_roundtrip():
    for pp, tr in _transcripts(100):
        for msg in tr.messages():
            data = encode_msg_bytes(msg, pp)
            assert decode_msg_bytes(data, pp) == msg
            assert encode_msg_bytes(decode_msg_bytes(data, pp), pp) == data


def test_transcript_roundtrip(tmp_path):
    for k, (pp, tr) in enumerate(_transcripts(100)):
        path = tmp_path / f"t{k}.jsonl"
        transcript_write(tr, pp, path)
        lines = path.read_text().splitlines()
        assert [json.loads(ln)["round"] for ln in lines] == [1, 2, 3, 4]
        assert transcript_read(path, pp) == tr


def test_transcript_order_error():
    pp, tr = next(_transcripts(1))
    lines = transcript_to_jsonl(tr, pp).splitlines()
    lines[0], lines[2] = lines[2], lines[0]
    with pytest.raises(OrderError):
        transcript_from_jsonl("\n".join(lines), pp)
    with pytest.raises(OrderError):
        transcript_from_jsonl("\n".join(lines[:3]), pp)
    with pytest.raises(ParseError):
        transcript_from_jsonl("{\n" * 4, pp)


def test_params_file_roundtrip(tmp_path):
    rng = random.Random(1)
    for k in range(50):
        pp = gen_public_params(rng.randint(2, 12), rng.randbytes(4))
        path = tmp_path / f"p{k}.json"
        params_to_file(pp, path)
        assert params_from_file(path) == pp


def test_params_validation():
    pp = gen_public_params(4, b"\x01")
    doc = params_to_dict(pp)
    doc["C"][0][0] = hex(pp.p)
    with pytest.raises(ValidationError) as exc:
        params_from_json(json.dumps(doc))
    assert exc.value.path == "C[0][0]"

    doc = params_to_dict(pp)
    doc["p"] = hex(15)
    with pytest.raises(ValidationError) as exc:
        params_from_json(json.dumps(doc))
    assert exc.value.path == "p"

    doc = params_to_dict(pp)
    doc["C"] = doc["C"][:3]
    with pytest.raises(ValidationError):
        params_from_json(json.dumps(doc))

    with pytest.raises(ParseError):
        params_from_json("{not json")


def test_params_may_override_p():
    pp = gen_public_params(4, b"\x01")
    doc = params_to_dict(pp)
    doc["p"] = hex(13)
    assert params_from_json(json.dumps(doc)).p == 13


def test_single_byte_mutations_only_raise_typed_errors():
    rng = random.Random(10)
    frames = [(pp, encode_msg_bytes(m, pp)) for pp, tr in _transcripts(10, n=5) for m in tr.messages()]
    outcomes = {"ok": 0, "err": 0}
    for _ in range(10_000):
        pp, data = rng.choice(frames)
        buf = bytearray(data)
        buf[rng.randrange(len(buf))] = rng.randrange(256)
        try:
            decode_msg_bytes(bytes(buf), pp)
            outcomes["ok"] += 1
        except WireError:
            outcomes["err"] += 1
    assert outcomes["err"] > 0 and outcomes["ok"] > 0
