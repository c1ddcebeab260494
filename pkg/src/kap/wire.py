"""Byte formats: field elements, framed messages, params files, transcripts.

Frame layout: 1-byte type || 4-byte big-endian payload length || payload.
Every vector length is derivable from the public params, so payloads carry
no inner length prefixes.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from kap.errors import (
    BadLength,
    BadType,
    NotCanonical,
    NotPrime,
    OrderError,
    ParseError,
    UnknownOwf,
    ValidationError,
)
from kap.field import Modulus
from kap.owf import lookup_owf
from kap.params import PublicParams
from kap.protocol import Round1Msg, Round2Msg, Round3Msg, Round4Msg, Transcript
from kap.rng import RNG_TAG

DIGEST_BYTES = 32
HEADER_BYTES = 5
MAX_PAYLOAD = 1 << 28

MSG_TYPES = {Round1Msg: 1, Round2Msg: 2, Round3Msg: 3, Round4Msg: 4}
MSG_CLASSES = {v: k for k, v in MSG_TYPES.items()}


def encode_field(x: int, m: Modulus) -> bytes:
    return x.to_bytes(m.byte_width, "big")


def decode_field(b: bytes, m: Modulus) -> int:
    if len(b) != m.byte_width:
        raise BadLength(f"field element: expected {m.byte_width} bytes, got {len(b)}")
    x = int.from_bytes(b, "big")
    if x >= m.p:
        raise NotCanonical(f"{x} >= p = {m.p}")
    return x


def _encode_vec(xs, m):
    return b"".join(encode_field(x, m) for x in xs)


def _decode_vec(b, count, m):
    w = m.byte_width
    if len(b) != count * w:
        raise BadLength(f"vector: expected {count * w} bytes, got {len(b)}")
    return tuple(decode_field(b[i * w:(i + 1) * w], m) for i in range(count))


@dataclass(frozen=True)
class Frame:
    msg_type: int
    payload: bytes

    @property
    def length(self) -> int:
        return len(self.payload)

    def to_bytes(self) -> bytes:
        return bytes([self.msg_type]) + len(self.payload).to_bytes(4, "big") + self.payload

    @classmethod
    def from_bytes(cls, data: bytes) -> "Frame":
        if len(data) < HEADER_BYTES:
            raise BadLength(f"frame shorter than header: {len(data)} bytes")
        msg_type, length = parse_header(data[:HEADER_BYTES])
        if len(data) - HEADER_BYTES != length:
            raise BadLength(f"header says {length} payload bytes, got {len(data) - HEADER_BYTES}")
        return cls(msg_type, bytes(data[HEADER_BYTES:]))


def parse_header(header: bytes):
    msg_type = header[0]
    if msg_type not in MSG_CLASSES:
        raise BadType(f"unknown message type 0x{msg_type:02x}")
    length = int.from_bytes(header[1:5], "big")
    if length > MAX_PAYLOAD:
        raise BadLength(f"payload length {length} exceeds limit")
    return msg_type, length


def encode_msg(msg, pp: PublicParams) -> Frame:
    m, n = pp.m, pp.n
    if isinstance(msg, Round1Msg):
        if len(msg.mu) != n:
            raise BadLength("round1: mu length != n")
        payload = _encode_vec(msg.mu, m)
    elif isinstance(msg, Round2Msg):
        if len(msg.nu) != n:
            raise BadLength("round2: nu length != n")
        payload = _encode_vec(msg.nu, m) + encode_field(msg.tau_a, m)
    elif isinstance(msg, Round3Msg):
        if len(msg.digests) != pp.K + 1 or any(len(d) != DIGEST_BYTES for d in msg.digests):
            raise BadLength("round3: digest list shape")
        payload = b"".join(msg.digests) + encode_field(msg.tau_b, m)
    elif isinstance(msg, Round4Msg):
        payload = msg.k0.to_bytes(4, "big")
    else:
        raise BadType(f"not a protocol message: {type(msg).__name__}")
    return Frame(MSG_TYPES[type(msg)], payload)


def decode_msg(frame: Frame, pp: PublicParams):
    m, n, w = pp.m, pp.n, pp.m.byte_width
    pl = frame.payload
    t = frame.msg_type
    if t == 1:
        return Round1Msg(_decode_vec(pl, n, m))
    if t == 2:
        if len(pl) != (n + 1) * w:
            raise BadLength(f"round2: expected {(n + 1) * w} bytes, got {len(pl)}")
        return Round2Msg(_decode_vec(pl[:n * w], n, m), decode_field(pl[n * w:], m))
    if t == 3:
        dl = (pp.K + 1) * DIGEST_BYTES
        if len(pl) != dl + w:
            raise BadLength(f"round3: expected {dl + w} bytes, got {len(pl)}")
        digests = tuple(pl[i:i + DIGEST_BYTES] for i in range(0, dl, DIGEST_BYTES))
        return Round3Msg(digests, decode_field(pl[dl:], m))
    if t == 4:
        if len(pl) != 4:
            raise BadLength(f"round4: expected 4 bytes, got {len(pl)}")
        k0 = int.from_bytes(pl, "big")
        if k0 > pp.K:
            raise NotCanonical(f"k0={k0} exceeds K={pp.K}")
        return Round4Msg(k0)
    raise BadType(f"unknown message type 0x{t:02x}")


def encode_msg_bytes(msg, pp) -> bytes:
    return encode_msg(msg, pp).to_bytes()


def decode_msg_bytes(data: bytes, pp):
    return decode_msg(Frame.from_bytes(data), pp)


# -- files ---------------------------------------------------------------------

def atomic_write(path, data):
    """Write via a temp file in the same directory, renamed on success."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def params_to_dict(pp: PublicParams) -> dict:
    return {
        "n": pp.n,
        "p": hex(pp.p),
        "owf": pp.owf.name,
        "seed": pp.seed.hex(),
        "rng": pp.rng,
        "C": [[hex(c) for c in row] for row in pp.C],
    }


def params_to_json(pp: PublicParams) -> str:
    return json.dumps(params_to_dict(pp), indent=1) + "\n"


def _hex_int(value, path):
    if not isinstance(value, str):
        raise ValidationError(path, "expected hex string")
    try:
        return int(value, 16)
    except ValueError:
        raise ValidationError(path, f"bad hex {value!r}") from None


def params_from_dict(doc) -> PublicParams:
    if not isinstance(doc, dict):
        raise ValidationError("$", "expected object")
    for key in ("n", "p", "owf", "seed", "rng", "C"):
        if key not in doc:
            raise ValidationError(key, "missing")
    n = doc["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 2:
        raise ValidationError("n", "expected integer >= 2")
    p = _hex_int(doc["p"], "p")
    try:
        m = Modulus(p)
    except NotPrime:
        raise ValidationError("p", f"{p} is not prime") from None
    try:
        owf = lookup_owf(doc["owf"])
    except (UnknownOwf, TypeError):
        raise ValidationError("owf", f"unknown {doc['owf']!r}") from None
    if doc["rng"] != RNG_TAG:
        raise ValidationError("rng", f"unsupported stream {doc['rng']!r}")
    try:
        seed = bytes.fromhex(doc["seed"])
    except (TypeError, ValueError):
        raise ValidationError("seed", "bad hex") from None
    C = doc["C"]
    if not isinstance(C, list) or len(C) != n:
        raise ValidationError("C", f"expected {n} rows")
    rows = []
    for i, row in enumerate(C):
        if not isinstance(row, list) or len(row) != n:
            raise ValidationError(f"C[{i}]", f"expected {n} entries")
        vals = []
        for j, c in enumerate(row):
            v = _hex_int(c, f"C[{i}][{j}]")
            if not 0 <= v < p:
                raise ValidationError(f"C[{i}][{j}]", f"{v} not in [0, p)")
            vals.append(v)
        rows.append(tuple(vals))
    return PublicParams(n=n, m=m, C=tuple(rows), owf=owf, seed=seed, rng=doc["rng"])


def params_from_json(text: str) -> PublicParams:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"params: {exc}") from None
    return params_from_dict(doc)


def params_to_file(pp: PublicParams, path):
    atomic_write(path, params_to_json(pp))


def params_from_file(path) -> PublicParams:
    return params_from_json(Path(path).read_text())


def transcript_to_jsonl(tr: Transcript, pp: PublicParams) -> str:
    lines = []
    for rnd, msg in enumerate(tr.messages(), start=1):
        lines.append(json.dumps({"round": rnd, "hex": encode_msg_bytes(msg, pp).hex()}))
    return "\n".join(lines) + "\n"


def transcript_from_jsonl(text: str, pp: PublicParams) -> Transcript:
    msgs = []
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 4:
        raise OrderError(f"expected 4 frames, got {len(lines)}")
    for expected, line in enumerate(lines, start=1):
        try:
            rec = json.loads(line)
            rnd, data = rec["round"], bytes.fromhex(rec["hex"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"line {expected}: {exc}") from None
        if rnd != expected:
            raise OrderError(f"line {expected} holds round {rnd}")
        frame = Frame.from_bytes(data)
        if frame.msg_type != expected:
            raise OrderError(f"line {expected} holds a type-{frame.msg_type} frame")
        msgs.append(decode_msg(frame, pp))
    return Transcript(*msgs)


def transcript_write(tr: Transcript, pp: PublicParams, path):
    atomic_write(path, transcript_to_jsonl(tr, pp))


def transcript_read(path, pp: PublicParams) -> Transcript:
    return transcript_from_jsonl(Path(path).read_text(), pp)


# -- streams -------------------------------------------------------------------

def _recv_exact(sock, k):
    buf = bytearray()
    while len(buf) < k:
        chunk = sock.recv(k - len(buf))
        if not chunk:
            raise ConnectionError(f"connection closed after {len(buf)}/{k} bytes")
        buf += chunk
    return bytes(buf)


def send_frame(sock, frame: Frame):
    sock.sendall(frame.to_bytes())


def recv_frame(sock) -> Frame:
    msg_type, length = parse_header(_recv_exact(sock, HEADER_BYTES))
    return Frame(msg_type, _recv_exact(sock, length))
