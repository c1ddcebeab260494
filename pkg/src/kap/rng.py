"""Deterministic byte stream keyed by (seed, role tag).

SHA-256 in counter mode. Not a general-purpose DRBG; it exists so that every
random choice in a handshake can be replayed from the params file and the
per-party seeds.
"""
import hashlib

RNG_TAG = "sha256-ctr-v1"

ROLE_C = "C"
ROLE_ALICE = "alice"
ROLE_BOB = "bob"


class SeededRng:
    def __init__(self, seed: bytes, role: str):
        if not seed:
            raise ValueError("seed must be nonempty")
        prefix = RNG_TAG.encode() + b"\x00" + len(seed).to_bytes(4, "big") + seed + role.encode()
        self._prefix = prefix
        self._counter = 0
        self._buf = b""

    def randbytes(self, k: int) -> bytes:
        while len(self._buf) < k:
            block = hashlib.sha256(self._prefix + self._counter.to_bytes(8, "big")).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:k], self._buf[k:]
        return out

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        width = (bits + 7) // 8
        mask = (1 << bits) - 1
        while True:
            v = int.from_bytes(self.randbytes(width), "big") & mask
            if v < n:
                return v

    def randbit(self) -> int:
        return self.randbytes(1)[0] & 1
