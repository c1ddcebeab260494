"""The one-way function h: F_p -> {0,1}^256.

Digests are ``bytes``; Python's bytes ordering is the lexicographic order the
sorted-list match relies on.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from kap.errors import UnknownOwf
from kap.field import Modulus

OWF_DOMAIN_TAG = b"KAP-OWF-v1"


@dataclass(frozen=True)
class OwfId:
    name: str
    m: int


SHA256_OWF = OwfId("sha256", 256)

_REGISTRY = {SHA256_OWF.name: SHA256_OWF}


def lookup_owf(name: str) -> OwfId:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownOwf(name) from None


def owf_preimage(x: int, m: Modulus) -> bytes:
    """Tag || byte_width (2 bytes BE) || x (byte_width bytes BE)."""
    return OWF_DOMAIN_TAG + m.byte_width.to_bytes(2, "big") + x.to_bytes(m.byte_width, "big")


def h_eval(x: int, m: Modulus, owf: OwfId = SHA256_OWF) -> bytes:
    if _REGISTRY.get(owf.name) != owf:
        raise UnknownOwf(owf.name)
    return hashlib.sha256(owf_preimage(x, m)).digest()


class CountingHasher:
    """Callable stand-in for ``h_eval`` that tallies evaluations."""

    def __init__(self, owf: OwfId = SHA256_OWF):
        self.owf = owf
        self.calls = 0

    def __call__(self, x: int, m: Modulus) -> bytes:
        self.calls += 1
        return h_eval(x, m, self.owf)

    def reset(self):
        self.calls = 0
