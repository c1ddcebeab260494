"""The four rounds, the shared-key derivation and the sorted-list match.

Alice and Bob are explicit one-shot state machines. A round that raises
leaves its session untouched.
"""
from __future__ import annotations

import queue
import threading
from bisect import bisect_left
from dataclasses import dataclass
from functools import partial
from typing import Callable, Optional

from kap.errors import LengthMismatch, NoMatch, OutOfOrder, ProtocolError, RangeError
from kap.field import Modulus
from kap.owf import h_eval
from kap.params import (
    AliceSecret,
    BobSecret,
    PublicParams,
    alice_secret_from_seed,
    bob_secret_from_seed,
)

Hasher = Callable[[int, Modulus], bytes]


@dataclass(frozen=True)
class Round1Msg:
    mu: tuple


@dataclass(frozen=True)
class Round2Msg:
    nu: tuple
    tau_a: int


@dataclass(frozen=True)
class Round3Msg:
    digests: tuple  # digests[k] = h(tau_A - k*alpha), k = 0..K
    tau_b: int


@dataclass(frozen=True)
class Round4Msg:
    k0: int


@dataclass(frozen=True)
class SharedKey:
    g: int
    digest: bytes


@dataclass(frozen=True)
class MatchResult:
    k0: int
    l0: int
    g: int


@dataclass(frozen=True)
class Transcript:
    r1: Round1Msg
    r2: Round2Msg
    r3: Round3Msg
    r4: Round4Msg

    def messages(self):
        return [self.r1, self.r2, self.r3, self.r4]


def _default_hasher(pp: PublicParams) -> Hasher:
    return partial(h_eval, owf=pp.owf)


def _check_len(vec, n, what):
    if len(vec) != n:
        raise LengthMismatch(f"{what}: expected {n} entries, got {len(vec)}")


class AliceSession:
    def __init__(self, pp: PublicParams, secret: AliceSecret, hasher: Optional[Hasher] = None):
        _check_len(secret.t, pp.n, "t")
        self.pp = pp
        self.secret = secret
        self.hasher = hasher or _default_hasher(pp)
        self.stage = 0
        self.tau_a: Optional[int] = None

    def _require(self, stage, name):
        if self.stage != stage:
            raise OutOfOrder(f"{name} invoked at stage {self.stage}")


class BobSession:
    def __init__(self, pp: PublicParams, secret: BobSecret, hasher: Optional[Hasher] = None):
        _check_len(secret.s, pp.n, "s")
        self.pp = pp
        self.secret = secret
        self.hasher = hasher or _default_hasher(pp)
        self.stage = 0
        self.tau_b: Optional[int] = None

    _require = AliceSession._require


def round1_alice(sess: AliceSession) -> Round1Msg:
    sess._require(0, "round1_alice")
    pp, sec = sess.pp, sess.secret
    n, p, C = pp.n, pp.p, pp.C
    mu = tuple(
        (sum(C[i][j] for i in range(n) if sec.t[i]) + sec.sigma(j + 1) * sec.alpha) % p
        for j in range(n)
    )
    sess.stage = 1
    return Round1Msg(mu)


def round2_bob(sess: BobSession, r1: Round1Msg) -> Round2Msg:
    sess._require(0, "round2_bob")
    pp, sec = sess.pp, sess.secret
    n, p, C = pp.n, pp.p, pp.C
    _check_len(r1.mu, n, "round1 mu")
    nu = tuple(
        (sum(C[i][j] for j in range(n) if sec.s[j]) + sec.rho(i + 1) * sec.beta) % p
        for i in range(n)
    )
    tau_a = sum(mu_j for mu_j, s_j in zip(r1.mu, sec.s) if s_j) % p
    sess.stage = 2
    return Round2Msg(nu, tau_a)


def round3_alice(sess: AliceSession, r2: Round2Msg) -> Round3Msg:
    sess._require(1, "round3_alice")
    pp, sec = sess.pp, sess.secret
    p = pp.p
    _check_len(r2.nu, pp.n, "round2 nu")
    digests = tuple(sess.hasher((r2.tau_a - k * sec.alpha) % p, pp.m) for k in range(pp.K + 1))
    tau_b = sum(nu_i for nu_i, t_i in zip(r2.nu, sec.t) if t_i) % p
    sess.tau_a = r2.tau_a
    sess.stage = 3
    return Round3Msg(digests, tau_b)


def match_digests(digests, tau_b: int, beta: int, m: Modulus, n: int, hasher: Optional[Hasher] = None) -> MatchResult:
    """Find the smallest l (then smallest k) with h(tau_B - l*beta) == digests[k].

    Alice's list is sorted once; each of Bob's candidates is then located by
    binary search, so at most K+1 evaluations of h are made.
    """
    K = n * (n + 1) // 2
    if len(digests) != K + 1:
        raise LengthMismatch(f"digest list: expected {K + 1}, got {len(digests)}")
    hasher = hasher or h_eval
    index = sorted((d, k) for k, d in enumerate(digests))
    keys = [d for d, _ in index]
    p = m.p
    for l in range(K + 1):
        g = (tau_b - l * beta) % p
        d = hasher(g, m)
        pos = bisect_left(keys, d)
        if pos < len(keys) and keys[pos] == d:
            return MatchResult(index[pos][1], l, g)
    raise NoMatch("no digest of Alice's list matches any candidate of Bob's")


def round4_bob(sess: BobSession, r3: Round3Msg):
    sess._require(2, "round4_bob")
    pp = sess.pp
    res = match_digests(r3.digests, r3.tau_b, sess.secret.beta, pp.m, pp.n, sess.hasher)
    sess.tau_b = r3.tau_b
    sess.stage = 3
    return Round4Msg(res.k0), SharedKey(res.g, r3.digests[res.k0])


def finalize_alice(sess: AliceSession, r4: Round4Msg) -> SharedKey:
    sess._require(3, "finalize_alice")
    pp = sess.pp
    if not 0 <= r4.k0 <= pp.K:
        raise RangeError(f"k0={r4.k0} outside [0, {pp.K}]")
    g = (sess.tau_a - r4.k0 * sess.secret.alpha) % pp.p
    sess.stage = 4
    return SharedKey(g, sess.hasher(g, pp.m))


# -- two-party drivers ---------------------------------------------------------

def play_alice(pp: PublicParams, secret: AliceSecret, send, recv, hasher=None) -> SharedKey:
    """Run Alice over a channel; ``recv(cls)`` must return a message of type ``cls``."""
    sess = AliceSession(pp, secret, hasher)
    send(round1_alice(sess))
    send(round3_alice(sess, recv(Round2Msg)))
    return finalize_alice(sess, recv(Round4Msg))


def play_bob(pp: PublicParams, secret: BobSecret, send, recv, hasher=None) -> SharedKey:
    sess = BobSession(pp, secret, hasher)
    send(round2_bob(sess, recv(Round1Msg)))
    r4, key = round4_bob(sess, recv(Round3Msg))
    send(r4)
    return key


class ChannelClosed(ProtocolError):
    pass


_CLOSED = object()


class _Endpoint:
    def __init__(self, inbox, outbox, log):
        self.inbox = inbox
        self.outbox = outbox
        self.log = log

    def send(self, msg):
        self.log.append(msg)
        self.outbox.put(msg)

    def recv(self, cls):
        msg = self.inbox.get()
        if msg is _CLOSED:
            raise ChannelClosed("peer aborted")
        if not isinstance(msg, cls):
            raise ProtocolError(f"expected {cls.__name__}, got {type(msg).__name__}")
        return msg


def handshake_with_secrets(pp: PublicParams, alice: AliceSecret, bob: BobSecret, hasher=None):
    """Both parties as concurrent threads over an ordered in-memory channel.

    Returns ``(alice_key, bob_key, transcript)``.
    """
    a_in, b_in = queue.Queue(), queue.Queue()
    log = []
    a_end, b_end = _Endpoint(a_in, b_in, log), _Endpoint(b_in, a_in, log)
    results, errors = {}, {}

    def worker(name, fn, secret, end):
        try:
            results[name] = fn(pp, secret, end.send, end.recv, hasher)
        except BaseException as exc:  # noqa: BLE001 - re-raised below
            errors[name] = exc
            a_in.put(_CLOSED)
            b_in.put(_CLOSED)

    threads = [
        threading.Thread(target=worker, args=("alice", play_alice, alice, a_end)),
        threading.Thread(target=worker, args=("bob", play_bob, bob, b_end)),
    ]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    if errors:
        real = [e for e in errors.values() if not isinstance(e, ChannelClosed)]
        raise (real or list(errors.values()))[0]
    return results["alice"], results["bob"], Transcript(*log)


def run_handshake(pp: PublicParams, seed_alice: bytes, seed_bob: bytes, hasher=None):
    alice = alice_secret_from_seed(pp, seed_alice)
    bob = bob_secret_from_seed(pp, seed_bob)
    return handshake_with_secrets(pp, alice, bob, hasher)


def direct_handshake(pp: PublicParams, alice: AliceSecret, bob: BobSecret, hasher=None):
    """Same as :func:`handshake_with_secrets` but sequential, without threads."""
    a = AliceSession(pp, alice, hasher)
    b = BobSession(pp, bob, hasher)
    r1 = round1_alice(a)
    r2 = round2_bob(b, r1)
    r3 = round3_alice(a, r2)
    r4, kb = round4_bob(b, r3)
    ka = finalize_alice(a, r4)
    return ka, kb, Transcript(r1, r2, r3, r4)


def replay_transcript(pp: PublicParams, tr: Transcript, alice: AliceSecret, bob: BobSecret):
    """Re-derive every message from the secrets and compare with ``tr``.

    Raises ProtocolError on the first divergence; returns both keys otherwise.
    """
    ka, kb, fresh = direct_handshake(pp, alice, bob)
    for rnd, (got, want) in enumerate(zip(tr.messages(), fresh.messages()), start=1):
        if got != want:
            raise ProtocolError(f"round {rnd} message does not match the replay")
    return ka, kb
