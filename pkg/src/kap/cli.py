"""Command-line driver.

Exit codes: 0 success, 1 protocol/validation/connection error, 2 usage error.
"""
from __future__ import annotations

import argparse
import socket
import sys
import time

from kap import attack, report, wire
from kap.errors import InvalidN, KapError, ProtocolError, TooLarge, WireError
from kap.owf import CountingHasher
from kap.params import (
    alice_secret_from_seed,
    bob_secret_from_seed,
    gen_permutation,
    gen_public_params,
)
from kap.protocol import (
    AliceSession,
    BobSession,
    finalize_alice,
    handshake_with_secrets,
    play_alice,
    play_bob,
    replay_transcript,
    round1_alice,
    round2_bob,
    round3_alice,
    round4_bob,
)
from kap.rng import SeededRng

ATTACK_N_LIMIT = 20


class UsageError(Exception):
    pass


def hex_bytes(text):
    try:
        b = bytes.fromhex(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hex string: {text!r}") from None
    if not b:
        raise argparse.ArgumentTypeError("seed must be nonempty")
    return b


def str_bool(text):
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def int_list(text):
    try:
        return [int(x) for x in text.split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def host_port(text):
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def cmd_gen_params(args):
    if args.n < 2:
        raise UsageError("--n must be >= 2")
    pp = gen_public_params(args.n, args.seed)
    wire.params_to_file(pp, args.out)
    print(f"p = {hex(pp.p)}")
    print(f"byte_width = {pp.m.byte_width}")
    return 0


def _print_keys(ka, kb):
    print(f"alice key digest: {ka.digest.hex()}")
    print(f"bob   key digest: {kb.digest.hex()}")
    agree = ka.g == kb.g and ka.digest == kb.digest
    print("AGREE" if agree else "DISAGREE")
    return 0 if agree else 1


def cmd_run(args):
    pp = wire.params_from_file(args.params)
    alice = alice_secret_from_seed(pp, args.seed_alice)
    bob = bob_secret_from_seed(pp, args.seed_bob)
    if args.verify:
        tr = wire.transcript_read(args.verify, pp)
        ka, kb = replay_transcript(pp, tr, alice, bob)
        print("VERIFIED")
        return _print_keys(ka, kb)
    ka, kb, tr = handshake_with_secrets(pp, alice, bob)
    status = _print_keys(ka, kb)
    if args.transcript and status == 0:
        wire.transcript_write(tr, pp, args.transcript)
    return status


def _socket_channel(sock, pp):
    def send(msg):
        wire.send_frame(sock, wire.encode_msg(msg, pp))

    def recv(cls):
        msg = wire.decode_msg(wire.recv_frame(sock), pp)
        if not isinstance(msg, cls):
            raise ProtocolError(f"expected {cls.__name__}, got {type(msg).__name__}")
        return msg

    return send, recv


def cmd_serve(args):
    pp = wire.params_from_file(args.params)
    secret = alice_secret_from_seed(pp, args.seed)
    with socket.create_server((args.bind, args.port)) as srv:
        print(f"listening on {args.bind}:{srv.getsockname()[1]}", flush=True)
        conn, _ = srv.accept()
        with conn:
            key = play_alice(pp, secret, *_socket_channel(conn, pp))
    print(f"key digest: {key.digest.hex()}", flush=True)
    return 0


def cmd_connect(args):
    pp = wire.params_from_file(args.params)
    secret = bob_secret_from_seed(pp, args.seed)
    with socket.create_connection(args.host, timeout=args.timeout) as conn:
        key = play_bob(pp, secret, *_socket_channel(conn, pp))
    print(f"key digest: {key.digest.hex()}", flush=True)
    return 0


def _check_attack_n(args):
    if args.n > ATTACK_N_LIMIT and not args.force:
        raise UsageError(f"attack subcommands refuse n > {ATTACK_N_LIMIT} without --force")


def cmd_attack_count(args):
    _check_attack_n(args)
    limit = attack.EXHAUSTIVE_LIMIT if args.force else ATTACK_N_LIMIT
    stats = attack.solution_count_experiment(args.n, args.trials, SeededRng(args.seed, "experiment"), limit=limit)
    print(f"n={stats.n} p={stats.p} trials={len(stats.counts)} mean={stats.mean:.3f} "
          f"min={stats.min} max={stats.max} prediction={stats.prediction:.3f}")
    if args.csv:
        report.write_csv(args.csv, attack.CSV_HEADER, stats.rows())
        fig = args.figure or report.default_figure_path(args.csv)
        report.plot_counts(stats, fig)
    elif args.figure:
        report.plot_counts(stats, args.figure)
    return 0


def _wrong_guess(n, r, truth, rng):
    while True:
        values = gen_permutation(n, rng).image[:r]
        if values != truth:
            return values


def cmd_attack_recover(args):
    _check_attack_n(args)
    r = args.r if args.r is not None else args.n
    if not 1 <= r <= args.n:
        raise UsageError("--r must lie in 1..n")
    inst = attack.honest_instance(args.n, args.seed)
    truth = inst.alice.sigma.image[:r]
    if args.guess_true:
        values = truth
    else:
        values = _wrong_guess(args.n, r, truth, SeededRng(args.seed, "guess"))
    budget = attack.EXHAUSTIVE_LIMIT
    print(f"n={args.n} p={inst.pp.p} r={r} guess={list(values)}")
    cands = attack.full_attack(inst.transcript, attack.GuessSet(tuple(values)), budget)
    for c in cands:
        print(f"candidate t={''.join(map(str, c.t))} alpha={c.alpha} sigma={list(c.sigma.image)} g={c.g}")
    hit = any(c.t == inst.alice.t and c.g == inst.key for c in cands)
    print(f"generated t={''.join(map(str, inst.alice.t))}")
    print("SUCCESS" if hit else "FAIL")
    return 0


def cmd_bench(args):
    rows = []
    for n in args.n:
        if n < 2:
            raise UsageError("--n entries must be >= 2")
        rec = {"n": n, "K+1": n * (n + 1) // 2 + 1}
        for size, key in ((n, "seconds"), (2 * n, "seconds_2n")):
            pp = gen_public_params(size, b"bench")
            total = 0.0
            for trial in range(args.trials):
                hasher_a, hasher_b = CountingHasher(pp.owf), CountingHasher(pp.owf)
                alice = alice_secret_from_seed(pp, b"bench-a" + trial.to_bytes(4, "big"))
                bob = bob_secret_from_seed(pp, b"bench-b" + trial.to_bytes(4, "big"))

                start = time.perf_counter()
                a, b = AliceSession(pp, alice, hasher_a), BobSession(pp, bob, hasher_b)
                r2 = round2_bob(b, round1_alice(a))
                r3 = round3_alice(a, r2)
                alice_h = hasher_a.calls
                r4, _ = round4_bob(b, r3)
                finalize_alice(a, r4)
                total += time.perf_counter() - start
                if size == n:
                    rec["alice_h"], rec["bob_h"] = alice_h, hasher_b.calls
            rec[key] = total / max(args.trials, 1)
        rec["ratio"] = rec["seconds_2n"] / rec["seconds"] if rec["seconds"] else float("inf")
        rows.append(rec)
    cols = ("n", "K+1", "alice_h", "bob_h", "seconds", "seconds_2n", "ratio")
    print("\t".join(cols))
    for rec in rows:
        print("\t".join(f"{rec[c]:.6f}" if isinstance(rec[c], float) else str(rec[c]) for c in cols))
    if args.csv:
        report.write_csv(args.csv, cols, [[rec[c] for c in cols] for rec in rows])
    fig = args.figure or (report.default_figure_path(args.csv) if args.csv else None)
    if fig:
        report.plot_bench(rows, fig)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="kap", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-params", help="generate public parameters")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=hex_bytes, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_params)

    r = sub.add_parser("run", help="run both parties in memory")
    r.add_argument("--params", required=True)
    r.add_argument("--seed-alice", type=hex_bytes, required=True)
    r.add_argument("--seed-bob", type=hex_bytes, required=True)
    r.add_argument("--transcript", help="write the transcript (JSON lines) here")
    r.add_argument("--verify", metavar="PATH", help="replay a recorded transcript instead of running fresh")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("serve", help="play Alice on a TCP port")
    s.add_argument("--params", required=True)
    s.add_argument("--port", type=int, required=True)
    s.add_argument("--seed", type=hex_bytes, required=True)
    s.add_argument("--bind", default="127.0.0.1")
    s.set_defaults(func=cmd_serve)

    c = sub.add_parser("connect", help="play Bob against a serving Alice")
    c.add_argument("--params", required=True)
    c.add_argument("--host", type=host_port, required=True, metavar="HOST:PORT")
    c.add_argument("--seed", type=hex_bytes, required=True)
    c.add_argument("--timeout", type=float, default=30.0)
    c.set_defaults(func=cmd_connect)

    a = sub.add_parser("attack", help="cryptanalysis experiments")
    asub = a.add_subparsers(dest="mode", required=True)
    ac = asub.add_parser("count", help="count knapsack-row solutions over honest instances")
    ac.add_argument("--n", type=int, default=16)
    ac.add_argument("--trials", type=int, default=50)
    ac.add_argument("--seed", type=hex_bytes, default=b"\x00")
    ac.add_argument("--csv")
    ac.add_argument("--figure")
    ac.add_argument("--force", action="store_true")
    ac.set_defaults(func=cmd_attack_count)
    ar = asub.add_parser("recover", help="recover Alice's secrets from one honest transcript")
    ar.add_argument("--n", type=int, default=16)
    ar.add_argument("--r", type=int)
    ar.add_argument("--guess-true", type=str_bool, default=True)
    ar.add_argument("--seed", type=hex_bytes, default=b"\x00")
    ar.add_argument("--force", action="store_true")
    ar.set_defaults(func=cmd_attack_recover)

    b = sub.add_parser("bench", help="hash counts and timing per n")
    b.add_argument("--n", type=int_list, default=[8, 16, 32])
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--csv")
    b.add_argument("--figure")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidN, TooLarge) as exc:
        ap.print_usage(sys.stderr)
        print(f"kap: error: {exc}", file=sys.stderr)
        return 2
    except (KapError, WireError, OSError) as exc:
        print(f"kap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
