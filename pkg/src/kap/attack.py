"""Desk-scale cryptanalysis: recover Alice's bits from a passive transcript.

The route is: Bob's knapsack row sum(x_i nu_i) = tau_B, plus r-1 rows in
which alpha cancels once r values of sigma are guessed; solve for binary x
by Gaussian elimination over F_p and enumeration of the free variables;
then read off alpha and sigma from mu and check the resulting key against
Alice's published digest.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from kap.errors import InvalidGuess, NoCandidate, TooLarge, ZeroW
from kap.field import Modulus, derive_modulus, fp_inv
from kap.owf import h_eval
from kap.params import Permutation, PublicParams, gen_alice_secret, gen_bob_secret, gen_public_params
from kap.protocol import Transcript, direct_handshake
from kap.rng import SeededRng

log = logging.getLogger(__name__)

EXHAUSTIVE_LIMIT = 24


@dataclass
class LinearSystem:
    rows: list = field(default_factory=list)  # (coeffs tuple, rhs)

    def add(self, coeffs, rhs):
        self.rows.append((tuple(coeffs), rhs))

    def satisfied_by(self, x, m: Modulus) -> bool:
        return all(sum(c * xi for c, xi in zip(coeffs, x)) % m.p == rhs % m.p for coeffs, rhs in self.rows)


@dataclass(frozen=True)
class GuessSet:
    values: tuple
    positions: Optional[tuple] = None  # 1-based indices of sigma; default 1..r

    @property
    def r(self) -> int:
        return len(self.values)

    def indices(self):
        return self.positions or tuple(range(1, self.r + 1))

    def validate(self, n):
        vals = self.values
        if self.r < 1 or len(set(vals)) != len(vals) or not all(1 <= v <= n for v in vals):
            raise InvalidGuess(f"guess values must be distinct in 1..{n}: {vals}")
        idx = self.indices()
        if len(idx) != self.r or len(set(idx)) != len(idx) or not all(1 <= j <= n for j in idx):
            raise InvalidGuess(f"guess positions must be distinct in 1..{n}: {idx}")


@dataclass(frozen=True)
class AttackTranscript:
    pp: PublicParams
    mu: tuple
    nu: tuple
    tau_a: int
    tau_b: int
    digests: tuple
    k0: int

    @classmethod
    def from_transcript(cls, pp: PublicParams, tr: Transcript) -> "AttackTranscript":
        return cls(pp, tr.r1.mu, tr.r2.nu, tr.r2.tau_a, tr.r3.tau_b, tr.r3.digests, tr.r4.k0)


@dataclass(frozen=True)
class Candidate:
    t: tuple
    alpha: int
    sigma: Permutation
    g: int


def _subset_sums(coeffs, p):
    """Array a with a[idx] = sum(x_i c_i) mod p, where x_1 is the MSB of idx."""
    dtype = np.int64 if p < (1 << 62) else object
    sums = np.zeros(1, dtype=dtype)
    for c in reversed(coeffs):
        sums = np.concatenate([sums, (sums + c) % p])
    return sums


def _index_to_bits(idx, n):
    return tuple((idx >> (n - 1 - i)) & 1 for i in range(n))


def knapsack_solutions(nu: Sequence[int], tau_b: int, m: Modulus):
    """All x in {0,1}^n with sum x_i nu_i = tau_b, in lexicographic order."""
    n = len(nu)
    if n > EXHAUSTIVE_LIMIT:
        raise TooLarge(f"n={n} exceeds exhaustive limit {EXHAUSTIVE_LIMIT}")
    sums = _subset_sums([v % m.p for v in nu], m.p)
    return [_index_to_bits(int(i), n) for i in np.flatnonzero(sums == tau_b % m.p)]


def knapsack_count(nu: Sequence[int], tau_b: int, m: Modulus) -> int:
    if len(nu) > EXHAUSTIVE_LIMIT:
        raise TooLarge(f"n={len(nu)} exceeds exhaustive limit {EXHAUSTIVE_LIMIT}")
    return int(np.count_nonzero(_subset_sums([v % m.p for v in nu], m.p) == tau_b % m.p))


def eliminate_alpha(pp: PublicParams, mu: Sequence[int], guess: GuessSet) -> LinearSystem:
    """Rows sigma'(j) C[:,1] - sigma'(1) C[:,j] = sigma'(j) mu_1 - sigma'(1) mu_j.

    With a correct guess the alpha terms cancel, leaving equations in Alice's
    bits alone.
    """
    guess.validate(pp.n)
    if guess.r < 2:
        raise InvalidGuess("need at least two guessed values to cancel alpha")
    p, C, n = pp.p, pp.C, pp.n
    idx = guess.indices()
    j1, s1 = idx[0] - 1, guess.values[0]
    system = LinearSystem()
    for jj, sj in zip(idx[1:], guess.values[1:]):
        j = jj - 1
        coeffs = [(sj * C[i][j1] - s1 * C[i][j]) % p for i in range(n)]
        system.add(coeffs, (sj * mu[j1] - s1 * mu[j]) % p)
    return system


def _rref(rows, n, p):
    """Reduced row echelon form of augmented rows; None if inconsistent."""
    mat = [list(c) + [r] for c, r in rows]
    pivots = []
    rank = 0
    for col in range(n):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = pow(mat[rank][col], -1, p)
        mat[rank] = [v * inv % p for v in mat[rank]]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                f = mat[i][col]
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], mat[rank])]
        pivots.append(col)
        rank += 1
    if any(row[n] for row in mat[rank:]):
        return None
    return mat[:rank], pivots


def solve_binary(system: LinearSystem, eq7row, m: Modulus, n: int, budget: int = EXHAUSTIVE_LIMIT):
    """Binary solutions of ``system`` stacked with the knapsack row, lexicographic.

    ``eq7row`` is ``(nu, tau_b)``; pass ``None`` to solve ``system`` alone.
    """
    p = m.p
    rows = list(system.rows)
    if eq7row is not None:
        nu, tau_b = eq7row
        rows.append((tuple(nu), tau_b))
    for coeffs, _ in rows:
        if len(coeffs) != n:
            raise ValueError(f"row has {len(coeffs)} coefficients, expected {n}")
    reduced = _rref(rows, n, p)
    if reduced is None:
        return []
    mat, pivots = reduced
    free = [c for c in range(n) if c not in set(pivots)]
    if len(free) > budget:
        raise TooLarge(f"{len(free)} free binary unknowns exceed budget {budget}")
    f = len(free)
    # Each pivot x_c = rhs - sum over free v of a_v x_v; enumerate all 2^f assignments at once.
    assign = ((np.arange(1 << f, dtype=np.int64)[:, None] >> np.arange(f - 1, -1, -1)) & 1) if f else np.zeros((1, 0), dtype=np.int64)
    dtype = np.int64 if p < (1 << 31) else object
    keep = np.ones(len(assign), dtype=bool)
    pivot_vals = []
    for row in mat:
        a = np.array([row[v] for v in free], dtype=dtype)
        val = (row[n] - assign.astype(dtype) @ a) % p if f else np.full(len(assign), row[n] % p, dtype=dtype)
        keep &= (val == 0) | (val == 1)
        pivot_vals.append(val)
    out = []
    for k in np.flatnonzero(keep):
        x = [0] * n
        for v, col in enumerate(free):
            x[col] = int(assign[k, v])
        for row_i, col in enumerate(pivots):
            x[col] = int(pivot_vals[row_i][k])
        out.append(tuple(x))
    out.sort()
    return out


def alpha_sigma_candidates(pp: PublicParams, mu, t):
    """Every (alpha, sigma) consistent with mu once Alice's bits are known."""
    p, n, C = pp.p, pp.n, pp.C
    w = [(mu[j] - sum(C[i][j] for i in range(n) if t[i])) % p for j in range(n)]
    if any(v == 0 for v in w):
        raise ZeroW("some mu_j - sum t_i c_ij vanishes; t cannot be Alice's")
    found = []
    for a in range(1, n + 1):
        alpha = w[0] * pow(a, -1, p) % p
        inv_alpha = fp_inv(alpha, pp.m)
        ratios = tuple(v * inv_alpha % p for v in w)
        if sorted(ratios) == list(range(1, n + 1)):
            found.append((alpha, Permutation(ratios)))
    return found


def recover_alpha_sigma(pp: PublicParams, mu, t):
    found = alpha_sigma_candidates(pp, mu, t)
    if not found:
        raise NoCandidate("no alpha makes mu_j - sum t_i c_ij a permutation of alpha*1..n")
    if len(found) > 1:
        log.warning("%d (alpha, sigma) candidates; returning the first", len(found))
    return found[0]


def full_attack(tr: AttackTranscript, guess: GuessSet, budget: int = EXHAUSTIVE_LIMIT):
    pp = tr.pp
    m, p = pp.m, pp.p
    if guess.r >= 2:
        system = eliminate_alpha(pp, tr.mu, guess)
    else:
        guess.validate(pp.n)
        system = LinearSystem()
    target = tr.digests[tr.k0]
    out = []
    for t in solve_binary(system, (tr.nu, tr.tau_b), m, pp.n, budget):
        try:
            pairs = alpha_sigma_candidates(pp, tr.mu, t)
        except ZeroW:
            continue
        for alpha, sigma in pairs:
            g = (tr.tau_a - tr.k0 * alpha) % p
            if h_eval(g, m, pp.owf) == target:
                out.append(Candidate(t, alpha, sigma, g))
    return out


# -- experiments ---------------------------------------------------------------

@dataclass(frozen=True)
class HonestInstance:
    pp: PublicParams
    alice: object
    bob: object
    transcript: AttackTranscript
    key: int


def honest_instance(n: int, seed: bytes) -> HonestInstance:
    pp = gen_public_params(n, seed)
    alice = gen_alice_secret(pp, SeededRng(seed, "alice"))
    bob = gen_bob_secret(pp, SeededRng(seed, "bob"))
    ka, _, tr = direct_handshake(pp, alice, bob)
    return HonestInstance(pp, alice, bob, AttackTranscript.from_transcript(pp, tr), ka.g)


def prediction(n: int, p: int) -> float:
    """Heuristic number of knapsack solutions, 2^n / p, to 3 decimals."""
    return round(float(Fraction(2 ** n, p)), 3)


@dataclass
class CountStats:
    n: int
    p: int
    counts: list
    prediction: float

    @property
    def mean(self):
        return sum(self.counts) / len(self.counts)

    @property
    def min(self):
        return min(self.counts)

    @property
    def max(self):
        return max(self.counts)

    def rows(self):
        return [(self.n, self.p, i, c, self.prediction) for i, c in enumerate(self.counts)]


CSV_HEADER = ("n", "p", "trial", "count", "prediction")


def solution_count_experiment(n: int, trials: int, rng: SeededRng, limit: int = 20) -> CountStats:
    """Exhaustive knapsack-solution counts over ``trials`` honest transcripts.

    Each trial draws a fresh instance (params and both secrets) from a seed
    taken off ``rng``.
    """
    if n > limit:
        raise TooLarge(f"n={n} exceeds experiment limit {limit}")
    counts = []
    p = None
    for _ in range(trials):
        inst = honest_instance(n, rng.randbytes(16))
        p = inst.pp.p
        counts.append(knapsack_count(inst.transcript.nu, inst.transcript.tau_b, inst.pp.m))
    if p is None:
        p = derive_modulus(n).p
    return CountStats(n, p, counts, prediction(n, p))


def predicted_log2_count(n: int, r: int, p: int) -> float:
    """log2 of the heuristic count 2^(n - r log2 p) for the stacked system."""
    return n - r * math.log2(p)
