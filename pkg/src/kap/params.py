"""Public parameters and each party's private data."""
from __future__ import annotations

from dataclasses import dataclass

from kap.errors import InvalidN
from kap.field import Modulus, derive_modulus, fp_sample
from kap.owf import SHA256_OWF, OwfId
from kap.rng import RNG_TAG, ROLE_ALICE, ROLE_BOB, ROLE_C, SeededRng


@dataclass(frozen=True)
class PublicParams:
    n: int
    m: Modulus
    C: tuple  # n rows of n ints, C[i][j] with 0-based i (row), j (column)
    owf: OwfId = SHA256_OWF
    seed: bytes = b""
    rng: str = RNG_TAG

    @property
    def p(self) -> int:
        return self.m.p

    @property
    def K(self) -> int:
        """Largest match offset, n(n+1)/2."""
        return self.n * (self.n + 1) // 2


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..n}; ``image[j-1]`` is the value at j."""

    image: tuple

    def __post_init__(self):
        image = tuple(int(v) for v in self.image)
        if sorted(image) != list(range(1, len(image) + 1)):
            raise ValueError(f"not a permutation of 1..{len(image)}: {image}")
        object.__setattr__(self, "image", image)

    def __call__(self, j: int) -> int:
        return self.image[j - 1]

    def __len__(self):
        return len(self.image)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))


@dataclass(frozen=True)
class AliceSecret:
    alpha: int
    t: tuple
    sigma: Permutation


@dataclass(frozen=True)
class BobSecret:
    beta: int
    s: tuple
    rho: Permutation


def gen_public_params(n: int, seed: bytes) -> PublicParams:
    if n < 2:
        raise InvalidN(f"n must be >= 2, got {n}")
    m = derive_modulus(n)
    rng = SeededRng(seed, ROLE_C)
    C = tuple(tuple(fp_sample(m, rng) for _ in range(n)) for _ in range(n))
    return PublicParams(n=n, m=m, C=C, seed=bytes(seed))


def gen_permutation(n: int, rng: SeededRng) -> Permutation:
    """Fisher-Yates shuffle of 1..n."""
    image = list(range(1, n + 1))
    for i in range(n - 1, 0, -1):
        j = rng.randbelow(i + 1)
        image[i], image[j] = image[j], image[i]
    return Permutation(tuple(image))


def _gen_secret(pp: PublicParams, rng: SeededRng):
    while True:
        x = fp_sample(pp.m, rng)
        if x:
            break
    bits = tuple(rng.randbit() for _ in range(pp.n))
    return x, bits, gen_permutation(pp.n, rng)


def gen_alice_secret(pp: PublicParams, rng: SeededRng) -> AliceSecret:
    alpha, t, sigma = _gen_secret(pp, rng)
    return AliceSecret(alpha, t, sigma)


def gen_bob_secret(pp: PublicParams, rng: SeededRng) -> BobSecret:
    beta, s, rho = _gen_secret(pp, rng)
    return BobSecret(beta, s, rho)


def alice_secret_from_seed(pp: PublicParams, seed: bytes) -> AliceSecret:
    return gen_alice_secret(pp, SeededRng(seed, ROLE_ALICE))


def bob_secret_from_seed(pp: PublicParams, seed: bytes) -> BobSecret:
    return gen_bob_secret(pp, SeededRng(seed, ROLE_BOB))
