"""Four-pass key agreement over F_p, with a desk-scale knapsack attack."""
from kap.field import Modulus, derive_modulus
from kap.params import PublicParams, gen_public_params
from kap.protocol import run_handshake

__all__ = ["Modulus", "derive_modulus", "PublicParams", "gen_public_params", "run_handshake"]
