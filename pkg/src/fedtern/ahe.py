"""Additive ElGamal with threshold decryption.

Plaintexts ride in the exponent of the fixed base g0 (c2 = g0^m * h^r), so
multiplying ciphertexts component-wise adds messages.  Decryption by a
T-subset S of shareholders produces partials pd_i = c2 / c1^{lambda_i x_i T}
whose product telescopes to g0^{T*m}; the integer T*m is then recovered
either by linear search or, when 2^{T*m} has not wrapped mod p, by reading
the bit position directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Sequence

from .errors import (DuplicatePartial, MessageOutOfRange, NotFound,
                     NotPowerOfBase, WrongCount)
from .group import GroupParams, random_nonzero_scalar
from .wire import element_to_bytes


@dataclass(frozen=True)
class Ciphertext:
    """ElGamal pair (c1, c2) = (g^r, g0^m * h^r), multiplicatively aggregable."""

    c1: int
    c2: int

    def to_bytes(self, params: GroupParams) -> bytes:
        return element_to_bytes(self.c1, params) + element_to_bytes(self.c2, params)


@dataclass(frozen=True)
class PartialDecryption:
    client: int
    pd: int

    def to_bytes(self, params: GroupParams) -> bytes:
        return element_to_bytes(self.pd, params)


def encrypt(params: GroupParams, h: int, m: int, rng: Random) -> Ciphertext:
    """Encrypt 0 <= m < q under public key h with a fresh ephemeral key."""
    if not 0 <= m < params.q:
        raise MessageOutOfRange(f"message {m} outside [0, q)")
    r = random_nonzero_scalar(params, rng)
    p = params.p
    c1 = pow(params.g, r, p)
    c2 = pow(params.g0, m, p) * pow(h, r, p) % p
    return Ciphertext(c1=c1, c2=c2)


def aggregate(params: GroupParams, cts: Sequence[Ciphertext]) -> Ciphertext:
    """Component-wise product; decrypts to the sum of the messages."""
    if not cts:
        raise ValueError("nothing to aggregate")
    c1 = c2 = 1
    for ct in cts:
        c1 = c1 * ct.c1 % params.p
        c2 = c2 * ct.c2 % params.p
    return Ciphertext(c1=c1, c2=c2)


def partial_decrypt(params: GroupParams, ct: Ciphertext, client: int,
                    x_i: int, lambda_i: int, T: int) -> PartialDecryption:
    """One shareholder's contribution pd = c2 / c1^{lambda_i * x_i * T}.

    lambda_i must be computed over the subset that actually decrypts.  The
    exponent is reduced mod q (c1 lives in the order-q subgroup); division
    is multiplication by the modular inverse.
    """
    exp = lambda_i * x_i % params.q * T % params.q
    denom = pow(ct.c1, exp, params.p)
    pd = ct.c2 * pow(denom, -1, params.p) % params.p
    return PartialDecryption(client=client, pd=pd)


def combine(params: GroupParams, pds: Sequence[PartialDecryption], T: int) -> int:
    """Product of exactly T partials from distinct clients: equals g0^{T*m}."""
    if len(pds) != T:
        raise WrongCount(f"need exactly {T} partial decryptions, got {len(pds)}")
    clients = [pd.client for pd in pds]
    if len(set(clients)) != len(clients):
        raise DuplicatePartial(f"duplicate client indices in {sorted(clients)}")
    acc = 1
    for pd in pds:
        acc = acc * pd.pd % params.p
    return acc


def recover_bruteforce(params: GroupParams, target: int, max_m: int,
                       stats: dict | None = None) -> int:
    """Linear search for m with g0^m == target, one multiply per step."""
    acc = 1
    steps = 0
    for j in range(max_m + 1):
        steps += 1
        if acc == target:
            if stats is not None:
                stats["steps"] = steps
            return j
        acc = acc * params.g0 % params.p
    if stats is not None:
        stats["steps"] = steps
    raise NotFound(f"no exponent <= {max_m} matches; aggregate overflowed or corrupt")


def recover_log(params: GroupParams, target: int) -> int:
    """Read m off the single set bit of target == 2^m (requires 2^m < p)."""
    if target <= 0 or target & (target - 1) != 0:
        raise NotPowerOfBase(f"{target} is not an exact power of {params.g0}")
    return target.bit_length() - 1


def recover_bsgs(params: GroupParams, target: int, max_m: int) -> int:
    """Baby-step giant-step accelerator; opt-in, not used by the protocol."""
    width = int(max_m ** 0.5) + 1
    p, g0 = params.p, params.g0
    baby = {}
    acc = 1
    for j in range(width):
        baby.setdefault(acc, j)
        acc = acc * g0 % p
    # acc == g0^width; giant steps multiply by its inverse
    giant = pow(acc, -1, p)
    gamma = target
    for i in range(width + 1):
        j = baby.get(gamma)
        if j is not None and i * width + j <= max_m:
            return i * width + j
        gamma = gamma * giant % p
    raise NotFound(f"no exponent <= {max_m} matches")


RECOVERY_MODES = ("log", "bruteforce", "auto", "bsgs")


def recover(params: GroupParams, target: int, mode: str = "auto",
            max_m: int | None = None, stats: dict | None = None) -> int:
    """Dispatch plaintext recovery; auto tries log, then falls back."""
    if mode not in RECOVERY_MODES:
        raise ValueError(f"unknown recovery mode {mode!r}")
    bound = params.q - 1 if max_m is None else max_m
    if mode == "log":
        return recover_log(params, target)
    if mode == "bruteforce":
        return recover_bruteforce(params, target, bound, stats=stats)
    if mode == "bsgs":
        return recover_bsgs(params, target, bound)
    try:
        return recover_log(params, target)
    except NotPowerOfBase:
        return recover_bruteforce(params, target, bound, stats=stats)


def decrypt_aggregate(params: GroupParams, ct: Ciphertext,
                      pds: Sequence[PartialDecryption], T: int,
                      recovery_mode: str = "auto", max_m: int | None = None,
                      stats: dict | None = None) -> int:
    """Combine T partials of an aggregated ciphertext and recover T * sum(m_i).

    The caller divides by T after fixed-point decoding; keeping the factor T
    in the integer domain avoids requiring T to divide the sum.
    """
    del ct  # partials already fold in c2; accepted for interface symmetry
    combined = combine(params, pds, T)
    return recover(params, combined, mode=recovery_mode, max_m=max_m, stats=stats)
