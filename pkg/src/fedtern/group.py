"""Discrete-log group parameters and the modular-arithmetic kernel.

The cryptosystem lives in the order-q subgroup of Z_p* where p = r*q + 1 for
primes p, q.  Exponents ("scalars") are integers reduced mod q, group
elements are integers in [1, p-1].  A fixed small base ``g0 = 2`` encodes
plaintexts in the exponent; whether 2 itself lies in the order-q subgroup
depends on p and is exposed as :attr:`GroupParams.g0_in_subgroup`.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property, lru_cache
from random import Random

from .errors import ParamGenerationError
from .seeds import derive_rng

# Type aliases: scalars are exponents mod q, group elements integers mod p.
Scalar = int
GroupElement = int

ENCODING_BASE = 2
MILLER_RABIN_ROUNDS = 64  # error probability <= 4^-64, well under 2^-80

_SIEVE_BOUND = 20_000


def _small_primes(bound: int) -> tuple[int, ...]:
    flags = bytearray([1]) * bound
    flags[0] = flags[1] = 0
    for i in range(2, int(bound ** 0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = bytearray(len(flags[i * i :: i]))
    return tuple(i for i in range(bound) if flags[i])


_SMALL_PRIMES = _small_primes(_SIEVE_BOUND)


def is_probable_prime(n: int, rng: Random, rounds: int = MILLER_RABIN_ROUNDS) -> bool:
    """Miller-Rabin with ``rounds`` rng-chosen witnesses."""
    if n < 2:
        return False
    for sp in _SMALL_PRIMES[:64]:
        if n % sp == 0:
            return n == sp
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for _ in range(rounds):
        a = rng.randrange(2, n - 1)
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class GroupParams:
    """Public tuple (p, q, g, y, g0) defining the group and encoding base.

    Invariants checked on construction: q | p-1, g and y generate the
    order-q subgroup, g != y, and g0 == 2.
    """

    p: int
    q: int
    g: int
    y: int
    g0: int = ENCODING_BASE

    def __post_init__(self):
        if (self.p - 1) % self.q != 0:
            raise ValueError("q must divide p - 1")
        for name, v in (("g", self.g), ("y", self.y)):
            if not 2 <= v <= self.p - 1:
                raise ValueError(f"{name} out of range")
            if pow(v, self.q, self.p) != 1:
                raise ValueError(f"{name} is not in the order-q subgroup")
        if self.g == self.y:
            raise ValueError("g and y must be distinct")
        if self.g0 != ENCODING_BASE:
            raise ValueError(f"encoding base must be {ENCODING_BASE}")

    @property
    def cofactor(self) -> int:
        return (self.p - 1) // self.q

    @cached_property
    def g0_in_subgroup(self) -> bool:
        """True when the encoding base has order q (holds for the toy preset)."""
        return pow(self.g0, self.q, self.p) == 1

    def is_subgroup_element(self, a: int) -> bool:
        return 0 < a < self.p and pow(a, self.q, self.p) == 1


def pow_mod(params: GroupParams, base: GroupElement, exp: int) -> GroupElement:
    """base^exp mod p (exp may be any nonnegative integer; 0 gives 1)."""
    if exp < 0:
        raise ValueError("negative exponent; invert explicitly instead")
    return pow(base, exp, params.p)


def random_scalar(params: GroupParams, rng: Random) -> Scalar:
    """Uniform draw from [0, q-1]."""
    return rng.randrange(params.q)


def random_nonzero_scalar(params: GroupParams, rng: Random) -> Scalar:
    """Uniform draw from [1, q-1]."""
    return rng.randrange(1, params.q)


def toy_params() -> GroupParams:
    """Tiny fixture group for exhaustive testing: p=23, q=11, g=2, y=3.

    Both 2 and 3 have order 11 mod 23, so here the encoding base is itself
    a subgroup member (g0_in_subgroup is True).
    """
    return GroupParams(p=23, q=11, g=2, y=3)


def _find_prime_near(bits: int, rng: Random, max_restarts: int = 64) -> int:
    for _ in range(max_restarts):
        q = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
        while q.bit_length() == bits:
            if is_probable_prime(q, rng):
                return q
            q += 2
    raise ParamGenerationError(f"no {bits}-bit prime found")


def _sieve_window(r0: int, q: int, width: int) -> bytearray:
    """Mark composite candidates p = (r0 + 2i)*q + 1 for i in [0, width)."""
    ok = bytearray([1]) * width
    step = 2 * q
    for sp in _SMALL_PRIMES:
        if sp == 2 or q % sp == 0:
            continue
        # solve (r0 + 2i)*q + 1 ≡ 0 (mod sp) for i
        inv = pow(step % sp, -1, sp)
        i0 = (-(r0 * q + 1)) * inv % sp
        for i in range(i0, width, sp):
            ok[i] = 0
    return ok


def generate_params(key_bits: int, group_bits: int, seed: bytes | str,
                    max_attempts: int = 256) -> GroupParams:
    """Deterministically generate a fresh parameter set from a seed.

    Searches a prime q of ``key_bits`` bits, then a prime p = r*q + 1 of
    exactly ``group_bits`` bits, then derives g and y as hash-seeded
    (p-1)/q-th powers so that nobody knows log_g(y).
    """
    if isinstance(seed, str):
        seed = seed.encode("utf-8")
    if not seed:
        raise ValueError("seed must be nonempty")
    if key_bits < 16:
        raise ValueError("key_bits must be at least 16")
    if group_bits <= key_bits:
        raise ValueError("group_bits must exceed key_bits")

    rng = derive_rng(seed, "param-search", key_bits, group_bits)
    q = _find_prime_near(key_bits, rng)

    r_lo = ((1 << (group_bits - 1)) - 1) // q + 1
    r_hi = ((1 << group_bits) - 2) // q
    window = 8192
    p = None
    for _ in range(max_attempts):
        r0 = rng.randrange(r_lo, max(r_lo + 1, r_hi - 2 * window))
        r0 += r0 & 1  # even r keeps p odd
        ok = _sieve_window(r0, q, window)
        for i in range(window):
            if not ok[i]:
                continue
            cand = (r0 + 2 * i) * q + 1
            if cand.bit_length() != group_bits:
                break
            if is_probable_prime(cand, rng):
                p = cand
                break
        if p is not None:
            break
    if p is None:
        raise ParamGenerationError(
            f"no {group_bits}-bit prime p = r*q + 1 found for the {key_bits}-bit q")

    cof = (p - 1) // q
    g = _derive_subgroup_element(seed, b"generator-g", p, cof, exclude=(1,))
    y = _derive_subgroup_element(seed, b"generator-y", p, cof, exclude=(1, g))
    return GroupParams(p=p, q=q, g=g, y=y)


def _derive_subgroup_element(seed: bytes, tag: bytes, p: int, cofactor: int,
                             exclude: tuple[int, ...]) -> int:
    """h^((p-1)/q) for successive hash outputs h; the exponent is never kept."""
    n_blocks = p.bit_length() // 256 + 1
    for counter in range(1 << 16):
        blob = b"".join(
            hashlib.sha256(seed + tag + counter.to_bytes(4, "big") + blk.to_bytes(2, "big")).digest()
            for blk in range(n_blocks))
        base = int.from_bytes(blob, "big") % p
        if base <= 1:
            continue
        el = pow(base, cofactor, p)
        if el not in exclude:
            return el
    raise ParamGenerationError("could not derive a subgroup element")


@lru_cache(maxsize=8)
def preset_params(key_bits: int = 256, group_bits: int = 3072) -> GroupParams:
    """Cached deterministic parameter set at the default security sizes."""
    return generate_params(key_bits, group_bits, b"fedtern-preset-v1")


def params_to_text(params: GroupParams) -> str:
    """Canonical text form: decimal p, q, g, y, g0, one per line."""
    return "\n".join(str(v) for v in (params.p, params.q, params.g, params.y, params.g0)) + "\n"


def params_from_text(text: str) -> GroupParams:
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if len(lines) != 5:
        raise ValueError(f"expected 5 integer lines (p, q, g, y, g0), got {len(lines)}")
    p, q, g, y, g0 = (int(ln) for ln in lines)
    return GroupParams(p=p, q=q, g=g, y=y, g0=g0)
