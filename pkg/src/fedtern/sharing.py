"""Polynomial secret sharing over Z_q with Pedersen and Feldman commitments.

A dealer samples a pair of random degree-(T-1) polynomials (f, f'); the
share for recipient j is the evaluation pair (f(j), f'(j)) at the 1-based
client index.  Pedersen commitments C_k = g^{a_k} y^{b_k} hide the
coefficients unconditionally; Feldman commitments A_k = g^{a_k} bind them
and expose the public-key contribution A_0 = g^{f(0)}.
"""

from __future__ import annotations

from dataclasses import dataclass
from random import Random
from typing import Iterable, Sequence

from .group import GroupParams, random_scalar
from .wire import encode_int_seq


@dataclass(frozen=True)
class SecretPolynomialPair:
    """Coefficient vectors (low order first); f_coeffs[0] is the secret."""

    f_coeffs: tuple[int, ...]
    f_prime_coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.f_coeffs) != len(self.f_prime_coeffs):
            raise ValueError("coefficient vectors must have equal length")
        if not self.f_coeffs:
            raise ValueError("threshold must be at least 1")

    @property
    def threshold(self) -> int:
        return len(self.f_coeffs)

    @property
    def secret(self) -> int:
        return self.f_coeffs[0]


@dataclass(frozen=True)
class ShareBundle:
    dealer: int
    recipient: int
    s: int
    s_prime: int

    def to_bytes(self) -> bytes:
        return encode_int_seq((self.dealer, self.recipient, self.s, self.s_prime))


@dataclass(frozen=True)
class PedersenCommitment:
    C: tuple[int, ...]

    def to_bytes(self) -> bytes:
        return encode_int_seq(self.C)


@dataclass(frozen=True)
class FeldmanCommitment:
    A: tuple[int, ...]

    def to_bytes(self) -> bytes:
        return encode_int_seq(self.A)


def sample_polynomial_pair(params: GroupParams, T: int, rng: Random) -> SecretPolynomialPair:
    """Two uniform random polynomials of degree T-1 over Z_q."""
    if T < 1:
        raise ValueError("threshold must be at least 1")
    return SecretPolynomialPair(
        f_coeffs=tuple(random_scalar(params, rng) for _ in range(T)),
        f_prime_coeffs=tuple(random_scalar(params, rng) for _ in range(T)),
    )


def evaluate_poly(coeffs: Sequence[int], x: int, q: int) -> int:
    """Horner evaluation mod q."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % q
    return acc


def evaluate(params: GroupParams, poly: SecretPolynomialPair, dealer: int, j: int) -> ShareBundle:
    """Share for recipient j >= 1 (evaluating at 0 would hand out the secret)."""
    if j < 1:
        raise ValueError("share evaluation point must be >= 1")
    q = params.q
    return ShareBundle(
        dealer=dealer,
        recipient=j,
        s=evaluate_poly(poly.f_coeffs, j, q),
        s_prime=evaluate_poly(poly.f_prime_coeffs, j, q),
    )


def pedersen_commit(params: GroupParams, poly: SecretPolynomialPair) -> PedersenCommitment:
    p = params.p
    return PedersenCommitment(C=tuple(
        pow(params.g, a, p) * pow(params.y, b, p) % p
        for a, b in zip(poly.f_coeffs, poly.f_prime_coeffs)))


def feldman_commit(params: GroupParams, poly: SecretPolynomialPair) -> FeldmanCommitment:
    return FeldmanCommitment(A=tuple(pow(params.g, a, params.p) for a in poly.f_coeffs))


def _commitment_product(parts: Sequence[int], j: int, params: GroupParams) -> int:
    # exponents j^k reduced mod q: all commitment parts lie in the order-q subgroup
    p, q = params.p, params.q
    acc = 1
    for k, c in enumerate(parts):
        acc = acc * pow(c, pow(j, k, q), p) % p
    return acc


def pedersen_verify(params: GroupParams, share: ShareBundle, commit: PedersenCommitment) -> bool:
    """g^s y^s' == prod_k C_k^{j^k} (mod p)."""
    p = params.p
    lhs = pow(params.g, share.s, p) * pow(params.y, share.s_prime, p) % p
    return lhs == _commitment_product(commit.C, share.recipient, params)


def feldman_verify(params: GroupParams, share: ShareBundle, commit: FeldmanCommitment) -> bool:
    """g^s == prod_k A_k^{j^k} (mod p)."""
    lhs = pow(params.g, share.s, params.p)
    return lhs == _commitment_product(commit.A, share.recipient, params)


def lagrange_coefficient(i: int, indices: Iterable[int], q: int) -> int:
    """Coefficient of the share at index i when interpolating at x = 0."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        raise ValueError("indices must be distinct")
    if i not in idx:
        raise ValueError("i must be a member of the index set")
    if any(j < 1 for j in idx):
        raise ValueError("indices must be >= 1")
    num = 1
    den = 1
    for j in idx:
        if j == i:
            continue
        num = num * (j % q) % q
        den = den * ((j - i) % q) % q
    return num * pow(den, -1, q) % q


def reconstruct_at_zero(points: Sequence[tuple[int, int]], q: int) -> int:
    """f(0) from >= deg+1 distinct evaluation points (index, value)."""
    indices = [i for i, _ in points]
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    acc = 0
    for i, v in points:
        acc = (acc + lagrange_coefficient(i, indices, q) * v) % q
    return acc
