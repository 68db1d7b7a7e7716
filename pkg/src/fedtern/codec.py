"""Fixed-point encoding of real scalars into Z_q.

encode(x) = round(x * 2^b) mod q with round-half-away-from-zero, so
encode(-x) == q - encode(x).  One third of q is reserved for each sign;
the band in between is a dead zone whose appearance means an aggregate
overflowed, which is reported as an error rather than saturated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DecodeDeadZone, EncodeOverflow

MIN_BITS = 2
MAX_BITS = 15


@dataclass(frozen=True)
class EncodingConfig:
    """Encoding bit length b plus the group order q it maps into."""

    b: int
    q: int

    def __post_init__(self):
        if not MIN_BITS <= self.b <= MAX_BITS:
            raise ValueError(f"encoding bits must be in {MIN_BITS}..{MAX_BITS}, got {self.b}")
        if self.q < 12:
            raise ValueError("group order too small to reserve an encoding band")

    @property
    def int_max(self) -> int:
        """Largest encodable magnitude: floor(q / 3)."""
        return self.q // 3

    def headroom_ok(self, max_magnitude: float, n_terms: int) -> bool:
        """Whether n_terms values of the given magnitude can be summed safely."""
        return round(max_magnitude * (1 << self.b)) * n_terms <= self.int_max


def _round_half_away(v: float) -> int:
    return int(math.floor(abs(v) + 0.5)) * (-1 if v < 0 else 1)


def encode(x: float, cfg: EncodingConfig) -> int:
    """Map a real number to its fixed-point residue mod q."""
    if not math.isfinite(x):
        raise EncodeOverflow(f"cannot encode non-finite value {x}")
    m_hat = _round_half_away(x * (1 << cfg.b))
    if abs(m_hat) > cfg.int_max:
        raise EncodeOverflow(
            f"|round({x} * 2^{cfg.b})| = {abs(m_hat)} exceeds int_max = {cfg.int_max}")
    return m_hat % cfg.q


def decode(m: int, cfg: EncodingConfig) -> float:
    """Invert :func:`encode`; values in the dead zone signal overflow."""
    if m < 0:
        raise ValueError("encoded values are nonnegative residues")
    if m <= cfg.int_max:
        return m * 2.0 ** -cfg.b
    if m > cfg.q - cfg.int_max:
        return (m - cfg.q) * 2.0 ** -cfg.b
    raise DecodeDeadZone(
        f"{m} lies between int_max = {cfg.int_max} and q - int_max = {cfg.q - cfg.int_max}")
