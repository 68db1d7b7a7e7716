"""Ternary gradient quantization and the plaintext side of aggregation.

A tensor g is compressed to a nonnegative scalar s = max|g| plus a
direction tensor in {-1, 0, +1}: each entry keeps its sign with
probability |g_k| / s and is zeroed otherwise, which makes s * dirs an
unbiased estimator of g.  Only the scalar is ever encrypted; directions
travel in plaintext at two bits per entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .codec import EncodingConfig, decode, encode
from .errors import ShapeMismatch


@dataclass(frozen=True)
class TernaryGradient:
    """Per-tensor scalar s >= 0 and int8 direction tensor in {-1, 0, +1}."""

    s: float
    dirs: np.ndarray

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("scalar must be nonnegative")


def ternarize(g: np.ndarray, rng: np.random.Generator) -> TernaryGradient:
    """Stochastic {-1, 0, +1} compression with scale s = max|g|."""
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient tensor contains non-finite values")
    s = float(np.max(np.abs(g))) if g.size else 0.0
    if s == 0.0:
        return TernaryGradient(s=0.0, dirs=np.zeros(g.shape, dtype=np.int8))
    keep = rng.random(g.shape) < np.abs(g) / s
    dirs = (np.sign(g) * keep).astype(np.int8)
    return TernaryGradient(s=s, dirs=dirs)


def scale_and_encode(s: float, n_i: int, n: int, cfg: EncodingConfig) -> int:
    """Encode the client's pre-weighted scalar s * n_i / n.

    Weighting before encryption makes the server-side ciphertext product
    decrypt to the weighted average of the client scalars.
    """
    if s < 0:
        raise ValueError("ternary scalar must be nonnegative")
    if not 0 <= n_i <= n:
        raise ValueError("local data size must satisfy 0 <= n_i <= n")
    return encode(s * n_i / n, cfg)


def aggregate_ternary(dirs_list: Sequence[np.ndarray]) -> np.ndarray:
    """Element-wise integer sum of equally shaped ternary tensors."""
    if not dirs_list:
        raise ValueError("nothing to aggregate")
    shape = dirs_list[0].shape
    total = np.zeros(shape, dtype=np.int64)
    for dirs in dirs_list:
        if dirs.shape != shape:
            raise ShapeMismatch(f"expected shape {shape}, got {dirs.shape}")
        total += dirs.astype(np.int64)
    return total


def apply_global_update(theta: Sequence[np.ndarray],
                        summed_dirs: Sequence[np.ndarray],
                        recovered: Sequence[int], T: int,
                        cfg: EncodingConfig,
                        eta: float | None = None) -> list[np.ndarray]:
    """theta - s_global * summed_dirs per tensor, s_global = decode(Tm)/T.

    The learning rate is already folded into the client-side local updates;
    pass ``eta`` only to scale the server step as an explicit variant.
    """
    if not (len(theta) == len(summed_dirs) == len(recovered)):
        raise ShapeMismatch("theta, summed_dirs and recovered must align per tensor")
    factor = 1.0 if eta is None else eta
    out = []
    for th, dirs, tm in zip(theta, summed_dirs, recovered):
        if th.shape != dirs.shape:
            raise ShapeMismatch(f"tensor shape {th.shape} vs directions {dirs.shape}")
        s_global = decode(tm, cfg) / T
        out.append(th - factor * s_global * dirs)
    return out


_PACK_CODE = {-1: 2, 0: 0, 1: 1}


def pack_ternary(dirs: np.ndarray) -> bytes:
    """Pack a {-1, 0, +1} tensor at 2 bits per entry (4 entries per byte)."""
    flat = dirs.astype(np.int8).ravel()
    codes = np.where(flat < 0, 2, flat).astype(np.uint8)
    pad = (-len(codes)) % 4
    if pad:
        codes = np.concatenate([codes, np.zeros(pad, dtype=np.uint8)])
    codes = codes.reshape(-1, 4)
    packed = codes[:, 0] | (codes[:, 1] << 2) | (codes[:, 2] << 4) | (codes[:, 3] << 6)
    return packed.astype(np.uint8).tobytes()


def unpack_ternary(blob: bytes, shape: tuple[int, ...]) -> np.ndarray:
    packed = np.frombuffer(blob, dtype=np.uint8)
    codes = np.empty((len(packed), 4), dtype=np.uint8)
    for pos in range(4):
        codes[:, pos] = (packed >> (2 * pos)) & 0b11
    flat = codes.ravel()[: int(np.prod(shape, dtype=np.int64))]
    dirs = flat.astype(np.int8)
    dirs[dirs == 2] = -1
    if np.any(dirs > 1):
        raise ValueError("invalid ternary code in packed data")
    return dirs.reshape(shape)


def ternary_nbytes(numel: int) -> int:
    """Serialized size of a ternary tensor: ceil(numel / 4) bytes."""
    return (numel + 3) // 4
