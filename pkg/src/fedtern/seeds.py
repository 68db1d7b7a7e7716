"""Deterministic derivation of independent randomness streams.

Every source of randomness in the package is a ``random.Random`` (big-int
draws) or ``numpy`` generator seeded through :func:`derive_int`, so a single
experiment seed fans out into reproducible, non-overlapping streams.
"""

import hashlib
from random import Random


def derive_int(*parts) -> int:
    """Hash an arbitrary tuple of ints / strings / bytes into a 256-bit seed."""
    h = hashlib.sha256()
    for part in parts:
        if isinstance(part, bytes):
            blob = part
        elif isinstance(part, str):
            blob = part.encode("utf-8")
        elif isinstance(part, int):
            blob = part.to_bytes((part.bit_length() + 15) // 8 + 1, "big", signed=True)
        else:
            raise TypeError(f"unsupported seed part: {type(part).__name__}")
        h.update(len(blob).to_bytes(4, "big"))
        h.update(blob)
    return int.from_bytes(h.digest(), "big")


def derive_rng(*parts) -> Random:
    """A ``random.Random`` seeded from the hashed parts."""
    return Random(derive_int(*parts))
