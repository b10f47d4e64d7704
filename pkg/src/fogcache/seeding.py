"""Keyed sub-seed derivation.

Every stochastic step takes a seed derived from the master seed and a path
of keys, so any step can be re-run in isolation::

    derive_seed(master, "sweep", "p", "Verizon", 3)

is the first 8 bytes (big-endian) of SHA-256 over ``"master|key1|key2|..."``
with the top bit cleared, i.e. a non-negative 63-bit integer.
"""
from __future__ import annotations

import hashlib


def derive_seed(master: int, *keys) -> int:
    text = "|".join([str(int(master))] + [str(k) for k in keys])
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
