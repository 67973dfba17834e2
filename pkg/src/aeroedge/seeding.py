"""Deterministic derivation of named RNG streams from a single master seed.

Every random draw in the simulator comes from a numpy Generator seeded via
``derive_stream_seed(master, label)``, so runs are reproducible across
platforms and independent streams never alias each other.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_stream_seed(master: int, label: str) -> int:
    """Derive a 64-bit stream seed from (master seed, label).

    Algorithm: SHA-256 over the ASCII decimal of the master seed, a colon,
    and the UTF-8 label; the first 8 digest bytes read big-endian give the
    seed. Purely byte-defined, hence independent of platform endianness.
    """
    digest = hashlib.sha256(f"{master}:{label}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def stream(master: int, label: str) -> np.random.Generator:
    """A numpy Generator on the stream named by ``label``."""
    return np.random.default_rng(derive_stream_seed(master, label))
