"""
Deterministic text embedder based on character n-gram feature hashing.

Stands in for a learned embedder behind the same call shape: text in, unit
vector out. Hashing uses blake2b so vectors are stable across processes.
"""

import hashlib

import numpy as np

EMBEDDING_DIM = 256
NGRAM_SIZES = (1, 2, 3)


def _bucket(feature: str, dim: int):
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    value = int.from_bytes(digest, "little")
    sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
    return value % dim, sign


def embed_text(text: str, dim: int = EMBEDDING_DIM) -> np.ndarray:
    """
    Embed text as an L2-normalized vector.

    Args:
        text: Input text (case and surrounding whitespace are ignored)
        dim: Output dimensionality

    Returns:
        float64 vector of length dim; all zeros when the text has no features
    """
    normalized = " ".join(text.lower().split())
    vector = np.zeros(dim, dtype=np.float64)
    if not normalized:
        return vector
    padded = f" {normalized} "
    for n in NGRAM_SIZES:
        for i in range(len(padded) - n + 1):
            index, sign = _bucket(f"{n}:{padded[i : i + n]}", dim)
            vector[index] += sign
    norm = np.linalg.norm(vector)
    if norm == 0:
        return vector
    return vector / norm


def has_features(vector: np.ndarray) -> bool:
    return bool(np.any(vector))


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
