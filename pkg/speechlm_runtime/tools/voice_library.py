"""
Voice library and exact cosine retrieval for the audio search tool.

A library directory holds `manifest.jsonl`, one entry per line:

    {"id": "...", "wav_path": "a.wav" | "token_path": "a.txt",
     "transcription": "...", "description": "..."}

Entries are embedded from their description followed by their transcription.
`build_library()` precomputes those embeddings into `embeddings.npz` next to
the manifest together with a digest of each embedded text; `load_library()`
reuses a cached vector only while its entry's digest still matches.
"""

import hashlib
import json
import os
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

import numpy as np

from speechlm_runtime.audio.pcm import read_wav
from speechlm_runtime.audio.tokenizer import StubAudioTokenizer
from speechlm_runtime.errors import DatasetError, EmptyLibrary, InputError, NoFeatures
from speechlm_runtime.interleave.token_file import read_token_list
from speechlm_runtime.log import get_logger
from speechlm_runtime.tools.embedding import EMBEDDING_DIM, embed_text, has_features

logger = get_logger("tools.voice_library")

MANIFEST_NAME = "manifest.jsonl"
SIDECAR_NAME = "embeddings.npz"


def entry_text(description: str, transcription: str = "") -> str:
    """Text an entry is embedded from: its description, then its transcription."""
    return " ".join(part.strip() for part in (description, transcription) if part and part.strip())


def text_digest(text: str) -> str:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=16).hexdigest()


@dataclass(frozen=True, eq=False)
class VoiceLibraryEntry:
    id: str
    audio_tokens: Tuple[int, ...]
    transcription: str
    description: str
    embedding: np.ndarray

    def __post_init__(self):
        if not self.description.strip():
            raise DatasetError(f"voice library entry {self.id!r} has an empty description")
        embedding = np.asarray(self.embedding, dtype=np.float64)
        norm = np.linalg.norm(embedding)
        if norm == 0:
            raise NoFeatures(f"voice library entry {self.id!r} has a zero embedding")
        object.__setattr__(self, "embedding", embedding / norm)

    @classmethod
    def from_text(cls, entry_id, audio_tokens, transcription, description, embedder=embed_text):
        return cls(
            str(entry_id),
            tuple(int(t) for t in audio_tokens),
            transcription,
            description,
            embedder(entry_text(description, transcription)),
        )


class SearchHit(NamedTuple):
    entry: VoiceLibraryEntry
    similarity: float


class VoiceLibraryIndex:
    """
    Immutable in-memory index; brute-force cosine over all entries.

    Safe to share across threads once built.
    """

    def __init__(self, entries: Iterable[VoiceLibraryEntry]):
        self._entries = tuple(sorted(entries, key=lambda e: e.id))
        ids = [e.id for e in self._entries]
        if len(set(ids)) != len(ids):
            raise DatasetError("voice library ids must be unique")
        if self._entries:
            self._matrix = np.stack([e.embedding for e in self._entries])
        else:
            self._matrix = np.zeros((0, EMBEDDING_DIM))
        self._matrix.setflags(write=False)

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self) -> Tuple[VoiceLibraryEntry, ...]:
        return self._entries

    def get(self, entry_id: str) -> Optional[VoiceLibraryEntry]:
        for entry in self._entries:
            if entry.id == entry_id:
                return entry
        return None

    def search_vector(self, query: np.ndarray, k: int) -> List[SearchHit]:
        """
        Rank entries by cosine similarity to a query vector.

        Ties are broken by ascending id, so the order is total.
        """
        if not self._entries:
            raise EmptyLibrary("voice library has no entries")
        if k < 1:
            raise InputError(f"k must be >= 1, got {k}")
        query = np.asarray(query, dtype=np.float64)
        if not has_features(query):
            raise NoFeatures("query produced no embedding features")
        query = query / np.linalg.norm(query)
        scores = np.clip(self._matrix @ query, -1.0, 1.0)
        # entries are id-sorted, so a stable sort on -score keeps ids ascending on ties
        order = np.argsort(-scores, kind="stable")[:k]
        return [SearchHit(self._entries[i], float(scores[i])) for i in order]


def audio_search(
    query: str,
    k: int,
    library: VoiceLibraryIndex,
    embedder: Callable[[str], np.ndarray] = embed_text,
) -> List[VoiceLibraryEntry]:
    """Top-k entries for a text query, similarity descending then id ascending."""
    if len(library) == 0:
        raise EmptyLibrary("voice library has no entries")
    return [hit.entry for hit in library.search_vector(embedder(query), k)]


def read_manifest(directory: str) -> List[dict]:
    path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DatasetError(f"voice library manifest not found: {path}")
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise DatasetError(f"{path}:{lineno}: {e}")
    return records


def _record_text(record: dict) -> str:
    return entry_text(record.get("description", ""), record.get("transcription", ""))


def _load_tokens(directory: str, record: dict, tokenizer: StubAudioTokenizer) -> List[int]:
    if record.get("token_path"):
        return read_token_list(os.path.join(directory, record["token_path"]))
    if record.get("wav_path"):
        return tokenizer.encode(read_wav(os.path.join(directory, record["wav_path"])))
    raise DatasetError(f"voice library entry {record.get('id')!r} needs wav_path or token_path")


def _read_sidecar(path: str) -> Dict[str, Tuple[str, np.ndarray]]:
    with np.load(path, allow_pickle=False) as data:
        if "digests" not in data.files:
            logger.warning(f"Embedding sidecar has no text digests, ignoring path={path}")
            return {}
        return {
            entry_id: (digest, embedding)
            for entry_id, digest, embedding in zip(
                data["ids"].tolist(), data["digests"].tolist(), data["embeddings"]
            )
        }


def load_library(directory: str, embedder=embed_text) -> VoiceLibraryIndex:
    """
    Load a voice library directory, using the embedding sidecar when present.

    Args:
        directory: Directory containing manifest.jsonl
        embedder: Text embedder for entries without a current cached vector

    Returns:
        VoiceLibraryIndex
    """
    records = read_manifest(directory)
    cached: Dict[str, Tuple[str, np.ndarray]] = {}
    sidecar = os.path.join(directory, SIDECAR_NAME)
    if os.path.exists(sidecar):
        cached = _read_sidecar(sidecar)
        logger.info(f"Loaded embedding sidecar entries={len(cached)} path={sidecar}")

    tokenizer = StubAudioTokenizer()
    entries = []
    stale = 0
    for record in records:
        entry_id = str(record["id"])
        text = _record_text(record)
        digest, embedding = cached.get(entry_id, (None, None))
        if embedding is None or digest != text_digest(text):
            stale += entry_id in cached
            embedding = embedder(text)
        entries.append(
            VoiceLibraryEntry(
                entry_id,
                tuple(_load_tokens(directory, record, tokenizer)),
                record.get("transcription", ""),
                record.get("description", ""),
                embedding,
            )
        )
    if stale:
        logger.warning(f"Re-embedded entries whose text changed since build count={stale}")
    logger.info(f"Voice library ready entries={len(entries)} dir={directory}")
    return VoiceLibraryIndex(entries)


def build_library(directory: str, embedder=embed_text) -> str:
    """
    Compute entry embeddings for a library and write the sidecar.

    Returns:
        Path of the written sidecar file
    """
    records = read_manifest(directory)
    ids = np.array([str(r["id"]) for r in records])
    texts = [_record_text(r) for r in records]
    digests = np.array([text_digest(t) for t in texts])
    if records:
        embeddings = np.stack([embedder(t) for t in texts])
    else:
        embeddings = np.zeros((0, EMBEDDING_DIM))
    sidecar = os.path.join(directory, SIDECAR_NAME)
    np.savez(sidecar, ids=ids, digests=digests, embeddings=embeddings)
    logger.info(f"Wrote embedding sidecar entries={len(records)} path={sidecar}")
    return sidecar
