"""Per-class knowledge bases: chunking, embeddings, and MMR retrieval.

Documents are chunked on character offsets (size 800, overlap 80), embedded,
and kept in small in-memory stores — one per attack class — that are scanned
exactly at query time. Ingest builds a replacement store off to the side and
swaps it in atomically, so readers never observe a half-built store.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from .errors import DimensionMismatch, EmbedderUnavailable, InvalidParams
from .payload import ATTACK_CLASSES, AttackClass

DEFAULT_CHUNK_SIZE = 800
DEFAULT_CHUNK_OVERLAP = 80
DEFAULT_DIMENSION = 384


@dataclass
class Chunk:
    chunk_id: str
    attack_class: AttackClass
    doc_path: str
    start_offset: int
    text: str

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "attack_class": self.attack_class.label,
            "doc_path": self.doc_path,
            "start_offset": self.start_offset,
            "text": self.text,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Chunk":
        return cls(
            chunk_id=data["chunk_id"],
            attack_class=AttackClass.from_name(data["attack_class"]),
            doc_path=data["doc_path"],
            start_offset=data["start_offset"],
            text=data["text"],
        )


@dataclass
class EmbeddingVector:
    values: list[float]

    @property
    def dimension(self) -> int:
        return len(self.values)

    @property
    def norm(self) -> float:
        return math.sqrt(math.fsum(v * v for v in self.values))

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


@dataclass
class ScoredChunk:
    chunk: Chunk
    relevance: float
    mmr_score: float

    def to_dict(self) -> dict:
        return {
            "chunk": self.chunk.to_dict(),
            "relevance": self.relevance,
            "mmr_score": self.mmr_score,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ScoredChunk":
        return cls(
            chunk=Chunk.from_dict(data["chunk"]),
            relevance=data["relevance"],
            mmr_score=data["mmr_score"],
        )


@dataclass
class VectorStore:
    attack_class: AttackClass
    dimension: int
    entries: list[tuple[Chunk, EmbeddingVector]] = field(default_factory=list)

    def add(self, chunk: Chunk, vector: EmbeddingVector) -> None:
        if vector.dimension != self.dimension:
            raise DimensionMismatch(
                f"vector dimension {vector.dimension} != store dimension {self.dimension}"
            )
        self.entries.append((chunk, vector))

    def __len__(self) -> int:
        return len(self.entries)


class Embedder(Protocol):
    def embed(self, texts: list[str]) -> list[EmbeddingVector]: ...

    @property
    def dimension(self) -> int: ...


class HashEmbedder:
    """Deterministic offline embedder: signed FNV-1a token hashing.

    Tokens are lowercased alphanumeric runs; each token's 64-bit FNV-1a hash
    picks a bucket (h mod d) and a sign (bit 63). The accumulator is
    L2-normalized; a token-free text yields the all-zero vector. Bit-identical
    across runs and platforms.
    """

    _FNV_OFFSET = 0xCBF29CE484222325
    _FNV_PRIME = 0x100000001B3
    _MASK = (1 << 64) - 1

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        if dimension < 8:
            raise InvalidParams("embedding dimension must be >= 8")
        self._dimension = dimension

    @property
    def dimension(self) -> int:
        return self._dimension

    @classmethod
    def _fnv1a(cls, token: str) -> int:
        h = cls._FNV_OFFSET
        for byte in token.encode("utf-8"):
            h = ((h ^ byte) * cls._FNV_PRIME) & cls._MASK
        return h

    def embed_one(self, text: str) -> EmbeddingVector:
        acc = [0.0] * self._dimension
        for token in re.findall(r"[0-9a-z]+", text.lower()):
            h = self._fnv1a(token)
            sign = 1.0 if (h >> 63) == 0 else -1.0
            acc[h % self._dimension] += sign
        norm = math.sqrt(math.fsum(v * v for v in acc))
        if norm > 0:
            acc = [v / norm for v in acc]
        return EmbeddingVector(acc)

    def embed(self, texts: list[str]) -> list[EmbeddingVector]:
        return [self.embed_one(t) for t in texts]


def hash_embed(text: str, d: int = DEFAULT_DIMENSION) -> EmbeddingVector:
    return HashEmbedder(d).embed_one(text)


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    if a.dimension != b.dimension:
        raise DimensionMismatch(f"{a.dimension} != {b.dimension}")
    na, nb = a.norm, b.norm
    if na == 0.0 or nb == 0.0:
        return 0.0
    return math.fsum(x * y for x, y in zip(a.values, b.values)) / (na * nb)


def chunk_document(
    text: str,
    size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
) -> list[tuple[int, str]]:
    """Split text into (start_offset, chunk_text) windows.

    Chunks start at multiples of the stride (size - overlap). A final window
    fully contained in the previous chunk is suppressed, so the tail of the
    document is never emitted twice.
    """
    if size <= 0 or overlap >= size:
        raise InvalidParams("require 0 <= overlap < size and size > 0")
    stride = size - overlap
    out: list[tuple[int, str]] = []
    start = 0
    prev_end = 0
    while start < len(text):
        end = min(start + size, len(text))
        if out and end <= prev_end:
            break
        out.append((start, text[start:end]))
        prev_end = end
        start += stride
    return out


@dataclass
class IngestReport:
    per_class: dict[str, dict] = field(default_factory=dict)
    skipped_files: list[str] = field(default_factory=list)
    missing_class_dirs: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "per_class": self.per_class,
            "skipped_files": self.skipped_files,
            "missing_class_dirs": self.missing_class_dirs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


class StoreRegistry:
    """Holds one vector store per attack class, swapped atomically on ingest."""

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension
        self._stores: dict[AttackClass, VectorStore] = {}

    def get(self, attack_class: AttackClass) -> VectorStore | None:
        return self._stores.get(attack_class)

    def chunk_counts(self) -> dict[str, int]:
        return {cls.label: len(self._stores.get(cls, [])) for cls in ATTACK_CLASSES}

    def ready(self) -> bool:
        return bool(self._stores)

    def ingest(
        self,
        kb_root: str | Path,
        embedder: Embedder,
        size: int = DEFAULT_CHUNK_SIZE,
        overlap: int = DEFAULT_CHUNK_OVERLAP,
    ) -> IngestReport:
        """Chunk, embed and index every document under ``kb_root``.

        Layout is ``<kb_root>/{ssti,sqli,xss}/**/*.{txt,md}``. A missing class
        directory is skipped with a warning entry; an embedder failure aborts
        the whole ingest leaving existing stores untouched; a non-UTF-8 file
        is skipped and recorded.
        """
        kb_root = Path(kb_root)
        report = IngestReport()
        staged: dict[AttackClass, VectorStore] = {}

        for cls in ATTACK_CLASSES:
            class_dir = kb_root / cls.label
            if not class_dir.is_dir():
                report.missing_class_dirs.append(cls.label)
                continue
            store = VectorStore(attack_class=cls, dimension=embedder.dimension)
            documents = 0
            pending: list[Chunk] = []
            for path in sorted(class_dir.rglob("*")):
                if path.suffix.lower() not in (".txt", ".md") or not path.is_file():
                    continue
                try:
                    text = path.read_text(encoding="utf-8")
                except UnicodeDecodeError:
                    report.skipped_files.append(str(path))
                    continue
                documents += 1
                rel = str(path.relative_to(kb_root))
                for start, chunk_text in chunk_document(text, size, overlap):
                    pending.append(
                        Chunk(
                            chunk_id=f"{cls.label}:{rel}:{start}",
                            attack_class=cls,
                            doc_path=rel,
                            start_offset=start,
                            text=chunk_text,
                        )
                    )
            try:
                vectors = embedder.embed([c.text for c in pending]) if pending else []
            except Exception as exc:
                raise EmbedderUnavailable(f"embedding failed during ingest: {exc}") from exc
            for chunk, vec in zip(pending, vectors):
                store.add(chunk, vec)
            staged[cls] = store
            report.per_class[cls.label] = {
                "documents": documents,
                "chunks": len(store),
                "dimension": store.dimension,
            }

        # Swap everything in at once; readers see either the old stores or
        # the complete new ones.
        self._stores.update(staged)
        return report


def mmr_retrieve(
    store: VectorStore,
    query: EmbeddingVector,
    k: int,
    lam: float = 0.5,
) -> list[ScoredChunk]:
    """Greedy maximal-marginal-relevance selection over one class store.

    First pick maximizes query relevance; each later pick maximizes
    ``lam * cos(d, query) - (1 - lam) * max_s cos(d, s)`` over the already
    selected set. Ties break toward earliest insertion order.
    """
    if not store.entries or k <= 0:
        return []
    if query.dimension != store.dimension:
        raise DimensionMismatch(f"{query.dimension} != {store.dimension}")

    relevance = [cosine(vec, query) for _, vec in store.entries]
    remaining = list(range(len(store.entries)))
    selected: list[int] = []
    out: list[ScoredChunk] = []

    while remaining and len(selected) < min(k, len(store.entries)):
        if not selected:
            best = max(remaining, key=lambda i: (relevance[i], -i))
            score = relevance[best]
        else:
            def objective(i: int) -> float:
                redundancy = max(
                    cosine(store.entries[i][1], store.entries[j][1]) for j in selected
                )
                return lam * relevance[i] - (1.0 - lam) * redundancy

            best = max(remaining, key=lambda i: (objective(i), -i))
            score = objective(best)
        selected.append(best)
        remaining.remove(best)
        out.append(ScoredChunk(store.entries[best][0], relevance[best], score))
    return out
