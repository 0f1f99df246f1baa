"""Fixed-size sliding-window chunking over document bodies.

Sizes are counted in Unicode codepoints, never bytes, so multibyte text is
never split mid-character.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from typing import Iterable

from .corpus import Document
from .errors import InvalidConfig


@dataclass(frozen=True)
class ChunkConfig:
    size: int
    overlap: int = 0

    def __post_init__(self):
        if self.size <= 0:
            raise InvalidConfig(f"chunk size must be > 0, got {self.size}")
        if self.overlap < 0 or self.overlap >= self.size:
            raise InvalidConfig(
                f"overlap must satisfy 0 <= overlap < size, got {self.overlap}"
            )

    @property
    def stride(self) -> int:
        return self.size - self.overlap


@dataclass(frozen=True)
class Chunk:
    doc_id: str
    seq: int
    text: str
    char_start: int
    char_end: int


def chunk_text(text: str, cfg: ChunkConfig, doc_id: str = "") -> list[Chunk]:
    """Split text into chunks of cfg.size codepoints every cfg.stride
    codepoints; stops after the first chunk reaching the end of text."""
    if not text:
        return []
    n = len(text)
    chunks = []
    seq = 0
    start = 0
    while True:
        end = min(start + cfg.size, n)
        chunks.append(Chunk(doc_id=doc_id, seq=seq, text=text[start:end],
                            char_start=start, char_end=end))
        if end >= n:
            break
        seq += 1
        start += cfg.stride
    return chunks


def chunk_corpus(docs: list[Document], cfg: ChunkConfig) -> list[Chunk]:
    """Chunk every document body, concatenated in document order."""
    out: list[Chunk] = []
    for doc in docs:
        out.extend(chunk_text(doc.body, cfg, doc_id=doc.id))
    return out


def dump_chunks_jsonl(chunks: Iterable[Chunk], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for c in chunks:
            f.write(json.dumps(asdict(c), ensure_ascii=False) + "\n")
