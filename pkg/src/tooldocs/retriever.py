"""TF-IDF retrieval over tool documents, plus first-n-words truncation.

Weights are raw term counts times a smoothed idf, ``ln((1+N)/(1+df)) + 1``,
and every document vector is L2-normalized. Queries are scored by cosine
similarity; only documents sharing at least one term are returned.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, DuplicateDocId, EmptyCorpus, RetrievalError

_SPLIT = re.compile(r"[^a-z0-9_-]+")
# scores closer than this count as tied and fall back to insertion order
SCORE_TIE_DECIMALS = 12


@dataclass(frozen=True)
class RetrievalConfig:
    top_k: int = 10
    doc_word_limit: int = 600
    total_word_budget: int | None = None

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ConfigError("top_k must be >= 1")
        if self.doc_word_limit < 1:
            raise ConfigError("doc_word_limit must be >= 1")
        if self.total_word_budget is not None and self.total_word_budget < 0:
            raise ConfigError("total_word_budget must be >= 0")


def tokenize(text: str) -> list[str]:
    return [t for t in _SPLIT.split(text.lower()) if t]


def smoothed_idf(n_docs: int, df: int) -> float:
    return math.log((1 + n_docs) / (1 + df)) + 1.0


def _normalize(vec: dict[int, float]) -> dict[int, float]:
    norm = math.sqrt(sum(w * w for w in vec.values()))
    if norm == 0.0:
        return {}
    return {t: w / norm for t, w in vec.items()}


@dataclass(frozen=True)
class RetrievalIndex:
    vocabulary: dict[str, int]
    idf: tuple[float, ...]
    doc_vectors: tuple[dict[int, float], ...]
    doc_order: tuple[str, ...]
    config: RetrievalConfig = field(default_factory=RetrievalConfig)

    def vectorize(self, text: str) -> dict[int, float]:
        counts = Counter(self.vocabulary[t] for t in tokenize(text) if t in self.vocabulary)
        return _normalize({tid: c * self.idf[tid] for tid, c in sorted(counts.items())})

    def query(self, question: str, k: int | None = None) -> list[tuple[str, float]]:
        return query(self, question, k)

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "doc_order": list(self.doc_order),
            "vocabulary": sorted(self.vocabulary, key=self.vocabulary.__getitem__),
            "idf": list(self.idf),
            "doc_vectors": [[[t, w] for t, w in sorted(v.items())] for v in self.doc_vectors],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), sort_keys=True)

    @classmethod
    def loads(cls, blob: str) -> "RetrievalIndex":
        d = json.loads(blob)
        return cls(
            vocabulary={t: i for i, t in enumerate(d["vocabulary"])},
            idf=tuple(d["idf"]),
            doc_vectors=tuple({int(t): w for t, w in v} for v in d["doc_vectors"]),
            doc_order=tuple(d["doc_order"]),
            config=RetrievalConfig(**d["config"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "RetrievalIndex":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def build_index(docs: Iterable[tuple[str, str]], config: RetrievalConfig | None = None) -> RetrievalIndex:
    config = config or RetrievalConfig()
    docs = list(docs)
    if not docs:
        raise EmptyCorpus("cannot index an empty corpus")
    ids = [d for d, _ in docs]
    dupes = [d for d, c in Counter(ids).items() if c > 1]
    if dupes:
        raise DuplicateDocId(f"duplicate doc ids: {sorted(dupes)}")

    token_lists = [tokenize(text) for _, text in docs]
    vocab_terms = sorted({t for toks in token_lists for t in toks})
    vocabulary = {t: i for i, t in enumerate(vocab_terms)}
    df = Counter(t for toks in token_lists for t in set(toks))
    n = len(docs)
    idf = tuple(smoothed_idf(n, df[t]) for t in vocab_terms)

    vectors = []
    for toks in token_lists:
        counts = Counter(vocabulary[t] for t in toks)
        vectors.append(_normalize({tid: c * idf[tid] for tid, c in sorted(counts.items())}))
    return RetrievalIndex(vocabulary, idf, tuple(vectors), tuple(ids), config)


def rank_scores(scores: Sequence[float], doc_order: Sequence[str], k: int) -> list[tuple[str, float]]:
    """Keep positive scores, best first, ties by insertion order, at most k."""
    ranked = sorted(
        (i for i, s in enumerate(scores) if s > 0.0),
        key=lambda i: (-round(scores[i], SCORE_TIE_DECIMALS), i),
    )
    return [(doc_order[i], scores[i]) for i in ranked[:k]]


def query(index: RetrievalIndex, question: str, k: int | None = None) -> list[tuple[str, float]]:
    k = index.config.top_k if k is None else k
    if k < 1:
        raise RetrievalError("k must be >= 1")
    q = index.vectorize(question)
    if not q:
        return []
    scores = []
    for vec in index.doc_vectors:
        s = sum(w * vec[t] for t, w in q.items() if t in vec)
        scores.append(min(1.0, s))
    return rank_scores(scores, index.doc_order, k)


def truncate_words(text: str, n: int) -> str:
    """First ``n`` whitespace-delimited words joined by single spaces."""
    if n < 1:
        raise RetrievalError("n must be >= 1")
    return " ".join(text.split()[:n])


def word_count(text: str) -> int:
    return len(text.split())
