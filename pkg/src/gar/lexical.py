"""Lexical and dense similarity: BM25 retrieval and exhaustive vector search.

Both routes serve double duty: ad-hoc retrieval for queries and doc-as-query
similarity for corpus graph construction.
"""

from __future__ import annotations

import math
import re
import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .docmap import DocMap
from .graph import docmap_path
from .ranking import Ranking

_TOKEN_RE = re.compile(r"[^\W_]+")

VEC_MAGIC = b"GARV"
VEC_VERSION = 1
_VEC_HEADER = struct.Struct("<4sIII")  # magic, version, n_docs, dim


def tokenize(text: str) -> list[str]:
    """Lowercase and split on every non-alphanumeric codepoint."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.k1 < 0:
            raise ValueError(f"k1 must be non-negative, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must lie in [0, 1], got {self.b}")


class InvertedIndex:
    """Term -> {internal id -> term frequency} postings over a corpus.

    Postings follow corpus order, so iteration over a term's docs is by
    ascending internal id. The index is immutable once built.
    """

    __slots__ = ("docmap", "postings", "doc_lengths", "avg_doc_length", "doc_terms")

    def __init__(
        self,
        docmap: DocMap,
        postings: dict[str, dict[int, int]],
        doc_lengths: Sequence[int],
        doc_terms: Sequence[tuple[str, ...]],
    ):
        self.docmap = docmap
        self.postings = postings
        self.doc_lengths = tuple(doc_lengths)
        self.avg_doc_length = sum(doc_lengths) / len(doc_lengths)
        self.doc_terms = tuple(doc_terms)

    @property
    def n_docs(self) -> int:
        return len(self.docmap)

    def term_frequency(self, term: str, doc: int) -> int:
        return self.postings.get(term, {}).get(doc, 0)

    def document_frequency(self, term: str) -> int:
        return len(self.postings.get(term, {}))


def index_corpus(corpus: Iterable[tuple[str, str]]) -> InvertedIndex:
    """Build an inverted index from (docid, text) pairs."""
    docids: list[str] = []
    lengths: list[int] = []
    doc_terms: list[tuple[str, ...]] = []
    postings: dict[str, dict[int, int]] = {}
    for doc, (docid, text) in enumerate(corpus):
        docids.append(docid)
        tokens = tokenize(text)
        lengths.append(len(tokens))
        counts = Counter(tokens)
        doc_terms.append(tuple(sorted(counts)))
        for term, tf in counts.items():
            postings.setdefault(term, {})[doc] = tf
    if not docids:
        raise ValueError("corpus is empty")
    return InvertedIndex(DocMap(docids), postings, lengths, doc_terms)


def _idf(index: InvertedIndex, term: str) -> float:
    df = index.document_frequency(term)
    return math.log((index.n_docs - df + 0.5) / (df + 0.5) + 1.0)


def bm25_score(
    index: InvertedIndex,
    params: Bm25Params,
    query_terms: Iterable[str],
    doc: int,
) -> float:
    """Okapi BM25 score of one doc against a set of query terms.

    Repeated query terms contribute once; terms are visited in sorted
    order so the float accumulation is deterministic.
    """
    if index.avg_doc_length == 0:
        return 0.0
    norm = 1.0 - params.b + params.b * index.doc_lengths[doc] / index.avg_doc_length
    score = 0.0
    for term in sorted(set(query_terms)):
        tf = index.term_frequency(term, doc)
        if tf == 0:
            continue
        score += _idf(index, term) * tf * (params.k1 + 1.0) / (tf + params.k1 * norm)
    return score


def _accumulate(
    index: InvertedIndex, params: Bm25Params, terms: Iterable[str]
) -> dict[int, float]:
    """BM25 partial scores for every doc with positive term overlap."""
    k1 = params.k1
    b = params.b
    avg = index.avg_doc_length
    lengths = index.doc_lengths
    scores: dict[int, float] = {}
    for term in sorted(set(terms)):
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = _idf(index, term)
        for doc, tf in plist.items():
            norm = 1.0 - b + b * lengths[doc] / avg
            contrib = idf * tf * (k1 + 1.0) / (tf + k1 * norm)
            scores[doc] = scores.get(doc, 0.0) + contrib
    return scores


def _top_pairs(scores: dict[int, float], count: int) -> list[tuple[int, float]]:
    ranked = sorted(scores.items(), key=lambda pair: (-pair[1], pair[0]))
    return ranked[:count]


def bm25_retrieve(
    index: InvertedIndex,
    params: Bm25Params,
    qid: str,
    query: str,
    top_n: int = 1000,
) -> Ranking:
    """Rank docs with positive query overlap; ties break by ascending internal id."""
    scores = _accumulate(index, params, tokenize(query))
    pairs = _top_pairs(scores, top_n)
    return Ranking.from_pairs(qid, ((index.docmap.external(doc), s) for doc, s in pairs))


def bm25_doc_topk(
    index: InvertedIndex, params: Bm25Params, doc: int, k_plus: int
) -> list[tuple[int, float]]:
    """Top k_plus docs most similar to `doc` under doc-as-query BM25.

    The doc's unique terms form the query and the doc itself is excluded.
    """
    scores = _accumulate(index, params, index.doc_terms[doc])
    scores.pop(doc, None)
    return _top_pairs(scores, k_plus)


# --- dense vectors -------------------------------------------------------


class DenseVectors:
    """Row-major float32 embedding matrix, L2-normalized at construction."""

    __slots__ = ("_matrix", "_docmap", "_matrix64")

    def __init__(self, matrix: np.ndarray, docmap: DocMap):
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(f"vector matrix must be 2-dimensional, got shape {matrix.shape}")
        if matrix.shape[0] != len(docmap):
            raise ValueError(
                f"matrix has {matrix.shape[0]} rows but docmap has {len(docmap)} docs"
            )
        if matrix.shape[1] == 0:
            raise ValueError("vector dimension must be positive")
        norms = np.linalg.norm(matrix, axis=1)
        if (norms == 0).any():
            row = int(np.argwhere(norms == 0)[0][0])
            raise ValueError(f"row {row} ({docmap.external(row)!r}) is a zero vector")
        normalized = (matrix / norms[:, None]).astype(np.float32)
        normalized.setflags(write=False)
        self._matrix = normalized
        self._docmap = docmap
        self._matrix64: np.ndarray | None = None

    @property
    def n_docs(self) -> int:
        return self._matrix.shape[0]

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    @property
    def docmap(self) -> DocMap:
        return self._docmap

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def row(self, doc: int) -> np.ndarray:
        return self._matrix[doc]

    def _as_float64(self) -> np.ndarray:
        if self._matrix64 is None:
            self._matrix64 = self._matrix.astype(np.float64)
        return self._matrix64

    def similarities(self, doc: int) -> np.ndarray:
        """Cosine similarity of every row against row `doc`, clipped to [-1, 1]."""
        m64 = self._as_float64()
        return np.clip(m64 @ m64[doc], -1.0, 1.0)

    # --- binary format: 16-byte header then n_docs*dim little-endian float32 ---

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_VEC_HEADER.pack(VEC_MAGIC, VEC_VERSION, self.n_docs, self.dim))
            fh.write(self._matrix.astype("<f4").tobytes())
        self._docmap.save(docmap_path(path))

    @classmethod
    def load(cls, path: str | Path) -> "DenseVectors":
        path = Path(path)
        with open(path, "rb") as fh:
            header = fh.read(_VEC_HEADER.size)
            if len(header) < _VEC_HEADER.size:
                raise ValueError(f"truncated header: expected {_VEC_HEADER.size} bytes, got {len(header)}")
            magic, version, n_docs, dim = _VEC_HEADER.unpack(header)
            if magic != VEC_MAGIC:
                raise ValueError(f"bad magic: expected {VEC_MAGIC!r}, got {magic!r}")
            if version != VEC_VERSION:
                raise ValueError(f"unsupported version: {version}")
            payload = fh.read()
        expected = 4 * n_docs * dim
        if len(payload) != expected:
            raise ValueError(f"truncated vector table: expected {expected} bytes, got {len(payload)}")
        matrix = np.frombuffer(payload, dtype="<f4").reshape(n_docs, dim)
        docmap = DocMap.load(docmap_path(path))
        if len(docmap) != n_docs:
            raise ValueError(
                f"docmap lists {len(docmap)} docs but vector file declares {n_docs}"
            )
        return cls(matrix, docmap)


def dense_topk(vectors: DenseVectors, doc: int, k_plus: int) -> list[tuple[int, float]]:
    """Top k_plus docs by cosine similarity to `doc`, excluding `doc` itself.

    Exhaustive over all rows; ties break by ascending internal id.
    """
    if not 0 <= doc < vectors.n_docs:
        raise IndexError(f"internal id out of range: {doc}")
    sims = vectors.similarities(doc)
    order = np.lexsort((np.arange(vectors.n_docs), -sims))
    out: list[tuple[int, float]] = []
    for idx in order:
        if idx == doc:
            continue
        out.append((int(idx), float(sims[idx])))
        if len(out) == k_plus:
            break
    return out
