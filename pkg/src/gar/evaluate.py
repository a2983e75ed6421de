"""Ranking effectiveness metrics and corpus-structure diagnostics.

Run lists are per-query ordered (docid, score) sequences; relevance labels
are graded 0..3. Metric means average only over qualifying queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .lexical import DenseVectors

Run = Mapping[str, Sequence[tuple[str, float]]]
Qrels = Mapping[str, Mapping[str, int]]

N_LABELS = 4  # graded relevance 0..3


@dataclass(frozen=True)
class MetricValues:
    """Per-query metric values and their unweighted mean."""

    per_query: dict[str, float]
    mean: float


def _finish(name: str, per_query: dict[str, float]) -> MetricValues:
    if not per_query:
        raise ValueError(f"{name}: no qualifying queries")
    return MetricValues(per_query, sum(per_query.values()) / len(per_query))


def _common_qids(run: Run, qrels: Qrels) -> list[str]:
    qids = sorted(set(run) & set(qrels))
    if not qids:
        raise ValueError("run and qrels share no queries")
    return qids


def _gain_fn(gain: str) -> Callable[[int], float]:
    if gain == "exp":
        return lambda rel: float(2**rel - 1)
    if gain == "lin":
        return float
    raise ValueError(f"gain must be 'exp' or 'lin', got {gain!r}")


def ndcg(run: Run, qrels: Qrels, cutoff: int | None = None, gain: str = "exp") -> MetricValues:
    """Normalized discounted cumulative gain, optionally cut off at a rank.

    Unjudged docs contribute zero gain; queries whose ideal DCG is zero
    (no positively labelled docs) are skipped.
    """
    gain_of = _gain_fn(gain)
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        labels = qrels[qid]
        ideal = sorted(labels.values(), reverse=True)
        if cutoff is not None:
            ideal = ideal[:cutoff]
        idcg = sum(gain_of(rel) / math.log2(pos + 1) for pos, rel in enumerate(ideal, 1))
        if idcg == 0.0:
            continue
        ranked = run[qid] if cutoff is None else run[qid][:cutoff]
        dcg = sum(
            gain_of(labels.get(docid, 0)) / math.log2(pos + 1)
            for pos, (docid, _) in enumerate(ranked, 1)
        )
        per_query[qid] = dcg / idcg
    return _finish("ndcg", per_query)


def _relevant(labels: Mapping[str, int], min_rel: int) -> set[str]:
    return {docid for docid, rel in labels.items() if rel >= min_rel}


def map_at(run: Run, qrels: Qrels, min_rel: int = 2) -> MetricValues:
    """Mean average precision with labels binarized at `min_rel`."""
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        relevant = _relevant(qrels[qid], min_rel)
        if not relevant:
            continue
        hits = 0
        total = 0.0
        for pos, (docid, _) in enumerate(run[qid], 1):
            if docid in relevant:
                hits += 1
                total += hits / pos
        per_query[qid] = total / len(relevant)
    return _finish("map", per_query)


def recall_at(run: Run, qrels: Qrels, k: int = 1000, min_rel: int = 2) -> MetricValues:
    """Fraction of relevant docs retrieved in the top k."""
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        relevant = _relevant(qrels[qid], min_rel)
        if not relevant:
            continue
        found = sum(1 for docid, _ in run[qid][:k] if docid in relevant)
        per_query[qid] = found / len(relevant)
    return _finish("recall", per_query)


def rr_at(run: Run, qrels: Qrels, k: int = 10, min_rel: int = 1) -> MetricValues:
    """Reciprocal rank of the first relevant doc within the top k, else 0."""
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        relevant = _relevant(qrels[qid], min_rel)
        if not relevant:
            continue
        value = 0.0
        for pos, (docid, _) in enumerate(run[qid][:k], 1):
            if docid in relevant:
                value = 1.0 / pos
                break
        per_query[qid] = value
    return _finish("rr", per_query)


def judged_at(run: Run, qrels: Qrels, k: int = 10) -> MetricValues:
    """Fraction of the top k retrieved docs that carry any judgment."""
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        top = run[qid][:k]
        if not top:
            continue
        judged = sum(1 for docid, _ in top if docid in qrels[qid])
        per_query[qid] = judged / len(top)
    return _finish("judged", per_query)


def metric_fn(spec: str, gain: str = "exp") -> Callable[[Run, Qrels], MetricValues]:
    """Resolve a metric spec like 'ndcg', 'ndcg@10', 'map', 'recall@100',
    'rr@10', or 'judged@10' to a callable over (run, qrels)."""
    name, _, cut = spec.partition("@")
    cutoff = None
    if cut:
        try:
            cutoff = int(cut)
        except ValueError:
            raise ValueError(f"bad metric cutoff in {spec!r}") from None
        if cutoff < 1:
            raise ValueError(f"metric cutoff must be positive in {spec!r}")
    if name == "ndcg":
        return lambda run, qrels: ndcg(run, qrels, cutoff, gain)
    if cutoff is None and name in ("recall", "rr", "judged"):
        raise ValueError(f"metric {name!r} needs a cutoff, e.g. '{name}@10'")
    if name == "map":
        if cutoff is not None:
            raise ValueError("map takes no cutoff")
        return lambda run, qrels: map_at(run, qrels)
    if name == "recall":
        return lambda run, qrels: recall_at(run, qrels, cutoff)
    if name == "rr":
        return lambda run, qrels: rr_at(run, qrels, cutoff)
    if name == "judged":
        return lambda run, qrels: judged_at(run, qrels, cutoff)
    raise ValueError(f"unknown metric {spec!r}")


# --- corpus-structure diagnostics ------------------------------------------


def cluster_matrix(
    qrels: Qrels, similarity: Callable[[str, str], float]
) -> np.ndarray:
    """Relevance co-occurrence of judged docs with their nearest judged neighbour.

    For every judged doc of every query, find the most similar other judged
    doc of the same query (ties by ascending docid) and count the pair of
    labels. Counts pool over queries; each row is normalized to sum to 1.
    Rows for labels that never occur are left as zeros.
    """
    counts = np.zeros((N_LABELS, N_LABELS), dtype=np.float64)
    used = 0
    for qid in sorted(qrels):
        labels = qrels[qid]
        docs = sorted(labels)
        if len(docs) < 2:
            continue
        used += 1
        for probe in docs:
            rel = labels[probe]
            if not 0 <= rel < N_LABELS:
                raise ValueError(f"label out of range for query {qid!r} doc {probe!r}: {rel}")
            best_doc: str | None = None
            best_sim = -math.inf
            for other in docs:
                if other == probe:
                    continue
                sim = similarity(probe, other)
                if sim > best_sim:
                    best_sim = sim
                    best_doc = other
            counts[rel, labels[best_doc]] += 1.0
    if used == 0:
        raise ValueError("no query has two or more judged docs")
    matrix = counts.copy()
    row_sums = matrix.sum(axis=1)
    nonzero = row_sums > 0
    matrix[nonzero] /= row_sums[nonzero, None]
    return matrix


def ils(
    run: Run,
    qrels: Qrels,
    vectors: DenseVectors,
    min_rel: int = 2,
    depth: int = 1000,
) -> MetricValues:
    """Intra-list similarity: mean pairwise cosine among relevant retrieved docs.

    Considers the top `depth` of each ranking; queries with fewer than two
    relevant retrieved docs are skipped.
    """
    docmap = vectors.docmap
    per_query: dict[str, float] = {}
    for qid in _common_qids(run, qrels):
        labels = qrels[qid]
        rel_docs = [d for d, _ in run[qid][:depth] if labels.get(d, 0) >= min_rel]
        if len(rel_docs) < 2:
            continue
        rows = []
        for docid in rel_docs:
            internal = docmap.get(docid)
            if internal is None:
                raise ValueError(f"no vector for doc {docid!r} (query {qid!r})")
            rows.append(vectors.row(internal))
        m = np.asarray(rows, dtype=np.float64)
        sims = m @ m.T
        n = len(rel_docs)
        upper = sims[np.triu_indices(n, k=1)]
        per_query[qid] = float(np.clip(upper, -1.0, 1.0).mean())
    return _finish("ils", per_query)
