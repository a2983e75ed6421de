"""Ranked result lists shared by retrieval and re-ranking."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

PROV_INITIAL = "initial"
PROV_FRONTIER = "frontier"


@dataclass(frozen=True)
class RankEntry:
    """One scored doc in a ranking.

    `provenance` records whether the doc came from the initial pool or was
    discovered through the corpus graph; `source` names the doc whose
    neighbourhood surfaced it (frontier entries only).
    """

    docid: str
    score: float
    provenance: str = PROV_INITIAL
    source: str | None = None


class Ranking:
    """Ordered, per-query result list with unique docids."""

    __slots__ = ("qid", "_entries")

    def __init__(self, qid: str, entries: Iterable[RankEntry]):
        entries = tuple(entries)
        seen: set[str] = set()
        for entry in entries:
            if entry.docid in seen:
                raise ValueError(f"duplicate docid in ranking for query {qid!r}: {entry.docid!r}")
            seen.add(entry.docid)
        self.qid = qid
        self._entries = entries

    @classmethod
    def from_pairs(cls, qid: str, pairs: Iterable[tuple[str, float]]) -> "Ranking":
        return cls(qid, (RankEntry(docid, float(score)) for docid, score in pairs))

    @property
    def entries(self) -> Sequence[RankEntry]:
        return self._entries

    def docids(self) -> list[str]:
        return [entry.docid for entry in self._entries]

    def pairs(self) -> list[tuple[str, float]]:
        return [(entry.docid, entry.score) for entry in self._entries]

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[RankEntry]:
        return iter(self._entries)

    def __getitem__(self, i: int) -> RankEntry:
        return self._entries[i]

    def __repr__(self) -> str:
        return f"Ranking(qid={self.qid!r}, {len(self._entries)} entries)"
