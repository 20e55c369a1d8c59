"""Social-capital cohorts from connection graphs.

Structural network diversity is 1 minus the local clustering coefficient;
members are bucketed into low/medium/high social capital by the bottom and
top 20% of diversity among eligible (degree >= 2) members.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataFormatError, ValidationError

LOW = "low"
MEDIUM = "medium"
HIGH = "high"
EXCLUDED = "excluded"

TIE_RULE = "ties straddling a 20% threshold collapse to medium"

EDGE_HEADER = ["src", "dst"]


class MemberGraph:
    """Undirected simple graph over member ids (no self-loops, no duplicate edges)."""

    def __init__(self, adjacency: Mapping[str, Iterable[str]]) -> None:
        adj: dict[str, frozenset[str]] = {
            str(v): frozenset(str(u) for u in nbrs) for v, nbrs in adjacency.items()
        }
        for v, nbrs in adj.items():
            if v in nbrs:
                raise ValidationError(f"self-loop at vertex {v!r}")
            for u in nbrs:
                if u not in adj or v not in adj[u]:
                    raise ValidationError(f"adjacency is not symmetric at edge {v!r}-{u!r}")
        self._adj = adj

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[str, str]]) -> "MemberGraph":
        """Build a graph from (src, dst) pairs, dropping self-loops and duplicates."""
        adj: dict[str, set[str]] = {}
        for src, dst in edges:
            src, dst = str(src), str(dst)
            if src == dst:
                continue
            adj.setdefault(src, set()).add(dst)
            adj.setdefault(dst, set()).add(src)
        return cls(adj)

    @property
    def vertices(self) -> list[str]:
        return sorted(self._adj)

    def __contains__(self, v: str) -> bool:
        return v in self._adj

    def __len__(self) -> int:
        return len(self._adj)

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adj[v]

    def degree(self, v: str) -> int:
        return len(self._adj[v])


@dataclass(frozen=True)
class EdgeListCounters:
    rows_read: int = 0
    edges_loaded: int = 0
    self_loops_dropped: int = 0
    duplicates_dropped: int = 0


def load_edge_list(source: str | Path | io.TextIOBase) -> tuple[MemberGraph, EdgeListCounters]:
    """Read an edge-list CSV with header ``src,dst``.

    Reversed and repeated edges are deduplicated; self-loops are dropped and
    counted.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return load_edge_list(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != EDGE_HEADER:
        raise DataFormatError(f"edge list must start with header {','.join(EDGE_HEADER)!r}")
    rows_read = 0
    self_loops = 0
    duplicates = 0
    seen: set[tuple[str, str]] = set()
    adj: dict[str, set[str]] = {}
    for row in reader:
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        rows_read += 1
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise DataFormatError(f"malformed edge row: {row!r}")
        src, dst = row[0].strip(), row[1].strip()
        if src == dst:
            self_loops += 1
            continue
        key = (src, dst) if src < dst else (dst, src)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        adj.setdefault(src, set()).add(dst)
        adj.setdefault(dst, set()).add(src)
    counters = EdgeListCounters(
        rows_read=rows_read,
        edges_loaded=len(seen),
        self_loops_dropped=self_loops,
        duplicates_dropped=duplicates,
    )
    return MemberGraph(adj), counters


def local_clustering(g: MemberGraph, v: str) -> float:
    """Fraction of a vertex's neighbor pairs that are themselves connected."""
    if v not in g:
        raise ValidationError(f"unknown vertex {v!r}")
    nbrs = g.neighbors(v)
    k = len(nbrs)
    if k < 2:
        raise ValidationError(f"local clustering is undefined for degree {k} (need >= 2)")
    # each edge among neighbors is counted once from each endpoint
    links = sum(len(g.neighbors(u) & nbrs) for u in nbrs)
    return links / (k * (k - 1))


def diversity(g: MemberGraph, v: str) -> float:
    """Structural network diversity: 1 - local clustering coefficient."""
    return 1.0 - local_clustering(g, v)


@dataclass(frozen=True)
class CohortAssignment:
    member_id: str
    diversity: float | None
    bucket: str


@dataclass(frozen=True)
class BucketResult:
    assignments: list[CohortAssignment]
    eligible_count: int
    bucket_size: int
    low_threshold: float | None
    high_threshold: float | None
    tie_rule: str = TIE_RULE

    def counts(self) -> dict[str, int]:
        out = {LOW: 0, MEDIUM: 0, HIGH: 0, EXCLUDED: 0}
        for a in self.assignments:
            out[a.bucket] += 1
        return out


def bucket(g: MemberGraph) -> BucketResult:
    """Assign every member to a social-capital cohort.

    Members with degree < 2 have no defined clustering coefficient and are
    excluded. Among the E eligible members, the floor(0.2*E) strictly lowest
    diversities are ``low`` and the strictly highest are ``high``; a member
    whose diversity ties the boundary value falls to ``medium``.
    """
    if len(g) == 0:
        raise ValidationError("graph is empty")
    scores: dict[str, float] = {
        v: diversity(g, v) for v in g.vertices if g.degree(v) >= 2
    }
    e = len(scores)
    k = e // 5
    if e > 0:
        ordered = sorted(scores.values())
        low_boundary = ordered[k]
        high_boundary = ordered[e - 1 - k]
    else:
        low_boundary = high_boundary = None

    assignments: list[CohortAssignment] = []
    for v in g.vertices:
        if v not in scores:
            assignments.append(CohortAssignment(member_id=v, diversity=None, bucket=EXCLUDED))
            continue
        d = scores[v]
        if d < low_boundary:
            b = LOW
        elif d > high_boundary:
            b = HIGH
        else:
            b = MEDIUM
        assignments.append(CohortAssignment(member_id=v, diversity=d, bucket=b))
    return BucketResult(
        assignments=assignments,
        eligible_count=e,
        bucket_size=k,
        low_threshold=low_boundary,
        high_threshold=high_boundary,
    )


def write_cohort_csv(result: BucketResult, dest: io.TextIOBase) -> None:
    writer = csv.writer(dest, lineterminator="\n")
    writer.writerow(["member_id", "diversity", "bucket"])
    for a in result.assignments:
        writer.writerow(
            [a.member_id, "" if a.diversity is None else str(a.diversity), a.bucket]
        )
