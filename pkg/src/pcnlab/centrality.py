"""Node centralities and network-level centralization indices.

Degree centrality is the fraction of other actors adjacent to a node.
Betweenness centrality sums, over all node pairs, the fraction of shortest
paths running through a node; it is computed with Brandes' dependency
accumulation over shortest-path DAGs, one BFS per source. Unreachable pairs
contribute nothing.

Centralization turns a centrality vector into a single dispersion score:
the sum of gaps to the most central actor, scaled so a star scores 1 and any
vertex-transitive graph (cycle, complete graph) scores 0. Both indices are
defined as 0 for networks with fewer than 3 actors.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass
from typing import IO, Mapping

from .claims import HospitalOutcomes
from .network import PCN, density

METRICS_COLUMNS = [
    "hospital_id",
    "N",
    "density",
    "degree_centralization",
    "betweenness_centralization",
    "mean_cost",
    "mean_los",
    "readmission_rate",
    "mean_patient_age",
]


@dataclass(frozen=True)
class CentralityVector:
    """Per-node centrality values of one kind (degree or betweenness)."""

    kind: str
    normalized: bool
    values: dict[str, float]


@dataclass(frozen=True)
class CentralizationReport:
    hospital_id: str
    node_count: int
    density: float
    degree_centralization: float
    betweenness_centralization: float


def degree_centrality(pcn: PCN) -> CentralityVector:
    """Normalized degree: deg(i) / (N - 1); 0 for a singleton network."""
    n = pcn.node_count
    if n == 0:
        raise ValueError("empty network")
    if n == 1:
        values = {pcn.nodes[0]: 0.0}
    else:
        values = {node: pcn.degree(node) / (n - 1) for node in pcn.nodes}
    return CentralityVector(kind="degree", normalized=True, values=values)


def betweenness_centrality(pcn: PCN, normalized: bool = True) -> CentralityVector:
    """Shortest-path betweenness via Brandes accumulation.

    Raw values count each unordered pair once; normalization divides by
    (N-1)(N-2)/2, the pair count of a star centre. Networks too small for
    any intermediary (N < 3) get all-zero values.
    """
    n = pcn.node_count
    if n == 0:
        raise ValueError("empty network")
    nodes = pcn.nodes
    index = {node: i for i, node in enumerate(nodes)}
    adjacency = [sorted(index[v] for v in pcn.neighbors(u)) for u in nodes]

    raw = [0.0] * n
    for source in range(n):
        # BFS from source, recording path counts and predecessor DAG.
        dist = [-1] * n
        sigma = [0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[source] = 0
        sigma[source] = 1
        stack: list[int] = []
        queue = deque([source])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in adjacency[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        # Accumulate dependencies in reverse BFS order.
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
            if w != source:
                raw[w] += delta[w]

    # Each unordered pair was visited from both endpoints.
    values = {node: raw[i] / 2.0 for i, node in enumerate(nodes)}
    if normalized:
        scale = (n - 1) * (n - 2) / 2.0
        if scale > 0:
            values = {node: v / scale for node, v in values.items()}
        else:
            values = {node: 0.0 for node in values}
    return CentralityVector(kind="betweenness", normalized=normalized, values=values)


def degree_centralization(pcn: PCN) -> float:
    """Sum of raw-degree gaps to the highest-degree actor over (N-1)(N-2)."""
    n = pcn.node_count
    if n < 3:
        return 0.0
    degrees = [pcn.degree(node) for node in pcn.nodes]
    top = max(degrees)
    return sum(top - d for d in degrees) / ((n - 1) * (n - 2))


def betweenness_centralization(pcn: PCN) -> float:
    """Sum of normalized-betweenness gaps to the top actor over (N-1)."""
    n = pcn.node_count
    if n < 3:
        return 0.0
    values = betweenness_centrality(pcn, normalized=True).values
    top = max(values.values())
    return sum(top - v for v in values.values()) / (n - 1)


def centralization_report(pcn: PCN) -> CentralizationReport:
    return CentralizationReport(
        hospital_id=pcn.hospital_id,
        node_count=pcn.node_count,
        density=density(pcn),
        degree_centralization=degree_centralization(pcn),
        betweenness_centralization=betweenness_centralization(pcn),
    )


def write_metrics_csv(
    reports: Mapping[str, CentralizationReport],
    outcomes: Mapping[str, HospitalOutcomes] | None,
    target: IO[str] | str,
) -> None:
    """Write the per-PCN metrics table joined with hospital outcomes.

    Outcome columns are left empty for hospitals without outcome data (or
    when no outcomes are supplied, e.g. metrics over a bare edge list).
    """
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_metrics_csv(reports, outcomes, fh)
            return
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(METRICS_COLUMNS)
    for hospital_id in sorted(reports):
        report = reports[hospital_id]
        outcome = outcomes.get(hospital_id) if outcomes else None
        writer.writerow(
            [
                hospital_id,
                report.node_count,
                repr(report.density),
                repr(report.degree_centralization),
                repr(report.betweenness_centralization),
                repr(outcome.mean_cost) if outcome else "",
                repr(outcome.mean_los) if outcome else "",
                repr(outcome.readmission_rate) if outcome else "",
                repr(outcome.mean_patient_age) if outcome else "",
            ]
        )


def read_metrics_csv(source: IO[str] | str) -> list[dict[str, float | str | int | None]]:
    """Read the metrics table back; empty outcome cells become None."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_metrics_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != METRICS_COLUMNS:
        raise ValueError(f"metrics header must be {','.join(METRICS_COLUMNS)}")
    rows: list[dict[str, float | str | int | None]] = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        record: dict[str, float | str | int | None] = {"hospital_id": row[0]}
        record["N"] = int(row[1])
        for column, cell in zip(METRICS_COLUMNS[2:], row[2:]):
            record[column] = float(cell) if cell.strip() else None
        rows.append(record)
    return rows
