"""Patient-physician bipartite graphs and their physician-side projection.

Two physicians are connected in the projected collaboration network exactly
when they have at least one hospital patient in common. Edge weights record
how many distinct patients a pair shares, but every downstream measure treats
the graph as binary. Physicians with medical claims and no shared patients
stay in the node set as isolates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .claims import ClaimKind, ClaimRecord

EDGE_LIST_COLUMNS = ["hospital_id", "physician_a", "physician_b", "weight"]


@dataclass(frozen=True)
class BipartiteGraph:
    """Distinct (patient, physician) visit incidences for one hospital."""

    hospital_id: str
    patients: frozenset[str]
    physicians: frozenset[str]
    visits: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        for patient, physician in self.visits:
            if patient not in self.patients or physician not in self.physicians:
                raise ValueError(f"visit ({patient}, {physician}) references unknown node")


@dataclass(frozen=True)
class PCN:
    """Simple undirected physician collaboration graph for one hospital.

    ``edges`` maps each unordered pair (stored with a < b) to the number of
    distinct shared patients. ``nodes`` is sorted for deterministic iteration.
    """

    hospital_id: str
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], int]
    _adjacency: dict[str, set[str]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        adjacency: dict[str, set[str]] = {n: set() for n in self.nodes}
        for (a, b), weight in self.edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a}")
            if a > b:
                raise ValueError(f"edge ({a}, {b}) not stored in sorted order")
            if a not in node_set or b not in node_set:
                raise ValueError(f"edge ({a}, {b}) references unknown node")
            if weight < 1:
                raise ValueError(f"edge ({a}, {b}) has weight {weight} < 1")
            adjacency[a].add(b)
            adjacency[b].add(a)
        object.__setattr__(self, "_adjacency", adjacency)

    @staticmethod
    def from_edges(
        hospital_id: str,
        nodes: Iterable[str],
        edges: Iterable[tuple[str, str]] | dict[tuple[str, str], int],
    ) -> "PCN":
        """Build a PCN from explicit nodes and (optionally weighted) edges."""
        if isinstance(edges, dict):
            weighted = {(min(a, b), max(a, b)): w for (a, b), w in edges.items()}
        else:
            weighted = {(min(a, b), max(a, b)): 1 for a, b in edges}
        node_set = set(nodes)
        for a, b in weighted:
            node_set.add(a)
            node_set.add(b)
        return PCN(hospital_id=hospital_id, nodes=tuple(sorted(node_set)), edges=weighted)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, node: str) -> set[str]:
        return self._adjacency[node]

    def degree(self, node: str) -> int:
        return len(self._adjacency[node])

    def has_edge(self, a: str, b: str) -> bool:
        return (min(a, b), max(a, b)) in self.edges


def build_bipartite(claims: Sequence[ClaimRecord], hospital_id: str) -> BipartiteGraph:
    """Collect the distinct patient-physician visit pairs for one hospital.

    Only medical claims contribute; repeated claims by the same physician for
    the same patient collapse into a single visit pair.
    """
    visits: set[tuple[str, str]] = set()
    patients: set[str] = set()
    physicians: set[str] = set()
    for claim in claims:
        if claim.hospital_id != hospital_id or claim.claim_kind is not ClaimKind.MEDICAL:
            continue
        visits.add((claim.patient_id, claim.provider_id))
        patients.add(claim.patient_id)
        physicians.add(claim.provider_id)
    return BipartiteGraph(
        hospital_id=hospital_id,
        patients=frozenset(patients),
        physicians=frozenset(physicians),
        visits=frozenset(visits),
    )


def project_pcn(bipartite: BipartiteGraph) -> PCN:
    """One-mode projection: connect physicians who share at least one patient.

    Edge weight counts distinct shared patients. Physicians who share no one
    remain as isolated nodes.
    """
    by_patient: dict[str, list[str]] = {}
    for patient, physician in sorted(bipartite.visits):
        by_patient.setdefault(patient, []).append(physician)

    weights: dict[tuple[str, str], int] = {}
    for physicians in by_patient.values():
        physicians.sort()
        for i, a in enumerate(physicians):
            for b in physicians[i + 1 :]:
                key = (a, b)
                weights[key] = weights.get(key, 0) + 1

    return PCN(
        hospital_id=bipartite.hospital_id,
        nodes=tuple(sorted(bipartite.physicians)),
        edges=weights,
    )


def partition_pcns(claims: Sequence[ClaimRecord]) -> dict[str, PCN]:
    """One PCN per hospital that has at least one medical claim.

    A physician with medical claims in several hospitals appears in each of
    those hospitals' networks.
    """
    hospitals = sorted(
        {c.hospital_id for c in claims if c.claim_kind is ClaimKind.MEDICAL}
    )
    return {h: project_pcn(build_bipartite(claims, h)) for h in hospitals}


def density(pcn: PCN) -> float:
    """Fraction of realised edges: 2|E| / (N(N-1)); zero when N < 2."""
    n = pcn.node_count
    if n < 2:
        return 0.0
    return 2.0 * pcn.edge_count / (n * (n - 1))


def write_edge_lists(pcns: dict[str, PCN] | Iterable[PCN], target: IO[str] | str) -> None:
    """Write PCNs as edge-list CSV rows: hospital_id,physician_a,physician_b,weight.

    Isolated physicians are kept as rows with an empty physician_b and weight
    0 so the node set survives a file round-trip.
    """
    if isinstance(target, str):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            write_edge_lists(pcns, fh)
            return
    if isinstance(pcns, dict):
        ordered = [pcns[h] for h in sorted(pcns)]
    else:
        ordered = sorted(pcns, key=lambda p: p.hospital_id)
    writer = csv.writer(target, lineterminator="\n")
    writer.writerow(EDGE_LIST_COLUMNS)
    for pcn in ordered:
        connected: set[str] = set()
        for (a, b), weight in sorted(pcn.edges.items()):
            writer.writerow([pcn.hospital_id, a, b, weight])
            connected.add(a)
            connected.add(b)
        for node in pcn.nodes:
            if node not in connected:
                writer.writerow([pcn.hospital_id, node, "", 0])


def read_edge_lists(source: IO[str] | str) -> dict[str, PCN]:
    """Read PCNs back from the edge-list CSV written by write_edge_lists."""
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8", newline="") as fh:
            return read_edge_lists(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != EDGE_LIST_COLUMNS:
        raise ValueError(f"edge list header must be {','.join(EDGE_LIST_COLUMNS)}")

    nodes: dict[str, set[str]] = {}
    edges: dict[str, dict[tuple[str, str], int]] = {}
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise ValueError(f"line {line_no}: expected 4 fields, got {len(row)}")
        hospital, a, b, weight_text = (c.strip() for c in row)
        nodes.setdefault(hospital, set())
        edges.setdefault(hospital, {})
        if not b:
            nodes[hospital].add(a)
            continue
        try:
            weight = int(weight_text)
        except ValueError:
            raise ValueError(f"line {line_no}: bad weight {weight_text!r}")
        if weight < 1:
            raise ValueError(f"line {line_no}: edge weight must be >= 1")
        key = (min(a, b), max(a, b))
        edges[hospital][key] = weight
        nodes[hospital].update(key)

    return {
        h: PCN(hospital_id=h, nodes=tuple(sorted(nodes[h])), edges=edges[h])
        for h in sorted(nodes)
    }


def to_dot(pcn: PCN) -> str:
    """Render a PCN as Graphviz DOT text (weights as edge labels)."""
    name = "".join(c if c.isalnum() else "_" for c in pcn.hospital_id)
    lines = [f"graph pcn_{name} {{"]
    connected: set[str] = set()
    for (a, b), weight in sorted(pcn.edges.items()):
        lines.append(f'  "{a}" -- "{b}" [label="{weight}"];')
        connected.add(a)
        connected.add(b)
    for node in pcn.nodes:
        if node not in connected:
            lines.append(f'  "{node}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
