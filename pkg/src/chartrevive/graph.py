"""Chart multi-graph: anchor nodes with 17-dim features, stroke-wise and element-wise edges."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations

import numpy as np

from .errors import GraphTooLarge, MalformedOwnership
from .svg import ELEMENT_KINDS, ClosePath, Point, SvgDocument, SvgElement

FEATURE_DIM = 17
MAX_NODES = 2000
_ABSENT = (-1.0, -1.0, -1.0)


@dataclass(frozen=True)
class GraphNode:
    node_id: int
    owner_element: int
    position: Point
    features: tuple[float, ...]


def node_feature_vector(e: SvgElement, point: Point, doc: SvgDocument) -> np.ndarray:
    """``[kind one-hot (8) | pos (2) | fill (3) | stroke (3) | stroke width (1)]``."""
    v = np.zeros(FEATURE_DIM)
    v[ELEMENT_KINDS.index(e.kind)] = 1.0
    v[8] = (point[0] - doc.origin[0]) / doc.width
    v[9] = (point[1] - doc.origin[1]) / doc.height
    v[10:13] = e.fill if e.fill is not None else _ABSENT
    v[13:16] = e.stroke if e.stroke is not None else _ABSENT
    v[16] = min(1.0, max(0.0, e.stroke_width / max(doc.width, doc.height)))
    return v


@dataclass
class ChartGraph:
    nodes: list[GraphNode]
    stroke_edges: frozenset
    element_nodes: dict[int, list[int]]
    kinds: np.ndarray = field(repr=False)  # kind index per node

    @property
    def num_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def features(self) -> np.ndarray:
        if not self.nodes:
            return np.zeros((0, FEATURE_DIM))
        return np.array([n.features for n in self.nodes])

    @cached_property
    def owners(self) -> np.ndarray:
        return np.array([n.owner_element for n in self.nodes], dtype=np.int64)

    @cached_property
    def element_edges(self) -> frozenset:
        """Pairs of nodes from distinct elements of the same SVG kind."""
        by_kind: dict[int, list[int]] = {}
        for n in self.nodes:
            by_kind.setdefault(int(self.kinds[n.node_id]), []).append(n.node_id)
        edges = set()
        for ids in by_kind.values():
            for i, j in combinations(ids, 2):
                if self.nodes[i].owner_element != self.nodes[j].owner_element:
                    edges.add((i, j))
        return frozenset(edges - self.stroke_edges)

    def element_order(self) -> list[int]:
        return sorted(self.element_nodes)

    def to_json(self) -> str:
        return json.dumps({
            "nodes": [{"id": n.node_id, "element": n.owner_element, "features": list(n.features)}
                      for n in self.nodes],
            "strokeEdges": sorted([list(e) for e in self.stroke_edges]),
            "elementEdges": sorted([list(e) for e in self.element_edges]),
        })


def build_graph(doc: SvgDocument, max_nodes: int = MAX_NODES) -> ChartGraph:
    nodes: list[GraphNode] = []
    kinds: list[int] = []
    stroke: set[tuple[int, int]] = set()
    element_nodes: dict[int, list[int]] = {}

    def add_edge(i, j):
        if i != j:
            stroke.add((min(i, j), max(i, j)))

    for e in doc.elements:
        ids: list[int] = []
        for run in e.anchors():
            run_ids = []
            for p in run:
                nid = len(nodes)
                nodes.append(GraphNode(nid, e.index, (
                    (p[0] - doc.origin[0]) / doc.width, (p[1] - doc.origin[1]) / doc.height),
                    tuple(node_feature_vector(e, p, doc).tolist())))
                kinds.append(ELEMENT_KINDS.index(e.kind))
                run_ids.append(nid)
            for a, b in zip(run_ids, run_ids[1:]):
                add_edge(a, b)
            closed = e.kind in ("polygon", "text") or (
                e.kind == "path" and _subpath_closed(e, len(ids)))
            if closed and len(run_ids) > 2:
                add_edge(run_ids[-1], run_ids[0])
            ids.extend(run_ids)
        if len(nodes) > max_nodes:
            raise GraphTooLarge(f"graph exceeds {max_nodes} nodes")
        if e.index in element_nodes:
            raise MalformedOwnership(f"element index {e.index} appears twice")
        element_nodes[e.index] = ids

    return ChartGraph(nodes, frozenset(stroke), element_nodes, np.array(kinds, dtype=np.int64))


def _subpath_closed(e: SvgElement, offset: int) -> bool:
    # locate the subpath whose anchors start at `offset` within the element
    seen = 0
    for sp in e.geometry.subpaths:
        n = sum(1 for s in sp if not isinstance(s, ClosePath))
        if seen == offset:
            return isinstance(sp[-1], ClosePath)
        seen += n
    return False
