"""Network graph model, disjoint-path discovery, and connectivity thresholds.

A trusted-repeater network is an undirected graph of nodes joined by QKD
links.  Sessions between two endpoints ride on internally vertex-disjoint
paths; discovery uses unit-capacity max-flow on the node-split graph, so
the returned count is Menger-maximal.  All tie-breaking is lexicographic
on node labels, making results deterministic for a given graph.

Links whose ``alive`` flag is cleared (eavesdropping-induced abort or
administrative down) are excluded from path discovery.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .errors import InsufficientConnectivity, OutOfRange, ValidationError

NodeId = str


@dataclass(frozen=True)
class QkdLink:
    """An undirected QKD link between two distinct nodes.

    ``epsilon`` is the per-key failure probability of keys generated on
    this link (the epsilon-ideal key source model); ``alive`` models
    eavesdropping-induced abort of the link.
    """

    a: NodeId
    b: NodeId
    distance_km: float = 0.0
    epsilon: float = 0.0
    alive: bool = True

    def __post_init__(self):
        if self.a == self.b:
            raise ValidationError(f"link endpoints must differ, got {self.a!r}")
        if self.distance_km < 0:
            raise ValidationError(f"distance_km must be >= 0, got {self.distance_km}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValidationError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def key(self) -> tuple[NodeId, NodeId]:
        """Canonical (sorted) endpoint pair identifying this link."""
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


class NetworkGraph:
    """Immutable node/link collection with sorted adjacency."""

    def __init__(self, nodes, links):
        self.nodes = frozenset(nodes)
        self._links: dict[tuple[NodeId, NodeId], QkdLink] = {}
        adjacency: dict[NodeId, set[NodeId]] = {v: set() for v in self.nodes}
        for link in links:
            if link.a not in self.nodes or link.b not in self.nodes:
                raise ValidationError(
                    f"link {link.a!r}-{link.b!r} references unknown node"
                )
            if link.key in self._links:
                raise ValidationError(f"duplicate link {link.key}")
            self._links[link.key] = link
            adjacency[link.a].add(link.b)
            adjacency[link.b].add(link.a)
        self._adjacency = {v: tuple(sorted(nbrs)) for v, nbrs in adjacency.items()}

    @property
    def links(self) -> tuple[QkdLink, ...]:
        return tuple(self._links[k] for k in sorted(self._links))

    def link_between(self, u: NodeId, v: NodeId) -> QkdLink:
        key = (u, v) if u <= v else (v, u)
        try:
            return self._links[key]
        except KeyError:
            raise ValidationError(f"no link between {u!r} and {v!r}") from None

    def neighbors(self, v: NodeId, alive_only: bool = True):
        if alive_only:
            return tuple(
                u for u in self._adjacency[v] if self.link_between(v, u).alive
            )
        return self._adjacency[v]


@dataclass(frozen=True)
class PathSet:
    """Internally vertex-disjoint paths between two endpoints.

    Each path is a node sequence from ``a`` to ``b`` with no repeats;
    distinct paths share no node other than the endpoints.
    """

    a: NodeId
    b: NodeId
    paths: tuple[tuple[NodeId, ...], ...] = field(default=())

    def __post_init__(self):
        seen_internal: set[NodeId] = set()
        for path in self.paths:
            if len(path) < 2 or path[0] != self.a or path[-1] != self.b:
                raise ValidationError(f"path {path} does not run {self.a}->{self.b}")
            if len(set(path)) != len(path):
                raise ValidationError(f"path {path} repeats a node")
            interior = set(path[1:-1])
            if interior & seen_internal:
                raise ValidationError(
                    f"paths share internal node(s) {interior & seen_internal}"
                )
            seen_internal |= interior

    def __len__(self):
        return len(self.paths)

    def interior(self, i: int) -> tuple[NodeId, ...]:
        return self.paths[i][1:-1]

    def hops(self, i: int):
        path = self.paths[i]
        return tuple(zip(path[:-1], path[1:]))


# Node-split graph vertices: (label, _IN) receives, (label, _OUT) sends.
_IN, _OUT = 0, 1


def _split_graph_max_flow(graph: NetworkGraph, a: NodeId, b: NodeId, want: int):
    """Unit-capacity max-flow on the node-split graph.

    Every node other than the endpoints becomes an in/out pair joined by
    a capacity-1 edge; each alive link contributes a directed unit edge
    in both orientations.  Augments along BFS-shortest paths with
    lexicographic neighbor order until ``want`` units flow or no
    augmenting path remains.

    Returns (flow value, residual, original forward-edge adjacency).
    """
    source, sink = (a, _OUT), (b, _IN)
    residual: dict[tuple, dict[tuple, int]] = {}
    forward: dict[tuple, list[tuple]] = {}

    def add_edge(u, v):
        residual.setdefault(u, {})[v] = 1
        residual.setdefault(v, {}).setdefault(u, 0)
        forward.setdefault(u, []).append(v)

    for v in sorted(graph.nodes):
        if v not in (a, b):
            add_edge((v, _IN), (v, _OUT))
    for link in graph.links:
        if not link.alive:
            continue
        for u, v in ((link.a, link.b), (link.b, link.a)):
            if v == a or u == b:
                continue
            tail = source if u == a else (u, _OUT)
            head = sink if v == b else (v, _IN)
            add_edge(tail, head)
    for heads in forward.values():
        heads.sort()

    flow = 0
    while flow < want:
        parent = {source: None}
        queue = deque([source])
        while queue and sink not in parent:
            u = queue.popleft()
            for v in sorted(residual.get(u, {})):
                if v not in parent and residual[u][v] > 0:
                    parent[v] = u
                    queue.append(v)
        if sink not in parent:
            break
        v = sink
        while parent[v] is not None:
            u = parent[v]
            residual[u][v] -= 1
            residual[v][u] += 1
            v = u
        flow += 1
    return flow, residual, forward


def max_disjoint_paths(graph: NetworkGraph, a: NodeId, b: NodeId) -> int:
    """Menger-maximal count of internally vertex-disjoint a-b paths."""
    if a == b or a not in graph.nodes or b not in graph.nodes:
        raise ValidationError(f"endpoints {a!r}, {b!r} must be distinct graph nodes")
    upper = len(graph.nodes)  # flow value can never exceed node count
    flow, _, _ = _split_graph_max_flow(graph, a, b, upper)
    return flow


def vertex_disjoint_paths(
    graph: NetworkGraph, a: NodeId, b: NodeId, count: int
) -> PathSet:
    """Find ``count`` internally vertex-disjoint paths from a to b.

    Deterministic for a given graph (lexicographic tie-breaking).  When
    fewer than ``count`` disjoint paths exist, raises
    :class:`InsufficientConnectivity` carrying the maximum achievable.
    """
    if a == b or a not in graph.nodes or b not in graph.nodes:
        raise ValidationError(f"endpoints {a!r}, {b!r} must be distinct graph nodes")
    if count < 1:
        raise OutOfRange(f"path count must be >= 1, got {count}")
    flow, residual, forward = _split_graph_max_flow(graph, a, b, count)
    if flow < count:
        raise InsufficientConnectivity(count, max_disjoint_paths(graph, a, b))

    # Unit capacities: an original edge carries net flow iff its residual
    # is exhausted.  Walk used edges from the source; vertex capacities
    # guarantee walks are simple and reach the sink.
    source, sink = (a, _OUT), (b, _IN)
    paths = []
    for _ in range(flow):
        node = source
        path = [a]
        while node != sink:
            for nxt in forward.get(node, ()):
                if residual[node][nxt] == 0:
                    residual[node][nxt] = 1  # consume this unit
                    node = nxt
                    break
            else:
                raise AssertionError("flow decomposition failed")
            if node == sink or node[1] == _OUT:
                if node[0] != path[-1]:
                    path.append(node[0])
        paths.append(tuple(path))
    paths.sort()
    return PathSet(a, b, tuple(paths[:count]))


def required_paths(t: int, u: int = 0, mode: str = "one_way") -> int:
    """Disjoint-path counts for private transmission against t corrupted nodes.

    one_way: 3t+1.  two_way: 2t+1.  feedback_disjoint: max(3t+1-2u, 2t+1),
    where u counts feedback paths vertex-disjoint from the forward ones.
    """
    if t < 0 or u < 0:
        raise OutOfRange(f"t and u must be >= 0, got t={t}, u={u}")
    if mode == "one_way":
        return 3 * t + 1
    if mode == "two_way":
        return 2 * t + 1
    if mode == "feedback_disjoint":
        return max(3 * t + 1 - 2 * u, 2 * t + 1)
    raise ValidationError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class RateModel:
    """Coarse secret-key rate curve: log-linear attenuation up to a knee,
    an extra exponential drop beyond it, and a hard maximum distance.

    Used only for throughput reporting, never for security results.
    """

    r0_bits_per_s: float = 100_000.0
    alpha_db_per_km: float = 0.25
    knee_km: float = 60.0
    cutoff_km: float = 10.0
    max_km: float = 100.0


def link_rate(distance_km: float, model: RateModel = RateModel()) -> float:
    """Secret bits per second of a link at the given distance."""
    if distance_km < 0:
        raise OutOfRange(f"distance must be >= 0, got {distance_km}")
    if distance_km >= model.max_km:
        return 0.0
    rate = model.r0_bits_per_s * 10.0 ** (-model.alpha_db_per_km * distance_km / 10.0)
    if distance_km > model.knee_km:
        rate *= math.exp(-(distance_km - model.knee_km) / model.cutoff_km)
    return rate
