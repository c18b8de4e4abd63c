"""Board topology for the 21-territory, 5-continent map.

Territories are canonical strings like ``"Green_C"``. Cross-continent
connections are directed (one-way for movement); distance queries run on
the undirected closure because they measure dispersion, not legality.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

from .errors import MapError

CONTINENTS: dict[str, tuple[str, ...]] = {
    "Red": ("A", "B", "C"),
    "Green": ("A", "B", "C", "D", "E"),
    "Purple": ("A", "B", "C", "D", "E"),
    "Yellow": ("A", "B", "C", "D"),
    "Blue": ("A", "B", "C", "D"),
}

CONTINENT_ORDER: tuple[str, ...] = tuple(CONTINENTS)

ALL_TERRITORIES: tuple[str, ...] = tuple(
    f"{cont}_{letter}" for cont in CONTINENT_ORDER for letter in CONTINENTS[cont]
)

_TERRITORY_SET = frozenset(ALL_TERRITORIES)

# The 11 published directed cross-continent connections. Two pairs appear in
# both directions (Red_A/Green_D and Purple_A/Green_E); every other link is
# one-way.
INTER_EDGES: tuple[tuple[str, str], ...] = (
    ("Yellow_D", "Green_A"),
    ("Green_D", "Red_A"),
    ("Red_A", "Green_D"),
    ("Red_B", "Purple_E"),
    ("Red_C", "Yellow_B"),
    ("Red_C", "Blue_B"),
    ("Blue_A", "Yellow_C"),
    ("Yellow_C", "Blue_D"),
    ("Blue_C", "Purple_A"),
    ("Purple_A", "Green_E"),
    ("Green_E", "Purple_A"),
)


def is_territory(name: str) -> bool:
    return name in _TERRITORY_SET


def continent_of(territory: str) -> str:
    """Continent name for a canonical territory id."""
    if territory not in _TERRITORY_SET:
        raise MapError(f"unknown territory: {territory!r}")
    return territory.split("_", 1)[0]


def territories_of(continent: str) -> tuple[str, ...]:
    if continent not in CONTINENTS:
        raise MapError(f"unknown continent: {continent!r}")
    return tuple(f"{continent}_{letter}" for letter in CONTINENTS[continent])


@dataclass(frozen=True)
class MapGraph:
    """Immutable board graph: territories, intra-continent adjacency, and
    directed cross-continent edges.

    ``neighbors_out`` follows edge direction (movement legality);
    ``neighbors`` is the undirected closure (distance queries).
    """

    territories: tuple[str, ...]
    intra_edges: tuple[tuple[str, str], ...]
    inter_edges: tuple[tuple[str, str], ...]
    _out: dict[str, tuple[str, ...]] = field(repr=False, compare=False, default_factory=dict)
    _undirected: dict[str, tuple[str, ...]] = field(repr=False, compare=False, default_factory=dict)
    _dist: dict[str, dict[str, int]] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        terr = set(self.territories)
        for u, v in list(self.intra_edges) + list(self.inter_edges):
            if u not in terr or v not in terr:
                raise MapError(f"edge ({u}, {v}) references unknown territory")
        out: dict[str, set[str]] = {t: set() for t in self.territories}
        und: dict[str, set[str]] = {t: set() for t in self.territories}
        for u, v in self.intra_edges:
            out[u].add(v)
            out[v].add(u)
            und[u].add(v)
            und[v].add(u)
        for u, v in self.inter_edges:
            out[u].add(v)
            und[u].add(v)
            und[v].add(u)
        object.__setattr__(self, "_out", {t: tuple(sorted(out[t])) for t in self.territories})
        object.__setattr__(self, "_undirected", {t: tuple(sorted(und[t])) for t in self.territories})

    def neighbors_out(self, territory: str) -> tuple[str, ...]:
        """Territories reachable in one directed move from ``territory``."""
        return self._out[territory]

    def neighbors(self, territory: str) -> tuple[str, ...]:
        """Adjacent territories on the undirected closure."""
        return self._undirected[territory]

    def has_directed_edge(self, u: str, v: str) -> bool:
        return v in self._out.get(u, ())

    def _bfs_from(self, source: str) -> dict[str, int]:
        cached = self._dist.get(source)
        if cached is not None:
            return cached
        dist = {source: 0}
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self._undirected[u]:
                if w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        self._dist[source] = dist
        return dist


def graph_distance(g: MapGraph, u: str, w: str) -> int:
    """Shortest-path hop count between two territories (undirected closure).

    Symmetric, zero on identical arguments. Raises MapError for an
    unreachable pair, which cannot happen on the default map.
    """
    if u not in g._undirected or w not in g._undirected:
        raise MapError(f"unknown territory in distance query: {u!r}, {w!r}")
    dist = g._bfs_from(u)
    if w not in dist:
        raise MapError(f"no path between {u} and {w}")
    return dist[w]


def diameter(g: MapGraph) -> int:
    """Maximum graph_distance over all territory pairs (cached per map)."""
    best = 0
    for t in g.territories:
        dist = g._bfs_from(t)
        if len(dist) != len(g.territories):
            raise MapError("graph is not connected")
        best = max(best, max(dist.values()))
    return best


def build_default_map(adjacency_path: str | None = None) -> MapGraph:
    """The canonical board.

    Cross-continent edges are fixed; intra-continent adjacency comes from the
    bundled adjacency file (complete subgraph per continent) unless an
    override path is given.
    """
    if adjacency_path is None:
        raw = resources.files("cgplan.data").joinpath("default_map.json").read_text()
    else:
        with open(adjacency_path) as f:
            raw = f.read()
    return map_from_json(json.loads(raw))


def map_from_json(doc: dict) -> MapGraph:
    return MapGraph(
        territories=tuple(doc["territories"]),
        intra_edges=tuple((u, v) for u, v in doc["intra_edges"]),
        inter_edges=tuple((u, v) for u, v in doc["inter_edges"]),
    )


def map_to_json(g: MapGraph) -> dict:
    return {
        "territories": list(g.territories),
        "intra_edges": [list(e) for e in g.intra_edges],
        "inter_edges": [list(e) for e in g.inter_edges],
    }
