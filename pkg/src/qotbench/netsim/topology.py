from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..units import FiberSpan, LinkPath

MAX_SPAN_KM = 80.0
SLICES_PER_LINK = 360


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    length_km: float
    spans: tuple[FiberSpan, ...]
    slice_count: int = SLICES_PER_LINK


def split_spans(length_km: float, max_span_km: float = MAX_SPAN_KM, **fiber) -> tuple[FiberSpan, ...]:
    """ceil(L / max_span) equal spans covering the link."""
    n = max(1, math.ceil(length_km / max_span_km - 1e-9))
    return tuple(FiberSpan(length_km * 1e3 / n, span_index_in_link=i, **fiber) for i in range(n))


@dataclass(frozen=True)
class Topology:
    name: str
    nodes: tuple[str, ...]
    links: tuple[Link, ...]

    def __post_init__(self):
        seen = set(self.nodes)
        for link in self.links:
            if link.a not in seen or link.b not in seen:
                raise ValueError(f"link {link.a}-{link.b} references an unknown node")
            if link.length_km <= 0:
                raise ValueError("link lengths must be positive")
        if not self._connected():
            raise ValueError(f"topology {self.name!r} is not connected")

    def _connected(self) -> bool:
        adj = self.adjacency
        start = self.nodes[0]
        stack, seen = [start], {start}
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(self.nodes)

    @property
    def adjacency(self) -> dict[str, dict[str, float]]:
        adj: dict[str, dict[str, float]] = {n: {} for n in self.nodes}
        for link in self.links:
            adj[link.a][link.b] = link.length_km
            adj[link.b][link.a] = link.length_km
        return adj

    def link(self, u: str, v: str) -> Link:
        return self._index[(u, v)]

    @property
    def _index(self):
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {}
            for link in self.links:
                idx[(link.a, link.b)] = link
                idx[(link.b, link.a)] = link
            object.__setattr__(self, "_idx", idx)
        return idx

    def directed_links(self) -> list[tuple[str, str]]:
        out = []
        for link in self.links:
            out.append((link.a, link.b))
            out.append((link.b, link.a))
        return out

    def route_path(self, nodes) -> LinkPath:
        """Concatenate the span lists of the links along a node sequence."""
        spans, owners = [], []
        for k, (u, v) in enumerate(zip(nodes, nodes[1:])):
            for s in self.link(u, v).spans:
                spans.append(s)
                owners.append(k)
        return LinkPath(tuple(spans), tuple(owners))

    def route_length(self, nodes) -> float:
        return sum(self.link(u, v).length_km for u, v in zip(nodes, nodes[1:]))

    @property
    def mean_link_km(self) -> float:
        return sum(link.length_km for link in self.links) / len(self.links)


def topology_from_dict(d: dict, name: str = "custom", max_span_km: float = MAX_SPAN_KM) -> Topology:
    nodes = tuple(str(n["id"]) for n in d["nodes"])
    links = tuple(
        Link(str(l["a"]), str(l["b"]), float(l["length_km"]), split_spans(float(l["length_km"]), max_span_km))
        for l in d["links"]
    )
    return Topology(name, nodes, links)


def load_topology(name_or_path: str | Path) -> Topology:
    """Load a shipped topology (``itb``/``usb``) or a JSON file."""
    p = Path(name_or_path)
    if p.suffix == ".json" and p.exists():
        return topology_from_dict(json.loads(p.read_text()), p.stem)
    text = resources.files("qotbench").joinpath(f"data/topologies/{name_or_path}.json").read_text()
    return topology_from_dict(json.loads(text), str(name_or_path))
