"""Loopless k-shortest paths (Yen) with a deterministic tie-break.

Paths are ranked by ``(length_km, node sequence)``, so equal-length
paths come out in lexicographic order of their node ids.
"""

from __future__ import annotations

import heapq


def dijkstra(adj: dict, src, dst, banned_nodes=frozenset(), banned_edges=frozenset()):
    """Shortest ``(length, nodes)`` from src to dst, or None."""
    heap = [(0.0, (src,))]
    settled = set()
    while heap:
        d, path = heapq.heappop(heap)
        u = path[-1]
        if u == dst:
            return d, path
        if u in settled:
            continue
        settled.add(u)
        for v, w in adj[u].items():
            if v in settled or v in banned_nodes or (u, v) in banned_edges:
                continue
            heapq.heappush(heap, (d + w, path + (v,)))
    return None


def yen_k_shortest(topology, src, dst, k: int = 3) -> list[tuple[str, ...]]:
    if src == dst:
        raise ValueError("source and destination must differ")
    adj = topology.adjacency if hasattr(topology, "adjacency") else topology
    first = dijkstra(adj, src, dst)
    if first is None:
        raise ValueError(f"no path between {src} and {dst}")
    accepted = [first]
    candidates: list[tuple[float, tuple]] = []
    seen = {first[1]}
    while len(accepted) < k:
        _, last = accepted[-1]
        for i in range(len(last) - 1):
            spur, root = last[i], last[: i + 1]
            banned_edges = {
                (p[i], p[i + 1]) for _, p in accepted if len(p) > i + 1 and p[: i + 1] == root
            }
            banned_nodes = frozenset(root[:-1])
            found = dijkstra(adj, spur, dst, banned_nodes, banned_edges)
            if found is None:
                continue
            root_len = sum(adj[a][b] for a, b in zip(root, root[1:]))
            total = root[:-1] + found[1]
            if total not in seen:
                seen.add(total)
                heapq.heappush(candidates, (root_len + found[0], total))
        if not candidates:
            break
        accepted.append(heapq.heappop(candidates))
    return [p for _, p in accepted]
