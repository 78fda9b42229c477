"""Generate the two shipped reference topologies.

Each is a seeded planar-ish mesh with a prescribed node count, link count
and mean link length (the regional and long-haul backbone statistics).
Run from the repo root:

    python scripts/make_topologies.py
"""

import json
from pathlib import Path

import networkx as nx
import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "qotbench" / "data" / "topologies"

SPECS = {
    # name: (nodes, links, mean km, aspect (w, h), seed)
    "itb": (21, 36, 166, (1.0, 2.2), 11),
    "usb": (24, 43, 1000, (2.0, 1.0), 5),
}


def build(n_nodes, n_links, mean_km, aspect, seed):
    rng = np.random.default_rng(seed)
    pos = rng.uniform(0, 1, size=(n_nodes, 2)) * np.array(aspect)
    d = np.linalg.norm(pos[:, None] - pos[None, :], axis=-1)
    full = nx.Graph()
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            full.add_edge(i, j, weight=d[i, j])
    g = nx.minimum_spanning_tree(full)
    candidates = sorted(((d[i, j], i, j) for i, j in full.edges if not g.has_edge(i, j)))
    # lift degree-1 nodes first so every node has an alternate route
    for _, i, j in candidates:
        if g.number_of_edges() >= n_links:
            break
        if g.degree(i) == 1 or g.degree(j) == 1:
            g.add_edge(i, j)
    for _, i, j in candidates:
        if g.number_of_edges() >= n_links:
            break
        if not g.has_edge(i, j):
            g.add_edge(i, j)
    edges = sorted(tuple(sorted(e)) for e in g.edges)
    raw = np.array([d[i, j] for i, j in edges])
    km = np.maximum(np.round(raw * mean_km / raw.mean()), 20).astype(int)
    km[int(np.argmax(km))] += mean_km * len(edges) - int(km.sum())
    return {
        "nodes": [{"id": f"n{i:02d}", "x": round(float(pos[i, 0]), 4), "y": round(float(pos[i, 1]), 4)}
                  for i in range(n_nodes)],
        "links": [{"a": f"n{i:02d}", "b": f"n{j:02d}", "length_km": int(k)} for (i, j), k in zip(edges, km)],
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (n, m, mean_km, aspect, seed) in SPECS.items():
        topo = build(n, m, mean_km, aspect, seed)
        lengths = [link["length_km"] for link in topo["links"]]
        assert len(topo["nodes"]) == n and len(lengths) == m
        assert sum(lengths) == mean_km * m
        (OUT / f"{name}.json").write_text(json.dumps(topo, indent=1) + "\n")
        print(f"{name}: {n} nodes, {m} links, mean {sum(lengths) / m:.1f} km, "
              f"min {min(lengths)} max {max(lengths)}")


if __name__ == "__main__":
    main()
