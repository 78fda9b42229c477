from __future__ import annotations

import numpy as np

from .topology import SLICES_PER_LINK


class SpectrumState:
    """Slice occupancy per directed link; a value of -1 marks a free slice."""

    def __init__(self, directed_links, slice_count: int = SLICES_PER_LINK):
        self.slice_count = slice_count
        self.owner = {e: np.full(slice_count, -1, dtype=np.int64) for e in directed_links}

    def occupied(self, link) -> np.ndarray:
        return self.owner[link] >= 0

    def route_links(self, nodes):
        return [(u, v) for u, v in zip(nodes, nodes[1:])]

    def find_first_fit(self, links, n: int) -> int | None:
        if n <= 0 or n > self.slice_count:
            return None
        busy = np.zeros(self.slice_count, dtype=bool)
        for e in links:
            busy |= self.owner[e] >= 0
        free = (~busy).astype(np.int64)
        # window sums of free slices: a window of n free slices sums to n
        c = np.concatenate(([0], np.cumsum(free)))
        ok = np.flatnonzero(c[n:] - c[:-n] == n)
        return int(ok[0]) if ok.size else None

    def allocate(self, links, start: int, n: int, lp_id: int) -> None:
        for e in links:
            seg = self.owner[e][start:start + n]
            if np.any(seg >= 0):
                raise RuntimeError("slice collision")
        for e in links:
            self.owner[e][start:start + n] = lp_id

    def release(self, links, start: int, n: int, lp_id: int) -> None:
        for e in links:
            seg = self.owner[e][start:start + n]
            if np.any(seg != lp_id):
                raise RuntimeError("releasing slices not owned by the lightpath")
            seg[:] = -1


def first_fit_allocate(spectrum: SpectrumState, route, slices_needed: int, lp_id: int = 0) -> int | None:
    """Lowest contiguous run free on every route link; occupies it and returns the start."""
    links = spectrum.route_links(route) if route and not isinstance(route[0], tuple) else list(route)
    for e in links:
        if e not in spectrum.owner:
            raise KeyError(f"unknown link {e}")
    start = spectrum.find_first_fit(links, slices_needed)
    if start is not None:
        spectrum.allocate(links, start, slices_needed, lp_id)
    return start
