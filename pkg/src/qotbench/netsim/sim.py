"""Event-driven RMSA simulation with closed-form QoT.

Requests arrive as a Poisson process of rate ``otl`` (the mean holding
time is one time unit, so the offered load in Erlang equals ``otl``).
Each request tries its k shortest routes in order; on a route the
highest modulation level whose GSNR threshold is met is chosen, the
bit rate is split over as many same-format carriers as needed, and the
super-channel takes the first contiguous run of free slices on every
link of the route.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import cfm
from ..cfm import CfmParams, Variant
from ..gsnr import ase_power
from ..rng import substream
from ..units import FORMATS, SLOT_SLICES, ChannelPlan, FiberSpan, ModulationFormat, linear_to_db, uniform_plan
from .routing import yen_k_shortest
from .spectrum import SpectrumState
from .topology import Topology, load_topology

BITRATES = (200, 400, 600, 800, 1000)


@dataclass(frozen=True)
class Request:
    src: str
    dst: str
    bitrate: int
    arrival_time: float
    holding_time: float

    def __post_init__(self):
        if self.bitrate % 200 or not 200 <= self.bitrate <= 1000:
            raise ValueError(f"bit rate {self.bitrate} is not on the 200 Gb/s grid")
        if not self.holding_time > 0:
            raise ValueError("holding time must be positive")


def carriers_and_slices(bitrate: float, fmt: ModulationFormat) -> tuple[int, int]:
    carriers = math.ceil(bitrate / fmt.rate_per_carrier - 1e-12)
    return carriers, SLOT_SLICES * carriers


class WorstCaseQoT:
    """Fully loaded, LOGON-powered GSNR of a span sequence, with per-span caching."""

    def __init__(self, variant: Variant | str, params: CfmParams, plan: ChannelPlan | None = None):
        self.variant = Variant.parse(variant) if isinstance(variant, str) else variant
        self.params = params
        base = plan or uniform_plan()
        self.plans = {f.level: base.with_format(f).with_power(1.0) for f in FORMATS}
        self._span: dict = {}

    def _split(self, level: int, span: FiberSpan):
        key = (level, span.length, span.attenuation, span.beta2, span.gamma, span.noise_figure)
        hit = self._span.get(key)
        if hit is None:
            plan = self.plans[level]
            fixed, decaying = cfm.decay_split(self.variant, self.params, span, plan)
            ase = ase_power(span, plan.cut.center_frequency, plan.cut.symbol_rate)
            hit = self._span[key] = (fixed, decaying, ase)
        return hit

    def noise(self, spans: Sequence[FiberSpan], level: int) -> tuple[float, float]:
        """(total ASE in W, total NLI coefficient in W^-2)."""
        ases, etas = [], []
        l_acc = 0.0
        r_cut = self.plans[level].cut.symbol_rate
        for s in spans:
            fixed, decaying, ase = self._split(level, s)
            eta = fixed
            if decaying:
                rho = 1.0 / (1.0 + self.params.dispersion_decay_coefficient * abs(s.beta2) * r_cut**2 * l_acc)
                eta += rho * decaying
            ases.append(ase)
            etas.append(eta)
            l_acc += s.length
        return math.fsum(ases), math.fsum(etas)

    def gsnr(self, spans: Sequence[FiberSpan], level: int) -> float:
        """GSNR (dB) at the path LOGON power; +inf for an empty span list."""
        if not spans:
            return math.inf
        a, b = self.noise(spans, level)
        p = (a / (2.0 * b)) ** (1.0 / 3.0)
        return linear_to_db(p / (a + b * p**3))


@dataclass(frozen=True)
class MflPolicy:
    mode: str = "worst_case"  # or "current_load"

    def __post_init__(self):
        if self.mode not in ("worst_case", "current_load"):
            raise ValueError(f"unknown MFL policy {self.mode!r}")


def select_mfl(
    variant: Variant | str,
    params: CfmParams,
    path,
    policy: MflPolicy | None = None,
    qot: WorstCaseQoT | None = None,
) -> ModulationFormat | None:
    """Highest format whose threshold the worst-case GSNR of ``path`` meets."""
    choice = _select(path, qot or WorstCaseQoT(variant, params))
    return None if choice is None else choice[0]


def _spans_of(path) -> tuple[FiberSpan, ...]:
    if path is None:
        return ()
    return tuple(path.spans) if hasattr(path, "spans") else tuple(path)


def _select(path, qot: WorstCaseQoT):
    spans = _spans_of(path)
    for fmt in reversed(FORMATS):
        g = qot.gsnr(spans, fmt.level)
        if g >= fmt.gsnr_threshold:
            return fmt, g
    return None


@dataclass(frozen=True)
class SimConfig:
    topology: str | Topology = "itb"
    variant: str = "MDCT"
    otl: float = 400.0
    n_requests: int = 10_000
    seed: int = 1
    k: int = 3
    policy: str = "worst_case"
    params: CfmParams | None = field(default=None, compare=False)
    check_invariants: bool = False


@dataclass(frozen=True)
class SimMetrics:
    bbp: float
    mean_arrival_gsnr: float
    mfl_usage: tuple[int, ...]
    accepted: int
    blocked: int
    offered_bw: float
    blocked_bw: float

    @property
    def mfl_share(self) -> tuple[float, ...]:
        n = sum(self.mfl_usage)
        return tuple(c / n if n else 0.0 for c in self.mfl_usage)


def generate_requests(nodes: Sequence[str], otl: float, n: int, seed: int, holding_mean: float = 1.0):
    if otl <= 0:
        raise ValueError("offered traffic load must be positive")
    rng = substream(seed, "request", 0)
    n_nodes = len(nodes)
    inter = rng.exponential(holding_mean / otl, size=n)
    hold = rng.exponential(holding_mean, size=n)
    pair = rng.integers(0, n_nodes * (n_nodes - 1), size=n)
    rate = rng.integers(1, 6, size=n) * 200
    t = np.cumsum(inter)
    out = []
    for i in range(n):
        s, d = divmod(int(pair[i]), n_nodes - 1)
        if d >= s:
            d += 1
        out.append(Request(nodes[s], nodes[d], int(rate[i]), float(t[i]), float(hold[i])))
    return out


def _current_load_gsnr(qot: WorstCaseQoT, topo: Topology, spectrum: SpectrumState, route, fmt, start, n_slices):
    """GSNR of the new super-channel's center carrier given the channels already lit on its route."""
    links = spectrum.route_links(route)
    busy = np.zeros(spectrum.slice_count, dtype=bool)
    for e in links:
        busy |= spectrum.occupied(e)
    busy[start:start + n_slices] = True
    n_slots = spectrum.slice_count // SLOT_SLICES
    slot_busy = busy[: n_slots * SLOT_SLICES].reshape(n_slots, SLOT_SLICES).any(axis=1)
    cut = (start + n_slices // 2) // SLOT_SLICES
    cut = min(cut, n_slots - 1)
    slot_busy[cut] = True
    spans = topo.route_path(route).spans
    a, b_full = qot.noise(spans, fmt.level)
    p = (a / (2.0 * b_full)) ** (1.0 / 3.0)
    plan = uniform_plan(n_slots, p, fmt, slot_busy, cut)
    nli = cfm.path_nli(qot.variant, qot.params, topo.route_path(route), plan)
    return linear_to_db(p / (a + nli))


def run_simulation(config: SimConfig) -> SimMetrics:
    topo = config.topology if isinstance(config.topology, Topology) else load_topology(config.topology)
    params = config.params or cfm.DEFAULT_PARAMS
    policy = MflPolicy(config.policy)
    if config.n_requests < 1 or config.k < 1:
        raise ValueError("n_requests and k must be positive")
    qot = WorstCaseQoT(config.variant, params)
    spectrum = SpectrumState(topo.directed_links())
    requests = generate_requests(topo.nodes, config.otl, config.n_requests, config.seed)

    routes: dict = {}
    choices: dict = {}
    departures: list = []  # (time, lp_id, links, start, n)
    active: dict = {}
    usage = [0] * len(FORMATS)
    gsnrs: list[float] = []
    offered = blocked_bw = 0.0
    blocked = 0

    for lp_id, req in enumerate(requests):
        while departures and departures[0][0] <= req.arrival_time:
            _, did, links, start, n = heapq.heappop(departures)
            spectrum.release(links, start, n, did)
            del active[did]
        offered += req.bitrate
        key = (req.src, req.dst)
        if key not in routes:
            routes[key] = yen_k_shortest(topo, req.src, req.dst, config.k)
        placed = False
        for route in routes[key]:
            if route not in choices:
                choices[route] = _select(topo.route_path(route), qot)
            choice = choices[route]
            if choice is None:
                continue
            fmt, g = choice
            _, n_slices = carriers_and_slices(req.bitrate, fmt)
            links = spectrum.route_links(route)
            start = spectrum.find_first_fit(links, n_slices)
            if start is None:
                continue
            if policy.mode == "current_load":
                g = _current_load_gsnr(qot, topo, spectrum, route, fmt, start, n_slices)
            spectrum.allocate(links, start, n_slices, lp_id)
            active[lp_id] = (links, start, n_slices)
            heapq.heappush(departures, (req.arrival_time + req.holding_time, lp_id, links, start, n_slices))
            usage[fmt.level - 1] += 1
            gsnrs.append(g)
            placed = True
            break
        if not placed:
            blocked += 1
            blocked_bw += req.bitrate
        if config.check_invariants:
            check_conservation(spectrum, active)

    accepted = len(gsnrs)
    return SimMetrics(
        bbp=blocked_bw / offered,
        mean_arrival_gsnr=math.fsum(gsnrs) / accepted if accepted else math.nan,
        mfl_usage=tuple(usage),
        accepted=accepted,
        blocked=blocked,
        offered_bw=offered,
        blocked_bw=blocked_bw,
    )


def check_conservation(spectrum: SpectrumState, active: dict) -> None:
    """Occupied slices on each link equal the slices of the lightpaths crossing it."""
    expected = {e: 0 for e in spectrum.owner}
    for lp, (links, start, n) in active.items():
        for e in links:
            expected[e] += n
            if not np.all(spectrum.owner[e][start:start + n] == lp):
                raise AssertionError(f"lightpath {lp} lost its slices on {e}")
    for e, owner in spectrum.owner.items():
        if int(np.count_nonzero(owner >= 0)) != expected[e]:
            raise AssertionError(f"slice count mismatch on {e}")
