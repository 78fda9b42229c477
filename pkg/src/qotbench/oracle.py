"""Reference GN-integral NLI by adaptive 2-D quadrature.

The integrand G(f1) G(f2) G(f1+f2-f) |link(f1, f2, f)|^2 is a product of
rectangular channel spectra, so its support splits into convex polygonal
islands, one per (i, j, k) channel triple.  Each island is further cut
along x = 0 and y = 0 (x = f1 - f, y = f2 - f), where the phase-matched
ridges of the link function live, then into vertical slabs mapped onto
the unit square.  A global adaptive tensor Gauss-Legendre scheme refines
the cells with the largest error until the requested relative tolerance
is met.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .units import ChannelPlan, FiberSpan, LinkPath


class OracleConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tolerance: float = 1e-3
    max_subdivisions: int = 60
    island_padding: float = 0.0  # Hz widened around each channel edge
    order: int = 6

    def __post_init__(self):
        if not 0 < self.rel_tolerance <= 0.1:
            raise ValueError("rel_tolerance must be in (0, 0.1]")
        if self.max_subdivisions < 16:
            raise ValueError("max_subdivisions must be >= 16")


@dataclass(frozen=True)
class OracleResult:
    nli_power: float
    error_estimate: float
    evaluations: int


def fwm_kernel(span: FiberSpan, f1, f2, f):
    """|(1 - e^{-aL} e^{j k L}) / (a - j k)|^2 in m^2, k = 4 pi^2 beta2 (f1-f)(f2-f)."""
    x = np.asarray(f1, dtype=float) - f
    y = np.asarray(f2, dtype=float) - f
    return _kernel_xy(span, x, y)


def _kernel_xy(span: FiberSpan, x, y):
    a = span.alpha_p
    L = span.length
    kappa = 4 * math.pi**2 * span.beta2 * x * y
    rho = math.exp(-a * L)
    num = 1.0 - 2.0 * rho * np.cos(kappa * L) + rho * rho
    return num / (a * a + kappa * kappa)


# ---------------------------------------------------------------- geometry


def _clip(poly: list[tuple[float, float]], nx: float, ny: float, c: float):
    """Keep the part of a convex polygon with nx*x + ny*y >= c."""
    out = []
    n = len(poly)
    for i in range(n):
        p, q = poly[i], poly[(i + 1) % n]
        dp = nx * p[0] + ny * p[1] - c
        dq = nx * q[0] + ny * q[1] - c
        if dp >= 0:
            out.append(p)
        if (dp >= 0) != (dq >= 0):
            t = dp / (dp - dq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _area(poly) -> float:
    s = 0.0
    for i in range(len(poly)):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return 0.5 * abs(s)


def _y_range(poly, x: float) -> tuple[float, float]:
    ys = []
    n = len(poly)
    for i in range(n):
        (x0, y0), (x1, y1) = poly[i], poly[(i + 1) % n]
        lo, hi = min(x0, x1), max(x0, x1)
        if lo - 1e-9 <= x <= hi + 1e-9:
            if x1 == x0:
                ys.extend((y0, y1))
            else:
                t = min(max((x - x0) / (x1 - x0), 0.0), 1.0)
                ys.append(y0 + t * (y1 - y0))
    return min(ys), max(ys)


def _slabs(poly) -> list[tuple[float, ...]]:
    xs = sorted({round(p[0], 3) for p in poly})
    out = []
    for x0, x1 in zip(xs, xs[1:]):
        if x1 - x0 <= 1.0:
            continue
        lo0, hi0 = _y_range(poly, x0)
        lo1, hi1 = _y_range(poly, x1)
        out.append((x0, x1, lo0, lo1, hi0, hi1))
    return out


def islands(plan: ChannelPlan, padding: float = 0.0):
    """Yield ``(weight, slab)`` pairs covering the integrand support.

    ``weight`` is G_i G_j G_k (W^3/Hz^3); ``slab`` is
    ``(x0, x1, lo(x0), lo(x1), hi(x0), hi(x1))`` in Hz relative to the CUT.
    """
    arr = plan.arrays
    f = arr["freq"][plan.cut_index]
    busy = np.flatnonzero(arr["busy"] & (arr["power"] > 0))
    lo = {i: arr["freq"][i] - f - arr["rate"][i] / 2 - padding for i in busy}
    hi = {i: arr["freq"][i] - f + arr["rate"][i] / 2 + padding for i in busy}
    psd = {i: arr["power"][i] / arr["rate"][i] for i in busy}
    quadrants = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    for i in busy:
        for j in busy:
            smin, smax = lo[i] + lo[j], hi[i] + hi[j]
            for k in busy:
                if hi[k] <= smin or lo[k] >= smax:
                    continue
                rect = [(lo[i], lo[j]), (hi[i], lo[j]), (hi[i], hi[j]), (lo[i], hi[j])]
                poly = _clip(rect, 1, 1, lo[k])
                if len(poly) >= 3:
                    poly = _clip(poly, -1, -1, -hi[k])
                if len(poly) < 3 or _area(poly) <= 0:
                    continue
                w = psd[i] * psd[j] * psd[k]
                for sx, sy in quadrants:
                    q = _clip(poly, sx, 0, 0.0)
                    if len(q) >= 3:
                        q = _clip(q, 0, sy, 0.0)
                    if len(q) < 3 or _area(q) <= 1.0:
                        continue
                    for slab in _slabs(q):
                        yield w, slab


# ------------------------------------------------------------- cubature


def _gauss(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1), 0.5 * w


class _Cubature:
    def __init__(self, span: FiberSpan, order: int):
        self.span = span
        self.nodes, self.weights = _gauss(order)
        self.evaluations = 0

    def rule(self, slab, w, u0, u1, v0, v1):
        """Tensor rule on the (u, v) cells; all arguments are 1-D arrays of cells."""
        x0, x1, lo0, lo1, hi0, hi1 = slab.T
        n = self.nodes
        u = u0[:, None] + (u1 - u0)[:, None] * n[None, :]  # (cells, n)
        v = v0[:, None] + (v1 - v0)[:, None] * n[None, :]
        x = x0[:, None] + u * (x1 - x0)[:, None]
        lo = lo0[:, None] + u * (lo1 - lo0)[:, None]
        hi = hi0[:, None] + u * (hi1 - hi0)[:, None]
        y = lo[:, :, None] + v[:, None, :] * (hi - lo)[:, :, None]
        jac = (x1 - x0)[:, None] * (hi - lo)  # (cells, n)
        vals = _kernel_xy(self.span, x[:, :, None], y)
        self.evaluations += vals.size
        ww = self.weights
        q = np.einsum("cij,i,j,ci->c", vals, ww, ww, jac)
        return q * (u1 - u0) * (v1 - v0) * w

    def split_eval(self, slab, w, u0, u1, v0, v1):
        """Values of the four children of every cell, shape (cells, 4)."""
        um = 0.5 * (u0 + u1)
        vm = 0.5 * (v0 + v1)
        kids = [(u0, um, v0, vm), (um, u1, v0, vm), (u0, um, vm, v1), (um, u1, vm, v1)]
        return np.stack([self.rule(slab, w, *k) for k in kids], axis=1), kids


def span_nli_quadrature(span: FiberSpan, plan: ChannelPlan, spec: QuadratureSpec = QuadratureSpec()) -> OracleResult:
    """GN-integral NLI power in the CUT bandwidth after one span."""
    arr = plan.arrays
    r_cut = arr["rate"][plan.cut_index]
    pieces = list(islands(plan, spec.island_padding))
    if not pieces:
        return OracleResult(0.0, 0.0, 0)
    scale = (16 / 27) * span.gamma**2 * r_cut

    w = np.array([p[0] for p in pieces]) * scale
    slab = np.array([p[1] for p in pieces], dtype=float)
    m = len(pieces)
    u0, u1 = np.zeros(m), np.ones(m)
    v0, v1 = np.zeros(m), np.ones(m)

    cub = _Cubature(span, spec.order)
    coarse = cub.rule(slab, w, u0, u1, v0, v1)
    kids, _ = cub.split_eval(slab, w, u0, u1, v0, v1)
    fine = kids.sum(axis=1)
    err = np.abs(fine - coarse)

    # finished cells are folded into running sums in a fixed order
    done_val = 0.0
    done_err = 0.0
    for _ in range(spec.max_subdivisions):
        total = done_val + fine.sum()
        total_err = done_err + err.sum()
        if total == 0 or total_err <= spec.rel_tolerance * abs(total):
            return OracleResult(float(total), float(total_err), cub.evaluations)
        target = spec.rel_tolerance * abs(total)
        # cells whose error is negligible even if every cell kept it are retired
        keep_thresh = 0.05 * target / max(len(err), 1)
        order = np.argsort(-err, kind="stable")
        csum = np.cumsum(err[order])
        n_split = int(np.searchsorted(csum, total_err - 0.5 * target)) + 1
        n_split = min(max(n_split, 1), len(err))
        split = np.zeros(len(err), dtype=bool)
        split[order[:n_split]] = True
        retire = ~split & (err < keep_thresh)
        done_val += fine[retire].sum()
        done_err += err[retire].sum()
        keep = ~split & ~retire

        s_slab, s_w = slab[split], w[split]
        s_kids = kids[split]
        s_u0, s_u1, s_v0, s_v1 = u0[split], u1[split], v0[split], v1[split]
        um, vm = 0.5 * (s_u0 + s_u1), 0.5 * (s_v0 + s_v1)
        child_bounds = [
            (s_u0, um, s_v0, vm), (um, s_u1, s_v0, vm),
            (s_u0, um, vm, s_v1), (um, s_u1, vm, s_v1),
        ]
        c_slab = np.concatenate([s_slab] * 4)
        c_w = np.concatenate([s_w] * 4)
        c_u0 = np.concatenate([b[0] for b in child_bounds])
        c_u1 = np.concatenate([b[1] for b in child_bounds])
        c_v0 = np.concatenate([b[2] for b in child_bounds])
        c_v1 = np.concatenate([b[3] for b in child_bounds])
        c_coarse = np.concatenate([s_kids[:, i] for i in range(4)])
        c_kids, _ = cub.split_eval(c_slab, c_w, c_u0, c_u1, c_v0, c_v1)
        c_fine = c_kids.sum(axis=1)
        c_err = np.abs(c_fine - c_coarse)

        slab = np.concatenate([slab[keep], c_slab])
        w = np.concatenate([w[keep], c_w])
        u0 = np.concatenate([u0[keep], c_u0])
        u1 = np.concatenate([u1[keep], c_u1])
        v0 = np.concatenate([v0[keep], c_v0])
        v1 = np.concatenate([v1[keep], c_v1])
        kids = np.concatenate([kids[keep], c_kids])
        fine = np.concatenate([fine[keep], c_fine])
        err = np.concatenate([err[keep], c_err])

    total = done_val + fine.sum()
    raise OracleConvergenceError(
        f"quadrature did not reach rel_tolerance={spec.rel_tolerance} within "
        f"{spec.max_subdivisions} refinement rounds (estimate {total:.6g} W, "
        f"error {done_err + err.sum():.3g} W)"
    )


def path_nli_quadrature(path: LinkPath, plan: ChannelPlan, spec: QuadratureSpec = QuadratureSpec()) -> OracleResult:
    """Incoherent sum over spans; identical spans are integrated once."""
    if path is None or not path.spans:
        raise ValueError("empty path")
    cache: dict[FiberSpan, OracleResult] = {}
    vals, errs, evals = [], [], 0
    for s in path.spans:
        key = FiberSpan(s.length, s.attenuation, s.beta2, s.gamma, s.noise_figure)
        if key not in cache:
            cache[key] = span_nli_quadrature(s, plan, spec)
            evals += cache[key].evaluations
        vals.append(cache[key].nli_power)
        errs.append(cache[key].error_estimate)
    return OracleResult(math.fsum(vals), math.sqrt(math.fsum(e * e for e in errs)), evals)


def write_oracle_csv(path, rows: Iterable[Sequence], manifest=None) -> None:
    """Rows of (sample_id, span_id, nli_W, err_W, evals)."""
    from .io import write_csv

    write_csv(path, manifest, ["sample_id", "span_id", "nli_W", "err_W", "evals"],
              ([r[0], r[1], repr(float(r[2])), repr(float(r[3])), int(r[4])] for r in rows))
