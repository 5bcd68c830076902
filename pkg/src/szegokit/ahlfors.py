"""Ahlfors maps ``f_w = S(., w) / L(., w)``, properness diagnostics and primitive pairs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bie import NearBoundaryWarning, SolverError, cauchy_integral
from .geometry import BoundaryGrid
from .szego import SzegoSolution, boundary_roots, boundary_zero_count, szego_solution

__all__ = [
    "AhlforsMap",
    "ahlfors",
    "ahlfors_map",
    "ahlfors_derivative",
    "properness_report",
    "fiber",
    "pair_separation",
    "select_primitive_pair",
    "interior_samples",
]


@dataclass(frozen=True, eq=False)
class AhlforsMap:
    grid: BoundaryGrid
    w: complex
    solution: SzegoSolution

    @cached_property
    def trace(self) -> np.ndarray:
        """Boundary values ``S / L`` (unimodular)."""
        return self.solution.S.values / self.solution.L.values

    @cached_property
    def derivative_trace(self) -> np.ndarray:
        return self.grid.d_dz(self.trace)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        g = self.grid
        scalar = z.ndim == 0
        zz = np.atleast_1d(z).ravel()
        out = np.empty(zz.shape, dtype=complex)
        idx = np.array([_node(g, v) for v in zz])
        on = idx >= 0
        out[on] = self.trace[idx[on]]
        if np.any(~on):
            zi = zz[~on]
            S = cauchy_integral(g, self.solution.S, zi)
            R = self.solution.garabedian_regular(zi)
            # S / (1/(2 pi (z-w)) + R) without the 0/inf cancellation at z = w
            d = 2 * np.pi * (zi - self.w)
            val = d * S / (1 + d * R)
            if np.any(np.abs(1 + d * R) < 1e-12 * np.maximum(1, np.abs(d))):
                raise SolverError("numerical zero of L(., w) away from w: solver failure")
            out[~on] = val
        return complex(out[0]) if scalar else out.reshape(z.shape)

    def derivative(self, z, order: int = 1):
        """``f_w^(order)(z)`` at interior points (Cauchy integral of the boundary trace)."""
        return cauchy_integral(self.grid, self.trace, z, order)


def _node(grid, z, tol=1e-13):
    d = np.abs(grid.nodes - z)
    k = int(np.argmin(d))
    return k if d[k] <= tol * max(1.0, abs(z)) else -1


def ahlfors(grid: BoundaryGrid, w) -> AhlforsMap:
    w = complex(w)
    cache = grid.cache.setdefault("ahlfors", {})
    if w not in cache:
        cache[w] = AhlforsMap(grid, w, szego_solution(grid, w))
    return cache[w]


def ahlfors_map(grid: BoundaryGrid, w, z):
    """``f_w(z)``; at boundary nodes the quotient of traces."""
    return ahlfors(grid, w)(z)


def ahlfors_derivative(grid: BoundaryGrid, w, z):
    return ahlfors(grid, w).derivative(z)


def properness_report(fmap: AhlforsMap, n: int | None = None, test_values=(0.0, 0.3 + 0.2j, -0.4)) -> dict:
    """Boundary modulus deviation, valence at ``test_values`` and per-curve winding."""
    g = fmap.grid
    n = g.domain.connectivity if n is None else n
    f, df = fmap.trace, fmap.derivative_trace
    valence = {}
    residuals = {}
    for c in test_values:
        k, r = boundary_zero_count(g, f - c, df)
        valence[str(complex(c))] = k
        residuals[str(complex(c))] = r
    windings = []
    for j in range(g.domain.connectivity):
        sl = g.curve_slice(j)
        raw = np.sum(df[sl] * g.dz[sl] / f[sl]) * g.dt / (2j * np.pi)
        windings.append(int(np.rint(raw.real)))
    dev = float(np.abs(np.abs(f) - 1).max())
    ok = dev <= 1e-9 and all(v == n for v in valence.values()) and all(wn == 1 for wn in windings)
    return {"base": [fmap.w.real, fmap.w.imag], "connectivity": n, "max_modulus_deviation": dev,
            "valence": valence, "valence_residual": residuals, "curve_windings": windings, "ok": bool(ok)}


def fiber(fmap: AhlforsMap, value) -> np.ndarray:
    """All ``n`` points ``z`` with ``f(z) = value`` (``|value| < 1``)."""
    g = fmap.grid

    def newton(z):
        return fmap(z) - value, fmap.derivative(z)

    return boundary_roots(g, fmap.trace - value, newton=newton, dg_trace=fmap.derivative_trace,
                          count=g.domain.connectivity)


def interior_samples(grid: BoundaryGrid, count: int, rng, margin: float = 0.1) -> np.ndarray:
    """Uniform interior points at distance ``>= margin`` from the boundary."""
    nodes = grid.nodes
    lo = np.array([nodes.real.min(), nodes.imag.min()])
    hi = np.array([nodes.real.max(), nodes.imag.max()])
    out = []
    while len(out) < count:
        xy = rng.uniform(lo, hi, size=(4 * count, 2))
        z = xy[:, 0] + 1j * xy[:, 1]
        keep = grid.contains(z) & (grid.distance(z) >= margin)
        out.extend(z[keep].tolist())
    return np.array(out[:count])


def pair_separation(grid: BoundaryGrid, a, b, samples: int = 10, seed: int = 7) -> float:
    """Minimum over sampled fibers of ``f_a`` of the spread of ``f_b`` values.

    Returns ``inf`` when fibers are singletons (simply connected case).
    """
    n = grid.domain.connectivity
    if n == 1:
        return float("inf")
    fa, fb = ahlfors(grid, a), ahlfors(grid, b)
    rng = np.random.default_rng(seed)
    zs = interior_samples(grid, samples, rng)
    margin = np.inf
    for z in zs:
        # fibers reaching the boundary layer are discarded, so their warnings are noise
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearBoundaryWarning)
            pts = fiber(fa, fa(z))
        if grid.distance(pts).min() < 2 * grid.max_spacing:
            continue
        vals = fb(pts)
        diff = np.abs(vals[:, None] - vals[None, :])[~np.eye(n, dtype=bool)]
        margin = min(margin, float(diff.min()))
    return float(margin)


def select_primitive_pair(grid: BoundaryGrid, a, attempts: int = 32, seed: int = 11):
    """First candidate ``b`` whose map separates sampled fibers of ``f_a``.

    Candidates are a deterministic sequence of interior points.  Returns
    ``(b, margin)``.
    """
    rng = np.random.default_rng(seed)
    cands = interior_samples(grid, attempts, rng, margin=0.15)
    for b in cands:
        if abs(b - a) < 1e-3:
            continue
        m = pair_separation(grid, a, b)
        if m > 1e-3:
            return complex(b), m
    raise SolverError("no numerically primitive pair found")
