"""Szego and Garabedian kernels, zeros of ``S(., a)`` and the Gram data ``c_ij``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bie import BoundaryField, SolverError, cauchy_integral, solve_kerzman_stein
from .geometry import BoundaryGrid

__all__ = [
    "AdmissibilityError",
    "SzegoSolution",
    "AhlforsBasis",
    "szego_solution",
    "szego_kernel",
    "garabedian_boundary",
    "garabedian_kernel",
    "boundary_zero_count",
    "boundary_roots",
    "szego_zeros",
    "admissible_base",
    "find_admissible_base",
]


class AdmissibilityError(ValueError):
    pass


def _node_index(grid: BoundaryGrid, z, tol=1e-13):
    """Index of the grid node equal to ``z`` (or -1)."""
    d = np.abs(grid.nodes - z)
    k = int(np.argmin(d))
    return k if d[k] <= tol * max(1.0, abs(z)) else -1


@dataclass(frozen=True, eq=False)
class SzegoSolution:
    """Boundary traces of ``S(., a)`` and ``L(., a)``."""

    grid: BoundaryGrid
    a: complex
    S: BoundaryField
    L: BoundaryField

    def szego(self, z):
        """``S(z, a)`` at interior points or boundary nodes."""
        return _eval_trace(self.grid, self.S.values, z)

    def szego_derivative(self, z, order: int = 1):
        return cauchy_integral(self.grid, self.S, z, order)

    def garabedian(self, z):
        return garabedian_kernel(self, z)

    def garabedian_regular(self, z):
        """``L(z, a) - 1/(2 pi (z - a))``, holomorphic in the whole domain."""
        g = self.grid
        reg = self.L.values - 1.0 / (2 * np.pi * (g.nodes - self.a))
        return cauchy_integral(g, reg, z)


def _eval_trace(grid, trace, z):
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        k = _node_index(grid, complex(z))
        return trace[k] if k >= 0 else cauchy_integral(grid, trace, complex(z))
    out = np.empty(z.shape + trace.shape[1:], dtype=complex)
    flat = z.ravel()
    idx = np.array([_node_index(grid, v) for v in flat])
    on = idx >= 0
    res = out.reshape((flat.size,) + trace.shape[1:])
    if np.any(on):
        res[on] = trace[idx[on]]
    if np.any(~on):
        res[~on] = cauchy_integral(grid, trace, flat[~on])
    return res.reshape(out.shape)


def garabedian_boundary(sol_or_grid, S_trace=None) -> BoundaryField:
    """``L(z, a) = i conj(S(z, a)) / T(z)`` on the boundary."""
    if isinstance(sol_or_grid, SzegoSolution):
        grid, S_trace = sol_or_grid.grid, sol_or_grid.S.values
    else:
        grid = sol_or_grid
        S_trace = np.asarray(getattr(S_trace, "values", S_trace))
    T = grid.tangents if S_trace.ndim == 1 else grid.tangents[:, None]
    return BoundaryField(grid, 1j * np.conj(S_trace) / T)


def szego_solution(grid: BoundaryGrid, a) -> SzegoSolution:
    """Solve (or fetch from the per-grid cache) the Szego trace at base ``a``."""
    a = complex(a)
    cache = grid.cache.setdefault("szego", {})
    if a not in cache:
        S = solve_kerzman_stein(grid, a)
        cache[a] = SzegoSolution(grid, a, S, garabedian_boundary(grid, S))
    return cache[a]


def szego_solutions(grid: BoundaryGrid, points) -> list:
    """Batch version of :func:`szego_solution` (one multi-RHS solve)."""
    pts = [complex(p) for p in np.atleast_1d(points)]
    cache = grid.cache.setdefault("szego", {})
    todo = [p for p in dict.fromkeys(pts) if p not in cache]
    if todo:
        S = solve_kerzman_stein(grid, np.array(todo))
        for j, p in enumerate(todo):
            sj = BoundaryField(grid, S.values[:, j])
            cache[p] = SzegoSolution(grid, p, sj, garabedian_boundary(grid, sj))
    return [cache[p] for p in pts]


def szego_kernel(grid: BoundaryGrid, z, w):
    """``S(z, w)`` for interior ``w`` and interior or boundary-node ``z``."""
    return szego_solution(grid, w).szego(z)


def garabedian_kernel(sol: SzegoSolution, z):
    """``L(z, a)`` at interior ``z != a``: explicit pole plus Cauchy integral of the regular part."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == sol.a):
        raise ZeroDivisionError("L(z, a) has a pole at z = a")
    return 1.0 / (2 * np.pi * (z - sol.a)) + sol.garabedian_regular(z)


def boundary_zero_count(grid: BoundaryGrid, g_trace, dg_trace=None):
    """Argument-principle count ``(1/2 pi i) oint g'/g dz`` over the oriented boundary.

    ``g`` must be holomorphic in the domain and zero-free on the boundary.
    Returns ``(count, residual_from_integer)``.
    """
    g = np.asarray(g_trace)
    gt = grid.d_dt(g) if dg_trace is None else np.asarray(dg_trace) * grid.dz
    raw = np.sum(gt / g) * grid.dt / (2j * np.pi)
    k = int(np.rint(raw.real))
    return k, float(abs(raw - k))


def boundary_roots(grid: BoundaryGrid, g_trace, newton=None, count=None, dg_trace=None,
                   tol=1e-13, maxiter=30):
    """All zeros of a holomorphic ``g`` inside the domain.

    Power sums ``s_p = (1/2 pi i) oint z^p g'/g dz`` give the zeros through
    Newton's identities; ``newton(z) -> (g(z), g'(z))`` then polishes each
    root.  Returns the roots sorted by real part.
    """
    g = np.asarray(g_trace)
    if count is None:
        count, resid = boundary_zero_count(grid, g, dg_trace)
        if resid > 1e-3:
            raise SolverError(f"argument-principle count not integral (residual {resid:.1e})")
    if count == 0:
        return np.zeros(0, dtype=complex)
    gt = grid.d_dt(g) if dg_trace is None else np.asarray(dg_trace) * grid.dz
    logd = gt / g * grid.dt / (2j * np.pi)
    # centre and scale the moments for conditioning
    c0 = np.sum(grid.nodes * logd) / count
    scale = np.abs(grid.nodes - c0).max()
    x = (grid.nodes - c0) / scale
    s = np.array([np.sum(x ** p * logd) for p in range(count + 1)])
    e = np.zeros(count + 1, dtype=complex)
    e[0] = 1.0
    for k in range(1, count + 1):
        e[k] = sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1)) / k
    poly = np.array([(-1) ** k * e[k] for k in range(count + 1)])
    roots = np.roots(poly) * scale + c0 if count > 1 else np.array([-poly[1] * scale + c0])
    if newton is not None:
        polished = []
        for r in roots:
            for _ in range(maxiter):
                val, der = newton(r)
                step = val / der
                r = r - step
                if abs(step) <= tol * max(1.0, abs(r)):
                    break
            polished.append(r)
        roots = np.array(polished)
    return roots[np.lexsort((roots.imag, roots.real))]


def _diameter(grid: BoundaryGrid) -> float:
    outer = grid.nodes[grid.curve_slice(grid.domain.connectivity - 1)]
    return float(np.abs(outer[:, None] - outer[None, :]).max())


def szego_zeros(grid: BoundaryGrid, a) -> np.ndarray:
    """The ``n - 1`` zeros of ``S(., a)`` in the domain.

    Counted and located by the argument principle over the whole boundary,
    polished by Newton's method on Cauchy-integral values and derivatives.
    """
    n = grid.domain.connectivity
    sol = szego_solution(grid, a)
    if n == 1:
        return np.zeros(0, dtype=complex)
    trace = sol.S.values
    count, resid = boundary_zero_count(grid, trace)
    if count != n - 1 or resid > 1e-3:
        raise AdmissibilityError(f"found {count} zeros of S(., a) (expected {n - 1}, residual "
                                 f"{resid:.1e}): inadmissible base point or insufficient nodes")

    def newton(z):
        v = cauchy_integral(grid, np.stack([trace, trace], axis=1), z, 0)
        d = cauchy_integral(grid, trace, z, 1)
        return v[0], d

    zeros = boundary_roots(grid, trace, newton=newton, count=count)
    scale = np.abs(trace).max()
    res = np.abs(cauchy_integral(grid, trace, zeros))
    if np.any(res > 1e-11 * scale):
        raise AdmissibilityError(f"zero polish failed (residual {res.max():.1e})")
    diam = _diameter(grid)
    if zeros.size > 1:
        dmin = np.abs(zeros[:, None] - zeros[None, :])[~np.eye(zeros.size, dtype=bool)].min()
        if dmin < 1e-3 * diam:
            raise AdmissibilityError("zeros of S(., a) are clustered: inadmissible base point")
    dS = np.abs(cauchy_integral(grid, trace, zeros, 1))
    if np.any(dS < 1e-6 * scale):
        raise AdmissibilityError("multiple zero of S(., a): inadmissible base point")
    dist = grid.distance(zeros)
    if np.any(dist < 3 * grid.max_spacing):
        raise AdmissibilityError("a zero of S(., a) lies too close to the boundary")
    return zeros


@dataclass(frozen=True, eq=False)
class AhlforsBasis:
    """Base points ``a_0 = a, a_1..a_{n-1}`` (zeros of ``S(., a)``), Gram matrix and ``c = gram^-1``."""

    grid: BoundaryGrid
    a: complex
    b: complex
    zeros: np.ndarray
    gram: np.ndarray
    c: np.ndarray
    solutions: tuple
    separation_margin: float = float("nan")
    notes: tuple = field(default=())

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([[self.a], self.zeros])

    @property
    def n(self) -> int:
        return self.grid.domain.connectivity

    @property
    def S_traces(self) -> np.ndarray:
        return np.stack([s.S.values for s in self.solutions], axis=1)

    @property
    def L_traces(self) -> np.ndarray:
        return np.stack([s.L.values for s in self.solutions], axis=1)

    def S_all(self, z) -> np.ndarray:
        """``[S(z, a_i)]_i`` at interior points or boundary nodes, shape ``z.shape + (n,)``."""
        return _eval_trace(self.grid, self.S_traces, z)

    def L_all(self, z) -> np.ndarray:
        """``[L(z, a_i)]_i`` at interior points away from the ``a_i`` or boundary nodes."""
        z = np.asarray(z, dtype=complex)
        g = self.grid
        pts = self.points
        if z.ndim == 0 and _node_index(g, complex(z)) >= 0:
            return self.L_traces[_node_index(g, complex(z))]
        reg = self.L_traces - 1.0 / (2 * np.pi * (g.nodes[:, None] - pts[None, :]))
        return 1.0 / (2 * np.pi * (z[..., None] - pts)) + cauchy_integral(g, reg, z)


def admissible_base(grid: BoundaryGrid, a, b=None, check_pair: bool = True) -> AhlforsBasis:
    """Zeros of ``S(., a)``, kernel traces at every ``a_i``, Gram matrix and its inverse.

    When ``check_pair`` is set, ``b`` must pass the primitive-pair
    separation heuristic (see :func:`szegokit.ahlfors.pair_separation`).
    """
    a = complex(a)
    zeros = szego_zeros(grid, a)
    pts = np.concatenate([[a], zeros])
    sols = tuple(szego_solutions(grid, pts))
    traces = np.stack([s.S.values for s in sols], axis=1)
    # gram[j, k] = S(a_j, a_k)
    gram = np.array(cauchy_integral(grid, traces, pts)).reshape(pts.size, pts.size)
    gram = 0.5 * (gram + gram.conj().T)
    evals = np.linalg.eigvalsh(gram)
    if evals.min() <= 0:
        raise AdmissibilityError("Gram matrix [S(a_j, a_k)] is not positive definite")
    c = np.linalg.inv(gram)
    margin = float("nan")
    notes = []
    if b is not None:
        b = complex(b)
        if b == a and grid.domain.connectivity > 1:
            # on a simply connected domain f_a alone is injective, so b = a is allowed
            raise ValueError("b must differ from a")
        if check_pair:
            from .ahlfors import pair_separation

            margin = pair_separation(grid, a, b)
            if not margin > 1e-3:
                raise AdmissibilityError(f"b = {b} fails the primitive-pair separation test "
                                         f"(margin {margin:.1e}); choose different b")
            notes.append("primitive pair checked by fiber separation (heuristic)")
    return AhlforsBasis(grid, a, b if b is not None else complex("nan"), zeros, gram, c, sols,
                        margin, tuple(notes))


def find_admissible_base(grid: BoundaryGrid, a, b=None, attempts: int = 8, check_pair=True) -> AhlforsBasis:
    """:func:`admissible_base` with a deterministic spiral search around ``a`` on failure."""
    a = complex(a)
    step = 0.02 * _diameter(grid)
    last = None
    for k in range(attempts + 1):
        trial = a if k == 0 else a + step * np.sqrt(k) * np.exp(2.39996323 * 1j * k)
        try:
            return admissible_base(grid, trial, b, check_pair=check_pair)
        except (AdmissibilityError, SolverError) as exc:
            last = exc
    raise AdmissibilityError(f"no admissible base point near {a} after {attempts} attempts: {last}")
