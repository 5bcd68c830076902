"""Boundary-integral engine.

Periodic trapezoid quadrature on a :class:`~szegokit.geometry.BoundaryGrid`,
Cauchy integrals (interior values and boundary limits), the
Kerzman-Stein second-kind equation for Szego kernel traces, and a
double-layer Dirichlet solver for multiply connected domains.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import factorial

import numpy as np
import scipy.linalg as sla

from .geometry import BoundaryGrid

__all__ = [
    "SolverError",
    "OutsideDomainError",
    "NearBoundaryWarning",
    "BoundaryField",
    "HarmonicEvaluator",
    "cauchy_integral",
    "cauchy_boundary_limit",
    "kerzman_stein_matrix",
    "solve_kerzman_stein",
    "solve_dirichlet",
    "dirichlet_system",
]

# points closer than this many (refined) node spacings lose accuracy
_SAFE_SPACINGS = 6.0
_MAX_REFINE = 32


class SolverError(RuntimeError):
    pass


class OutsideDomainError(ValueError):
    pass


class NearBoundaryWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Complex (or real) samples aligned index-wise with ``grid.nodes``."""

    grid: BoundaryGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape[0] != self.grid.size:
            raise ValueError(f"field has {v.shape[0]} samples, grid has {self.grid.size} nodes")
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def on_curve(self, j: int) -> np.ndarray:
        return self.values[self.grid.curve_slice(j)]


def _values(f) -> np.ndarray:
    return f.values if isinstance(f, BoundaryField) else np.asarray(f)


def _refine_factor(grid: BoundaryGrid, dist: float) -> int:
    h = grid.max_spacing
    need = _SAFE_SPACINGS * h / max(dist, 1e-300)
    if need <= 1:
        return 1
    return int(min(_MAX_REFINE, 2 ** int(np.ceil(np.log2(need)))))


def _bary_cauchy(nodes, cw, vals, z, order):
    # barycentric form: divide by the discrete version of (1/2 pi i) int dw/(w - z) = 1
    diff = nodes[None, :] - z[:, None]
    wk = cw[None, :] / diff
    den = wk.sum(axis=1)
    if vals.ndim == 1:
        vals = vals[:, None]
    # outside points have den = 0 (winding number 0); the caller rejects them
    with np.errstate(divide="ignore", invalid="ignore"):
        f0 = (wk @ vals) / den[:, None]
        derivs = [f0]
        for m in range(1, order + 1):
            # Taylor-subtracted form of f^(m)(z)/m!
            resid = vals[None, :, :] - sum(derivs[j][:, None, :] * diff[:, :, None] ** j for j in range(m))
            derivs.append(np.einsum("pk,pkc->pc", wk / diff ** m, resid) / den[:, None])
        out = derivs[order] * factorial(order)
    return out, den


def cauchy_integral(grid: BoundaryGrid, f, z, order: int = 0, *, check: bool = True):
    """``(order!/2 pi i) oint f(w) / (w - z)^(order+1) dw`` for interior ``z``.

    Uses the trapezoid rule in barycentric (subtracted) form.  Points closer
    to the boundary than a few node spacings are handled by trigonometric
    upsampling of ``f``; beyond the refinement cap a
    :class:`NearBoundaryWarning` carries an accuracy estimate.

    ``f`` may be a :class:`BoundaryField` or an array whose first axis is
    node-aligned (several densities at once).  Returns a scalar for scalar
    ``z`` and one density, otherwise an array shaped ``z.shape + extra``.
    """
    if not 0 <= order <= 3:
        raise ValueError("order must be in 0..3")
    vals = _values(f)
    scalar_z = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    extra = vals.shape[1:]
    v2 = vals.reshape(grid.size, -1)
    out = np.empty((zz.size, v2.shape[1]), dtype=complex)
    dist = np.abs(zz[:, None] - grid.nodes[None, :]).min(axis=1)
    factors = np.array([_refine_factor(grid, d) for d in dist])
    for fac in np.unique(factors):
        sel = factors == fac
        g = grid.refined(int(fac))
        vv = grid.interpolate(v2, int(fac)) if fac > 1 else v2
        res, den = _bary_cauchy(g.nodes, g.cauchy_weights, vv, zz[sel], order)
        if check:
            outside = np.abs(den - 1.0) > 0.5
            if np.any(outside):
                raise OutsideDomainError(f"point {zz[sel][outside][0]} lies outside the domain")
            h = g.max_spacing
            est = float(np.exp(-2 * np.pi * dist[sel].min() / h))
            if fac >= _MAX_REFINE and est > 1e-12:
                warnings.warn(f"evaluation within {dist[sel].min():.2e} of the boundary; "
                              f"estimated relative error {est:.1e}", NearBoundaryWarning, stacklevel=2)
        out[sel] = res
    out = out.reshape(zz.shape + extra)
    if scalar_z:
        return out[0] if extra else complex(out[0])
    return out.reshape(np.shape(z) + extra)


def cauchy_boundary_limit(grid: BoundaryGrid, density) -> np.ndarray:
    """Interior boundary values of ``Phi(z) = (1/2 pi i) oint mu(w) dw / (w - z)``.

    ``Phi_+(w_i) = mu_i + (1/2 pi i) oint (mu(w) - mu_i)/(w - w_i) dw``; the
    subtracted integrand is smooth and its diagonal value is ``mu'(t_i)``.
    """
    mu = np.asarray(density)
    squeeze = mu.ndim == 1
    mu2 = mu.reshape(grid.size, -1).astype(complex)
    nodes, cw = grid.nodes, grid.cauchy_weights
    diff = nodes[None, :] - nodes[:, None]
    np.fill_diagonal(diff, 1.0)
    kern = cw[None, :] / diff
    np.fill_diagonal(kern, 0.0)
    out = mu2 + kern @ mu2 - kern.sum(axis=1)[:, None] * mu2
    out += grid.d_dt(mu2) * (grid.dt / (2j * np.pi))
    return out[:, 0] if squeeze else out.reshape(mu.shape)


def kerzman_stein_matrix(grid: BoundaryGrid) -> np.ndarray:
    """Symmetrically weighted Kerzman-Stein matrix ``B = W^1/2 A W^1/2``.

    ``A(z, w) = conj(H(w, z)) - H(z, w)`` with the Cauchy kernel
    ``H(z, w) = T(w) / (2 pi i (w - z))``; the diagonal limit is zero.
    ``B`` is skew-hermitian.  With the opposite sign the solution still has
    the right Cauchy integral but is not the Szego trace on the boundary.
    """
    key = "ks_matrix"
    if key in grid.cache:
        return grid.cache[key]
    z, T = grid.nodes, grid.tangents
    diff = z[None, :] - z[:, None]  # w - z, rows z, columns w
    np.fill_diagonal(diff, 1.0)
    H = T[None, :] / (2j * np.pi * diff)
    A = np.conj(H.T) - H
    np.fill_diagonal(A, 0.0)
    sq = np.sqrt(grid.weights)
    B = sq[:, None] * A * sq[None, :]
    B.setflags(write=False)
    grid.cache[key] = B
    return B


def _ks_factor(grid: BoundaryGrid):
    key = "ks_lu"
    if key not in grid.cache:
        B = kerzman_stein_matrix(grid)
        M = np.eye(grid.size) + B
        # I + B with B skew-hermitian has all singular values >= 1
        cond = 1.0 + np.linalg.norm(B, 2)
        if cond > 1e8:
            raise SolverError(f"Kerzman-Stein system ill-conditioned (cond ~ {cond:.1e}); use more nodes")
        grid.cache[key] = (sla.lu_factor(M), cond)
    return grid.cache[key][0]


def _ks_rhs(grid: BoundaryGrid, a: complex) -> np.ndarray:
    return np.conj(grid.tangents / (2j * np.pi * (grid.nodes - a)))


def solve_kerzman_stein(grid: BoundaryGrid, a) -> BoundaryField:
    """Boundary trace of the Szego kernel ``S(., a)``.

    Solves ``(I + A) h = conj(H(a, .))`` in the symmetrized form
    ``(I + B) y = W^1/2 r``, ``h = W^-1/2 y``.  The system matrix is
    factored once per grid; each base point costs one back-substitution.
    Several base points may be passed at once (an array ``a``), in which
    case the values are ``(nodes, len(a))``.
    """
    aa = np.atleast_1d(np.asarray(a, dtype=complex))
    margin = 3 * grid.max_spacing
    dist = np.abs(aa[:, None] - grid.nodes[None, :]).min(axis=1)
    if np.any(dist <= margin):
        raise SolverError(f"base point {aa[np.argmin(dist)]} within 3 node spacings of the boundary")
    lu = _ks_factor(grid)
    sq = np.sqrt(grid.weights)
    rhs = np.stack([_ks_rhs(grid, x) for x in aa], axis=1) * sq[:, None]
    h = sla.lu_solve(lu, rhs) / sq[:, None]
    return BoundaryField(grid, h[:, 0] if np.ndim(a) == 0 else h)


@dataclass(frozen=True, eq=False)
class HarmonicEvaluator:
    """``u(z) = Re Phi_mu(z) + sum_j A_j log|z - s_j|``.

    ``Phi_mu`` is the Cauchy integral of the density ``mu``.  Complex
    densities give the complex-linear extension ``u(Re data) + i u(Im data)``.
    A 2-D density holds one column per boundary datum; values then carry a
    trailing axis.
    """

    grid: BoundaryGrid
    density: np.ndarray
    log_coeffs: np.ndarray
    anchors: np.ndarray

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        mu = self.density
        logs = np.log(np.abs(z[..., None] - self.anchors))
        if mu.ndim == 1:
            val = cauchy_integral(self.grid, mu.real, z).real + logs @ self.log_coeffs.real
            if np.iscomplexobj(mu):
                val = val + 1j * (cauchy_integral(self.grid, mu.imag, z).real + logs @ self.log_coeffs.imag)
            return val
        both = np.concatenate([mu.real, mu.imag], axis=1)
        phi = cauchy_integral(self.grid, both, z).real
        m = mu.shape[1]
        val = phi[..., :m] + logs @ self.log_coeffs.real
        if np.iscomplexobj(mu):
            val = val + 1j * (phi[..., m:] + logs @ self.log_coeffs.imag)
        return val

    def dz(self, z):
        """Wirtinger derivative ``du/dz`` at interior points."""
        z = np.asarray(z, dtype=complex)
        d = 0.5 * cauchy_integral(self.grid, self.density.astype(complex), z, order=1)
        return d + (0.5 / (z[..., None] - self.anchors)) @ self.log_coeffs

    def holomorphic_trace(self) -> np.ndarray:
        """Boundary trace of ``2 du/dz`` (holomorphic in the domain)."""
        g = self.grid
        phi = cauchy_boundary_limit(g, self.density.astype(complex))
        return g.d_dz(phi) + (1.0 / (g.nodes[:, None] - self.anchors[None, :])) @ self.log_coeffs


def dirichlet_system(grid: BoundaryGrid):
    """LU factors of the augmented double-layer system and the anchor points."""
    key = "dirichlet_lu"
    if key in grid.cache:
        return grid.cache[key]
    dom = grid.domain
    n_in = len(dom.inners)
    N = grid.size
    z, T, ds = grid.nodes, grid.tangents, grid.weights
    diff = z[None, :] - z[:, None]
    np.fill_diagonal(diff, 1.0)
    K = np.real(T[None, :] / (2j * np.pi * diff))
    np.fill_diagonal(K, grid.curvature / (4 * np.pi))
    M = np.zeros((N + n_in, N + n_in))
    M[:N, :N] = 0.5 * np.eye(N) + K * ds[None, :]
    anchors = np.array([c.centroid() for c in dom.inners], dtype=complex)
    for j, s in enumerate(anchors):
        M[:N, N + j] = np.log(np.abs(z - s))
        M[N + j, grid.curve_slice(j)] = ds[grid.curve_slice(j)]
    lu = sla.lu_factor(M)
    rc = np.linalg.cond(M, 1) if N <= 4096 else None
    if rc is not None and rc > 1e10:
        raise SolverError(f"augmented Dirichlet system is singular (cond {rc:.1e}); anchor points poorly placed")
    grid.cache[key] = (lu, anchors)
    return grid.cache[key]


def solve_dirichlet(grid: BoundaryGrid, data) -> HarmonicEvaluator:
    """Harmonic function with boundary values ``data``.

    One augmented solve: double-layer density plus one logarithmic source
    per inner curve, with zero-mean density on every inner curve.  Complex
    data (or a 2-D stack of data columns) is solved by linearity.
    """
    d = _values(data)
    if np.iscomplexobj(d) and np.abs(d.imag).max() == 0:
        d = d.real
    lu, anchors = dirichlet_system(grid)
    n_in = anchors.size
    rhs = np.concatenate([d, np.zeros((n_in,) + d.shape[1:], dtype=d.dtype)])
    if np.iscomplexobj(rhs):
        sol = sla.lu_solve(lu, rhs.real) + 1j * sla.lu_solve(lu, rhs.imag)
    else:
        sol = sla.lu_solve(lu, rhs)
    return HarmonicEvaluator(grid, sol[: grid.size], sol[grid.size:], anchors)
