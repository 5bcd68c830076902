"""Kernel-family reconstruction from two Ahlfors maps.

Everything here is evaluated through kernel building blocks attached to an
:class:`~szegokit.szego.AhlforsBasis`; no rational function is formed
symbolically.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .ahlfors import AhlforsMap, ahlfors, interior_samples
from .geometry import BoundaryGrid, DomainSpec, GeometryError, boundary_grid, check_domain
from .szego import AhlforsBasis, szego_solution
from . import oracles

__all__ = [
    "ReprEvaluator",
    "FiberPoleError",
    "szego_via_repr",
    "garabedian_via_repr",
    "lambda_unimodular",
    "normalized_ahlfors",
    "normalized_ahlfors_direct",
    "normalized_ahlfors_derivative_diag",
    "caratheodory_density",
    "caratheodory_density_repr",
    "transform_kernel_check",
]

FIBER_GUARD = 1e-6


class FiberPoleError(ValueError):
    """``z`` lies in the ``f_a``-fiber of ``w``: the reconstruction formula is singular."""


@dataclass(frozen=True, eq=False)
class ReprEvaluator:
    basis: AhlforsBasis

    @property
    def grid(self) -> BoundaryGrid:
        return self.basis.grid

    @cached_property
    def fa(self) -> AhlforsMap:
        return ahlfors(self.grid, self.basis.a)

    @cached_property
    def fb(self) -> AhlforsMap:
        return ahlfors(self.grid, self.basis.b)

    @cached_property
    def s_quot(self) -> np.ndarray:
        """``S(z, a_i) / S(z, a)`` at boundary nodes."""
        S = self.basis.S_traces
        return S / S[:, :1]

    @cached_property
    def l_quot(self) -> np.ndarray:
        """``L(z, a_i) / S(z, a)`` at boundary nodes."""
        return self.basis.L_traces / self.basis.S_traces[:, :1]

    def reflection_residual(self) -> float:
        """Max deviation of the boundary reflection relations of the quotients."""
        S, L = self.basis.S_traces, self.basis.L_traces
        r1 = np.abs(self.s_quot - np.conj(L / L[:, :1])).max()
        r2 = np.abs(self.l_quot - np.conj(S / L[:, :1])).max()
        return float(max(r1, r2))


def _as_ev(ev) -> ReprEvaluator:
    return ev if isinstance(ev, ReprEvaluator) else ReprEvaluator(ev)


def szego_via_repr(ev, z, w):
    """``S(z, w) = sum c_ij S(z, a_i) conj S(w, a_j) / (1 - f_a(z) conj f_a(w))``."""
    ev = _as_ev(ev)
    B = ev.basis
    Sz, Sw = B.S_all(z), B.S_all(w)
    fz, fw = ev.fa(z), ev.fa(w)
    num = np.einsum("...i,ij,...j->...", Sz, B.c, np.conj(Sw))
    return num / (1 - fz * np.conj(fw))


def garabedian_via_repr(ev, z, w):
    """``L(z, w) = f_a(w)/(f_a(z) - f_a(w)) sum c_ij S(z, a_i) L(w, a_j)``."""
    ev = _as_ev(ev)
    B = ev.basis
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w[..., None] - B.points) < 1e-12):
        raise ValueError("w coincides with a base point a_j; use the limit form")
    fz, fw = ev.fa(z), ev.fa(w)
    if np.any(np.abs(fz - fw) <= FIBER_GUARD):
        raise FiberPoleError("z lies in the f_a-fiber of w (|f_a(z) - f_a(w)| <= 1e-6)")
    Sz, Lw = B.S_all(z), B.L_all(w)
    return fw / (fz - fw) * np.einsum("...i,ij,...j->...", Sz, B.c, Lw)


def lambda_unimodular(ev, w, threshold: float = 1e-10):
    """``lambda(w) = conj S(w, a) / S(w, a)``."""
    ev = _as_ev(ev)
    S = ev.basis.S_all(w)[..., 0]
    if np.any(np.abs(S) < threshold * np.abs(ev.basis.S_traces[:, 0]).max()):
        raise ValueError("w at/near a zero of S(., a)")
    return np.conj(S) / S


def _ratio(ev, z, w):
    # second quotient of the composite formula, numerator and denominator
    # divided by S(z, a) S(w, a) and multiplied by conj S(w, a) / conj S(w, a)
    B = ev.basis
    Sz, Sw, Lw = B.S_all(z), B.S_all(w), B.L_all(w)
    sz = Sz / Sz[..., :1]
    num = np.einsum("...i,ij,...j->...", sz, B.c, np.conj(Sw) / np.conj(Sw[..., :1]))
    den = np.einsum("...i,ij,...j->...", sz, B.c, Lw / Sw[..., :1])
    return num / den


def normalized_ahlfors(ev, z, w):
    """``F(z, w) = f_w(z) / lambda(w)`` from the composite formula in ``f_a`` and the basis kernels."""
    ev = _as_ev(ev)
    fz, fw = ev.fa(z), ev.fa(w)
    pre = (fz - fw) / (fw * (1 - fz * np.conj(fw)))
    # the trailing conj S(w,a)/S(w,a) of f_w(z) cancels against lambda(w)
    return pre * _ratio(ev, z, w)


def normalized_ahlfors_direct(grid: BoundaryGrid, a, z, w):
    """``F(z, w)`` from an independent Kerzman-Stein solve at ``w``."""
    S_wa = szego_solution(grid, a).szego(w)
    lam = np.conj(S_wa) / S_wa
    return ahlfors(grid, w)(z) / lam


def normalized_ahlfors_derivative_diag(ev, w):
    """``d/dz F(z, w)`` at ``z = w`` from the composite formula."""
    ev = _as_ev(ev)
    fw = ev.fa(w)
    dfw = ev.fa.derivative(w)
    return dfw / (fw * (1 - np.abs(fw) ** 2)) * _ratio(ev, w, w)


def caratheodory_density(grid: BoundaryGrid, z):
    """``rho(z) = f_z'(z)`` from a Kerzman-Stein solve at ``z``."""
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        return float(ahlfors(grid, complex(z)).derivative(complex(z)).real)
    return np.array([caratheodory_density(grid, v) for v in z.ravel()]).reshape(z.shape)


def caratheodory_density_repr(ev, z):
    """``rho(z) = |d/dz F(z, w)|_{w=z}|`` through the representation formula."""
    return np.abs(normalized_ahlfors_derivative_diag(ev, z))


def _is_unit_disc(domain: DomainSpec) -> bool:
    c = domain.outer.fourier_coeffs
    k = domain.outer.degree
    ref = np.zeros_like(c)
    ref[k + 1] = 1.0
    return not domain.inners and np.allclose(c, ref, atol=1e-15, rtol=0)


def transform_kernel_check(domain: DomainSpec, phi, nodes: int = 256, pairs: int = 10, seed: int = 3) -> dict:
    """Check ``S = sqrt(phi'(z)) S_img(phi z, phi w) conj sqrt(phi'(w))`` and the ``L`` analogue.

    ``phi`` is a list of polynomial coefficients ``a_0, a_1, ...``.  The
    image domain is re-fitted exactly as a Fourier series; kernels are
    solved independently on both domains.  On the unit disc the closed
    forms replace the source-side solve.
    """
    phi = np.asarray(phi, dtype=complex)
    dphi = np.polynomial.polynomial.polyder(phi)
    grid = boundary_grid(domain, nodes)
    fine = grid.refined(4)
    dvals = np.polynomial.polynomial.polyval(fine.nodes, dphi)
    if np.abs(dvals).min() <= 1e-10:
        raise GeometryError("phi' vanishes on the boundary")
    if dvals.real.min() <= 0:
        # Re phi' > 0 on the boundary gives Re phi' > 0 inside (minimum principle),
        # so the principal square root is single valued and holomorphic
        raise GeometryError("principal branch of sqrt(phi') is not continuous on the closure")
    image = DomainSpec(domain.outer.mapped(phi), tuple(c.mapped(phi) for c in domain.inners),
                       name=f"phi({domain.name})")
    bad = check_domain(image)
    if bad:
        raise GeometryError("phi is not injective on the closure: " + "; ".join(bad))
    igrid = boundary_grid(image, nodes)
    rng = np.random.default_rng(seed)
    # both solves need their points clear of the near-boundary guard
    margin = max(0.1, 4 * grid.max_spacing)
    zs = interior_samples(grid, 8 * pairs, rng, margin=margin)
    ok = igrid.distance(np.polynomial.polynomial.polyval(zs, phi)) >= 4 * igrid.max_spacing
    zs = zs[ok]
    if zs.size < 2 * pairs:
        raise GeometryError("too few sample points clear of the boundary in both domains")
    z, w = zs[:pairs], zs[pairs:2 * pairs]
    pz = np.polynomial.polynomial.polyval(z, phi)
    pw = np.polynomial.polynomial.polyval(w, phi)
    rz = np.sqrt(np.polynomial.polynomial.polyval(z, dphi))
    rw = np.sqrt(np.polynomial.polynomial.polyval(w, dphi))
    disc = _is_unit_disc(domain)
    res_S, res_L = [], []
    for k in range(pairs):
        if disc:
            S0, L0 = oracles.disc_szego(z[k], w[k]), oracles.disc_garabedian(z[k], w[k])
        else:
            sol = szego_solution(grid, w[k])
            S0, L0 = sol.szego(z[k]), sol.garabedian(z[k])
        isol = szego_solution(igrid, pw[k])
        S1 = rz[k] * isol.szego(pz[k]) * np.conj(rw[k])
        L1 = rz[k] * isol.garabedian(pz[k]) * rw[k]
        res_S.append(abs(S0 - S1))
        res_L.append(abs(L0 - L1))
    return {"identity": "transformation_law", "domain": domain.name, "phi": [[v.real, v.imag] for v in phi],
            "max_residual_S": float(max(res_S)), "max_residual_L": float(max(res_L)),
            "max_residual": float(max(max(res_S), max(res_L)))}
