"""Polynomial reflection and proper maps ``q(f_a, f_b) / p(f_a, f_b)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ahlfors import ahlfors, interior_samples
from .szego import AhlforsBasis, boundary_zero_count

__all__ = [
    "BivarPoly",
    "ConstructionError",
    "reflect_polynomial",
    "modulus_check",
    "zero_free_margin",
    "ProperMap",
    "proper_from_pair",
]


class ConstructionError(ValueError):
    """The polynomial vanishes where the construction needs it zero free."""


@dataclass(frozen=True, eq=False)
class BivarPoly:
    """``sum_{j,k} coeffs[j, k] z^j w^k`` with degrees ``N`` in ``z`` and ``M`` in ``w``.

    ``N`` and ``M`` are the stated bidegree; they may exceed the highest
    nonzero power (the reflection depends on the stated bidegree).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        if c.ndim != 2 or c.size == 0:
            raise ValueError("coefficient matrix must be two dimensional and nonempty")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_list(cls, rows) -> "BivarPoly":
        """Rows of ``[re, im]`` pairs or plain numbers, indexed ``[j][k]``."""
        arr = np.asarray(rows, dtype=float if _is_pairs(rows) else complex)
        if _is_pairs(rows):
            arr = arr[..., 0] + 1j * arr[..., 1]
        return cls(arr)

    def to_list(self) -> list:
        return [[[v.real, v.imag] for v in row] for row in self.coeffs]

    @property
    def N(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def M(self) -> int:
        return self.coeffs.shape[1] - 1

    def __call__(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return np.polynomial.polynomial.polyval2d(z, w, self.coeffs)

    def dz(self) -> "BivarPoly":
        return BivarPoly(np.polynomial.polynomial.polyder(self.coeffs, axis=0)) if self.N else BivarPoly([[0]])

    def dw(self) -> "BivarPoly":
        return BivarPoly(np.polynomial.polynomial.polyder(self.coeffs, axis=1)) if self.M else BivarPoly([[0]])


def _is_pairs(rows) -> bool:
    arr = np.asarray(rows, dtype=object)
    return arr.ndim == 3 and arr.shape[-1] == 2


def reflect_polynomial(p: BivarPoly) -> BivarPoly:
    """``q(z, w) = z^N w^M conj p(1/conj z, 1/conj w)``, i.e. ``q_jk = conj p_{N-j, M-k}``."""
    return BivarPoly(np.conj(p.coeffs[::-1, ::-1]))


def _torus(samples: int):
    t = 2 * np.pi * np.arange(samples) / samples
    e = np.exp(1j * t)
    return np.meshgrid(e, e, indexing="ij")


def zero_free_margin(p: BivarPoly, samples: int = 64) -> float:
    """``min |p|`` over a dense sample of the closed bidisc (radii and angles)."""
    t = np.exp(2j * np.pi * np.arange(samples) / samples)
    r = np.linspace(0, 1, 9)
    z = (r[:, None] * t[None, :]).ravel()
    Z, W = np.meshgrid(z, z, indexing="ij")
    return float(np.abs(p(Z, W)).min())


def modulus_check(p: BivarPoly, q: BivarPoly | None = None, samples: int = 100) -> float:
    """``max | |q/p| - 1 |`` on a ``samples x samples`` grid of the torus."""
    q = reflect_polynomial(p) if q is None else q
    Z, W = _torus(samples)
    pv = p(Z, W)
    if np.abs(pv).min() <= 1e-6 * max(1.0, np.abs(p.coeffs).max()):
        raise ConstructionError("p vanishes on the distinguished boundary sample")
    return float(np.abs(np.abs(q(Z, W) / pv) - 1).max())


@dataclass(frozen=True, eq=False)
class ProperMap:
    """``g = q(f_a, f_b) / p(f_a, f_b)`` on the domain of ``basis``."""

    basis: AhlforsBasis
    p: BivarPoly
    q: BivarPoly

    @property
    def grid(self):
        return self.basis.grid

    def _maps(self):
        return ahlfors(self.grid, self.basis.a), ahlfors(self.grid, self.basis.b)

    def trace(self) -> np.ndarray:
        fa, fb = self._maps()
        return self.q(fa.trace, fb.trace) / self.p(fa.trace, fb.trace)

    def derivative_trace(self) -> np.ndarray:
        fa, fb = self._maps()
        x, y = fa.trace, fb.trace
        dx, dy = fa.derivative_trace, fb.derivative_trace
        P, Q = self.p(x, y), self.q(x, y)
        dP = self.p.dz()(x, y) * dx + self.p.dw()(x, y) * dy
        dQ = self.q.dz()(x, y) * dx + self.q.dw()(x, y) * dy
        return (dQ * P - Q * dP) / P ** 2

    def __call__(self, z):
        fa, fb = self._maps()
        x, y = fa(z), fb(z)
        return self.q(x, y) / self.p(x, y)

    def boundary_modulus_deviation(self) -> float:
        return float(np.abs(np.abs(self.trace()) - 1).max())

    def valence(self, value=0.0, upsample: int = 4) -> tuple[int, float]:
        """Number of solutions of ``g = value`` by the argument principle (count, residual).

        The traces of ``f_a``, ``f_b`` and their derivatives are
        interpolated onto an ``upsample`` times finer boundary first, which
        resolves preimages of ``value`` lying close to the boundary.
        """
        g = self.grid
        fa, fb = self._maps()
        fine = g.refined(upsample)
        x, y = g.interpolate(fa.trace, upsample), g.interpolate(fb.trace, upsample)
        dx = g.interpolate(fa.derivative_trace, upsample)
        dy = g.interpolate(fb.derivative_trace, upsample)
        P, Q = self.p(x, y), self.q(x, y)
        dP = self.p.dz()(x, y) * dx + self.p.dw()(x, y) * dy
        dQ = self.q.dz()(x, y) * dx + self.q.dw()(x, y) * dy
        return boundary_zero_count(fine, Q / P - value, (dQ * P - Q * dP) / P ** 2)

    def report(self, values=(0.0, 0.3 + 0.2j, -0.4)) -> dict:
        val = {str(complex(c)): self.valence(c) for c in values}
        counts = [v[0] for v in val.values()]
        dev = self.boundary_modulus_deviation()
        tr = self.trace()
        spread = float(np.abs(tr - tr[0]).max())
        return {"boundary_modulus_deviation": dev, "valence": {k: v[0] for k, v in val.items()},
                "valence_residual": {k: v[1] for k, v in val.items()},
                "valence_consistent": len(set(counts)) == 1, "constant": spread < 1e-10,
                "ok": bool(dev <= 1e-8 and len(set(counts)) == 1 and spread >= 1e-10)}


def proper_from_pair(p: BivarPoly, basis: AhlforsBasis, z=None, samples: int = 64, seed: int = 17):
    """Build the proper map for ``p`` over the primitive pair of ``basis``.

    Zero-freeness of ``p`` on ``(f_a, f_b)(closure)`` is checked on the
    boundary nodes and on ``samples`` interior points (margin ``1e-6``),
    and interior zeros are counted by the argument principle.
    Returns the :class:`ProperMap`, or its values at ``z`` when given.
    """
    g = basis.grid
    fa, fb = ahlfors(g, basis.a), ahlfors(g, basis.b)
    rng = np.random.default_rng(seed)
    pts = interior_samples(g, samples, rng, margin=0.02)
    scale = max(1.0, np.abs(p.coeffs).max())
    m_bdry = np.abs(p(fa.trace, fb.trace)).min()
    m_int = np.abs(p(fa(pts), fb(pts))).min()
    if min(m_bdry, m_int) <= 1e-6 * scale:
        raise ConstructionError(f"p vanishes on the image curve of (f_a, f_b) (min |p| = {min(m_bdry, m_int):.1e})")
    # p(f_a, f_b) is holomorphic, so the argument principle counts its interior zeros
    x, y = fa.trace, fb.trace
    dP = p.dz()(x, y) * fa.derivative_trace + p.dw()(x, y) * fb.derivative_trace
    zeros, _ = boundary_zero_count(g, p(x, y), dP)
    if zeros != 0:
        raise ConstructionError(f"p(f_a, f_b) has {zeros} zero(s) inside the domain")
    g_map = ProperMap(basis, p, reflect_polynomial(p))
    tr = g_map.trace()
    if np.abs(tr - tr[0]).max() < 1e-10:
        raise ConstructionError("q/p is constant on the image: not a proper map")
    return g_map if z is None else g_map(z)
