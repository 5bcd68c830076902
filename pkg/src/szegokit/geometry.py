"""Real-analytic boundary curves, multiply connected domains and boundary grids.

Curves are truncated Fourier series ``z(t) = sum_k c_k exp(i k t)`` on
``[0, 2 pi)``.  The domain always lies to the left of every curve: the
outer curve runs counter-clockwise, the inner curves clockwise.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "GeometryError",
    "ParamCurve",
    "DomainSpec",
    "BoundaryGrid",
    "make_preset_domain",
    "boundary_grid",
    "winding_number",
    "check_domain",
    "domain_from_dict",
    "domain_to_dict",
    "curve_length",
]

TWO_PI = 2.0 * np.pi


class GeometryError(ValueError):
    """Raised when a curve, domain or grid violates one of its invariants."""


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """Closed curve ``z(t) = sum_{k=-K}^{K} c_k e^{ikt}``.

    ``fourier_coeffs[j]`` holds ``c_{j-K}``; the array length must be odd.
    """

    fourier_coeffs: np.ndarray
    orientation: str = "ccw"

    def __post_init__(self):
        c = np.asarray(self.fourier_coeffs, dtype=complex).ravel()
        if c.size % 2 != 1:
            raise GeometryError("fourier_coeffs must have odd length 2K+1")
        if self.orientation not in ("ccw", "cw"):
            raise GeometryError(f"orientation must be 'ccw' or 'cw', got {self.orientation!r}")
        c.setflags(write=False)
        object.__setattr__(self, "fourier_coeffs", c)

    @property
    def degree(self) -> int:
        return (self.fourier_coeffs.size - 1) // 2

    @cached_property
    def _modes(self) -> np.ndarray:
        return np.arange(-self.degree, self.degree + 1)

    def _series(self, t, power: int) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = self._modes
        phase = np.exp(1j * np.multiply.outer(t, k))
        return phase @ (self.fourier_coeffs * (1j * k) ** power)

    def z(self, t) -> np.ndarray:
        return self._series(t, 0)

    def dz(self, t) -> np.ndarray:
        return self._series(t, 1)

    def d2z(self, t) -> np.ndarray:
        return self._series(t, 2)

    def signed_area(self) -> float:
        """Area enclosed, positive for counter-clockwise traversal."""
        k = self._modes
        return float(np.pi * np.sum(k * np.abs(self.fourier_coeffs) ** 2))

    def centroid(self) -> complex:
        """Centroid of the enclosed region (Green's theorem)."""
        t = np.linspace(0.0, TWO_PI, 512, endpoint=False)
        z, dz = self.z(t), self.dz(t)
        x, y, dx, dy = z.real, z.imag, dz.real, dz.imag
        area = np.mean(x * dy)
        return complex(np.mean(0.5 * x * x * dy) / area, -np.mean(0.5 * y * y * dx) / area)

    def mapped(self, poly_coeffs, orientation: str | None = None) -> "ParamCurve":
        """Image of the curve under the polynomial ``sum_j a_j z^j`` (exact Fourier re-fit)."""
        a = np.asarray(poly_coeffs, dtype=complex)
        deg = (a.size - 1) * self.degree
        m = 4 * deg + 4
        t = np.arange(m) * TWO_PI / m
        w = np.polynomial.polynomial.polyval(self.z(t), a)
        ch = np.fft.fft(w) / m
        k = np.arange(-deg, deg + 1)
        return ParamCurve(ch[k % m], orientation or self.orientation)


@dataclass(frozen=True, eq=False)
class DomainSpec:
    """Bounded domain between ``outer`` and the holes bounded by ``inners``."""

    outer: ParamCurve
    inners: tuple = ()
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "inners", tuple(self.inners))

    @property
    def connectivity(self) -> int:
        return 1 + len(self.inners)

    @property
    def curves(self) -> tuple:
        """Inner curves first, then the outer curve (``gamma_1..gamma_n``)."""
        return self.inners + (self.outer,)

    def fingerprint(self) -> str:
        payload = json.dumps(domain_to_dict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class BoundaryGrid:
    """Trapezoid-rule nodes on every boundary curve of a domain.

    Nodes are stored curve by curve in the order of ``DomainSpec.curves``
    (inner curves first, outer curve last).
    """

    domain: DomainSpec
    nodes_per_curve: int
    t: np.ndarray
    nodes: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray
    tangents: np.ndarray
    weights: np.ndarray
    curve_index: np.ndarray
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @property
    def dt(self) -> float:
        return TWO_PI / self.nodes_per_curve

    @property
    def speed(self) -> np.ndarray:
        return np.abs(self.dz)

    @cached_property
    def curvature(self) -> np.ndarray:
        """Signed curvature with respect to the traversal direction."""
        return np.imag(np.conj(self.dz) * self.d2z) / self.speed ** 3

    @cached_property
    def cauchy_weights(self) -> np.ndarray:
        """``dz_k / (2 pi i)`` for the trapezoid Cauchy integral."""
        return self.dz * self.dt / (2j * np.pi)

    @cached_property
    def spacing(self) -> np.ndarray:
        return self.weights

    @property
    def max_spacing(self) -> float:
        return float(self.weights.max())

    def curve_slice(self, j: int) -> slice:
        m = self.nodes_per_curve
        return slice(j * m, (j + 1) * m)

    def per_curve(self, values) -> np.ndarray:
        """Reshape node-aligned samples to ``(n_curves, nodes_per_curve, ...)``."""
        values = np.asarray(values)
        return values.reshape((self.domain.connectivity, self.nodes_per_curve) + values.shape[1:])

    def d_dt(self, values) -> np.ndarray:
        """Spectral derivative in ``t`` of node samples, curve by curve."""
        m = self.nodes_per_curve
        v = self.per_curve(values)
        k = np.fft.fftfreq(m, 1.0 / m)
        k[m // 2] = 0.0
        shape = (1, m) + (1,) * (v.ndim - 2)
        out = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(v, axis=1), axis=1)
        if not np.iscomplexobj(values):
            out = out.real
        return out.reshape(np.shape(values))

    def d_dz(self, values) -> np.ndarray:
        """Derivative along the boundary of the trace of a holomorphic function."""
        return self.d_dt(values) / self.dz if np.ndim(values) == 1 else (
            self.d_dt(values) / self.dz[:, None])

    def refined(self, factor: int) -> "BoundaryGrid":
        if factor == 1:
            return self
        return _refined_grid(self, factor)

    def interpolate(self, values, factor: int) -> np.ndarray:
        """Trigonometric interpolation of node samples onto ``refined(factor)``."""
        if factor == 1:
            return np.asarray(values)
        m = self.nodes_per_curve
        v = self.per_curve(values)
        fh = np.fft.fft(v, axis=1)
        big = m * factor
        out_h = np.zeros((v.shape[0], big) + v.shape[2:], dtype=complex)
        half = m // 2
        out_h[:, :half] = fh[:, :half]
        out_h[:, big - half + 1:] = fh[:, half + 1:]
        # split the Nyquist mode so real data stays real
        out_h[:, half] = 0.5 * fh[:, half]
        out_h[:, big - half] = 0.5 * fh[:, half]
        out = np.fft.ifft(out_h, axis=1) * factor
        if not np.iscomplexobj(values):
            out = out.real
        return out.reshape((v.shape[0] * big,) + v.shape[2:])

    def distance(self, z) -> np.ndarray:
        """Approximate distance from points ``z`` to the boundary."""
        fine = self.refined(4).nodes
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        out = np.empty(z.shape, dtype=float)
        for s in range(0, z.size, 256):
            block = z.ravel()[s:s + 256]
            out.ravel()[s:s + 256] = np.abs(block[:, None] - fine[None, :]).min(axis=1)
        return out

    def contains(self, z) -> np.ndarray:
        """True where ``z`` lies inside the domain (winding number test)."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        fine = self.refined(4)
        c = fine.cauchy_weights
        total = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for s in range(0, z.size, 256):
                block = z.ravel()[s:s + 256]
                total.ravel()[s:s + 256] = (c[None, :] / (fine.nodes[None, :] - block[:, None])).sum(axis=1)
        # a point on a node gives a non-finite sum: it is on the boundary, not inside
        return np.isfinite(total) & (np.abs(total - 1.0) < 0.25)


def _refined_grid(grid: BoundaryGrid, factor: int) -> BoundaryGrid:
    key = ("refined", factor)
    if key not in grid.cache:
        grid.cache[key] = boundary_grid(grid.domain, grid.nodes_per_curve * factor, _check=False)
    return grid.cache[key]


def curve_length(curve: ParamCurve) -> float:
    """Arclength by adaptive Gauss-Kronrod quadrature of ``|z'(t)|``."""
    from scipy.integrate import quad

    total = 0.0
    # split so each piece is resolved well before adaptivity kicks in
    edges = np.linspace(0.0, TWO_PI, 9)
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = quad(lambda t: abs(curve.dz(t)), lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return total


def boundary_grid(domain: DomainSpec, nodes_per_curve: int, _check: bool = True) -> BoundaryGrid:
    """Equispaced-in-``t`` nodes with unit tangents and arclength weights."""
    m = int(nodes_per_curve)
    if _check and (m < 16 or m % 2):
        raise GeometryError(f"nodes_per_curve must be even and >= 16, got {m}")
    t = np.arange(m) * TWO_PI / m
    parts = {"t": [], "z": [], "dz": [], "d2z": [], "idx": []}
    for j, curve in enumerate(domain.curves):
        dz = curve.dz(t)
        bad = np.abs(dz) <= 1e-12 * max(1.0, np.abs(curve.fourier_coeffs).max())
        if np.any(bad):
            tb = t[np.argmax(bad)]
            raise GeometryError(f"degenerate parameterization: |z'(t)| = 0 on curve {j} at t = {tb:.6g}")
        parts["t"].append(t)
        parts["z"].append(curve.z(t))
        parts["dz"].append(dz)
        parts["d2z"].append(curve.d2z(t))
        parts["idx"].append(np.full(m, j))
    dz = np.concatenate(parts["dz"])
    speed = np.abs(dz)
    arrays = dict(
        t=np.concatenate(parts["t"]),
        nodes=np.concatenate(parts["z"]),
        dz=dz,
        d2z=np.concatenate(parts["d2z"]),
        tangents=dz / speed,
        weights=speed * (TWO_PI / m),
        curve_index=np.concatenate(parts["idx"]),
    )
    for a in arrays.values():
        a.setflags(write=False)
    return BoundaryGrid(domain=domain, nodes_per_curve=m, **arrays)


def winding_number(curve: ParamCurve, point: complex, nodes: int = 512):
    """Winding number of ``curve`` around ``point``.

    Returns ``(k, residual)`` where ``residual`` is the distance of the raw
    contour integral from the integer ``k``.
    """
    t = np.arange(nodes) * TWO_PI / nodes
    z = curve.z(t)
    h = np.abs(curve.dz(t)).max() * TWO_PI / nodes
    if np.abs(z - point).min() < h:
        raise GeometryError("point too close to boundary for a winding number")
    raw = np.mean(curve.dz(t) / (z - point)) / 1j
    k = int(np.rint(raw.real))
    return k, float(abs(raw - k))


def _min_self_distance(curve: ParamCurve, m: int) -> float:
    t = np.arange(m) * TWO_PI / m
    z = curve.z(t)
    d = np.abs(z[:, None] - z[None, :])
    idx = np.arange(m)
    gap = np.abs(idx[:, None] - idx[None, :])
    gap = np.minimum(gap, m - gap)
    # neighbours within m/16 parameter steps are allowed to be close
    far = gap > m // 16
    return float(d[far].min())


def check_domain(domain: DomainSpec, nodes_per_curve: int = 64) -> list:
    """Return the list of violated invariants (empty when valid)."""
    problems = []
    m8 = 8 * nodes_per_curve
    for j, curve in enumerate(domain.curves):
        label = "outer" if curve is domain.outer else f"inner {j}"
        t = np.arange(m8) * TWO_PI / m8
        if np.abs(curve.dz(t)).min() <= 1e-12:
            problems.append(f"{label}: degenerate parameterization")
            continue
        want = 1 if curve.orientation == "ccw" else -1
        if np.sign(curve.signed_area()) != want:
            problems.append(f"{label}: declared orientation {curve.orientation} does not match traversal")
        # scale by the curve's radius: the enclosed area can vanish for a self-crossing curve
        zt = curve.z(t)
        scale = np.abs(zt - zt.mean()).max()
        if _min_self_distance(curve, m8) < 1e-3 * scale:
            problems.append(f"{label}: curve is not simple")
    if domain.outer.orientation != "ccw":
        problems.append("outer: must be counter-clockwise")
    for j, inner in enumerate(domain.inners):
        if inner.orientation != "cw":
            problems.append(f"inner {j}: must be clockwise")
        t = np.arange(m8) * TWO_PI / m8
        pts = inner.z(t)
        ref = inner.centroid()
        try:
            if winding_number(domain.outer, ref)[0] != 1:
                problems.append(f"inner {j}: not inside the outer curve")
        except GeometryError:
            problems.append(f"inner {j}: touches the outer curve")
        outer_pts = domain.outer.z(t)
        if np.abs(pts[:, None] - outer_pts[None, :]).min() <= 0:
            problems.append(f"inner {j}: touches the outer curve")
        sample = pts[:: max(1, m8 // 64)]
        inside = [winding_number(domain.outer, p, nodes=m8)[0] for p in sample
                  if np.abs(outer_pts - p).min() > TWO_PI / m8 * np.abs(domain.outer.dz(t)).max()]
        if len(inside) < len(sample) or any(k != 1 for k in inside):
            problems.append(f"inner {j}: not strictly inside the outer curve")
        for i in range(j):
            other = domain.inners[i].z(t)
            if np.abs(pts[:, None] - other[None, :]).min() <= 1e-3:
                problems.append(f"inners {i} and {j}: closures intersect")
            elif winding_number(domain.inners[i], ref)[0] != 0:
                problems.append(f"inners {i} and {j}: nested")
    return problems


def _circle(center: complex, radius: float, orientation: str, extra: dict | None = None) -> ParamCurve:
    extra = extra or {}
    kmax = max([1] + [abs(k) for k in extra])
    c = np.zeros(2 * kmax + 1, dtype=complex)
    c[kmax] = center
    c[kmax + (1 if orientation == "ccw" else -1)] = radius
    for k, v in extra.items():
        c[kmax + k] += v
    return ParamCurve(c, orientation)


def make_preset_domain(kind: str, params=None) -> DomainSpec:
    """Build one of the preset domains.

    ``disc``    params ``[radius]`` (default 1).
    ``annulus`` params ``[rho]``, the inner radius, ``0 < rho < 1``.
    ``blob3``   params ``[outer_amp, inner_amp]`` perturbation amplitudes
                (defaults ``[0.05, 0.1]``); a 3-connected smooth domain.
    """
    params = list(params or [])
    if kind == "disc":
        r = float(params[0]) if params else 1.0
        if not r > 0:
            raise GeometryError("disc: radius must be > 0")
        return DomainSpec(_circle(0.0, r, "ccw"), (), name=f"disc(r={r:g})")
    if kind == "annulus":
        rho = float(params[0]) if params else 0.5
        if not 0 < rho < 1:
            raise GeometryError("annulus: need 0 < rho < 1 (inner curve must lie strictly inside outer)")
        return DomainSpec(_circle(0.0, 1.0, "ccw"), (_circle(0.0, rho, "cw"),), name=f"annulus(rho={rho:g})")
    if kind == "blob3":
        eo = float(params[0]) if len(params) > 0 else 0.05
        ei = float(params[1]) if len(params) > 1 else 0.1
        # |z'| > 0 needs 2*eo < 1 and 3*ei < 1; keep far from that edge
        if not (0 <= eo <= 0.15 and 0 <= ei <= 0.2):
            raise GeometryError("blob3: perturbation amplitudes too large for a simple boundary "
                                "(need 0 <= outer_amp <= 0.15, 0 <= inner_amp <= 0.2)")
        outer = _circle(0.0, 1.0, "ccw", {-2: eo})
        r1, r2 = 0.2, 0.15
        in1 = _circle(-0.45 + 0.1j, r1, "cw", {2: r1 * ei})
        in2 = _circle(0.4 - 0.15j, r2, "cw", {-3: r2 * ei})
        dom = DomainSpec(outer, (in1, in2), name=f"blob3({eo:g},{ei:g})")
        bad = check_domain(dom)
        if bad:
            raise GeometryError("blob3: " + "; ".join(bad))
        return dom
    raise GeometryError(f"unknown preset kind {kind!r}")


def _curve_from_dict(d: dict, orientation: str) -> ParamCurve:
    coeffs = [complex(re, im) for re, im in d["fourier"]]
    return ParamCurve(np.array(coeffs), d.get("orientation", orientation))


def domain_from_dict(cfg: dict) -> DomainSpec:
    """Domain from the JSON layout ``{"outer": {"fourier": [[re, im], ...]}, "inners": [...]}``.

    ``fourier`` lists ``c_{-K} .. c_K``.  A ``preset`` entry
    ``{"kind": ..., "params": [...]}`` takes precedence over explicit curves.
    """
    preset = cfg.get("preset")
    if preset:
        if isinstance(preset, str):
            return make_preset_domain(preset, cfg.get("params"))
        return make_preset_domain(preset["kind"], preset.get("params"))
    if "outer" not in cfg:
        raise GeometryError("domain config needs 'outer' or 'preset'")
    outer = _curve_from_dict(cfg["outer"], "ccw")
    inners = tuple(_curve_from_dict(c, "cw") for c in cfg.get("inners", []))
    dom = DomainSpec(outer, inners, name=cfg.get("name", "custom"))
    bad = check_domain(dom)
    if bad:
        raise GeometryError("; ".join(bad))
    return dom


def domain_to_dict(domain: DomainSpec) -> dict:
    def curve(c: ParamCurve) -> dict:
        return {"fourier": [[float(v.real), float(v.imag)] for v in c.fourier_coeffs],
                "orientation": c.orientation}

    return {"name": domain.name, "outer": curve(domain.outer),
            "inners": [curve(c) for c in domain.inners]}
