"""Green's function, harmonic measures, Poisson and Bergman kernels.

Also the Green's-derivative representation through Szego/Garabedian
kernels, its Mobius-log linearization and the Bergman factorization
through an Ahlfors map.

Sign conventions: ``G(z, w) = ln|z - w| + h`` is negative inside and
vanishes on the boundary; ``p(z, w) = -(i/pi) G_w(z, w) T(w)`` is the
(nonnegative, unit-mass) Poisson kernel; the Bergman kernel is
``K(z, w) = (2/pi) d^2 G / dz d conj(w)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .ahlfors import AhlforsMap, ahlfors, interior_samples
from .bie import HarmonicEvaluator, SolverError, solve_dirichlet
from .geometry import BoundaryGrid
from .szego import AhlforsBasis, szego_solution, szego_solutions

__all__ = [
    "PotentialSystem",
    "SeparabilityReport",
    "greens_function",
    "greens_w_derivative",
    "harmonic_measures",
    "lambda_j",
    "reproducing_total",
    "u_basis",
    "greens_w_representation",
    "principal_term",
    "principal_term_factored",
    "poisson_kernel",
    "mobius_log",
    "mobius_log_wderiv",
    "linearization_check",
    "bergman_kernel",
    "bergman_factor_rank",
    "bergman_factor_fit",
    "nu_limit",
    "lambda_near_boundary",
    "interpolation_points",
    "numerical_rank",
]


def numerical_rank(sv: np.ndarray, tail: float = 1e-6) -> int:
    sv = np.asarray(sv)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv / sv[0] > tail))


@dataclass(eq=False)
class PotentialSystem:
    """Harmonic-function machinery on one boundary grid (solves are cached)."""

    grid: BoundaryGrid
    basis: AhlforsBasis | None = None
    _green: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.grid.domain.connectivity

    # Green's function ---------------------------------------------------

    def green_correction(self, w) -> HarmonicEvaluator:
        """Harmonic ``h_w`` with boundary values ``-ln|zeta - w|``."""
        w = complex(w)
        if w not in self._green:
            g = self.grid
            self._green[w] = solve_dirichlet(g, -np.log(np.abs(g.nodes - w)))
        return self._green[w]

    def green_corrections(self, ws) -> HarmonicEvaluator:
        ws = np.atleast_1d(np.asarray(ws, dtype=complex))
        g = self.grid
        return solve_dirichlet(g, -np.log(np.abs(g.nodes[:, None] - ws[None, :])))

    def _node(self, w):
        d = np.abs(self.grid.nodes - w)
        k = int(np.argmin(d))
        return k if d[k] <= 1e-13 * max(1.0, abs(w)) else -1

    @cached_property
    def harmonic_measure_evaluator(self) -> HarmonicEvaluator:
        """``omega_1..omega_{n-1}`` (one column per inner curve)."""
        g = self.grid
        data = np.stack([(g.curve_index == j).astype(float) for j in range(self.n - 1)], axis=1)
        return solve_dirichlet(g, data.reshape(g.size, self.n - 1))

    @cached_property
    def Fprime_traces(self) -> np.ndarray:
        """Boundary traces of ``F_j' = 2 d omega_j / dz``."""
        return self.harmonic_measure_evaluator.holomorphic_trace()

    @cached_property
    def period_matrix(self) -> np.ndarray:
        """``P[k, j] = int_{gamma_k} F_j'(w) dw`` over the inner curves."""
        g = self.grid
        F = self.Fprime_traces
        P = np.empty((self.n - 1, self.n - 1), dtype=complex)
        for k in range(self.n - 1):
            sl = g.curve_slice(k)
            P[k] = (g.dz[sl, None] * F[sl]).sum(axis=0) * g.dt
        if np.linalg.cond(P) > 1e12:
            raise SolverError("singular period matrix")
        return P

    @cached_property
    def u_change(self) -> np.ndarray:
        return np.linalg.inv(self.period_matrix)

    @cached_property
    def u_traces(self) -> np.ndarray:
        return self.Fprime_traces @ self.u_change

    def u_values(self, w) -> np.ndarray:
        """``u_j(w)`` at interior points or boundary nodes, trailing axis ``j``."""
        w = np.asarray(w, dtype=complex)
        if w.ndim == 0 and self._node(complex(w)) >= 0:
            return self.u_traces[self._node(complex(w))]
        return 2 * self.harmonic_measure_evaluator.dz(w) @ self.u_change

    def omega(self, z) -> np.ndarray:
        return self.harmonic_measure_evaluator(z)

    def lam(self, z) -> np.ndarray:
        return lambda_j(self, z)


def greens_function(sys: PotentialSystem, z, w):
    """``G(z, w) = ln|z - w| + h_w(z)``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == w):
        raise ZeroDivisionError("G(z, w) has a logarithmic pole at z = w")
    return np.log(np.abs(z - w)) + sys.green_correction(w)(z)


def greens_w_derivative(sys: PotentialSystem, z, w):
    """``dG/dw (z, w)`` for interior ``z`` and interior or boundary-node ``w``.

    Uses the symmetry ``G(z, w) = G(w, z)``: the correction ``h_z`` is
    smooth up to the boundary, so ``dG/dw = 1/(2(w - z)) + dh_z/dw``.
    """
    z = complex(z)
    w = np.asarray(w, dtype=complex)
    if np.any(w == z):
        raise ZeroDivisionError("G_w(z, w) has a pole at w = z")
    h = sys.green_correction(z)
    pole = 0.5 / (w - z)
    if w.ndim == 0:
        k = sys._node(complex(w))
        if k >= 0:
            return pole + 0.5 * _holo_trace(sys, z)[k]
        return pole + h.dz(w)
    flat = w.ravel()
    idx = np.array([sys._node(v) for v in flat])
    out = np.empty(flat.shape, dtype=complex)
    on = idx >= 0
    if np.any(on):
        out[on] = 0.5 * _holo_trace(sys, z)[idx[on]]
    if np.any(~on):
        out[~on] = h.dz(flat[~on])
    return pole + out.reshape(w.shape)


def _holo_trace(sys, z):
    """Boundary trace of ``2 dh_z/dz``.

    The data ``-ln|zeta - z|`` has Fourier modes decaying like
    ``exp(-pi dist / spacing)``, so the spectral derivative is taken on an
    upsampled boundary (at least 12 spacings from ``z``) and restricted back
    to the original nodes.
    """
    key = ("holo", complex(z))
    if key not in sys._green:
        g = sys.grid
        dist = float(g.distance(complex(z))[0])
        factor = 1
        while factor < 16 and g.max_spacing / factor > dist / 12:
            factor *= 2
        if factor == 1:
            sys._green[key] = sys.green_correction(z).holomorphic_trace()
        else:
            gf = g.refined(factor)
            fine = solve_dirichlet(gf, -np.log(np.abs(gf.nodes - complex(z)))).holomorphic_trace()
            sys._green[key] = gf.per_curve(fine)[:, ::factor].reshape(g.size)
    return sys._green[key]


def harmonic_measures(sys: PotentialSystem, z) -> np.ndarray:
    return sys.omega(z)


def lambda_j(sys: PotentialSystem, z) -> np.ndarray:
    """``lambda_j(z) = int_{gamma_j} |S(w, z)|^2 ds / S(z, z)`` for the inner curves."""
    g = sys.grid
    sol = szego_solution(g, z)
    Szz = sol.szego(z).real
    dens = np.abs(sol.S.values) ** 2 * g.weights
    return np.array([dens[g.curve_slice(j)].sum() for j in range(sys.n - 1)]) / Szz


def reproducing_total(sys: PotentialSystem, z) -> float:
    """``oint |S(w, z)|^2 ds / S(z, z)`` over the whole boundary (equals 1)."""
    g = sys.grid
    sol = szego_solution(g, z)
    return float(np.sum(np.abs(sol.S.values) ** 2 * g.weights) / sol.szego(z).real)


def u_basis(sys: PotentialSystem) -> np.ndarray:
    """Boundary traces of ``u_1..u_{n-1}`` with ``int_{gamma_k} u_j dw = delta_kj``."""
    if sys.n < 2:
        raise ValueError("u basis needs a multiply connected domain")
    return sys.u_traces


def principal_term(sys: PotentialSystem, z, w):
    """``S(w, z) L(w, z) / S(z, z)`` by a direct Kerzman-Stein solve at ``z``."""
    sol = szego_solution(sys.grid, z)
    k = sys._node(complex(w))
    if k >= 0:
        Swz, Lwz = sol.S.values[k], sol.L.values[k]
    else:
        Swz, Lwz = sol.szego(w), sol.garabedian(w)
    return Swz * Lwz / sol.szego(z).real


def _T2(B: AhlforsBasis, z, w):
    Sw, Sz, Lz = B.S_all(w), B.S_all(z), B.L_all(z)
    c = B.c
    num1 = Sw @ c @ np.conj(Sz)
    num2 = Sw @ c @ Lz
    den = Sz @ c @ np.conj(Sz)
    return num1 * num2 / den


def principal_term_factored(sys: PotentialSystem, z, w):
    """``T_1(z, w) T_2(z, w)`` built from the Ahlfors basis."""
    B = sys.basis
    if np.any(np.abs(complex(z) - B.points) < 1e-12):
        raise ValueError("z coincides with a base point: T_2 path undefined")
    fa = ahlfors(sys.grid, B.a)
    fz, fw = fa(z), fa(w)
    if abs(fw - fz) <= 1e-6:
        raise ValueError("|f_a(w) - f_a(z)| <= 1e-6: T_1 path undefined")
    T1 = (1 - abs(fz) ** 2) * fz / ((fw - fz) * (1 - fw * np.conj(fz)))
    return T1 * _T2(B, z, w)


def greens_w_representation(sys: PotentialSystem, z, w, factored: bool = False):
    """``pi S(w,z) L(w,z) / S(z,z) + i pi sum_j (omega_j(z) - lambda_j(z)) u_j(w)``."""
    prin = principal_term_factored(sys, z, w) if factored else principal_term(sys, z, w)
    out = np.pi * prin
    if sys.n > 1:
        out = out + 1j * np.pi * np.sum((sys.omega(z) - lambda_j(sys, z)) * sys.u_values(w))
    return out


def poisson_kernel(sys: PotentialSystem, z, nodes=None, check: float = 1e-9):
    """``p(z, w) = -(i/pi) G_w(z, w) T(w)`` at boundary nodes (all by default)."""
    g = sys.grid
    idx = np.arange(g.size) if nodes is None else np.atleast_1d(nodes)
    z = complex(z)
    Gw = 0.5 / (g.nodes[idx] - z) + 0.5 * _holo_trace(sys, z)[idx]
    p = -1j / np.pi * Gw * g.tangents[idx]
    if check is not None and np.abs(p.imag).max() > check * max(1.0, np.abs(p.real).max()):
        raise SolverError(f"Poisson kernel not real (imag {np.abs(p.imag).max():.1e}): convention or solver failure")
    p = p.real
    return float(p[0]) if nodes is not None and np.ndim(nodes) == 0 else p


def mobius_log(f: AhlforsMap, z, w):
    """``ln|(f(z) - f(w)) / (1 - conj f(z) f(w))|``."""
    fz, fw = f(z), f(w)
    if np.any(fz == fw):
        raise ZeroDivisionError("f(z) = f(w)")
    return np.log(np.abs((fz - fw) / (1 - np.conj(fz) * fw)))


def _f_and_df(f: AhlforsMap, w):
    w = np.asarray(w, dtype=complex)
    g = f.grid
    if w.ndim == 0:
        d = np.abs(g.nodes - w)
        k = int(np.argmin(d))
        if d[k] <= 1e-13 * max(1, abs(w)):
            return f.trace[k], f.derivative_trace[k]
        return f(w), f.derivative(w)
    vals = [_f_and_df(f, v) for v in w.ravel()]
    return (np.array([v[0] for v in vals]).reshape(w.shape), np.array([v[1] for v in vals]).reshape(w.shape))


def mobius_log_wderiv(f: AhlforsMap, z, w):
    """``d/dw`` of :func:`mobius_log` in closed form."""
    fz = f(z)
    fw, dfw = _f_and_df(f, w)
    return 0.5 * dfw * (1 - np.abs(fz) ** 2) / ((fw - fz) * (1 - np.conj(fz) * fw))


def linearization_rhs(sys: PotentialSystem, z, w):
    """``2 pi f(z) T_2(z, w) / f'(w) + T_3(z, w)`` for ``f = f_a``.

    Obtained by dividing the Green's-derivative representation by
    ``d/dw`` of the Mobius log, with
    ``T_3 = 2 (f(w) - f(z))(1 - conj f(z) f(w)) / (f'(w)(1 - |f(z)|^2)) * i pi sum (omega_j - lambda_j) u_j(w)``.
    """
    B = sys.basis
    fa = ahlfors(sys.grid, B.a)
    fz = fa(z)
    fw, dfw = _f_and_df(fa, w)
    out = 2 * np.pi * fz / dfw * _T2(B, z, w)
    if sys.n > 1:
        s = 1j * np.pi * np.sum((sys.omega(z) - lambda_j(sys, z)) * sys.u_values(w))
        out = out + 2 * (fw - fz) * (1 - np.conj(fz) * fw) / (dfw * (1 - abs(fz) ** 2)) * s
    return out


def linearization_lhs(sys: PotentialSystem, z, w):
    """``(dG/dn_w) / (dL/dn_w) = G_w / L_w`` with ``L`` the Mobius log of ``f_a``."""
    fa = ahlfors(sys.grid, sys.basis.a)
    return greens_w_derivative(sys, z, w) / mobius_log_wderiv(fa, z, w)


def linearization_check(sys: PotentialSystem, zs, node_idx, rank_size: int = 24, seed: int = 5) -> dict:
    """Pointwise residual of the linearized Poisson identity and separability rank.

    ``zs`` interior points, ``node_idx`` boundary node indices; the residual
    is evaluated on all pairs.  The sampled quotient matrix uses
    ``rank_size`` interior and boundary points.
    """
    g = sys.grid
    res = []
    for z in np.atleast_1d(zs):
        for k in np.atleast_1d(node_idx):
            w = g.nodes[k]
            lhs = linearization_lhs(sys, z, w)
            rhs = linearization_rhs(sys, z, w)
            res.append(abs(lhs - rhs) / max(1.0, abs(lhs)))
    rng = np.random.default_rng(seed)
    zr = interior_samples(g, rank_size, rng, margin=max(0.1, 4 * g.max_spacing))
    kr = np.sort(rng.choice(g.size, rank_size, replace=False))
    Q = np.array([[linearization_lhs(sys, z, g.nodes[k]) for k in kr] for z in zr])
    sv = np.linalg.svd(Q, compute_uv=False)
    return {"max_residual": float(max(res)), "rms_residual": float(np.sqrt(np.mean(np.square(res)))),
            "samples": len(res), "singular_values": sv.tolist(), "rank": numerical_rank(sv)}


def bergman_kernel(sys: PotentialSystem, z, w):
    """``K(z, w)``, holomorphic in ``z``, from the Dirichlet representation of ``G``.

    ``d/d conj(w)`` is applied to the boundary data of the correction
    (giving smooth data ``-1/(2 conj(w - zeta))``) and ``d/dz`` to the
    representation, so no finite differences are involved.  The solve runs
    on an upsampled boundary when ``w`` is within 4 node spacings.
    """
    z = np.asarray(z, dtype=complex)
    ws = np.atleast_1d(np.asarray(w, dtype=complex))
    g = sys.grid
    # the data has a pole at conj-distance dist(w); keep it resolved
    dist = float(g.distance(ws).min())
    factor = 1
    while factor < 16 and g.max_spacing / factor > dist / 4:
        factor *= 2
    gf = g.refined(factor)
    data = -0.5 / np.conj(ws[None, :] - gf.nodes[:, None])
    E = solve_dirichlet(gf, data)
    vals = (2 / np.pi) * E.dz(z)
    if np.ndim(w) == 0:
        return vals[..., 0] if z.ndim else complex(vals[0])
    return vals


@dataclass
class SeparabilityReport:
    singular_values: list
    rank: int
    tail: float
    hermitian_residual: float
    points: list
    excluded: int = 0
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def bergman_factor_matrix(sys: PotentialSystem, w_pts, z_pts):
    """``M[w_i, z_k] = K(w_i, z_k)(1 - f_a(w_i) conj f_a(z_k))^2 / (f_a'(w_i) conj f_a'(z_k))``."""
    fa = ahlfors(sys.grid, sys.basis.a)
    K = bergman_kernel(sys, np.asarray(w_pts), np.asarray(z_pts))
    fw, dfw = fa(w_pts), fa.derivative(w_pts)
    fz, dfz = fa(z_pts), fa.derivative(z_pts)
    return K * (1 - fw[:, None] * np.conj(fz)[None, :]) ** 2 / (dfw[:, None] * np.conj(dfz)[None, :])


def bergman_factor_rank(sys: PotentialSystem, grid_size: int = 40, seed: int = 9, tail: float = 1e-6):
    """Singular values and numerical rank of the factored Bergman matrix on a symmetric sample."""
    g = sys.grid
    fa = ahlfors(g, sys.basis.a)
    rng = np.random.default_rng(seed)
    pts = interior_samples(g, 2 * grid_size, rng, margin=max(0.1, 4 * g.max_spacing))
    dfa = np.abs(fa.derivative(pts))
    keep = dfa > 1e-3 * dfa.max()
    pts = pts[keep][:grid_size]
    M = bergman_factor_matrix(sys, pts, pts)
    sv = np.linalg.svd(M, compute_uv=False)
    herm = float(np.linalg.norm(M - M.conj().T) / np.linalg.norm(M))
    r = numerical_rank(sv, tail)
    rep = SeparabilityReport(sv.tolist(), r, float(sv[r] / sv[0]) if r < sv.size else 0.0, herm,
                             [[p.real, p.imag] for p in pts], int((~keep).sum()))
    return rep, M, pts


def lambda_near_boundary(sys: PotentialSystem, z) -> np.ndarray:
    """``lambda_j(z)`` for ``z`` close to the boundary, without a solve at ``z``.

    ``S(w, z)`` is expanded through the Ahlfors basis; the smooth boundary
    traces are interpolated onto an upsampled boundary that resolves the
    peak of ``1 / |1 - f_a(w) conj f_a(z)|^2``.
    """
    B = sys.basis
    g = sys.grid
    fa = ahlfors(g, B.a)
    z = complex(z)
    d = float(g.distance(np.array([z]))[0])
    factor = 1
    while factor < 64 and g.max_spacing / factor > d / 8:
        factor *= 2
    fine = g.refined(factor)
    Sz = B.S_all(z)
    F = fa(z)
    Q = float((Sz @ B.c @ np.conj(Sz)).real)
    N = g.interpolate(B.S_traces, factor) @ (B.c @ np.conj(Sz))
    fw = g.interpolate(fa.trace, factor)
    dens = np.abs(N) ** 2 / np.abs(1 - fw * np.conj(F)) ** 2 * fine.weights
    ints = np.array([dens[fine.curve_slice(j)].sum() for j in range(sys.n - 1)])
    return (1 - abs(F) ** 2) * ints / Q


def nu_limit(sys: PotentialSystem, node: int, offset_spacings: float = 4.0, upsample: int = 16) -> dict:
    """``lim i pi (omega_j - lambda_j)(z) / (1 - |f_a(z)|^2)`` as ``z`` tends to a boundary node.

    Quotients at inward offsets ``h, h/2, h/4`` along the normal are
    Richardson-extrapolated to zero offset.  ``h`` is 4 node spacings of
    the boundary upsampled ``upsample`` times, the resolution at which the
    near-boundary integrals are evaluated.  ``spread`` is the relative gap
    between the quadratic and linear extrapolants.
    """
    if sys.n < 2:
        return {"value": [], "spread": 0.0, "converged": True}
    g = sys.grid
    fa = ahlfors(g, sys.basis.a)
    h = offset_spacings * g.max_spacing / upsample
    normal = 1j * g.tangents[node]
    q = []
    for s in (h, h / 2, h / 4):
        z = g.nodes[node] + s * normal
        q.append(1j * np.pi * (sys.omega(z) - lambda_near_boundary(sys, z)) / (1 - abs(fa(z)) ** 2))
    q = np.array(q)
    r1 = 2 * q[1] - q[0]
    r2 = 2 * q[2] - q[1]
    value = (4 * r2 - r1) / 3
    spread = float(np.linalg.norm(value - r2) / max(np.linalg.norm(value), 1e-300))
    return {"value": value.tolist(), "spread": spread, "offsets": [h, h / 2, h / 4],
            "converged": bool(spread <= 1e-3)}


def interpolation_points(sys: PotentialSystem, candidates: int = 64, seed: int = 13) -> np.ndarray:
    """``n - 1`` interior points ``w_j`` making ``[u_k(w_j)]`` best conditioned.

    Greedy selection over a deterministic candidate set.
    """
    if sys.n < 2:
        return np.zeros(0, dtype=complex)
    rng = np.random.default_rng(seed)
    cand = interior_samples(sys.grid, candidates, rng, margin=max(0.15, 4 * sys.grid.max_spacing))
    U = sys.u_values(cand)
    chosen = []
    for _ in range(sys.n - 1):
        best, score = None, -np.inf
        for i in range(cand.size):
            if i in chosen:
                continue
            rows = U[chosen + [i]]
            sv = np.linalg.svd(rows, compute_uv=False)
            sc = sv[-1] / sv[0] if len(chosen) else sv[0]
            if sc > score:
                best, score = i, sc
        chosen.append(best)
    return cand[chosen]


def bergman_factor_fit(sys: PotentialSystem, rank: int | None = None, samples: int = 160, heldout: int = 20,
                       degrees=range(1, 7), seed: int = 21) -> dict:
    """Finite-rank factorization of the Bergman kernel with rational factors.

    ``M(w, z) = sum_jk H_j(w) C_jk conj H_k(z)`` with ``H_j = M(., p_j)`` at
    ``rank`` pivot points chosen by column-pivoted QR and
    ``C = M(P, P)^{-1}``.  Each ``H_j`` is fitted as a rational function of
    ``(f_a, f_b)`` on interior samples, and ``K`` is rebuilt from the fitted
    factors at ``heldout`` pairs of fresh points.
    """
    from scipy.linalg import qr

    from .fitkit import degree_sweep

    g = sys.grid
    B = sys.basis
    fa, fb = ahlfors(g, B.a), ahlfors(g, B.b)
    if rank is None:
        rank = bergman_factor_rank(sys)[0].rank
    rng = np.random.default_rng(seed)
    pool = interior_samples(g, 3 * samples, rng, margin=max(0.1, 4 * g.max_spacing))
    d = np.abs(fa.derivative(pool))
    pool = pool[d > 1e-3 * d.max()]
    train, fresh = pool[:samples], pool[samples:samples + 2 * heldout]
    M = bergman_factor_matrix(sys, train, train)
    _, _, piv = qr(M, pivoting=True, mode="economic")
    P = train[piv[:rank]]
    C = np.linalg.inv(bergman_factor_matrix(sys, P, P))
    H = bergman_factor_matrix(sys, train, P)
    X = np.stack([fa(train), fb(train)], axis=1)
    models, table = [], []
    for j in range(rank):
        sw = degree_sweep(X, H[:, j], degrees=degrees, signature=("f_a", "f_b"), seed=seed)
        models.append(sw["best"])
        table.append({"pivot": [P[j].real, P[j].imag], "degree": list(sw["best"].num_degree),
                      "heldout": sw["best"].heldout_residual})
    w, z = fresh[:heldout], fresh[heldout:]

    def Hfit(pts):
        Y = np.stack([fa(pts), fb(pts)], axis=1)
        return np.stack([m.numerator(Y) / m.denominator(Y) for m in models], axis=1)

    Mrec = np.einsum("ij,jk,ik->i", Hfit(w), C, np.conj(Hfit(z)))
    pref = fa.derivative(w) * np.conj(fa.derivative(z)) / (1 - fa(w) * np.conj(fa(z))) ** 2
    Krec = pref * Mrec
    Kdir = np.array([bergman_kernel(sys, wi, zi) for wi, zi in zip(w, z)])
    rel = float(np.abs(Krec - Kdir).max() / np.abs(Kdir).max())
    return {"rank": rank, "factors": table, "heldout_pairs": heldout, "reconstruction_residual": rel,
            "models": [m.to_dict() for m in models]}
