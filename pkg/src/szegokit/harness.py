"""Verification suites, JSON reports and CSV field export.

A config is a JSON object::

    {
      "domain": {"preset": {"kind": "annulus", "params": [0.5]}},
      "nodes": 256,
      "basis": {"a": [0.7, 0.0], "b": [0.0, 0.6]},
      "seed": 20240601,
      "thresholds": {"szego_representation": 1e-8},
      "phi": [[0, 0], [1, 0], [0.1, 0]],
      "polynomial": [[[-4, 0], [0, 0]], [[0, 0], [1, 0]]],
      "record_timing": false
    }

Only ``domain`` is required.  Every verification entry compares a maximum
residual against a threshold; ``passed`` is exactly ``max_residual <=
threshold``.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, oracles
from .ahlfors import ahlfors, interior_samples, properness_report, select_primitive_pair
from .bie import SolverError, cauchy_boundary_limit
from .fitkit import degree_sweep
from .geometry import DomainSpec, GeometryError, boundary_grid, check_domain, domain_from_dict
from .potential import (
    PotentialSystem,
    bergman_factor_fit,
    bergman_factor_rank,
    bergman_kernel,
    greens_function,
    greens_w_representation,
    greens_w_derivative,
    lambda_j,
    linearization_check,
    poisson_kernel,
    principal_term,
    principal_term_factored,
)
from .propermap import BivarPoly, modulus_check, proper_from_pair
from .representation import (
    ReprEvaluator,
    caratheodory_density,
    caratheodory_density_repr,
    garabedian_via_repr,
    lambda_unimodular,
    normalized_ahlfors,
    szego_via_repr,
    transform_kernel_check,
)
from .szego import AdmissibilityError, AhlforsBasis, admissible_base, find_admissible_base, szego_solution

__all__ = [
    "ConfigError",
    "DEFAULT_THRESHOLDS",
    "Entry",
    "VerificationReport",
    "Context",
    "load_config",
    "build_context",
    "verify_suite",
    "export_field",
    "fit_target",
    "SUITES",
]

DEFAULT_THRESHOLDS = {
    "disc_oracles": 1e-10,
    "annulus_szego": 1e-8,
    "annulus_bergman": 1e-8,
    "annulus_omega": 1e-10,
    "annulus_u1": 1e-8,
    "annulus_green": 1e-7,
    "refinement": 1.0,
    "szego_representation": 1e-8,
    "garabedian_representation": 1e-8,
    "garabedian_boundary": 1e-8,
    "ahlfors_representation": 1e-8,
    "lambda_modulus": 1e-12,
    "caratheodory": 1e-7,
    "transformation": 1e-8,
    "properness": 1e-9,
    "torus_modulus": 1e-13,
    "proper_map": 1e-8,
    "green_symmetry": 1e-7,
    "u_normalization": 1e-8,
    "green_w_representation": 1e-6,
    "principal_two_path": 1e-8,
    "poisson_mass": 1e-9,
    "poisson_positivity": 1e-10,
    "poisson_reproduction": 1e-8,
    "poisson_linear_pointwise": 1e-6,
    "poisson_linear_rank": 1e-6,
    "bergman_factor_hermitian": 1e-8,
    "bergman_factor_rank": 1e-6,
    "bergman_factor_fit": 1e-6,
    "double_fit": 1e-6,
}

SUITES = ("all", "szego", "potential", "propermap")


class ConfigError(ValueError):
    """Invalid configuration (CLI exit code 2)."""


@dataclass
class Entry:
    identity: str
    domain: str
    nodes: int
    max_residual: float
    rms_residual: float
    threshold: float
    passed: bool
    elapsed: float = 0.0
    details: dict = field(default_factory=dict)
    error: str | None = None


@dataclass
class VerificationReport:
    entries: list
    version: str
    config: dict
    seed: int
    timing_recorded: bool = False

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def to_dict(self) -> dict:
        return {"version": self.version, "seed": self.seed, "timing_recorded": self.timing_recorded,
                "passed": self.passed, "config": self.config,
                "entries": [_clean(asdict(e)) for e in self.entries]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=True)

    def summary_lines(self) -> list:
        out = []
        for e in self.entries:
            flag = "PASS" if e.passed else "FAIL"
            msg = f" ({e.error})" if e.error else ""
            out.append(f"{flag} {e.identity:<22} {e.domain:<22} max={e.max_residual:.3e} "
                       f"thr={e.threshold:.0e}{msg}")
        return out


def _clean(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, complex to [re, im]."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


# --- configuration ---------------------------------------------------------


def _complex(v, what: str) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(x, (int, float)) for x in v):
        return complex(v[0], v[1])
    raise ConfigError(f"{what}: expected a number or [re, im], got {v!r}")


def load_config(src) -> dict:
    """Parse and validate a config (path, JSON text or dict)."""
    if isinstance(src, dict):
        cfg = dict(src)
    else:
        p = Path(src)
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict) or "domain" not in cfg:
        raise ConfigError("config must be a JSON object with a 'domain' entry")
    nodes = cfg.get("nodes", 256)
    if not isinstance(nodes, int) or nodes < 16 or nodes % 2:
        raise ConfigError("'nodes' must be an even integer >= 16")
    cfg["nodes"] = nodes
    seed = cfg.get("seed", 20240601)
    if not isinstance(seed, int):
        raise ConfigError("'seed' must be an integer")
    cfg["seed"] = seed
    th = cfg.get("thresholds", {})
    if not isinstance(th, dict) or any(k not in DEFAULT_THRESHOLDS for k in th):
        bad = [k for k in th if k not in DEFAULT_THRESHOLDS] if isinstance(th, dict) else th
        raise ConfigError(f"unknown threshold keys: {bad}")
    basis = cfg.get("basis", {})
    if not isinstance(basis, dict):
        raise ConfigError("'basis' must be an object with 'a' and optionally 'b'")
    for k in ("a", "b"):
        if basis.get(k) is not None:
            _complex(basis[k], f"basis.{k}")
    try:
        domain_from_dict(cfg["domain"])
    except (GeometryError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid domain: {exc}") from exc
    return cfg


def _preset(cfg: dict):
    p = cfg["domain"].get("preset")
    if not p:
        return None, None
    if isinstance(p, str):
        return p, cfg["domain"].get("params")
    return p.get("kind"), p.get("params")


@dataclass
class Context:
    cfg: dict
    domain: DomainSpec
    grid: object
    basis: AhlforsBasis
    system: PotentialSystem
    kind: str | None
    params: list | None
    thresholds: dict

    @property
    def n(self) -> int:
        return self.domain.connectivity

    @property
    def label(self) -> str:
        return self.domain.name

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.cfg["seed"], salt])

    def is_unit_disc(self) -> bool:
        return self.kind == "disc" and (not self.params or float(self.params[0]) == 1.0)

    def annulus_rho(self):
        if self.kind == "annulus":
            return float(self.params[0]) if self.params else 0.5
        return None


def _default_a(grid) -> complex:
    """First admissible point of a deterministic interior sample, nearest the centroid first.

    Off-centre base points push the other zeros of ``S(., a)`` towards
    the holes, so the search spirals out from the outer curve's centroid.
    """
    c = grid.domain.outer.centroid()
    pts = interior_samples(grid, 64, np.random.default_rng(0), margin=_margin(grid, 0.15))
    if grid.contains(c)[0] and grid.distance(c)[0] >= 0.15:
        pts = np.concatenate([[c], pts])
    pts = pts[np.argsort(np.abs(pts - c), kind="stable")]
    last = None
    for a in pts:
        try:
            admissible_base(grid, a, None, check_pair=False)
            return complex(a)
        except (AdmissibilityError, SolverError) as exc:
            last = exc
    raise AdmissibilityError(f"no admissible default base point: {last}")


def build_context(cfg: dict, nodes: int | None = None) -> Context:
    cfg = load_config(cfg)
    dom = domain_from_dict(cfg["domain"])
    grid = boundary_grid(dom, nodes or cfg["nodes"])
    basis_cfg = cfg.get("basis", {})
    a = _complex(basis_cfg["a"], "basis.a") if basis_cfg.get("a") is not None else _default_a(grid)
    b = _complex(basis_cfg["b"], "basis.b") if basis_cfg.get("b") is not None else None
    if dom.connectivity == 1 and b is None:
        b = a
    basis = find_admissible_base(grid, a, None, check_pair=False)
    if b is None:
        b, _ = select_primitive_pair(grid, basis.a)
    basis = find_admissible_base(grid, basis.a, b, check_pair=dom.connectivity > 1)
    kind, params = _preset(cfg)
    th = dict(DEFAULT_THRESHOLDS)
    th.update(cfg.get("thresholds", {}))
    return Context(cfg, dom, grid, basis, PotentialSystem(grid, basis), kind, params, th)


# --- individual checks ------------------------------------------------------
#
# Each check returns (residuals, details); residuals is a 1-D array whose
# max is compared with the threshold.


def _rel(x, ref):
    x, ref = np.asarray(x), np.asarray(ref)
    return np.abs(x - ref) / np.maximum(np.abs(ref), 1e-300)


def _margin(grid, margin: float) -> float:
    # sample points must clear the solvers' near-boundary guard (3 node spacings)
    return max(margin, 4 * grid.max_spacing)


def _pairs(ctx: Context, count: int, salt: int, margin: float = 0.1):
    pts = interior_samples(ctx.grid, 2 * count, ctx.rng(salt), margin=_margin(ctx.grid, margin))
    return pts[:count], pts[count:]


def disc_sample_points(count: int = 20, radius: float = 0.65, seed: int = 1):
    """Fixed interior pairs of the unit disc used by the oracle suite."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0.05, 1.0, (2, count)))
    t = rng.uniform(0, 2 * np.pi, (2, count))
    p = r * np.exp(1j * t)
    return p[0], p[1]


def disc_oracle_errors(grid, count: int = 20) -> dict:
    """Max relative error of every disc quantity against its closed form."""
    z, w = disc_sample_points(count)
    err = {}
    S = np.array([szego_solution(grid, wk).szego(zk) for zk, wk in zip(z, w)])
    err["S"] = _rel(S, oracles.disc_szego(z, w)).max()
    L = np.array([szego_solution(grid, wk).garabedian(zk) for zk, wk in zip(z, w)])
    err["L"] = _rel(L, oracles.disc_garabedian(z, w)).max()
    f = np.array([ahlfors(grid, wk)(zk) for zk, wk in zip(z, w)])
    err["f_w"] = _rel(f, oracles.disc_ahlfors(w, z)).max()
    df = np.array([ahlfors(grid, wk).derivative(zk) for zk, wk in zip(z, w)])
    err["f_w'"] = _rel(df, oracles.disc_ahlfors_derivative(w, z)).max()
    rho = caratheodory_density(grid, z)
    err["rho"] = _rel(rho, oracles.disc_caratheodory(z)).max()
    sysd = PotentialSystem(grid)
    G = np.array([greens_function(sysd, zk, wk) for zk, wk in zip(z, w)])
    err["G"] = _rel(G, oracles.disc_green(z, w)).max()
    Gw = np.array([greens_w_derivative(sysd, zk, wk) for zk, wk in zip(z, w)])
    err["G_w"] = _rel(Gw, oracles.disc_green_w(z, w)).max()
    nodes = np.arange(0, grid.size, max(1, grid.size // count))[:count]
    p = np.array([poisson_kernel(sysd, zk, k) for zk, k in zip(z, nodes)])
    err["p"] = _rel(p, oracles.disc_poisson(z, grid.nodes[nodes])).max()
    K = np.array([bergman_kernel(sysd, zk, wk) for zk, wk in zip(z, w)])
    err["K"] = _rel(K, oracles.disc_bergman(z, w)).max()
    return {k: float(v) for k, v in err.items()}


def check_disc_oracles(ctx):
    err = disc_oracle_errors(boundary_grid(ctx.domain, 128))
    return np.array(list(err.values())), {"per_quantity": err, "points": 20, "nodes": 128}


def check_refinement(ctx):
    """Disc-oracle error at 64 and 128 nodes; residual ``err128 / max(1e-4 err64, 1e-12)``."""
    e64 = max(disc_oracle_errors(boundary_grid(ctx.domain, 64)).values())
    e128 = max(disc_oracle_errors(boundary_grid(ctx.domain, 128)).values())
    r = e128 / max(1e-4 * e64, 1e-12)
    return np.array([r]), {"err64": e64, "err128": e128,
                           "reduction": e64 / e128 if e128 > 0 else float("inf")}


def check_annulus(ctx, what):
    rho = ctx.annulus_rho()
    z, w = _pairs(ctx, 10, 101, margin=0.1)
    g, P = ctx.grid, ctx.system
    if what == "szego":
        vals = np.array([szego_solution(g, wk).szego(zk) for zk, wk in zip(z, w)])
        return _rel(vals, [oracles.annulus_szego(zk, wk, rho) for zk, wk in zip(z, w)]), {}
    if what == "bergman":
        vals = np.array([bergman_kernel(P, zk, wk) for zk, wk in zip(z, w)])
        return _rel(vals, [oracles.annulus_bergman(zk, wk, rho) for zk, wk in zip(z, w)]), {}
    if what == "omega":
        return np.abs(P.omega(z)[:, 0] - oracles.annulus_harmonic_measure(z, rho)), {}
    if what == "u1":
        return _rel(P.u_values(z)[:, 0], oracles.annulus_u1(z)), {}
    if what == "green":
        # G vanishes on the boundary: absolute error (values are O(1) inside)
        vals = np.array([greens_function(P, zk, wk) for zk, wk in zip(z, w)])
        ref = [oracles.annulus_green(zk, wk, rho) for zk, wk in zip(z, w)]
        return np.abs(vals - ref), {"metric": "absolute"}
    raise ValueError(what)


def check_szego_representation(ctx):
    z, w = _pairs(ctx, 20, 201)
    ev = ReprEvaluator(ctx.basis)
    direct = np.array([szego_solution(ctx.grid, wk).szego(zk) for zk, wk in zip(z, w)])
    rep = szego_via_repr(ev, z, w)
    scale = max(1.0, np.abs(direct).max())
    return np.abs(rep - direct) / scale, {"pairs": 20}


def check_garabedian_representation(ctx):
    z, w = _pairs(ctx, 20, 202)
    ev = ReprEvaluator(ctx.basis)
    fa = ev.fa
    keep = np.abs(fa(z) - fa(w)) > 1e-3
    z, w = z[keep], w[keep]
    direct = np.array([szego_solution(ctx.grid, wk).garabedian(zk) for zk, wk in zip(z, w)])
    rep = garabedian_via_repr(ev, z, w)
    scale = max(1.0, np.abs(direct).max())
    return np.abs(rep - direct) / scale, {"pairs": int(keep.sum()), "skipped_near_fiber": int((~keep).sum())}


def check_garabedian_boundary(ctx):
    """The ``L`` trace is the boundary value of ``1/(2 pi (z - a)) + holomorphic``."""
    g = ctx.grid
    res = []
    for sol in ctx.basis.solutions:
        reg = sol.L.values - 1.0 / (2 * np.pi * (g.nodes - sol.a))
        res.append(np.abs(cauchy_boundary_limit(g, reg) - reg).max() / np.abs(sol.L.values).max())
        res.append(np.abs(np.abs(sol.L.values) - np.abs(sol.S.values)).max() / np.abs(sol.S.values).max())
    return np.array(res), {"base_points": len(ctx.basis.solutions)}


def check_ahlfors_representation(ctx):
    z, w = _pairs(ctx, 10, 205)
    ev = ReprEvaluator(ctx.basis)
    lam = lambda_unimodular(ev, w)
    F = normalized_ahlfors(ev, z, w)
    direct = np.array([ahlfors(ctx.grid, wk)(zk) for zk, wk in zip(z, w)])
    return np.abs(F * lam - direct), {"lambda_modulus_dev": float(np.abs(np.abs(lam) - 1).max())}


def check_lambda_modulus(ctx):
    _, w = _pairs(ctx, 10, 205)
    lam = lambda_unimodular(ReprEvaluator(ctx.basis), w)
    return np.abs(np.abs(lam) - 1), {}


def check_caratheodory(ctx):
    z, _ = _pairs(ctx, 10, 206)
    ev = ReprEvaluator(ctx.basis)
    a = caratheodory_density(ctx.grid, z)
    b = caratheodory_density_repr(ev, z)
    res = list(_rel(b, a))
    det = {}
    if ctx.is_unit_disc():
        v = caratheodory_density(ctx.grid, 0.5)
        res.append(abs(v - 4 / 3))
        det["rho(0.5)"] = v
    return np.array(res), det


def check_transformation(ctx):
    phi = [_complex(c, "phi") for c in ctx.cfg.get("phi", [0, 1, 0.1])]
    rep = transform_kernel_check(ctx.domain, phi, nodes=ctx.grid.nodes_per_curve, seed=ctx.cfg["seed"] % 2**31)
    return np.array([rep["max_residual_S"], rep["max_residual_L"]]), rep


def check_properness(ctx):
    rep = properness_report(ahlfors(ctx.grid, ctx.basis.a))
    ok_val = all(v == ctx.n for v in rep["valence"].values()) and all(w == 1 for w in rep["curve_windings"])
    res = [rep["max_modulus_deviation"]] + ([0.0] if ok_val else [np.inf])
    return np.array(res), rep


def _polynomial(ctx) -> BivarPoly:
    p = ctx.cfg.get("polynomial")
    if p is None:
        return BivarPoly([[-4, 0], [0, 1]])
    try:
        return BivarPoly.from_list(p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid 'polynomial': {exc}") from exc


def check_torus(ctx):
    return np.array([modulus_check(_polynomial(ctx), samples=100)]), {"grid": "100x100"}


def check_proper_map(ctx):
    pm = proper_from_pair(_polynomial(ctx), ctx.basis)
    rep = pm.report()
    # the count is an integer when the argument integral is unambiguously close to one
    integral = max(rep["valence_residual"].values()) < 1e-4 and rep["valence_consistent"]
    return np.array([rep["boundary_modulus_deviation"], 0.0 if integral else np.inf]), rep


def check_green_symmetry(ctx):
    z, w = _pairs(ctx, 10, 301)
    P = ctx.system
    a = np.array([greens_function(P, zk, wk) for zk, wk in zip(z, w)])
    b = np.array([greens_function(P, wk, zk) for zk, wk in zip(z, w)])
    neg = bool(np.all(a < 0))
    return np.append(np.abs(a - b), 0.0 if neg else np.inf), {"negative": neg}


def check_u_normalization(ctx):
    if ctx.n < 2:
        return np.zeros(1), {"skipped": "simply connected"}
    P = ctx.system
    g = ctx.grid
    U = P.u_traces
    per = np.array([[np.sum(g.dz[g.curve_slice(k)] * U[g.curve_slice(k), j]) * g.dt
                     for j in range(ctx.n - 1)] for k in range(ctx.n - 1)])
    z, _ = _pairs(ctx, 10, 302)
    lam = np.array([lambda_j(P, zk) for zk in z])
    om = P.omega(z)
    bad = 0.0 if (np.all(lam > 0) and np.all((om > 0) & (om < 1))) else np.inf
    return np.append(np.abs(per - np.eye(ctx.n - 1)).ravel(), bad), {"period_check": per}


def check_green_w_representation(ctx):
    z, w = _pairs(ctx, 10, 501)
    P = ctx.system
    res, res2 = [], []
    for zk, wk in zip(z, w):
        ref = greens_w_derivative(P, zk, wk)
        res.append(abs(greens_w_representation(P, zk, wk) - ref) / max(1.0, abs(ref)))
    return np.array(res), {"pairs": 10}


def check_principal_two_path(ctx):
    z, w = _pairs(ctx, 10, 502)
    P = ctx.system
    fa = ahlfors(ctx.grid, ctx.basis.a)
    res = []
    for zk, wk in zip(z, w):
        if abs(fa(wk) - fa(zk)) <= 1e-3:
            continue
        d = principal_term(P, zk, wk)
        res.append(abs(principal_term_factored(P, zk, wk) - d) / max(1.0, abs(d)))
    return np.array(res), {"pairs": len(res)}


def _poisson_data(ctx):
    z, _ = _pairs(ctx, 3, 503, margin=0.2)
    P = ctx.system
    g = ctx.grid
    out = []
    for zk in z:
        out.append((zk, poisson_kernel(P, zk)))
    return g, out


def check_poisson(ctx, what):
    g, data = _poisson_data(ctx)
    W, x = g.weights, g.nodes
    c = 3.0 + 2.0j
    tests = {"1": lambda v: np.ones_like(v.real), "Re w": lambda v: v.real,
             "Re w^2": lambda v: (v ** 2).real, "ln|w-c|": lambda v: np.log(np.abs(v - c))}
    res = []
    for zk, p in data:
        if what == "mass":
            res.append(abs(p @ W - 1))
        elif what == "positivity":
            res.append(max(0.0, -p.min()))
        else:
            for u in tests.values():
                res.append(abs(p @ (u(x) * W) - u(np.array([zk]))[0]))
    return np.array(res), {"points": len(data), "tests": list(tests) if what == "reproduction" else []}


def _lin(ctx):
    if "_lin" not in ctx.cfg.setdefault("_cache", {}):
        P = ctx.system
        g = ctx.grid
        rng = ctx.rng(601)
        z = interior_samples(g, 10, rng, margin=_margin(g, 0.15))
        fa = ahlfors(g, ctx.basis.a)
        S0 = szego_solution(g, ctx.basis.a)
        # keep z away from the zeros of S(., a) (poles of the quotient)
        z = z[np.abs(fa(z)) > 0.05]
        nodes = np.sort(rng.choice(g.size, 5, replace=False))
        ctx.cfg["_cache"]["_lin"] = linearization_check(P, z[:10], nodes, seed=ctx.cfg["seed"] % 2**31)
        ctx.cfg["_cache"]["_lin"]["samples_used"] = int(min(10, z.size) * nodes.size)
        del S0
    return ctx.cfg["_cache"]["_lin"]


def check_poisson_linear_pointwise(ctx):
    r = _lin(ctx)
    return np.array([r["max_residual"]]), {"samples": r["samples_used"], "rms": r["rms_residual"]}


def check_poisson_linear_rank(ctx):
    r = _lin(ctx)
    sv = np.asarray(r["singular_values"])
    k = 2 * ctx.n
    tail = sv[k - 1] / sv[0] if sv.size >= k else 0.0
    return np.array([tail]), {"index": f"sigma_{k}/sigma_1", "singular_values": (sv / sv[0])[:12].tolist(),
                              "numerical_rank": r["rank"]}


def _berg(ctx):
    cache = ctx.cfg.setdefault("_cache", {})
    if "_berg" not in cache:
        cache["_berg"] = bergman_factor_rank(ctx.system, seed=ctx.cfg["seed"] % 2**31)
    return cache["_berg"]


def check_bergman_factor(ctx, what):
    rep, M, _ = _berg(ctx)
    if what == "hermitian":
        return np.array([rep.hermitian_residual]), {}
    if what == "rank":
        # finite: the rank must stay well below the sample size
        finite = rep.rank < len(rep.singular_values) // 2
        sv = np.asarray(rep.singular_values) / rep.singular_values[0]
        return np.array([rep.tail if finite else np.inf]), {"numerical_rank": rep.rank,
                                                            "singular_values": sv[:12].tolist()}
    fit = bergman_factor_fit(ctx.system, rank=rep.rank, seed=ctx.cfg["seed"] % 2**31)
    return np.array([fit["reconstruction_residual"]]), {"rank": fit["rank"], "factors": fit["factors"]}


def double_fit(grid, a, b, degrees=range(1, 7)) -> dict:
    """Degree sweep for the boundary values of ``f_b' / f_a'`` against ``(f_a, f_b)``."""
    fa, fb = ahlfors(grid, a), ahlfors(grid, b)
    X = np.stack([fa.trace, fb.trace], axis=1)
    return degree_sweep(X, fb.derivative_trace / fa.derivative_trace, degrees=degrees, signature=("f_a", "f_b"))


def check_double_fit(ctx, alternates: int = 8):
    """``f_b'/f_a'`` rational in ``(f_a, f_b)`` on the boundary.

    The configured pair is tried first.  If its sweep misses the
    tolerance, up to ``alternates`` further candidate ``b`` from the
    deterministic primitive-pair candidate sequence are tried; every
    attempt is reported.
    """
    g = ctx.grid
    a, b = ctx.basis.a, ctx.basis.b
    attempts = []
    sw = double_fit(g, a, b)
    attempts.append({"b": [b.real, b.imag], "degree": list(sw["best"].num_degree),
                     "heldout": sw["best"].heldout_residual, "table": sw["table"]})
    best = sw["best"].heldout_residual
    if best > ctx.thresholds["double_fit"] and ctx.n > 1:
        cands = interior_samples(g, alternates, np.random.default_rng(11), margin=_margin(g, 0.15))
        for bb in cands:
            if abs(bb - a) < 1e-3 or abs(bb - b) < 1e-9:
                continue
            s2 = double_fit(g, a, complex(bb))
            attempts.append({"b": [bb.real, bb.imag], "degree": list(s2["best"].num_degree),
                             "heldout": s2["best"].heldout_residual})
            best = min(best, s2["best"].heldout_residual)
            if best <= ctx.thresholds["double_fit"]:
                break
    return np.array([best]), {"configured_pair_heldout": attempts[0]["heldout"], "attempts": attempts}


CHECKS = {
    "szego": [
        ("disc_oracles", check_disc_oracles, lambda c: c.is_unit_disc()),
        ("refinement", check_refinement, lambda c: c.is_unit_disc()),
        ("annulus_szego", lambda c: check_annulus(c, "szego"), lambda c: c.annulus_rho() is not None),
        ("szego_representation", check_szego_representation, None),
        ("garabedian_representation", check_garabedian_representation, None),
        ("garabedian_boundary", check_garabedian_boundary, None),
        ("ahlfors_representation", check_ahlfors_representation, None),
        ("lambda_modulus", check_lambda_modulus, None),
        ("caratheodory", check_caratheodory, None),
        ("transformation", check_transformation, None),
        ("properness", check_properness, None),
    ],
    "propermap": [
        ("torus_modulus", check_torus, None),
        ("proper_map", check_proper_map, None),
    ],
    "potential": [
        ("annulus_bergman", lambda c: check_annulus(c, "bergman"), lambda c: c.annulus_rho() is not None),
        ("annulus_omega", lambda c: check_annulus(c, "omega"), lambda c: c.annulus_rho() is not None),
        ("annulus_u1", lambda c: check_annulus(c, "u1"), lambda c: c.annulus_rho() is not None),
        ("annulus_green", lambda c: check_annulus(c, "green"), lambda c: c.annulus_rho() is not None),
        ("green_symmetry", check_green_symmetry, None),
        ("u_normalization", check_u_normalization, lambda c: c.n > 1),
        ("green_w_representation", check_green_w_representation, None),
        ("principal_two_path", check_principal_two_path, None),
        ("poisson_mass", lambda c: check_poisson(c, "mass"), None),
        ("poisson_positivity", lambda c: check_poisson(c, "positivity"), None),
        ("poisson_reproduction", lambda c: check_poisson(c, "reproduction"), None),
        ("poisson_linear_pointwise", check_poisson_linear_pointwise, None),
        ("poisson_linear_rank", check_poisson_linear_rank, None),
        ("bergman_factor_hermitian", lambda c: check_bergman_factor(c, "hermitian"), None),
        ("bergman_factor_rank", lambda c: check_bergman_factor(c, "rank"), None),
        ("bergman_factor_fit", lambda c: check_bergman_factor(c, "fit"), None),
        ("double_fit", check_double_fit, None),
    ],
}


def run_check(ctx: Context, identity: str, fn, timing: bool = False) -> Entry:
    thr = ctx.thresholds[identity]
    t0 = time.perf_counter()
    try:
        res, det = fn(ctx)
        res = np.asarray(res, dtype=float).ravel()
        if res.size == 0:
            res = np.zeros(1)
        mx = float(np.max(res)) if not np.any(np.isnan(res)) else float("inf")
        rms = float(np.sqrt(np.mean(np.square(np.where(np.isfinite(res), res, 0.0)))))
        err = None
    except ConfigError:
        raise
    except (SolverError, GeometryError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        mx, rms, det, err = float("inf"), float("inf"), {}, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - t0 if timing else 0.0
    return Entry(identity, ctx.label, ctx.grid.nodes_per_curve, mx, rms, thr, bool(mx <= thr),
                 round(elapsed, 3), _clean(det), err)


def verify_suite(config, suite: str = "all", only=None) -> VerificationReport:
    """Run a verification suite for the configured domain.

    ``only`` optionally restricts to a list of identity ids.  Solver
    failures become failed entries; invalid configs raise
    :class:`ConfigError`.
    """
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    cfg = load_config(config)
    try:
        ctx = build_context(cfg)
    except (GeometryError, SolverError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot set up the domain: {exc}") from exc
    timing = bool(cfg.get("record_timing", False))
    names = ["szego", "propermap", "potential"] if suite == "all" else [suite]
    entries = []
    for name in names:
        for identity, fn, applies in CHECKS[name]:
            if only is not None and identity not in only:
                continue
            if applies is not None and not applies(ctx):
                continue
            entries.append(run_check(ctx, identity, fn, timing))
    echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
    return VerificationReport(entries, __version__, _clean(echo), cfg["seed"], timing)


# --- field export ----------------------------------------------------------

EXPORTS = ("caratheodory", "green", "poisson", "szego", "bergman", "ahlfors")


def parse_grid_spec(spec: str):
    try:
        nx, ny = (int(v) for v in spec.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"grid spec must look like NXxNY, got {spec!r}") from exc
    if nx < 1 or ny < 1 or nx * ny > 10 ** 6:
        raise ConfigError("grid spec out of range (1 <= NX*NY <= 1e6)")
    return nx, ny


def export_field(config, what: str, grid_spec: str, out, point=None) -> Path:
    """Write a CSV of ``what`` on an ``NXxNY`` grid over the domain's bounding box.

    ``point`` is the second argument where one is needed: the pole of
    ``green`` (default: basis ``a``), the base of ``szego``/``ahlfors``
    (default: basis ``a``), the pole of ``poisson`` (default: basis
    ``a``), and the second argument of ``bergman`` (default: diagonal).
    ``poisson`` is written at the boundary nodes (it lives on the
    boundary); cells outside the domain are left empty.
    """
    if what not in EXPORTS:
        raise ConfigError(f"unknown field {what!r}; choose from {EXPORTS}")
    nx, ny = parse_grid_spec(grid_spec)
    cfg = load_config(config)
    dom = domain_from_dict(cfg["domain"])
    g = boundary_grid(dom, cfg["nodes"])
    basis_cfg = cfg.get("basis", {})
    a = _complex(basis_cfg["a"], "basis.a") if basis_cfg.get("a") is not None else _default_a(g)
    pt = a if point is None else complex(point)
    P = PotentialSystem(g)
    x = np.linspace(g.nodes.real.min(), g.nodes.real.max(), nx)
    y = np.linspace(g.nodes.imag.min(), g.nodes.imag.max(), ny)
    Z = (x[None, :] + 1j * y[:, None]).ravel()
    inside = g.contains(Z) & (g.distance(Z) > 1e-9)
    is_complex = what in ("szego", "ahlfors") or (what == "bergman" and point is not None)
    vals = np.full(Z.shape, np.nan, dtype=complex)
    zi = Z[inside]
    if what == "poisson":
        Z, inside = g.nodes, np.ones(g.size, bool)
        vals = poisson_kernel(P, pt).astype(complex)
    elif what == "caratheodory":
        vals[inside] = caratheodory_density(g, zi)
    elif what == "green":
        keep = np.abs(zi - pt) > 1e-12
        v = np.full(zi.shape, np.nan, dtype=complex)
        v[keep] = greens_function(P, zi[keep], pt)
        vals[inside] = v
    elif what == "szego":
        vals[inside] = szego_solution(g, pt).szego(zi)
    elif what == "ahlfors":
        vals[inside] = ahlfors(g, pt)(zi)
    elif what == "bergman":
        if point is None:
            vals[inside] = [bergman_kernel(P, v, v) for v in zi]
        else:
            vals[inside] = bergman_kernel(P, zi, pt)
    out = Path(out)
    tag = f"{what}@{dom.fingerprint()}"
    try:
        with out.open("w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "y", f"re({tag})", f"im({tag})"] if is_complex else ["x", "y", tag])
            for zz, ok, v in zip(Z, inside, vals):
                row = [repr(float(zz.real)), repr(float(zz.imag))]
                if not ok or np.isnan(v.real):
                    row += ["", ""] if is_complex else [""]
                elif is_complex:
                    row += [repr(float(v.real)), repr(float(v.imag))]
                else:
                    row += [repr(float(v.real))]
                wr.writerow(row)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc}") from exc
    return out


# --- fitting entry point ---------------------------------------------------

FIT_TARGETS = ("fb_over_fa", "bergman_factors", "caratheodory")


def fit_target(config, target: str) -> dict:
    """Rational-model evidence for ``target``; returns a JSON-ready dict."""
    if target not in FIT_TARGETS:
        raise ConfigError(f"unknown fit target {target!r}; choose from {FIT_TARGETS}")
    ctx = build_context(config)
    if target == "fb_over_fa":
        # same search as the verify check: configured pair first, then alternates
        best, det = check_double_fit(ctx)
        winner = min(det["attempts"], key=lambda t: t["heldout"])
        return _clean({"target": target, "domain": ctx.label, "a": ctx.basis.a, "b": winner["b"],
                       "degree": winner["degree"], "heldout": float(best[0]), "attempts": det["attempts"],
                       "ok": bool(best[0] <= ctx.thresholds["double_fit"])})
    if target == "bergman_factors":
        res = bergman_factor_fit(ctx.system, seed=ctx.cfg["seed"] % 2**31)
        res["ok"] = bool(res["reconstruction_residual"] <= ctx.thresholds["bergman_factor_fit"])
        return _clean(dict(res, target=target, domain=ctx.label))
    # rho^2 / |f_a'|^2 against (f_a, conj f_a)
    g = ctx.grid
    fa = ahlfors(g, ctx.basis.a)
    pts = interior_samples(g, 200, ctx.rng(901), margin=_margin(g, 0.1))
    rho = caratheodory_density(g, pts)
    t = rho ** 2 / np.abs(fa.derivative(pts)) ** 2
    X = np.stack([fa(pts), np.conj(fa(pts))], axis=1)
    sw = degree_sweep(X, t, degrees=range(1, 7), signature=("f_a", "conj f_a"))
    return _clean({"target": target, "domain": ctx.label, "sweep": sw["table"], "best": sw["best"].to_dict(),
                   "ok": sw["ok"]})


def check_config_domain(config) -> dict:
    """Summary used by ``domain validate``."""
    cfg = load_config(config)
    dom = domain_from_dict(cfg["domain"])
    problems = check_domain(dom)
    g = boundary_grid(dom, cfg["nodes"]) if not problems else None
    return {"name": dom.name, "fingerprint": dom.fingerprint(), "connectivity": dom.connectivity,
            "nodes_per_curve": cfg["nodes"], "problems": problems,
            "curve_lengths": [float(np.sum(g.weights[g.curve_slice(j)])) for j in range(dom.connectivity)] if g else [],
            "ok": not problems}
