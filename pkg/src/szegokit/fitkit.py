"""Linearized least-squares rational models in Ahlfors-map arguments.

A model is ``num(x) / den(x)`` with ``num`` and ``den`` polynomials in
the argument tuple ``x`` (for example ``(f_a, f_b)`` or
``(f_a, conj f_a)``), of degree at most ``d_i`` in the ``i``-th argument.
Coefficients solve ``target * den - num = 0`` in the least-squares sense
with ``den = 1`` at an anchor sample.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RationalModel",
    "FitError",
    "RationalPoleError",
    "fit_rational",
    "eval_rational",
    "degree_sweep",
    "stability_check",
    "model_to_json",
    "model_from_json",
]


class FitError(ValueError):
    """Invalid fitting input (too few samples, shape mismatch)."""


class RationalPoleError(ValueError):
    """The model denominator is numerically zero at the requested arguments."""


def _exponents(degrees) -> list:
    return list(itertools.product(*[range(d + 1) for d in degrees]))


def _design(args: np.ndarray, exps) -> np.ndarray:
    args = np.asarray(args, dtype=complex)
    cols = [np.prod(args ** np.asarray(e)[None, :], axis=1) for e in exps]
    return np.stack(cols, axis=1) if cols else np.zeros((args.shape[0], 0), dtype=complex)


@dataclass
class RationalModel:
    signature: tuple
    num_degree: tuple
    den_degree: tuple
    num_coeffs: np.ndarray
    den_coeffs: np.ndarray
    anchor: list
    train_residual: float = float("nan")
    heldout_residual: float = float("nan")
    linear_residual: float = float("nan")
    min_denominator: float = float("nan")
    tolerance: float = 1e-6
    ok: bool = False
    notes: list = field(default_factory=list)

    @property
    def num_exponents(self):
        return _exponents(self.num_degree)

    @property
    def den_exponents(self):
        return _exponents(self.den_degree)

    @property
    def total_degree(self) -> int:
        return int(sum(self.num_degree) + sum(self.den_degree))

    def numerator(self, args) -> np.ndarray:
        return _design(args, self.num_exponents) @ self.num_coeffs

    def denominator(self, args) -> np.ndarray:
        return _design(args, self.den_exponents) @ self.den_coeffs

    def to_dict(self) -> dict:
        def cx(a):
            return [[v.real, v.imag] for v in np.asarray(a, dtype=complex).ravel()]

        return {"signature": list(self.signature), "num_degree": list(self.num_degree),
                "den_degree": list(self.den_degree), "num_coeffs": cx(self.num_coeffs),
                "den_coeffs": cx(self.den_coeffs), "anchor": [[v.real, v.imag] for v in self.anchor],
                "train_residual": self.train_residual, "heldout_residual": self.heldout_residual,
                "linear_residual": self.linear_residual, "min_denominator": self.min_denominator,
                "tolerance": self.tolerance, "ok": self.ok, "notes": list(self.notes)}

    @classmethod
    def from_dict(cls, d: dict) -> "RationalModel":
        def cx(a):
            a = np.asarray(a, dtype=float).reshape(-1, 2)
            return a[:, 0] + 1j * a[:, 1]

        return cls(tuple(d["signature"]), tuple(d["num_degree"]), tuple(d["den_degree"]),
                   cx(d["num_coeffs"]), cx(d["den_coeffs"]), cx(d["anchor"]).tolist(),
                   d.get("train_residual", float("nan")), d.get("heldout_residual", float("nan")),
                   d.get("linear_residual", float("nan")), d.get("min_denominator", float("nan")),
                   d.get("tolerance", 1e-6), d.get("ok", False), list(d.get("notes", [])))


def model_to_json(model: RationalModel) -> str:
    return json.dumps(model.to_dict(), indent=2, sort_keys=True)


def model_from_json(text: str) -> RationalModel:
    return RationalModel.from_dict(json.loads(text))


def eval_rational(model: RationalModel, args, pole_tol: float = 1e-8):
    """``num / den`` at the rows of ``args`` (shape ``(m, k)`` or ``(k,)``)."""
    args = np.asarray(args, dtype=complex)
    single = args.ndim == 1
    args = np.atleast_2d(args)
    den = model.denominator(args)
    if np.abs(den).min() < pole_tol:
        raise RationalPoleError(f"denominator {np.abs(den).min():.1e} below {pole_tol:.0e}")
    out = model.numerator(args) / den
    return complex(out[0]) if single else out


def _split(m: int, heldout: float, seed: int):
    perm = np.random.default_rng(seed).permutation(m)
    k = int(round(heldout * m))
    return np.sort(perm[k:]), np.sort(perm[:k])


def _rel_err(model, args, target) -> float:
    if len(target) == 0:
        return 0.0
    val = model.numerator(args) / model.denominator(args)
    return float(np.abs(val - target).max() / max(np.abs(target).max(), 1e-300))


def fit_rational(args, target, degree, den_degree=None, signature=None, heldout: float = 0.2,
                 seed: int = 0, tolerance: float = 1e-6, rcond: float = 1e-13,
                 penalty: float = 1e-9) -> RationalModel:
    """Fit ``target ~ num(args) / den(args)``.

    ``degree`` is an int (same degree in every argument) or a tuple of
    per-argument degrees; ``den_degree`` defaults to ``degree``.  A
    deterministic ``heldout`` fraction of the samples is kept out of the
    fit.  When the training set has fewer than three samples per unknown,
    the degree is lowered (with a note).  ``penalty`` (relative to the
    design norm) weights the ``|den - 1|`` regularization.
    """
    args = np.asarray(args, dtype=complex)
    if args.ndim == 1:
        args = args[:, None]
    target = np.asarray(target, dtype=complex).ravel()
    m, k = args.shape
    if target.size != m:
        raise FitError("args and target sizes differ")
    signature = tuple(signature) if signature is not None else tuple(f"x{i}" for i in range(k))
    if len(signature) != k:
        raise FitError("signature length does not match the number of arguments")
    nd = tuple([degree] * k) if np.isscalar(degree) else tuple(degree)
    dd = nd if den_degree is None else (tuple([den_degree] * k) if np.isscalar(den_degree) else tuple(den_degree))
    notes = []
    tr, ho = _split(m, heldout, seed)
    while True:
        unknowns = len(_exponents(nd)) + len(_exponents(dd))
        if tr.size >= 3 * unknowns:
            break
        if max(nd + dd) == 0:
            raise FitError("too few samples for even a constant model")
        nd = tuple(max(d - 1, 0) for d in nd)
        dd = tuple(max(d - 1, 0) for d in dd)
        notes.append(f"degree lowered to {nd}/{dd}: fewer than 3 samples per unknown")
    ne, de = _exponents(nd), _exponents(dd)
    X, y = args[tr], target[tr]
    Pn, Pd = _design(X, ne), _design(X, de)
    A = np.hstack([-Pn, y[:, None] * Pd])
    # den(anchor) = 1 as an exact linear constraint c^H v = 1
    anchor = int(np.argmax(np.abs(y)))
    c = np.concatenate([np.zeros(len(ne)), np.conj(Pd[anchor])])
    v0 = c / np.vdot(c, c)
    _, _, Vh = np.linalg.svd(c[None, :])
    Z = Vh[1:].conj().T
    AZ = A @ Z
    # On an algebraic curve num/den is not unique: multiples of the curve's
    # defining relation lie in the (near) null space of the design.  A weak
    # penalty on |den - 1| over the samples picks the representative whose
    # denominator stays away from zero there.
    Dz = Pd @ Z[len(ne):]
    rhs_pen = 1 - Pd @ v0[len(ne):]
    mu = penalty * np.linalg.norm(AZ, 2)
    M = np.vstack([AZ, mu * Dz])
    u, _, rank, _ = np.linalg.lstsq(M, np.concatenate([-A @ v0, mu * rhs_pen]), rcond=rcond)
    s_AZ = np.linalg.svd(AZ, compute_uv=False)
    weak = int(np.sum(s_AZ <= penalty * s_AZ[0])) + (AZ.shape[1] - s_AZ.size)
    if weak:
        notes.append(f"{weak} design direction(s) below the penalty level; denominator regularized")
    v = v0 + Z @ u
    model = RationalModel(signature, nd, dd, v[:len(ne)], v[len(ne):], X[anchor].tolist(),
                          tolerance=tolerance, notes=notes)
    model.linear_residual = float(np.linalg.norm(A @ v) / np.sqrt(y.size))
    model.min_denominator = float(np.abs(model.denominator(X)).min())
    if model.min_denominator < 1e-4:
        notes.append("denominator below 1e-4 on the training sample")
    model.train_residual = _rel_err(model, X, y)
    model.heldout_residual = _rel_err(model, args[ho], target[ho])
    model.ok = bool(max(model.train_residual, model.heldout_residual) <= tolerance and model.min_denominator >= 1e-4)
    return model


def degree_sweep(args, target, degrees=range(1, 7), stop: float = 1e-8, tolerance: float = 1e-6,
                 signature=None, seed: int = 0) -> dict:
    """Fit equal-bidegree models for ``degrees`` until the held-out residual is ``<= stop``.

    The selected model has the smallest held-out residual; ties (within a
    factor 2) go to the smaller degree.
    """
    fits = []
    for d in degrees:
        mdl = fit_rational(args, target, d, signature=signature, seed=seed, tolerance=tolerance)
        fits.append(mdl)
        if mdl.heldout_residual <= stop:
            break
    best = fits[0]
    for mdl in fits[1:]:
        if mdl.heldout_residual < 0.5 * best.heldout_residual:
            best = mdl
    return {"best": best, "fits": fits,
            "table": [{"degree": list(f.num_degree), "train": f.train_residual, "heldout": f.heldout_residual,
                       "linear": f.linear_residual, "notes": list(f.notes)} for f in fits],
            "ok": best.ok}


def stability_check(args, target, degree, seed: int = 0) -> dict:
    """Fit two disjoint halves of the samples and compare their held-out residuals."""
    args = np.asarray(args, dtype=complex)
    if args.ndim == 1:
        args = args[:, None]
    target = np.asarray(target, dtype=complex).ravel()
    perm = np.random.default_rng(seed).permutation(target.size)
    h = target.size // 2
    A, B = np.sort(perm[:h]), np.sort(perm[h:2 * h])
    ma = fit_rational(args[A], target[A], degree, seed=seed)
    mb = fit_rational(args[B], target[B], degree, seed=seed)
    ra, rb = ma.heldout_residual, mb.heldout_residual
    ratio = max(ra, rb) / max(min(ra, rb), 1e-300)
    return {"heldout": [ra, rb], "ratio": float(ratio), "stable": bool(ratio < 10)}
