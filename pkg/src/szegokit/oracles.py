"""Closed forms for the unit disc and series for the annulus ``rho < |z| < 1``.

These are computed independently of the boundary-integral machinery and
serve as baselines for tests and verification reports.
"""

import numpy as np

__all__ = [
    "disc_szego", "disc_garabedian", "disc_ahlfors", "disc_ahlfors_derivative",
    "disc_caratheodory", "disc_green", "disc_green_w", "disc_poisson", "disc_bergman",
    "annulus_szego", "annulus_bergman", "annulus_green", "annulus_harmonic_measure",
    "annulus_u1",
]


def disc_szego(z, w):
    return 1.0 / (2 * np.pi * (1 - z * np.conj(w)))


def disc_garabedian(z, w):
    return 1.0 / (2 * np.pi * (z - w))


def disc_ahlfors(w, z):
    """Ahlfors (= Riemann) map of the unit disc with base point ``w``, at ``z``."""
    return (z - w) / (1 - np.conj(w) * z)


def disc_ahlfors_derivative(w, z):
    return (1 - abs(w) ** 2) / (1 - np.conj(w) * z) ** 2


def disc_caratheodory(z):
    return 1.0 / (1 - np.abs(z) ** 2)


def disc_green(z, w):
    return np.log(np.abs((z - w) / (1 - z * np.conj(w))))


def disc_green_w(z, w):
    return (1 - np.abs(z) ** 2) / (2 * (w - z) * (1 - np.conj(z) * w))


def disc_poisson(z, w):
    return (1 - np.abs(z) ** 2) / (2 * np.pi * np.abs(w - z) ** 2)


def disc_bergman(z, w):
    return 1.0 / (np.pi * (1 - z * np.conj(w)) ** 2)


def _two_sided(term, x, rho, nmax=None):
    # sum over n in Z, truncated once both tails are below round-off
    if nmax is None:
        r_plus = abs(x)
        r_minus = rho ** 2 / abs(x)
        worst = max(r_plus, r_minus)
        nmax = int(np.ceil(40.0 / -np.log(worst))) + 8
    n = np.arange(-nmax, nmax + 1)
    vals = term(n)
    # add small terms first
    order = np.argsort(np.abs(vals))
    return np.sum(vals[order])


def annulus_szego(z, w, rho=0.5):
    """Szego kernel of the annulus from its orthonormal basis ``z^n / ||z^n||``.

    ``||z^n||^2 = 2 pi (1 + rho^(2n+1))`` with respect to arclength.
    """
    x = complex(z * np.conj(w))
    return _two_sided(lambda n: x ** n.astype(float) / (2 * np.pi * (1 + rho ** (2 * n + 1.0))), x, rho)


def annulus_bergman(z, w, rho=0.5):
    """Bergman kernel ``K(z, w)`` of the annulus from its L^2 orthonormal basis."""
    x = complex(z * np.conj(w))

    def term(n):
        n = n.astype(float)
        out = np.empty(n.shape, dtype=complex)
        reg = n != -1
        out[reg] = (n[reg] + 1) * x ** n[reg] / (np.pi * (1 - rho ** (2 * n[reg] + 2)))
        out[~reg] = 1.0 / (x * 2 * np.pi * np.log(1 / rho))
        return out

    return _two_sided(term, x, rho)


def annulus_green(z, w, rho=0.5, nmax=None):
    """Green's function (negative inside) of the annulus by Fourier separation.

    ``G = ln|z - w| + h`` where ``h`` has mode 0 ``-ln s ln r / ln rho`` and
    mode ``n`` equal to ``C r^n + D r^-n``, chosen so that ``G`` vanishes on
    both circles (``r = |z|``, ``s = |w|``).
    """
    r, s = abs(z), abs(w)
    dth = np.angle(z) - np.angle(w)
    if nmax is None:
        q = max(s * r, rho ** 2 / (s * r))
        nmax = int(np.ceil(40.0 / -np.log(q))) + 8
    n = np.arange(1, nmax + 1, dtype=float)
    # C + D = s^n / n ;  C rho^n + D rho^-n = (rho / s)^n / n
    det = rho ** (-n) - rho ** n
    c = (s ** n * rho ** (-n) - (rho / s) ** n) / (n * det)
    d = ((rho / s) ** n - rho ** n * s ** n) / (n * det)
    terms = (c * r ** n + d * r ** (-n)) * np.cos(n * dth)
    h = -np.log(s) * np.log(r) / np.log(rho) + np.sum(terms[::-1])
    return float(np.log(abs(z - w)) + h)


def annulus_harmonic_measure(z, rho=0.5):
    """Harmonic measure of the inner circle."""
    return np.log(np.abs(z)) / np.log(rho)


def annulus_u1(z):
    """Normalized period basis function: ``int_{inner, cw} u_1 dz = 1``."""
    return 1j / (2 * np.pi * z)
