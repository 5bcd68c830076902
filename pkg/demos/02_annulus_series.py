# The annulus rho < |z| < 1 has series formulas for its kernels and Green function.
from szegokit import oracles
from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.szego import szego_kernel, admissible_base
from szegokit.potential import PotentialSystem, bergman_kernel, greens_function, harmonic_measures

rho = 0.5
ann = make_preset_domain("annulus", [rho])
grid = boundary_grid(ann, 256)              # 256 nodes per circle

basis = admissible_base(grid, 0.7, 0.6j)    # base points a and b for the Ahlfors pair
P = PotentialSystem(grid, basis)            # Dirichlet solves shared by every potential quantity

z, w = 0.62 + 0.3j, -0.55 + 0.4j
print("S       ", szego_kernel(grid, z, w), oracles.annulus_szego(z, w, rho))
print("K       ", bergman_kernel(P, z, w), oracles.annulus_bergman(z, w, rho))
print("G       ", greens_function(P, z, w), oracles.annulus_green(z, w, rho))
print("omega_1 ", harmonic_measures(P, z), oracles.annulus_harmonic_measure(z, rho))

# the Szego zero of S(., a) sits at -rho/a, so f_a identifies z with -rho/z
print("expected Szego zero of a = 0.7:", -rho / 0.7)
