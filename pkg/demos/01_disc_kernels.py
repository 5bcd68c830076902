# Szego, Garabedian and Ahlfors on the unit disc, checked against closed forms.
import numpy as np

from szegokit import oracles
from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.szego import szego_kernel, szego_solution
from szegokit.ahlfors import ahlfors

disc = make_preset_domain("disc", [1.0])
grid = boundary_grid(disc, 128)            # 128 trapezoid nodes on the circle
print(disc.name, "nodes:", grid.size)

a = 0.3 - 0.2j
sol = szego_solution(grid, a)               # one Kerzman-Stein solve gives S(., a) and L(., a)
z = 0.4 + 0.25j
print("S(z,a)  numeric", sol.szego(z))
print("S(z,a)  exact  ", oracles.disc_szego(z, a))
print("L(z,a)  numeric", sol.garabedian(z))
print("L(z,a)  exact  ", oracles.disc_garabedian(z, a))

# the Ahlfors map of the disc is the Mobius map sending w to 0
f = ahlfors(grid, a)
print("f_a(z)  numeric", f(z), " exact", oracles.disc_ahlfors(a, z))
print("|f_a| on the boundary, max deviation from 1:", np.abs(np.abs(f.trace) - 1).max())

# spectral accuracy: doubling the nodes should cost many digits of error
for n in (32, 48, 64, 96):
    g = boundary_grid(disc, n)
    err = abs(szego_kernel(g, z, a) - oracles.disc_szego(z, a))
    print(f"{n:4d} nodes  |S error| = {err:.2e}")
