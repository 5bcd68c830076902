# A triply connected domain: Ahlfors basis, representation of the kernels, and a proper map.
import numpy as np

from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.szego import admissible_base, szego_kernel, garabedian_kernel, szego_solution
from szegokit.representation import ReprEvaluator, szego_via_repr, garabedian_via_repr, caratheodory_density
from szegokit.propermap import BivarPoly, proper_from_pair
from szegokit.ahlfors import interior_samples

dom = make_preset_domain("blob3", [0.05, 0.1])   # perturbed disc with two perturbed holes
grid = boundary_grid(dom, 256)
print(dom.name, "connectivity", dom.connectivity)

basis = admissible_base(grid, 0.1 + 0.1j, -0.016 - 0.448j)
ev = ReprEvaluator(basis)                    # S and L rebuilt from f_a, f_b and boundary traces

z, w = interior_samples(grid, 2, np.random.default_rng(5), 0.1)   # two points well inside the domain
print("S direct ", szego_kernel(grid, z, w))
print("S repr   ", szego_via_repr(ev, z, w))
print("L direct ", garabedian_kernel(szego_solution(grid, w), z))
print("L repr   ", garabedian_via_repr(ev, z, w))
print("Caratheodory density at z:", caratheodory_density(grid, z))

# the polynomial z w - 4 is zero free on the closed bidisc, so q/p is a proper map
p = BivarPoly([[-4, 0], [0, 1]])
g = proper_from_pair(p, basis)
print(g.report())                            # boundary modulus and valence
