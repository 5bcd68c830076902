# Green function, Poisson kernel and the Bergman factorization on the annulus.
import numpy as np

from szegokit.geometry import boundary_grid, make_preset_domain
from szegokit.szego import admissible_base
from szegokit.potential import (PotentialSystem, poisson_kernel, greens_w_representation,
                                greens_w_derivative, linearization_check, bergman_factor_rank)

grid = boundary_grid(make_preset_domain("annulus", [0.5]), 256)
P = PotentialSystem(grid, admissible_base(grid, 0.7, 0.6j))

z, w = 0.6 + 0.3j, -0.2 - 0.7j
print("G_w direct        ", greens_w_derivative(P, z, w))
print("G_w representation", greens_w_representation(P, z, w))

p = poisson_kernel(P, z)                     # boundary density, one value per node
print("Poisson kernel min", p.min())          # positive everywhere on the boundary

rep = linearization_check(P, [z, w], [0, 40, 300], rank_size=8)
print("linearized Poisson identity, max residual", rep["max_residual"])
print("  singular values", np.round(rep["singular_values"], 12))

srep, M, _ = bergman_factor_rank(P, grid_size=24)
d = srep.as_dict()
print("Bergman factor matrix rank", d["rank"], " tail", d["tail"])   # K(z,w)/S(z,w)^2 separates with finite rank
