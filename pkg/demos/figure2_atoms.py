"""
An atom at zero
===============

ν = ½δ₁ + ½δ₀ puts half its mass at 0, so μ⊠ν keeps an atom of mass ½
at the origin whatever μ is. Here μ = ⅓δ₁ + ⅔δ₋₂, and the weights
at -2 (⅔ in μ, ½ at 1 in ν) add up past one, which leaves a second atom
of mass ⅔ + ½ - 1 = ⅙ at -2.
"""

import numpy as np

from freemult.measures import Atomic
from freemult.subordination import convolve

mu = Atomic([1.0, -2.0], [1 / 3, 2 / 3])
nu = Atomic([1.0, 0.0], [0.5, 0.5])

x = np.linspace(-3, 1.5, 1801)
result = convolve(mu, nu, x)

print("atom at 0: %.12f" % result.atom_at_zero)
print("all atoms:", result.atoms)
print("mass (atoms + density): %.6f" % result.total_mass())

# the absolutely continuous part carries the remaining third
print("density at -1.5, -0.5, 0.5:", np.round(result.density([-1.5, -0.5, 0.5]), 6))
