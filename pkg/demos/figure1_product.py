"""
Product of two symmetric Bernoulli laws
=======================================

μ = ½δ₁ + ½δ₋₃ and ν = ½δ₁ + ½δ₃. Their free multiplicative
convolution has no atoms and a density on two intervals. We recover it
numerically by subordination and compare with the closed form.
"""

import numpy as np

from freemult.measures import Atomic
from freemult.subordination import convolve
from freemult.twopoint import TwoPointPair, closed_form_density

mu = Atomic([1.0, -3.0], [0.5, 0.5])
nu = Atomic([1.0, 3.0], [0.5, 0.5])

# density on a grid covering the whole support
x = np.linspace(-10, 4, 2801)
result = convolve(mu, nu, x)

print("atoms:", result.atoms)
print("total mass: %.6f" % result.total_mass())
print("support edges:", [round(e, 6) for e, _ in result.diagnostics["edges"]])

# the closed form for two-atom pairs
pair = TwoPointPair(0.5, -3.0, 0.5, 3.0)
probe = np.array([-8.0, -6.0, -4.0, 1.5, 2.5])
exact = closed_form_density(pair, probe)
numeric = result.density(probe)
for p, a, b in zip(probe, numeric, exact):
    print(f"x={p:+.1f}  numeric={a:.10f}  closed form={b:.10f}")
