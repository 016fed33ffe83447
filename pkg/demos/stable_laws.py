"""
Boolean and free stable laws
============================

Densities of the two stable families and a numerical check of the
reproducing property b_{α,ρ} ⊠ (b_{β,1})^{⊠1/α} = b_{αβ,ρ}.
"""

import numpy as np

from freemult.identities import check_thm16
from freemult.stable import boolean_stable_density, free_stable_density

x = np.linspace(-3, 3, 7)
print("Boolean stable (0.8, 0.4):", np.round(boolean_stable_density(0.8, 0.4, x), 6))
print("free stable    (1.5, 0.5):", np.round(free_stable_density(1.5, 0.5, x).outputs, 6))

# α=2 is the standard semicircle on [-2, 2]
semi = free_stable_density(2.0, 0.5, np.array([0.0]))
print("free stable α=2 at 0: %.12f  (1/π = %.12f)" % (semi.outputs[0], 1 / np.pi))

for report in check_thm16(0.8, 0.9, 0.4, "boolean"):
    print(report.line())
