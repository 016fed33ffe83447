"""
S-transforms on (-1, 0)
=======================

The S-transform turns ⊠ into a product. We compute T = 1/S numerically
for a few laws, compare with known closed forms, and classify each law
by the ray its T-transform lives on.
"""

import numpy as np

from freemult.measures import BooleanStable, MarchenkoPastur, Semicircle
from freemult.stransform import classify, closed_form_s, s_transform

u = np.linspace(-0.9, -0.1, 9)

laws = {
    "Marchenko-Pastur": MarchenkoPastur(),
    "semicircle a=1.5": Semicircle(1.5, 1.0),
    "Boolean stable 0.7, 0.4": BooleanStable(0.7, 0.4),
}

for name, law in laws.items():
    samples = s_transform(law, u)
    numeric = np.array([s.S for s in samples])
    exact = closed_form_s(law, u)
    print(f"{name:26s} max |S - S_exact| = {np.max(np.abs(numeric - exact)):.2e}"
          f"   class: {classify(law)}")
