"""Free multiplicative convolution by subordination, T- and S-transforms, stable laws.

The main entry points are

* `parse_measure` and the measure classes in `freemult.measures`,
* `convolve` and `free_mult_convolution` for μ⊠ν,
* `t_transform`, `s_transform` and `classify` for T- and S-transforms,
* `free_additive_power`, `boolean_power` and `multiplicative_power_positive`,
* `free_stable_cauchy` and the stable densities,
* `sample_spectrum` and `ks_distance` for random-matrix checks.
"""

from .measures import (Atomic, BooleanStable, CauchyDist, Dilation, FreeStable, GridDensity,
                       MarchenkoPastur, Measure, MeasureError, PointMass, Semicircle,
                       TransformError, cauchy_transform, format_measure, parse_measure,
                       stieltjes_invert_density)
from .powers import (FreePoissonPower, boolean_power, dilation, free_additive_power,
                     multiplicative_power_positive)
from .rmt import haar_unitary, ks_distance, sample_spectrum
from .stable import (boolean_stable_density, free_stable_cauchy, free_stable_density,
                     levy_density, mixture_eta)
from .stransform import classify, closed_form_s, s_transform, t_transform
from .subordination import b_map, convolve, free_mult_convolution, subordinate

__version__ = "0.1.0"

__all__ = [
    "Atomic", "BooleanStable", "CauchyDist", "Dilation", "FreeStable", "GridDensity",
    "MarchenkoPastur", "Measure", "MeasureError", "PointMass", "Semicircle",
    "TransformError", "cauchy_transform", "format_measure", "parse_measure",
    "stieltjes_invert_density", "FreePoissonPower", "boolean_power", "dilation",
    "free_additive_power", "multiplicative_power_positive", "haar_unitary", "ks_distance",
    "sample_spectrum", "boolean_stable_density", "free_stable_cauchy", "free_stable_density",
    "levy_density", "mixture_eta", "classify", "closed_form_s", "s_transform", "t_transform",
    "b_map", "convolve", "free_mult_convolution", "subordinate",
]
