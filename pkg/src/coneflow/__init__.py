"""coneflow: geodesic excursion depths around cone points on hyperbolic 2-orbifolds.

Library layout:

* ``halfplane``   -- upper half-plane / unit-disc geometry and the tangency maps
* ``regions``     -- per-order constants and the endpoint-pair regions
* ``formulas``    -- closed forms for the region masses and the limiting depth laws
* ``integrals``   -- independent quadrature and Monte Carlo verification, audit report
* ``fuchsian``    -- concrete groups, normalization, fundamental-domain tiling walks
* ``excursions``  -- excursion enumeration along sampled geodesics, empirical laws
* ``cli``         -- command-line driver (eval / verify / simulate / area)
"""

__version__ = "0.1.0"

from .regions import ConeConstants, cone_constants
from .formulas import (
    approx_depth_cdf,
    approx_sublevel_mass,
    area_depth,
    area_depth_cdf,
    approx_area_depth_cdf,
    depth_cdf,
    depth_from_area,
    sublevel_mass,
)

__all__ = [
    "__version__",
    "ConeConstants",
    "cone_constants",
    "sublevel_mass",
    "approx_sublevel_mass",
    "depth_cdf",
    "approx_depth_cdf",
    "area_depth",
    "depth_from_area",
    "area_depth_cdf",
    "approx_area_depth_cdf",
]
