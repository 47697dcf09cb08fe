"""Exact arithmetic dynamics of surface automorphisms: entropy, canonical heights, orbit counts."""
from .errors import *  # noqa: F401,F403
from .exact_arith import BigRat, ProjPoint, QuadNum, naive_height, normalize
from .surfaces import (SurfacePoint, TripleSurface, WehlerSurface, automorphism, find_points,
                       involution, on_surface)
from .spectral import (DivisorClass, NSLattice, PullbackMap, entropy, nef_eigenclasses,
                       ample_perturbation, periodic_curve_test)
from .heights import HeightSpec, canonical_heights, functional_equation_residual, height
from .dynamics import (count_orbit, counting_report, detect_periodic, orbit, periodic_scan)
from .mobius import MobiusMap, classify, fixed_points, growth_regime, p1_count

__version__ = "0.1.0"
