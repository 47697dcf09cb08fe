"""Built-in fixture surfaces and their Neron-Severi data.

N^1 is supplied, not computed: rank 2 with basis (H1, H2) for Wehler
surfaces, rank 3 with basis (H1, H2, H3) for (2,2,2) surfaces.
"""
from __future__ import annotations

from .spectral import NSLattice, PullbackMap, matmul
from .surfaces import TripleSurface, WehlerSurface

# H_i . H_j on X cut out by (1,1) and (2,2) forms: H1^2 = H2^2 = 2, H1.H2 = 4
WEHLER_GRAM = ((2, 4), (4, 2))
# sigma_1 fixes x: sigma_1^* H1 = H1, sigma_1^* H2 = 4 H1 - H2 (columns are images)
WEHLER_SIGMA = (
    ((1, 4), (0, -1)),
    ((-1, 0), (4, 1)),
)

# (2,2,2) in (P1)^3: H_i^2 = 0, H_i . H_j = 2
TRIPLE_GRAM = ((0, 2, 2), (2, 0, 2), (2, 2, 0))
# sigma_k varies factor k: sigma_k^* H_k = -H_k + 2 (sum of the other two)
TRIPLE_SIGMA = (
    ((-1, 0, 0), (2, 1, 0), (2, 0, 1)),
    ((1, 2, 0), (0, -1, 0), (0, 2, 1)),
    ((1, 0, 2), (0, 1, 2), (0, 0, -1)),
)

# Fixture surfaces.  L is the diagonal (1,1) form; the (2,2) part and the
# (2,2,2) form were drawn with small random coefficients and kept because
# every sampled fiber is nondegenerate and small rational points are plentiful.
WEHLER_L = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
WEHLER_Q = (
    (-1, 2, -2, 0, -2, 1),
    (1, 1, 1, -1, -2, 1),
    (-2, 1, 1, 2, -2, 1),
    (0, -1, 2, -2, 0, -2),
    (-2, -2, 2, -2, 1, -1),
    (1, -2, 2, -1, 1, 1),
)

TRIPLE_C = (
    ((-2, 1, 3), (3, 3, -3), (-1, -3, 0)),
    ((3, 0, 0), (2, 0, 3), (-2, -3, 0)),
    ((-3, 3, 0), (0, 1, 3), (3, -3, 2)),
)


def wehler_lattice() -> NSLattice:
    return NSLattice(WEHLER_GRAM, ("H1", "H2"), ample=(1, 1))


def triple_lattice() -> NSLattice:
    return NSLattice(TRIPLE_GRAM, ("H1", "H2", "H3"), ample=(1, 1, 1))


def involution_pullbacks(family: str) -> list[PullbackMap]:
    lat = lattice_for(family)
    mats = WEHLER_SIGMA if family == "wehler" else TRIPLE_SIGMA
    return [PullbackMap(m, lat) for m in mats]


def composite_pullback(family: str) -> PullbackMap:
    """f^* for f = sigma_n o ... o sigma_1, i.e. sigma_1^* sigma_2^* ... sigma_n^*."""
    sig = involution_pullbacks(family)
    M = sig[0].matrix
    for s in sig[1:]:
        M = matmul(M, s.matrix)
    return PullbackMap(M, lattice_for(family))


def lattice_for(family: str) -> NSLattice:
    if family == "wehler":
        return wehler_lattice()
    if family == "triple":
        return triple_lattice()
    raise ValueError(f"unknown family {family!r}")


def wehler_surface() -> WehlerSurface:
    return WehlerSurface(WEHLER_L, WEHLER_Q)


def triple_surface() -> TripleSurface:
    return TripleSurface(TRIPLE_C)


def surface(name: str):
    if name == "wehler":
        return wehler_surface()
    if name == "triple":
        return triple_surface()
    raise ValueError(f"unknown preset {name!r}")
