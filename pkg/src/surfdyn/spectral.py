"""Neron-Severi lattice data: pullback isometries, entropy, nef eigenclasses.

Everything here is exact.  Characteristic polynomials come from Berkowitz's
division-free algorithm; real roots are isolated with Sturm sequences over
Fractions.  When the dominant eigenvalue is a quadratic unit the whole
eigen-decomposition is carried out in :class:`QuadNum` arithmetic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import AmbiguousCone, InfeasibleConfiguration, NullEntropy
from .exact_arith import QuadNum, quad_char_root

# ---------------------------------------------------------------------------
# small exact linear algebra
# ---------------------------------------------------------------------------


def _int_matrix(m) -> tuple:
    rows = tuple(tuple(int(v) for v in row) for row in m)
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise ValueError("matrix must be square")
    return rows


def matmul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    return tuple(tuple(sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m))
                 for i in range(n))


def transpose(A):
    return tuple(zip(*A))


def matvec(A, v):
    return tuple(sum((A[i][j] * v[j] for j in range(len(v))), 0 * v[0]) for i in range(len(A)))


def identity(n):
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def charpoly(M) -> list[int]:
    """Coefficients [1, c1, ..., cn] of det(tI - M) (Berkowitz, division free)."""
    A = [list(r) for r in M]
    n = len(A)
    vect = [1]
    for r in range(n):
        # Toeplitz column for the leading (r+1)x(r+1) block
        R = A[r][:r]                      # row r, columns < r
        S = [A[i][r] for i in range(r)]   # column r, rows < r
        Ablk = [row[:r] for row in A[:r]]
        a = A[r][r]
        col = [1, -a]
        powvec = S[:]
        for _ in range(r):
            col.append(-sum(R[i] * powvec[i] for i in range(r)))
            powvec = [sum(Ablk[i][j] * powvec[j] for j in range(r)) for i in range(r)]
        # multiply lower-triangular Toeplitz(col) by vect
        new = []
        for i in range(r + 2):
            new.append(sum(col[i - j] * vect[j] for j in range(len(vect)) if 0 <= i - j < len(col)))
        vect = new
    return vect


def determinant(M) -> int:
    n = len(M)
    cp = charpoly(M)
    return (-1) ** n * cp[-1]


def _poly_eval(p, x):
    acc = 0
    for c in p:
        acc = acc * x + c
    return acc


def _poly_rem(a, b):
    a = [Fraction(c) for c in a]
    while len(a) >= len(b):
        if a[0] == 0:
            a.pop(0)
            continue
        q = a[0] / b[0]
        for i in range(len(b)):
            a[i] -= q * b[i]
        a.pop(0)
    while a and a[0] == 0:
        a.pop(0)
    return a


def _poly_deriv(p):
    n = len(p) - 1
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def _squarefree(p):
    """p / gcd(p, p') over Q."""
    a, b = [Fraction(c) for c in p], [Fraction(c) for c in _poly_deriv(p)]
    while b:
        a, b = b, _poly_rem(a, b)
    g = a
    if len(g) <= 1:
        return [Fraction(c) for c in p]
    q, rem = poly_divmod(p, g)
    return q


def poly_divmod(a, b):
    a = [Fraction(c) for c in a]
    q = []
    while len(a) >= len(b):
        c = a[0] / b[0]
        q.append(c)
        for i in range(len(b)):
            a[i] -= c * b[i]
        a.pop(0)
    return q, a


def sturm_sequence(p):
    seq = [[Fraction(c) for c in p], [Fraction(c) for c in _poly_deriv(p)]]
    while True:
        r = _poly_rem(seq[-2], seq[-1])
        if not r:
            break
        seq.append([-c for c in r])
    return seq


def _sign_changes(seq, x):
    vals = [_poly_eval(s, x) for s in seq]
    vals = [v for v in vals if v != 0]
    return sum(1 for a, b in zip(vals, vals[1:]) if (a > 0) != (b > 0))


def real_roots(p, tol=Fraction(1, 2 ** 60)) -> list[Fraction]:
    """Isolate and refine every real root of the integer polynomial ``p``.

    Returns midpoints of isolating intervals of width <= ``tol``.
    """
    sf = _squarefree(p)
    if len(sf) <= 1:
        return []
    seq = sturm_sequence(sf)
    bound = 1 + max(abs(Fraction(c) / sf[0]) for c in sf[1:])
    out = []

    def count(lo, hi):
        return _sign_changes(seq, lo) - _sign_changes(seq, hi)

    stack = [(-bound, bound)]
    while stack:
        lo, hi = stack.pop()
        k = count(lo, hi)
        if k == 0:
            continue
        if k == 1:
            while hi - lo > tol:
                mid = (lo + hi) / 2
                if _poly_eval(sf, mid) == 0:
                    lo = hi = mid
                    break
                if count(lo, mid) == 1:
                    hi = mid
                else:
                    lo = mid
            out.append((lo + hi) / 2)
            continue
        mid = (lo + hi) / 2
        if _poly_eval(sf, mid) == 0:
            out.append(mid)
            stack.append((lo, mid - tol / 4))
            stack.append((mid + tol / 4, hi))
        else:
            stack.append((lo, mid))
            stack.append((mid, hi))
    return sorted(out)


def rref(rows):
    """Reduced row echelon form over a field (entries support + - * /)."""
    A = [list(r) for r in rows]
    m = len(A)
    n = len(A[0]) if m else 0
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c] if not isinstance(A[r][c], QuadNum) else A[r][c].inverse()
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A, pivots


def nullspace(rows, zero, one):
    A, piv = rref(rows)
    n = len(rows[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for fcol in free:
        v = [zero] * n
        v[fcol] = one
        for i, pc in enumerate(piv):
            v[pc] = -A[i][fcol]
        basis.append(v)
    return basis


def _primitive_int(vec) -> tuple:
    den = math.lcm(*[Fraction(x).denominator for x in vec])
    ints = [int(Fraction(x) * den) for x in vec]
    g = math.gcd(*ints)
    if g == 0:
        return tuple(ints)
    return tuple(i // g for i in ints)


# ---------------------------------------------------------------------------
# lattice and classes
# ---------------------------------------------------------------------------

def signature(gram) -> tuple[int, int, int]:
    """(n_plus, n_minus, n_zero) of a symmetric rational matrix, by congruence."""
    A = [[Fraction(v) for v in row] for row in gram]
    n = len(A)
    pos = neg = 0
    k = 0
    while k < n:
        size = n - k
        if size == 0:
            break
        # find a usable pivot on the diagonal of the trailing block
        piv = next((i for i in range(k, n) if A[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in range(k, n) for j in range(i + 1, n) if A[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # e_i <- e_i + e_j makes the diagonal entry 2 A_ij != 0
            for t in range(n):
                A[i][t] += A[j][t]
            for t in range(n):
                A[t][i] += A[t][j]
            piv = i
        A[k], A[piv] = A[piv], A[k]
        for row in A:
            row[k], row[piv] = row[piv], row[k]
        d = A[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        for i in range(k + 1, n):
            f = A[i][k] / d
            if f:
                for t in range(k, n):
                    A[i][t] -= f * A[k][t]
        for i in range(k + 1, n):
            A[k][i] = Fraction(0)
            A[i][k] = Fraction(0)
        k += 1
    return pos, neg, n - pos - neg


@dataclass(frozen=True)
class NSLattice:
    """Intersection form on a chosen basis of N^1(X)."""

    gram: tuple
    basis_labels: tuple = ()
    ample: tuple | None = None

    def __post_init__(self):
        g = _int_matrix(self.gram)
        if any(g[i][j] != g[j][i] for i in range(len(g)) for j in range(len(g))):
            raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "gram", g)
        labels = tuple(self.basis_labels) or tuple(f"H{i + 1}" for i in range(len(g)))
        object.__setattr__(self, "basis_labels", labels)
        if self.ample is not None:
            object.__setattr__(self, "ample", tuple(int(v) for v in self.ample))
        p, q, z = signature(g)
        if (p, q, z) != (1, len(g) - 1, 0):
            raise ValueError(f"intersection form has signature {(p, q, z)}, expected (1, {len(g) - 1})")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def pair(self, u, v):
        return sum((u[i] * self.gram[i][j] * v[j] for i in range(self.rank) for j in range(self.rank)),
                   0 * u[0] * v[0])

    def cls(self, coeffs) -> "DivisorClass":
        return DivisorClass(tuple(coeffs), self)

    def to_json(self) -> dict:
        out = {"gram": [list(r) for r in self.gram], "basis_labels": list(self.basis_labels)}
        if self.ample is not None:
            out["ample"] = list(self.ample)
        return out


@dataclass(frozen=True)
class DivisorClass:
    """Real divisor class with exact coefficients (int, Fraction or QuadNum)."""

    coeffs: tuple
    lattice: NSLattice = field(repr=False, compare=False)

    def __post_init__(self):
        ds = {c.d for c in self.coeffs if isinstance(c, QuadNum)}
        if len(ds) > 1:
            raise ValueError("coefficients lie in different quadratic fields")
        if len(self.coeffs) != self.lattice.rank:
            raise ValueError("coefficient vector has the wrong length")

    def pair(self, other) -> object:
        o = other.coeffs if isinstance(other, DivisorClass) else tuple(other)
        return self.lattice.pair(self.coeffs, o)

    def square(self):
        return self.pair(self)

    def __add__(self, other):
        return DivisorClass(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.lattice)

    def __sub__(self, other):
        return DivisorClass(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.lattice)

    def scale(self, c):
        return DivisorClass(tuple(c * a for a in self.coeffs), self.lattice)

    def conjugate(self):
        return DivisorClass(tuple(c.conjugate() if isinstance(c, QuadNum) else c
                                  for c in self.coeffs), self.lattice)

    def floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_json(self):
        return [c.to_json() if isinstance(c, QuadNum) else str(c) for c in self.coeffs]


@dataclass(frozen=True)
class PullbackMap:
    """Matrix of f^* on the lattice basis (columns are images of basis classes)."""

    matrix: tuple
    lattice: NSLattice

    def __post_init__(self):
        M = _int_matrix(self.matrix)
        object.__setattr__(self, "matrix", M)
        if len(M) != self.lattice.rank:
            raise ValueError("matrix size does not match lattice rank")
        if not is_isometry(M, self.lattice.gram):
            raise ValueError("pullback matrix is not an isometry of the intersection form")
        if abs(determinant(M)) != 1:
            raise ValueError("pullback matrix must have determinant +-1")

    def apply(self, v):
        c = v.coeffs if isinstance(v, DivisorClass) else tuple(v)
        out = matvec(self.matrix, c)
        return DivisorClass(out, self.lattice) if isinstance(v, DivisorClass) else out

    def inverse(self) -> "PullbackMap":
        return PullbackMap(integer_inverse(self.matrix), self.lattice)

    def compose(self, other: "PullbackMap") -> "PullbackMap":
        return PullbackMap(matmul(self.matrix, other.matrix), self.lattice)

    def to_json(self) -> dict:
        return {"matrix": [list(r) for r in self.matrix], **self.lattice.to_json()}


def is_isometry(M, gram) -> bool:
    return matmul(matmul(transpose(M), gram), M) == tuple(tuple(r) for r in gram)


def integer_inverse(M):
    n = len(M)
    aug = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    inv = [[R[i][n + j] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in inv for v in row):
        raise ValueError("inverse is not integral")
    return tuple(tuple(int(v) for v in row) for row in inv)


# ---------------------------------------------------------------------------
# entropy and eigenclasses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyResult:
    lam: object            # QuadNum when exact, else Fraction approximation
    lam_float: float
    h_top: float
    exact: bool
    tau: int | None
    eigenvalue_sign: int   # sign of the dominant real eigenvalue
    charpoly: tuple

    def to_json(self) -> dict:
        return {"lambda": self.lam.to_json() if self.exact else str(float(self.lam)),
                "lambda_float": self.lam_float, "h_top": self.h_top, "exact": self.exact,
                "tau": self.tau, "charpoly": list(self.charpoly)}


def entropy(pullback: PullbackMap | Sequence) -> EntropyResult:
    """Spectral radius of f^* and h_top = log of it."""
    M = pullback.matrix if isinstance(pullback, PullbackMap) else _int_matrix(pullback)
    cp = charpoly(M)
    roots = real_roots(cp)
    # complex roots of integer isometries of hyperbolic lattices lie on the unit circle;
    # numpy is only a guard against matrices outside that class
    cx = np.roots([float(c) for c in cp]) if len(cp) > 1 else np.array([])
    if not roots:
        raise NullEntropy("no real eigenvalue; spectral radius is 1")
    r = max(roots, key=lambda x: abs(x))
    if abs(r) <= 1:
        raise NullEntropy("spectral radius <= 1")
    if len(cx) and max(abs(cx)) > abs(float(r)) * (1 + 1e-9):
        raise ValueError("dominant eigenvalue is not real; not the pullback of an automorphism")
    sign = 1 if r > 0 else -1
    tau = round(float(r + 1 / r))
    if abs(tau) > 2:
        q, rem = poly_divmod(cp, [1, -tau, 1])
        if all(c == 0 for c in rem):
            lam = quad_char_root(abs(tau))
            lf = float(lam)
            return EntropyResult(lam, lf, math.log(lf), True, tau, sign, tuple(cp))
    lam = abs(r)
    lf = float(lam)
    return EntropyResult(lam, lf, math.log(lf), False, None, sign, tuple(cp))


def _normalize_eigvec(vec):
    """Scale so the nonzero coordinate of least absolute value is +-1."""
    nz = [(abs(c), i) for i, c in enumerate(vec) if c != 0]
    m = min(nz, key=lambda t: (t[0], t[1]))[1]
    scale = abs(vec[m]).inverse() if isinstance(vec[m], QuadNum) else 1 / abs(vec[m])
    return [c * scale for c in vec]


@dataclass(frozen=True)
class NefEigenclasses:
    nu_plus: DivisorClass
    nu_minus: DivisorClass
    nu: DivisorClass
    lam: object
    nu_square: object

    def to_json(self) -> dict:
        sq = self.nu_square
        return {"nu_plus": self.nu_plus.to_json(), "nu_minus": self.nu_minus.to_json(),
                "nu": self.nu.to_json(),
                "nu_square": sq.to_json() if isinstance(sq, QuadNum) else str(sq),
                "lambda": self.lam.to_json() if isinstance(self.lam, QuadNum) else str(self.lam)}


def _eigvec_exact(M, ev: QuadNum):
    n = len(M)
    rows = [[QuadNum.rational(M[i][j], ev.d) - (ev if i == j else 0) for j in range(n)]
            for i in range(n)]
    ns = nullspace(rows, QuadNum.rational(0, ev.d), QuadNum.rational(1, ev.d))
    if len(ns) != 1:
        raise ValueError(f"eigenspace has dimension {len(ns)}, expected 1")
    return ns[0]


def _power_iteration(M, inverse=False, tol=1e-12, maxit=10_000):
    A = np.array(M, dtype=float)
    if inverse:
        A = np.linalg.inv(A)
    v = np.ones(len(A))
    for _ in range(maxit):
        w = A @ v
        w /= np.linalg.norm(w)
        if np.linalg.norm(w - v) < tol or np.linalg.norm(w + v) < tol:
            return w
        v = w
    return v


def nef_eigenclasses(pullback: PullbackMap, lattice: NSLattice | None = None,
                     ample=None) -> NefEigenclasses:
    """Nef eigenclasses nu_+ (eigenvalue lambda) and nu_- (eigenvalue 1/lambda).

    Sign is fixed by positive pairing with ``ample`` (default: the lattice's
    ample class).  For quadratic lambda everything is exact; otherwise real
    power iteration is used and the coefficients are floats.
    """
    lattice = lattice or pullback.lattice
    ample = ample if ample is not None else lattice.ample
    if ample is None:
        raise AmbiguousCone("no ample reference class to fix the sign of the eigenvectors")
    ent = entropy(pullback)
    M = pullback.matrix
    if ent.exact:
        lam = ent.lam if ent.eigenvalue_sign > 0 else -ent.lam
        vp = _normalize_eigvec(_eigvec_exact(M, lam))
        vm = _normalize_eigvec(_eigvec_exact(M, lam.inverse()))
        out = []
        for v in (vp, vm):
            s = lattice.pair(v, ample)
            if s == 0:
                raise AmbiguousCone("eigenvector orthogonal to the ample reference")
            out.append(v if s > 0 else [-c for c in v])
        vp, vm = out
    else:
        vp = _power_iteration(M)
        vm = _power_iteration(M, inverse=True)
        vp = [float(c) for c in vp / np.min(np.abs(vp[np.abs(vp) > 1e-14]))]
        vm = [float(c) for c in vm / np.min(np.abs(vm[np.abs(vm) > 1e-14]))]
        vp = vp if lattice.pair(vp, ample) > 0 else [-c for c in vp]
        vm = vm if lattice.pair(vm, ample) > 0 else [-c for c in vm]
    nup = DivisorClass(tuple(vp), lattice)
    num = DivisorClass(tuple(vm), lattice)
    nu = nup + num
    sq = nu.square()
    if (sq.sign() if isinstance(sq, QuadNum) else (sq > 0) - (sq < 0)) <= 0:
        raise ValueError("(nu^2) is not positive; input is not an entropy-positive isometry")
    return NefEigenclasses(nup, num, nu, ent.lam, sq)


def integral_nu(eig: NefEigenclasses) -> DivisorClass:
    """Primitive integral class proportional to c*nu_+ + conj(c*nu_+) (quadratic lambda).

    c is 1 or sqrt(d), whichever makes the Galois conjugate nef against the
    ample reference; the sum is Galois invariant hence rational.
    """
    lat = eig.nu_plus.lattice
    first = next(c for c in eig.nu_plus.coeffs if isinstance(c, QuadNum))
    d = first.d
    for c in (QuadNum.rational(1, d), QuadNum.sqrt(d)):
        v = eig.nu_plus.scale(c)
        w = v.conjugate()
        if _sign(w.pair(lat.ample)) > 0:
            s = v + w
            vals = [x.a if isinstance(x, QuadNum) else Fraction(x) for x in s.coeffs]
            return DivisorClass(_primitive_int(vals), lat)
    raise AmbiguousCone("no Galois-stable nef normalization found")


# ---------------------------------------------------------------------------
# curves orthogonal to nu, ample perturbation
# ---------------------------------------------------------------------------

def _sign(x) -> int:
    if isinstance(x, QuadNum):
        return x.sign()
    return (x > 0) - (x < 0)


@dataclass(frozen=True)
class PeriodicCurveVerdict:
    periodic: bool
    pairing_nu: object
    pairing_plus: object
    pairing_minus: object
    degenerate: bool


def periodic_curve_test(eig: NefEigenclasses, c) -> PeriodicCurveVerdict:
    """(nu, [C]) == 0 exactly; both (nu_+, C) and (nu_-, C) are reported."""
    coeffs = c.coeffs if isinstance(c, DivisorClass) else tuple(c)
    pn = eig.nu.pair(coeffs)
    pp = eig.nu_plus.pair(coeffs)
    pm = eig.nu_minus.pair(coeffs)
    return PeriodicCurveVerdict(pn == 0, pn, pp, pm, all(v == 0 for v in coeffs))


def null_curve_set(nu: DivisorClass, candidates: Sequence) -> list:
    """The candidate classes C with (nu, C) = 0."""
    out = []
    for c in candidates:
        coeffs = c.coeffs if isinstance(c, DivisorClass) else tuple(c)
        if nu.pair(coeffs) == 0:
            out.append(c)
    return out


def orthogonal_complement(classes: Sequence[DivisorClass]) -> list[tuple]:
    """Integral basis of the rational classes orthogonal to every given class."""
    lat = classes[0].lattice
    rows = []
    for cl in classes:
        g = [sum((cl.coeffs[i] * lat.gram[i][j] for i in range(lat.rank)), 0 * cl.coeffs[0])
             for j in range(lat.rank)]
        rows.append([x.a if isinstance(x, QuadNum) else Fraction(x) for x in g])
        rows.append([x.b if isinstance(x, QuadNum) else Fraction(0) for x in g])
    basis = nullspace(rows, Fraction(0), Fraction(1))
    return [_primitive_int(v) for v in basis]


@dataclass(frozen=True)
class Perturbation:
    Z: tuple              # rational coefficients over the lattice basis
    weights: tuple        # a_i with Z = sum a_i C_i
    eps_max: Fraction | None   # None stands for +infinity

    def to_json(self) -> dict:
        return {"Z": [str(v) for v in self.Z], "weights": [str(v) for v in self.weights],
                "eps_max": "inf" if self.eps_max is None else str(self.eps_max)}


def _solve_weights(G):
    """Positive a with G a <= 0 componentwise, for a negative semidefinite Gram G."""
    m = len(G)
    try:
        aug = [[Fraction(G[i][j]) for j in range(m)] + [Fraction(-1)] for i in range(m)]
        R, piv = rref(aug)
        if piv == list(range(m)):
            a = [R[i][m] for i in range(m)]
            if all(x > 0 for x in a):
                return a
    except ZeroDivisionError:
        pass
    from scipy.optimize import linprog
    res = linprog(c=np.ones(m), A_ub=np.array(G, dtype=float), b_ub=np.zeros(m),
                  bounds=[(1, None)] * m, method="highs")
    if not res.success:
        raise InfeasibleConfiguration("no positive weights with (Z, C_j) <= 0")
    a = [Fraction(x).limit_denominator(10 ** 6) for x in res.x]
    if any(x <= 0 for x in a) or any(sum(G[i][j] * a[j] for j in range(m)) > 0 for i in range(m)):
        raise InfeasibleConfiguration("LP weights fail exact verification")
    return a


def ample_perturbation(nu: DivisorClass, curves: Sequence, lattice: NSLattice | None = None,
                       denom_bits: int = 16) -> Perturbation:
    """Effective Z supported on the null curves with nu - eps*Z positive on all of them.

    Strip-and-repeat: pick positive weights with (Z1, C_j) <= 0; the curves with
    (Z1, C_j) = 0 stay null for nu - eps*Z1 and get a further, smaller correction.
    Returns the largest eps = k / 2**denom_bits for which (nu - eps Z)^2 > 0 and
    (nu - eps Z, C_j) > 0 for every supplied curve.
    """
    lattice = lattice or nu.lattice
    cls = [tuple(c.coeffs if isinstance(c, DivisorClass) else c) for c in curves]
    rank = lattice.rank
    if not cls:
        return Perturbation(tuple(Fraction(0) for _ in range(rank)), (), None)
    if any(nu.pair(c) != 0 for c in cls):
        raise InfeasibleConfiguration("supplied curve is not orthogonal to nu")
    m = len(cls)
    G = [[lattice.pair(cls[i], cls[j]) for j in range(m)] for i in range(m)]
    p, q, z = signature(G)
    if p > 0:
        raise InfeasibleConfiguration("Gram matrix of the null curves is not negative semidefinite")

    weights = [Fraction(0)] * m
    active = list(range(m))
    scale = Fraction(1)
    while active:
        sub = [[G[i][j] for j in active] for i in active]
        a = _solve_weights(sub)
        # keep earlier strict inequalities strict
        step = [Fraction(0)] * m
        for idx, val in zip(active, a):
            step[idx] = val
        while True:
            trial = [w + scale * s for w, s in zip(weights, step)]
            pair = [sum(G[i][j] * trial[j] for j in range(m)) for i in range(m)]
            if all(pair[i] < 0 for i in range(m) if i not in active):
                break
            scale /= 2
        weights = trial
        new_active = [i for i in active if pair[i] == 0]
        if len(new_active) == len(active):
            raise InfeasibleConfiguration("strip-and-repeat made no progress")
        active = new_active
        scale /= 2
    den = math.lcm(*[w.denominator for w in weights])
    weights = [w * den for w in weights]
    g = math.gcd(*[int(w) for w in weights])
    weights = [w / g for w in weights]
    Z = tuple(sum(weights[i] * cls[i][k] for i in range(m)) for k in range(rank))

    def ok(eps):
        v = [c - eps * zc for c, zc in zip(nu.coeffs, Z)]
        if _sign(lattice.pair(v, v)) <= 0:
            return False
        return all(_sign(lattice.pair(v, c)) > 0 for c in cls)

    unit = Fraction(1, 2 ** denom_bits)
    if not ok(unit):
        raise InfeasibleConfiguration("no admissible eps at the requested resolution")
    lo, hi = 1, 2
    while ok(hi * unit):
        lo, hi = hi, hi * 2
        if hi > 2 ** 80:
            return Perturbation(Z, tuple(weights), None)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid * unit):
            lo = mid
        else:
            hi = mid
    return Perturbation(Z, tuple(weights), lo * unit)
