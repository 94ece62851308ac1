"""Finite Galois modules presented explicitly, and the almost-rationality
machinery that runs over them.

A module is a finite abelian group ⊕_i Z/d_i together with a finite group of
automorphisms given by integer matrices acting on column coordinate vectors.
A point p is almost rational when sigma(p) - p = p - tau(p) forces
sigma(p) = tau(p) = p over the whole automorphism group; equivalently the
difference set {sigma(p) - p} meets its own negation only in 0.  Both forms
are implemented: the difference-set test is the production predicate, the
literal two-quantifier double loop is kept as an independent oracle.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError, ResourceCapError
from .modarith import unit_group_generators
from .snf import smith_normal_form

DEFAULT_MAX_CLOSURE = 10 ** 6
DEFAULT_MAX_POINTS = 10 ** 7

Matrix = tuple[tuple[int, ...], ...]
Point = tuple[int, ...]


@dataclass(frozen=True, order=True)
class Automorphism:
    """A group automorphism as a k x k integer matrix, rows reduced mod d_i."""

    matrix: Matrix

    def __repr__(self):
        return f"Automorphism({list(map(list, self.matrix))})"


@dataclass(frozen=True)
class ARTReport:
    """Result of enumerating the almost-rational points of one module."""

    name: str
    points: int
    ar_points: tuple[Point, ...]
    expected: Optional[tuple[Point, ...]]
    verdict: str  # "pass" | "fail" | "not-checked"
    elapsed_ms: float

    def __post_init__(self):
        if self.expected is None:
            ok = self.verdict == "not-checked"
        else:
            ok = self.verdict == ("pass" if set(self.ar_points) == set(self.expected) else "fail")
        if not ok:
            raise InvalidInputError("ARTReport verdict inconsistent with its point sets")


@dataclass(frozen=True)
class Lemma4Audit:
    """Every two-step-unipotent automorphism must fix every almost-rational point."""

    name: str
    unipotent_count: int
    ar_count: int
    violations: tuple[tuple[Matrix, Point], ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def _reduce_rowwise(matrix: Sequence[Sequence[int]], factors: Sequence[int]) -> Matrix:
    return tuple(
        tuple(int(x) % factors[i] for x in row) for i, row in enumerate(matrix)
    )


def _identity_matrix(factors: Sequence[int]) -> Matrix:
    k = len(factors)
    return _reduce_rowwise(
        [[1 if i == j else 0 for j in range(k)] for i in range(k)], factors)


def _mat_mul_mod(a: Matrix, b: Matrix, factors: Sequence[int]) -> Matrix:
    k = len(factors)
    return tuple(
        tuple(sum(a[i][l] * b[l][j] for l in range(k)) % factors[i] for j in range(k))
        for i in range(k)
    )


def _check_well_defined(matrix: Matrix, factors: Sequence[int], label: str) -> None:
    k = len(factors)
    for i in range(k):
        for j in range(k):
            req = factors[i] // math.gcd(factors[i], factors[j])
            if matrix[i][j] % req != 0:
                raise InvalidInputError(
                    f"{label}: entry ({i + 1},{j + 1})={matrix[i][j]} must be divisible "
                    f"by {req} = d_{i + 1}/gcd(d_{i + 1}, d_{j + 1}) to define a "
                    f"homomorphism on Z/{factors[j]} -> Z/{factors[i]}")


class GaloisModule:
    """⊕_i Z/d_i with a finite automorphism group given by generator matrices.

    Validation happens at construction: every generator must satisfy the
    divisibility condition (d_i / gcd(d_i, d_j)) | A_ij and be invertible.
    The closure is computed lazily, cached, and capped.
    """

    def __init__(self, factors: Sequence[int], generators: Iterable[Sequence[Sequence[int]]],
                 name: str = "module", max_closure: int = DEFAULT_MAX_CLOSURE):
        if not factors or any((not isinstance(d, int)) or d < 1 for d in factors):
            raise InvalidInputError(f"{name}: factors must be integers >= 1, got {factors!r}")
        self.factors: tuple[int, ...] = tuple(int(d) for d in factors)
        self.name = name
        self.max_closure = max_closure
        k = len(self.factors)
        gens = []
        for idx, raw in enumerate(generators):
            mat = tuple(tuple(int(x) for x in row) for row in raw)
            if len(mat) != k or any(len(row) != k for row in mat):
                raise InvalidInputError(f"{name}: generator {idx} is not {k}x{k}")
            mat = _reduce_rowwise(mat, self.factors)
            _check_well_defined(mat, self.factors, f"{name}: generator {idx}")
            self._check_invertible(mat, idx)
            gens.append(Automorphism(mat))
        self.generators: tuple[Automorphism, ...] = tuple(gens)

    # -- group structure on points ------------------------------------

    @property
    def rank(self) -> int:
        return len(self.factors)

    @property
    def point_count(self) -> int:
        return math.prod(self.factors)

    def points(self) -> Iterable[Point]:
        return product(*(range(d) for d in self.factors))

    def zero(self) -> Point:
        return (0,) * len(self.factors)

    def add(self, p: Point, q: Point) -> Point:
        return tuple((a + b) % d for a, b, d in zip(p, q, self.factors))

    def neg(self, p: Point) -> Point:
        return tuple((-a) % d for a, d in zip(p, self.factors))

    def sub(self, p: Point, q: Point) -> Point:
        return tuple((a - b) % d for a, b, d in zip(p, q, self.factors))

    def scale(self, c: int, p: Point) -> Point:
        return tuple((c * a) % d for a, d in zip(p, self.factors))

    def order_of(self, p: Point) -> int:
        return math.lcm(*(d // math.gcd(d, a) for a, d in zip(p, self.factors)))

    def check_point(self, p: Point) -> Point:
        p = tuple(int(x) for x in p)
        if len(p) != len(self.factors) or any(not 0 <= a < d for a, d in zip(p, self.factors)):
            raise InvalidInputError(f"{self.name}: point {p} out of range for factors {self.factors}")
        return p

    # -- automorphisms --------------------------------------------------

    def identity(self) -> Automorphism:
        return Automorphism(_identity_matrix(self.factors))

    def compose(self, a: Automorphism, b: Automorphism) -> Automorphism:
        return Automorphism(_mat_mul_mod(a.matrix, b.matrix, self.factors))

    def _check_invertible(self, mat: Matrix, idx: int) -> None:
        ident = _identity_matrix(self.factors)
        if mat == ident:
            return
        seen = {mat}
        cur = mat
        for _ in range(self.max_closure + 1):
            cur = _mat_mul_mod(cur, mat, self.factors)
            if cur == ident:
                return
            if cur in seen:
                raise InvalidInputError(
                    f"{self.name}: generator {idx} is not invertible "
                    f"(its power semigroup never reaches the identity)")
            seen.add(cur)
        raise ResourceCapError(
            f"{self.name}: generator {idx} order exceeds the closure cap {self.max_closure}")

    @cached_property
    def closure(self) -> tuple[Automorphism, ...]:
        """The full automorphism group generated by the generators, sorted.

        Breadth-first products; identity always included; raises when the
        group would exceed max_closure.
        """
        ident = self.identity()
        seen = {ident.matrix}
        queue = [ident.matrix]
        gen_mats = [g.matrix for g in self.generators]
        while queue:
            nxt = []
            for m in queue:
                for g in gen_mats:
                    prod_m = _mat_mul_mod(m, g, self.factors)
                    if prod_m not in seen:
                        seen.add(prod_m)
                        if len(seen) > self.max_closure:
                            raise ResourceCapError(
                                f"{self.name}: closure exceeds cap {self.max_closure}")
                        nxt.append(prod_m)
            queue = nxt
        return tuple(Automorphism(m) for m in sorted(seen))

    def __repr__(self):
        return f"GaloisModule({self.name}: factors={self.factors}, gens={len(self.generators)})"


def validate_module(raw: dict, max_closure: int = DEFAULT_MAX_CLOSURE) -> GaloisModule:
    """Build a GaloisModule from a parsed module-description object.

    Expected fields: "name" (string), "factors" (array of ints), "galois"
    (array of k x k matrices; each either k rows of k ints or a flat
    row-major list of k*k ints).
    """
    if not isinstance(raw, dict):
        raise InvalidInputError("module description must be a JSON object")
    try:
        name = raw.get("name", "module")
        factors = raw["factors"]
        galois = raw.get("galois", [])
    except KeyError as exc:
        raise InvalidInputError(f"module description missing field {exc}") from exc
    if not isinstance(factors, (list, tuple)):
        raise InvalidInputError("'factors' must be an array of integers")
    if not isinstance(galois, (list, tuple)):
        raise InvalidInputError("'galois' must be an array of matrices")
    k = len(factors)
    mats = []
    for idx, m in enumerate(galois):
        if not isinstance(m, (list, tuple)):
            raise InvalidInputError(f"'galois[{idx}]' must be a matrix")
        if m and isinstance(m[0], (list, tuple)):
            mats.append(m)
        else:
            if len(m) != k * k:
                raise InvalidInputError(
                    f"'galois[{idx}]' flat matrix needs {k * k} entries, got {len(m)}")
            mats.append([m[i * k:(i + 1) * k] for i in range(k)])
    return GaloisModule(factors, mats, name=str(name), max_closure=max_closure)


def galois_closure(module: GaloisModule) -> tuple[Automorphism, ...]:
    return module.closure


def apply_automorphism(module: GaloisModule, a: Automorphism, p: Point) -> Point:
    """Coordinate i of the image is sum_j A_ij * c_j mod d_i."""
    return tuple(
        sum(row[j] * p[j] for j in range(len(p))) % d
        for row, d in zip(a.matrix, module.factors)
    )


def is_almost_rational(module: GaloisModule, p: Point) -> bool:
    """Difference-set predicate: D = {sigma(p) - p} must meet -D only in 0."""
    p = module.check_point(p)
    zero = module.zero()
    diffs = {module.sub(apply_automorphism(module, a, p), p) for a in module.closure}
    return not any(d != zero and module.neg(d) in diffs for d in diffs)


def is_almost_rational_naive(module: GaloisModule, p: Point) -> bool:
    """Literal two-quantifier oracle: loop over all (sigma, tau) pairs.

    Kept deliberately independent of the difference-set shortcut; the test
    suite checks the two always agree.
    """
    p = module.check_point(p)
    images = [apply_automorphism(module, a, p) for a in module.closure]
    for sp in images:
        for tp in images:
            if module.sub(sp, p) == module.sub(p, tp):
                if not (sp == p and tp == p):
                    return False
    return True


def _bulk_not_ar_indices(module: GaloisModule) -> np.ndarray:
    """Vectorized difference-set test over every point at once.

    Encodes points as mixed-radix codes, builds per-automorphism difference
    codes, and intersects each point's difference set with its negation via
    one offset-flattened intersect1d per chunk.  Exact integer arithmetic
    throughout; returns the sorted indices of the non-almost-rational points.
    """
    factors = module.factors
    k = len(factors)
    total = module.point_count
    d_vec = np.array(factors, dtype=np.int64)
    weights = np.ones(k, dtype=np.int64)
    for i in range(k - 2, -1, -1):
        weights[i] = weights[i + 1] * factors[i + 1]
    grids = np.meshgrid(*(np.arange(d, dtype=np.int64) for d in factors), indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(total, k)
    negmap = ((-pts) % d_vec) @ weights
    mats = [np.array(a.matrix, dtype=np.int64) for a in module.closure]
    s = len(mats)
    bad_idx: list[np.ndarray] = []
    chunk = max(1024, min(total, 4_000_000 // max(s, 1)))
    for start in range(0, total, chunk):
        block = pts[start:start + chunk]
        c = block.shape[0]
        d_codes = np.empty((s, c), dtype=np.int64)
        for si, mat in enumerate(mats):
            image = (block @ mat.T) % d_vec
            d_codes[si] = ((image - block) % d_vec) @ weights
        n_codes = negmap[d_codes]
        offsets = (np.arange(start, start + c, dtype=np.int64) * total)
        common = np.intersect1d((d_codes + offsets).ravel(), (n_codes + offsets).ravel())
        nonzero = common[common % total != 0]
        if nonzero.size:
            bad_idx.append(np.unique(nonzero // total))
    if not bad_idx:
        return np.empty(0, dtype=np.int64)
    return np.unique(np.concatenate(bad_idx))


def almost_rational_set(module: GaloisModule,
                        expected: Optional[Iterable[Point]] = None,
                        max_points: int = DEFAULT_MAX_POINTS) -> ARTReport:
    """Enumerate the almost-rational points, sorted, with optional comparison
    against an expected subgroup."""
    t0 = time.perf_counter()
    total = module.point_count
    if total > max_points:
        raise ResourceCapError(
            f"{module.name}: {total} points exceeds the cap {max_points}")
    closure_size = len(module.closure)
    if total * closure_size >= 20_000:
        not_ar = _bulk_not_ar_indices(module)
        bad = set(not_ar.tolist())
        ar = tuple(p for i, p in enumerate(module.points()) if i not in bad)
    else:
        ar = tuple(p for p in module.points() if is_almost_rational(module, p))
    elapsed = (time.perf_counter() - t0) * 1000.0
    if expected is None:
        return ARTReport(module.name, total, ar, None, "not-checked", elapsed)
    exp = tuple(sorted(module.check_point(p) for p in expected))
    verdict = "pass" if set(ar) == set(exp) else "fail"
    return ARTReport(module.name, total, ar, exp, verdict, elapsed)


# -- constructors -------------------------------------------------------


def cyclotomic_module(n: int, max_closure: int = DEFAULT_MAX_CLOSURE) -> GaloisModule:
    """mu_n: the group Z/n with (Z/nZ)^* acting by multiplication."""
    if n < 1:
        raise InvalidInputError(f"cyclotomic_module: n must be >= 1, got {n}")
    gens = [[[g]] for g in unit_group_generators(n)]
    return GaloisModule((n,), gens, name=f"mu_{n}", max_closure=max_closure)


def constant_module(n: int, max_closure: int = DEFAULT_MAX_CLOSURE) -> GaloisModule:
    """Z/n with trivial action: every point is rational."""
    if n < 1:
        raise InvalidInputError(f"constant_module: n must be >= 1, got {n}")
    return GaloisModule((n,), [], name=f"const_{n}", max_closure=max_closure)


def homothety_module(m: int, e: int, dim: int,
                     max_closure: int = DEFAULT_MAX_CLOSURE) -> GaloisModule:
    """(Z/m)^dim acted on by the e-th power homotheties u^e * Id."""
    if m < 1 or e < 1 or dim < 1:
        raise InvalidInputError(f"homothety_module: bad parameters {(m, e, dim)}")
    gens = []
    for u in unit_group_generators(m):
        scalar = pow(u, e, m)
        gens.append([[scalar if i == j else 0 for j in range(dim)] for i in range(dim)])
    return GaloisModule((m,) * dim, gens, name=f"hom_{m}_e{e}_d{dim}",
                        max_closure=max_closure)


def direct_sum(a: GaloisModule, b: GaloisModule,
               pairs: Optional[Sequence[tuple]] = None,
               name: Optional[str] = None) -> GaloisModule:
    """Concatenate two modules with block-diagonal generators.

    `pairs` lists the generators of the sum: each entry is a 2-tuple
    (matrix_on_a, matrix_on_b) with None meaning the identity on that block.
    The default pairs every generator of each summand with the identity on
    the other, i.e. the full product of the two Galois images.  Pass explicit
    pairs to realize a diagonal image when both actions factor through a
    common quotient.
    """
    if pairs is None:
        pairs = [(g.matrix, None) for g in a.generators]
        pairs += [(None, g.matrix) for g in b.generators]
    ka, kb = a.rank, b.rank
    gens = []
    for idx, pair in enumerate(pairs):
        if len(pair) != 2:
            raise InvalidInputError(
                f"direct_sum: pairing entry {idx} has {len(pair)} components, expected 2")
        left, right = pair
        left = a.identity().matrix if left is None else _as_matrix(left, ka, f"pair {idx} left")
        right = b.identity().matrix if right is None else _as_matrix(right, kb, f"pair {idx} right")
        block = [[0] * (ka + kb) for _ in range(ka + kb)]
        for i in range(ka):
            for j in range(ka):
                block[i][j] = left[i][j]
        for i in range(kb):
            for j in range(kb):
                block[ka + i][ka + j] = right[i][j]
        gens.append(block)
    return GaloisModule(a.factors + b.factors, gens,
                        name=name or f"{a.name}+{b.name}",
                        max_closure=max(a.max_closure, b.max_closure))


def _as_matrix(m, k: int, label: str) -> Matrix:
    if isinstance(m, Automorphism):
        m = m.matrix
    mat = tuple(tuple(int(x) for x in row) for row in m)
    if len(mat) != k or any(len(row) != k for row in mat):
        raise InvalidInputError(f"direct_sum: {label} is not {k}x{k}")
    return mat


def subgroup_span(module: GaloisModule, gens: Iterable[Point]) -> tuple[Point, ...]:
    """Additive closure of the given points (always contains zero), sorted."""
    seen = {module.zero()}
    queue = [module.zero()]
    gen_pts = [module.check_point(p) for p in gens]
    while queue:
        cur = queue.pop()
        for g in gen_pts:
            nxt = module.add(cur, g)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return tuple(sorted(seen))


@dataclass(frozen=True)
class QuotientPresentation:
    """A quotient module plus the projection from parent coordinates."""

    module: GaloisModule
    project: Callable[[Point], Point] = field(compare=False)


def quotient_presentation(module: GaloisModule, sub: Sequence[Point],
                          name: Optional[str] = None) -> QuotientPresentation:
    """Present module/⟨sub⟩ in invariant-factor coordinates.

    `sub` lists the elements of the subgroup (zero may be omitted); every
    closure element must map each listed point back into the list, otherwise
    the offending automorphism is named.  The new basis comes from the Smith
    normal form of the relation matrix [diag(d) | sub]; the induced action is
    U A U^{-1} restricted to the nontrivial coordinates.
    """
    sub_pts = [module.check_point(p) for p in sub]
    candidate = set(sub_pts) | {module.zero()}
    for a in module.closure:
        for h in sub_pts:
            img = apply_automorphism(module, a, h)
            if img not in candidate:
                raise InvalidInputError(
                    f"{module.name}: subgroup not Galois-stable; automorphism "
                    f"{list(map(list, a.matrix))} sends {h} to {img}, "
                    f"which is not in the subgroup")
    span = subgroup_span(module, sub_pts)
    k = module.rank
    relations = [[0] * (k + len(sub_pts)) for _ in range(k)]
    for i, d in enumerate(module.factors):
        relations[i][i] = d
    for j, h in enumerate(sub_pts):
        for i in range(k):
            relations[i][k + j] = h[i]
    diag, u, uinv = smith_normal_form(relations)
    new_d = [diag[i][i] for i in range(k)]
    assert all(d >= 1 for d in new_d), "quotient of a finite group must be finite"
    keep = [i for i in range(k) if new_d[i] > 1]
    if not keep:
        keep = [k - 1]  # trivial quotient, presented as Z/1
    new_factors = tuple(new_d[i] for i in keep)

    def project(p: Point) -> Point:
        p = module.check_point(p)
        return tuple(
            sum(u[i][j] * p[j] for j in range(k)) % new_d[i] for i in keep)

    new_gens = []
    for g in module.generators:
        conj = _int_mat_mul(_int_mat_mul(u, [list(r) for r in g.matrix]), uinv)
        new_gens.append([[conj[i][j] for j in keep] for i in keep])
    qname = name or f"{module.name}/sub{len(span)}"
    qmod = GaloisModule(new_factors, new_gens, name=qname, max_closure=module.max_closure)
    assert qmod.point_count * len(span) == module.point_count
    return QuotientPresentation(qmod, project)


def quotient_by(module: GaloisModule, sub: Sequence[Point],
                name: Optional[str] = None) -> GaloisModule:
    """The quotient of the module by the Galois-stable subgroup spanned by sub."""
    return quotient_presentation(module, sub, name=name).module


def _int_mat_mul(a, b):
    n, m, c = len(a), len(b[0]), len(b)
    return [[sum(a[i][l] * b[l][j] for l in range(c)) for j in range(m)] for i in range(n)]


# -- lemma audits --------------------------------------------------------


def two_step_unipotents(module: GaloisModule) -> tuple[Automorphism, ...]:
    """All closure elements with (sigma - 1)^2 = 0 as an endomorphism."""
    k = module.rank
    out = []
    for a in module.closure:
        m = [[a.matrix[i][j] - (1 if i == j else 0) for j in range(k)] for i in range(k)]
        sq = _int_mat_mul(m, m)
        if all(sq[i][j] % module.factors[i] == 0 for i in range(k) for j in range(k)):
            out.append(a)
    return tuple(out)


def lemma4_audit(module: GaloisModule, max_points: int = DEFAULT_MAX_POINTS) -> Lemma4Audit:
    """Check that every two-step-unipotent automorphism fixes every a.r. point."""
    unipotents = two_step_unipotents(module)
    ar = almost_rational_set(module, max_points=max_points).ar_points
    violations = []
    for a in unipotents:
        for p in ar:
            if apply_automorphism(module, a, p) != p:
                violations.append((a.matrix, p))
    return Lemma4Audit(module.name, len(unipotents), len(ar), tuple(violations))


def halving_exclusion(module: GaloisModule, p: Point,
                      subgroup: Sequence[Automorphism]) -> bool:
    """True when some sigma in the subgroup fixes 2p but moves p; such a point
    cannot be almost rational."""
    p = module.check_point(p)
    closure_set = set(module.closure)
    for a in subgroup:
        if a not in closure_set:
            raise InvalidInputError(
                f"{module.name}: automorphism {list(map(list, a.matrix))} is not in the closure")
    two_p = module.add(p, p)
    for a in subgroup:
        if (apply_automorphism(module, a, two_p) == two_p
                and apply_automorphism(module, a, p) != p):
            return True
    return False


def fixed_points(module: GaloisModule) -> tuple[Point, ...]:
    """Points fixed by the entire closure (the rational points of the model)."""
    gens = module.generators or ()
    out = []
    for p in module.points():
        if all(apply_automorphism(module, a, p) == p for a in gens):
            out.append(p)
    return tuple(out)
