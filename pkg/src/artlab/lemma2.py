"""The unit-pair engine: x + y = 2 with x, y nontrivial e-th power units mod m.

Existence of such a pair for a modulus m is exactly what kills points of
order m under a homothety-rich Galois action, so this module carries the
search, the prime-power candidate construction, failure-set scans over ranges
of m, and diagonal Fermat point counts over prime fields.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidInputError, ResourceCapError
from .modarith import is_prime, power_subgroup, primes_in

FERMAT_PRIME_BOUND = 10 ** 6
PARALLEL_SCAN_THRESHOLD = 10 ** 4


@dataclass(frozen=True)
class PairWitness:
    """A verified solution x + y = 2 among nontrivial e-th power units mod m.

    Construction re-checks every invariant, so an instance can never exist in
    an invalid state.  u and v, when present, are e-th roots of x and y.
    """

    m: int
    e: int
    x: int
    y: int
    u: Optional[int] = None
    v: Optional[int] = None

    def __post_init__(self):
        m, e, x, y = self.m, self.e, self.x, self.y
        if m < 1 or e < 1:
            raise InvalidInputError(f"PairWitness: bad modulus/exponent {(m, e)}")
        if not (0 <= x < m and 0 <= y < m):
            raise InvalidInputError(f"PairWitness: residues {(x, y)} out of range mod {m}")
        if math.gcd(x, m) != 1 or math.gcd(y, m) != 1:
            raise InvalidInputError(f"PairWitness: {(x, y)} not units mod {m}")
        if x == 1 % m or y == 1 % m:
            raise InvalidInputError(f"PairWitness: trivial component in {(x, y)} mod {m}")
        if (x + y - 2) % m != 0:
            raise InvalidInputError(f"PairWitness: {x} + {y} != 2 mod {m}")
        if self.u is not None and pow(self.u, e, m) != x % m:
            raise InvalidInputError(f"PairWitness: {self.u}^{e} != {x} mod {m}")
        if self.v is not None and pow(self.v, e, m) != y % m:
            raise InvalidInputError(f"PairWitness: {self.v}^{e} != {y} mod {m}")


@dataclass(frozen=True)
class Lemma2Report:
    """Failure set of the pair search over 1..scanned_max for one exponent.

    The empirical C(e) is max(failures); witnesses for the successes are kept
    only when requested.
    """

    e: int
    scanned_max: int
    failures: tuple[int, ...]
    witnesses: Optional[dict[int, PairWitness]] = None

    def __post_init__(self):
        if any(not 1 <= m <= self.scanned_max for m in self.failures):
            raise InvalidInputError("Lemma2Report: failure outside the scanned range")
        if list(self.failures) != sorted(self.failures):
            raise InvalidInputError("Lemma2Report: failures must be sorted")


@dataclass(frozen=True)
class PrimePowerWitness:
    """Outcome of the explicit prime-power candidate x = 1 + e*p^(n-k-1),
    y = 2 - x mod p^n, where p^k is the p-part of e.

    identity_x/identity_y record whether x and y equal the claimed e-th
    powers (1 + p^(n-k-1))^e and (1 - p^(n-k-1))^e.  When the candidate is
    not itself a valid witness, an exhaustive fallback search runs instead
    and used_fallback is set; witness is None when even the fallback finds
    nothing.
    """

    p: int
    n: int
    e: int
    k: int
    candidate_x: int
    candidate_y: int
    identity_x: bool
    identity_y: bool
    used_fallback: bool
    witness: Optional[PairWitness]


def _root_of(m: int, e: int, value: int) -> Optional[int]:
    """Smallest u coprime to m with u^e = value mod m, or None."""
    if m == 1:
        return 0
    for u in range(1, m):
        if math.gcd(u, m) == 1 and pow(u, e, m) == value:
            return u
    return None


def _has_pair_units(m: int) -> bool:
    """Fast e=1 existence check: scan x ascending, y = 2 - x forced."""
    one = 1 % m
    for x in range(m):
        if x == one or math.gcd(x, m) != 1:
            continue
        y = (2 - x) % m
        if y != one and math.gcd(y, m) == 1:
            return True
    return False


def exists_pair(m: int, e: int) -> Optional[PairWitness]:
    """Exhaustive search over the e-th power subgroup; returns the
    lexicographically smallest (x, y) witness with roots attached."""
    if m < 1 or e < 1:
        raise InvalidInputError(f"exists_pair: need m >= 1 and e >= 1, got {(m, e)}")
    one = 1 % m
    if e == 1:
        for x in range(m):
            if x == one or math.gcd(x, m) != 1:
                continue
            y = (2 - x) % m
            if y != one and math.gcd(y, m) == 1:
                return PairWitness(m, 1, x, y, u=x, v=y)
        return None
    powers = power_subgroup(m, e).elements
    power_set = set(powers)
    for x in powers:
        if x == one:
            continue
        y = (2 - x) % m
        if y in power_set and y != one:
            return PairWitness(m, e, x, y, u=_root_of(m, e, x), v=_root_of(m, e, y))
    return None


def _pair_exists(m: int, e: int) -> bool:
    if e == 1:
        return _has_pair_units(m)
    return exists_pair(m, e) is not None


def _scan_chunk(e: int, lo: int, hi: int) -> list[int]:
    return [m for m in range(lo, hi + 1) if not _pair_exists(m, e)]


def failure_scan(e: int, max_m: int, threads: int = 1,
                 keep_witnesses: bool = False) -> Lemma2Report:
    """All m <= max_m with no unit pair for exponent e.

    The range is partitioned across workers above the single-thread
    threshold; chunks merge in order, so results are independent of the
    thread count.
    """
    if e < 1 or max_m < 1:
        raise InvalidInputError(f"failure_scan: bad parameters {(e, max_m)}")
    if threads > 1 and max_m > PARALLEL_SCAN_THRESHOLD:
        chunk = (max_m + threads - 1) // threads
        ranges = [(lo, min(lo + chunk - 1, max_m)) for lo in range(1, max_m + 1, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: _scan_chunk(e, r[0], r[1]), ranges))
        failures = [m for part in parts for m in part]
    else:
        failures = _scan_chunk(e, 1, max_m)
    witnesses = None
    if keep_witnesses:
        failure_set = set(failures)
        witnesses = {m: exists_pair(m, e) for m in range(1, max_m + 1)
                     if m not in failure_set}
    return Lemma2Report(e, max_m, tuple(failures), witnesses)


def prime_power_witness(p: int, n: int, e: int) -> PrimePowerWitness:
    """Evaluate the explicit candidate pair mod p^n and verify it directly.

    The candidate is x = 1 + e*p^(n-k-1), y = 1 - e*p^(n-k-1) with k the
    p-valuation of e.  Nothing about it is trusted: unit-ness, nontriviality,
    the sum, and membership in the e-th power subgroup are all checked, and
    the claimed identities x = (1 + p^(n-k-1))^e, y = (1 - p^(n-k-1))^e are
    tested and reported.  On any failure the exhaustive search takes over.
    """
    if not is_prime(p):
        raise InvalidInputError(f"prime_power_witness: p={p} is not prime")
    if n < 2 or e < 1:
        raise InvalidInputError(f"prime_power_witness: need n >= 2 and e >= 1, got {(n, e)}")
    k = 0
    reduced = e
    while reduced % p == 0:
        reduced //= p
        k += 1
    modulus = p ** n
    if n - k - 1 < 0:
        # Exponent so p-heavy the construction has no room; fall straight back.
        x = y = 1 % modulus
        identity_x = identity_y = False
    else:
        step = p ** (n - k - 1)
        x = (1 + e * step) % modulus
        y = (1 - e * step) % modulus
        identity_x = pow(1 + step, e, modulus) == x
        identity_y = pow((1 - step) % modulus, e, modulus) == y
    candidate_valid = (
        x != 1 and y != 1
        and math.gcd(x, modulus) == 1 and math.gcd(y, modulus) == 1
        and (x + y - 2) % modulus == 0
    )
    if candidate_valid:
        ux = (1 + step) % modulus if identity_x else _root_of(modulus, e, x)
        vy = (1 - step) % modulus if identity_y else _root_of(modulus, e, y)
        if ux is not None and vy is not None:
            witness = PairWitness(modulus, e, x, y, u=ux, v=vy)
            return PrimePowerWitness(p, n, e, k, x, y, identity_x, identity_y,
                                     False, witness)
    return PrimePowerWitness(p, n, e, k, x, y, identity_x, identity_y,
                             True, exists_pair(modulus, e))


def count_fermat_points(e: int, p: int) -> int:
    """Exact count of (x, y) in F_p^2 with x^e + y^e = 2, in O(p) time.

    Buckets the value multiset of z -> z^e once, then convolves against the
    target sum.
    """
    if e < 1:
        raise InvalidInputError(f"count_fermat_points: e must be >= 1, got {e}")
    if not is_prime(p):
        raise InvalidInputError(f"count_fermat_points: p={p} is not prime")
    if p > FERMAT_PRIME_BOUND:
        raise ResourceCapError(f"count_fermat_points: p={p} exceeds bound {FERMAT_PRIME_BOUND}")
    counts = [0] * p
    for z in range(p):
        counts[pow(z, e, p)] += 1
    target = 2 % p
    return sum(counts[a] * counts[(target - a) % p] for a in range(p) if counts[a])


@dataclass(frozen=True)
class WeilThreshold:
    """Primes whose diagonal Fermat count stays within e^2 + 2e, up to a bound."""

    e: int
    bound: int
    largest: int
    primes: tuple[int, ...]
    weil_cutoff: Optional[int]


def weil_threshold_prime(e: int, bound: int) -> WeilThreshold:
    """Largest prime l <= bound with count_fermat_points(e, l) <= e^2 + 2e.

    For e >= 3 also reports the first prime beyond which a Weil-style lower
    bound p + 1 - 2g*sqrt(p) - e already exceeds e^2 + 2e (informational;
    the enumeration itself is exact regardless).
    """
    if e < 1 or bound < 2:
        raise InvalidInputError(f"weil_threshold_prime: bad parameters {(e, bound)}")
    limit = e * e + 2 * e
    hits = [l for l in primes_in(2, bound) if count_fermat_points(e, l) <= limit]
    if not hits:
        raise InvalidInputError(
            f"weil_threshold_prime: no qualifying prime up to {bound}")
    cutoff = None
    if e >= 3:
        genus = (e - 1) * (e - 2) // 2
        # p + 1 - 2g*sqrt(p) - e > limit once sqrt(p) clears the larger root.
        s = genus + math.isqrt(genus * genus + e + limit - 1) + 1
        q = s * s
        while not is_prime(q):
            q += 1
        cutoff = q
    return WeilThreshold(e, bound, hits[-1], tuple(hits), cutoff)
