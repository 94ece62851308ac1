"""Arithmetic invariants of prime-level modular curves and the group-theoretic
models of their Eisenstein torsion.

For a prime level N the model is built from the Eisenstein number
n = numerator((N-1)/12): a rational cyclic block of order n (the cuspidal
part) against a mu_n block (the Shimura part), glued along their 2-torsion
when n is even.  The structure check computes the almost-rational points of
the model and compares them with the subgroup generated by the cuspidal image
and the 3-torsion of the mu_n image.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from .errors import InvalidInputError
from .galmod import (
    ARTReport,
    GaloisModule,
    Point,
    almost_rational_set,
    constant_module,
    cyclotomic_module,
    direct_sum,
    quotient_presentation,
    subgroup_span,
    DEFAULT_MAX_CLOSURE,
    DEFAULT_MAX_POINTS,
)
from .modarith import is_prime, jacobi_symbol, primes_in

# Prime levels with hyperelliptic X0(N), per Ogg's classification.  37 is the
# one member whose hyperelliptic involution differs from the Atkin-Lehner
# involution, so its quotient curve is not of genus zero.
OGG_HYPERELLIPTIC = (23, 29, 31, 37, 41, 47, 59, 71)


@dataclass(frozen=True)
class LevelInvariants:
    """Per-level arithmetic facts used by the survey and the case split."""

    N: int
    n: int
    genus: int
    hyperelliptic: bool
    plus_quotient_genus_zero: bool
    N_mod_9: int
    three_divides_n: bool


@dataclass(frozen=True)
class EisensteinModel:
    """Group-theoretic model of the Eisenstein torsion at level N.

    For n odd the module is const_n ⊕ mu_n with Galois acting as diag(1, chi);
    for n even the direct sum is folded along the common 2-torsion, i.e. the
    subgroup generated by (n/2, n/2).  c_image / sigma_image generate the
    embedded cuspidal and mu-type subgroups; expected_ar is the subgroup
    generated by the cuspidal image and the 3-torsion of the mu image.
    """

    N: int
    n: int
    n_even: bool
    module: GaloisModule
    c_generator: Point
    sigma_generator: Point
    expected_ar: tuple[Point, ...]


@dataclass(frozen=True)
class SurveyRecord:
    level: LevelInvariants
    report: ARTReport
    side_condition_ok: bool


def eisenstein_number(N: int) -> int:
    """numerator((N-1)/12) for prime N."""
    if not is_prime(N):
        raise InvalidInputError(f"eisenstein_number: {N} is not prime")
    return (N - 1) // math.gcd(N - 1, 12)


def genus_x0(N: int) -> int:
    """Genus of X0(N) for prime N via the standard index/elliptic-point count."""
    if not is_prime(N):
        raise InvalidInputError(f"genus_x0: {N} is not prime")
    if N == 2:
        nu2, nu3 = 1, 0
    else:
        nu2 = 1 + jacobi_symbol(-1, N)
        nu3 = 1 + jacobi_symbol(-3, N)
    twelve_g = N + 1 - 3 * nu2 - 4 * nu3
    assert twelve_g % 12 == 0, f"genus formula must be integral at N={N}"
    return twelve_g // 12


def level_invariants(N: int) -> LevelInvariants:
    if not is_prime(N):
        raise InvalidInputError(f"level_invariants: {N} is not prime")
    n = eisenstein_number(N)
    hyper = N in OGG_HYPERELLIPTIC
    return LevelInvariants(
        N=N,
        n=n,
        genus=genus_x0(N),
        hyperelliptic=hyper,
        plus_quotient_genus_zero=hyper and N != 37,
        N_mod_9=N % 9,
        three_divides_n=n % 3 == 0,
    )


def eisenstein_model(N: int, max_closure: int = DEFAULT_MAX_CLOSURE) -> EisensteinModel:
    """Build the Eisenstein-torsion model for prime N >= 23."""
    if not is_prime(N) or N < 23:
        raise InvalidInputError(f"eisenstein_model: need a prime N >= 23, got {N}")
    n = eisenstein_number(N)
    base = direct_sum(constant_module(n, max_closure), cyclotomic_module(n, max_closure),
                      name=f"eis_{N}")
    c_gen: Point = (1 % n, 0)
    s_gen: Point = (0, 1 % n)
    if n % 2 == 0:
        pres = quotient_presentation(base, [(n // 2, n // 2)], name=f"eis_{N}")
        module = pres.module
        c_img = pres.project(c_gen)
        s_img = pres.project(s_gen)
    else:
        module = base
        c_img, s_img = c_gen, s_gen
    expected_gens = [c_img]
    if n % 3 == 0:
        expected_gens.append(module.scale(n // 3, s_img))
    expected = subgroup_span(module, expected_gens)
    return EisensteinModel(N, n, n % 2 == 0, module, c_img, s_img, expected)


def theorem3_check(N: int, max_closure: int = DEFAULT_MAX_CLOSURE,
                   max_points: int = DEFAULT_MAX_POINTS) -> ARTReport:
    """Compare the computed almost-rational set of the level-N model with the
    subgroup generated by the cuspidal image and the 3-torsion of the mu image."""
    model = eisenstein_model(N, max_closure)
    return almost_rational_set(model.module, expected=model.expected_ar,
                               max_points=max_points)


def survey(start: int, stop: int, threads: int = 1,
           max_closure: int = DEFAULT_MAX_CLOSURE,
           max_points: int = DEFAULT_MAX_POINTS) -> list[SurveyRecord]:
    """Level invariants plus the structure check for every prime in [start, stop].

    Also verifies the genus-zero-quotient side condition: every such level
    must have 3 not dividing n.  Records come back ordered by N regardless of
    the worker count.
    """
    if not is_prime(start) or start < 23:
        raise InvalidInputError(f"survey: start must be a prime >= 23, got {start}")
    levels = primes_in(start, stop)

    def one(N: int) -> SurveyRecord:
        inv = level_invariants(N)
        rep = theorem3_check(N, max_closure, max_points)
        side_ok = (not inv.plus_quotient_genus_zero) or (not inv.three_divides_n)
        return SurveyRecord(inv, rep, side_ok)

    if threads > 1 and len(levels) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, levels))
    return [one(N) for N in levels]
