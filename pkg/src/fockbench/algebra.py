"""Representation-free calculus of ladder-operator polynomials.

Everything in this module is derived from the canonical commutation and
anticommutation relations together with ``a|0> = 0``; no occupation basis
and no cutoff ever enter.  Polynomials are finite complex-weighted sums of
ordered products of creation/annihilation symbols, normal ordering is a
terminating rewrite system on those products, and detection statistics
come out of the vacuum functional alone.

Canonical monomial order: boson symbols before fermion symbols, and within
each species all daggered symbols before all undaggered ones, each block
sorted by mode index.  Fermionic swaps track signs; a repeated fermionic
creation (or annihilation) on one mode collapses a monomial to zero.
"""

from __future__ import annotations

import cmath
import math
from collections import Counter
from dataclasses import dataclass, replace
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .modes import BOSON, FERMION, ModeSystem

#: Defaults for the exponential power series.
SERIES_TOL = 1e-14
SERIES_MAX_TERMS = 200

#: Ket coefficients whose basis amplitude falls below this are dropped.
KET_PRUNE_THRESHOLD = 1e-14


class SeriesConvergenceError(RuntimeError):
    """The exponential series failed to settle within the iteration cap."""


@dataclass(frozen=True)
class LadderSymbol:
    """A single creation or annihilation symbol on one mode."""

    mode: int
    species: str
    dagger: bool

    def __post_init__(self):
        if self.species not in (BOSON, FERMION):
            raise ValueError(f"unknown species {self.species!r}")
        if self.mode < 0:
            raise ValueError("mode index must be non-negative")

    def adjoint(self) -> "LadderSymbol":
        return replace(self, dagger=not self.dagger)

    def __repr__(self):
        letter = "a" if self.species == BOSON else "f"
        return f"{letter}{self.mode}{'^' if self.dagger else ''}"


def _sort_key(symbol: LadderSymbol) -> tuple[int, int, int]:
    return (
        0 if symbol.species == BOSON else 1,
        0 if symbol.dagger else 1,
        symbol.mode,
    )


class LadderPolynomial:
    """Complex-weighted sum of ordered ladder-symbol products.

    Terms with identical factor sequences are merged exactly and
    zero-coefficient terms are never stored.  The empty factor sequence is
    the multiplicative identity, so a constant is a valid polynomial.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | None = None):
        merged: dict[tuple[LadderSymbol, ...], complex] = {}
        for factors, coeff in (terms or {}).items():
            factors = tuple(factors)
            coeff = complex(coeff)
            if coeff != 0:
                merged[factors] = merged.get(factors, 0.0 + 0.0j) + coeff
        self._terms = {f: c for f, c in merged.items() if c != 0}

    # -- construction helpers -------------------------------------------

    @classmethod
    def zero(cls) -> "LadderPolynomial":
        return cls()

    @classmethod
    def constant(cls, value) -> "LadderPolynomial":
        return cls({(): complex(value)})

    @classmethod
    def monomial(cls, coefficient, factors: Iterable[LadderSymbol]) -> "LadderPolynomial":
        return cls({tuple(factors): complex(coefficient)})

    # -- read access ------------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[LadderSymbol, ...], complex]:
        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def max_abs_coefficient(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        out = dict(self._terms)
        for factors, coeff in other._terms.items():
            out[factors] = out.get(factors, 0.0 + 0.0j) + coeff
        return LadderPolynomial(out)

    def __sub__(self, other: "LadderPolynomial") -> "LadderPolynomial":
        return self + (-other)

    def __neg__(self) -> "LadderPolynomial":
        return LadderPolynomial({f: -c for f, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, LadderPolynomial):
            return multiply(self, other)
        return LadderPolynomial(
            {f: c * complex(other) for f, c in self._terms.items()}
        )

    def __rmul__(self, scalar) -> "LadderPolynomial":
        return self * scalar

    def adjoint(self) -> "LadderPolynomial":
        """Formal adjoint: reverse factors, flip daggers, conjugate weights."""
        return LadderPolynomial(
            {
                tuple(s.adjoint() for s in reversed(factors)): coeff.conjugate()
                for factors, coeff in self._terms.items()
            }
        )

    def pruned(self, atol: float) -> "LadderPolynomial":
        return LadderPolynomial(
            {f: c for f, c in self._terms.items() if abs(c) > atol}
        )

    def allclose(self, other: "LadderPolynomial", atol: float = 1e-12) -> bool:
        keys = set(self._terms) | set(other._terms)
        return all(
            abs(self._terms.get(k, 0.0) - other._terms.get(k, 0.0)) <= atol
            for k in keys
        )

    def __eq__(self, other):
        if not isinstance(other, LadderPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        if not self._terms:
            return "0"
        parts = []
        for factors, coeff in sorted(
            self._terms.items(), key=lambda item: [_sort_key(s) for s in item[0]]
        ):
            word = " ".join(repr(s) for s in factors) if factors else "1"
            parts.append(f"({coeff:.6g})*{word}")
        return " + ".join(parts)


def creation(mode: int, species: str = BOSON) -> LadderPolynomial:
    return LadderPolynomial.monomial(1.0, [LadderSymbol(mode, species, True)])


def annihilation(mode: int, species: str = BOSON) -> LadderPolynomial:
    return LadderPolynomial.monomial(1.0, [LadderSymbol(mode, species, False)])


def multiply(p: LadderPolynomial, q: LadderPolynomial) -> LadderPolynomial:
    """Distribute and concatenate factor sequences.  No reordering is done."""
    out: dict[tuple[LadderSymbol, ...], complex] = {}
    for f1, c1 in p._terms.items():
        for f2, c2 in q._terms.items():
            factors = f1 + f2
            out[factors] = out.get(factors, 0.0 + 0.0j) + c1 * c2
    return LadderPolynomial(out)


def _reduce_factors(factors: tuple[LadderSymbol, ...]) -> dict:
    """Normal order one factor sequence.

    Returns a map from canonical factor tuples to coefficients.  Bosonic
    swaps across one mode emit a shorter delta term (CCR), fermionic swaps
    flip the sign and same-mode mixed swaps emit a delta term (CAR), and
    symbols of different species commute freely.
    """
    out: dict[tuple[LadderSymbol, ...], complex] = {}
    stack: list[tuple[complex, tuple[LadderSymbol, ...]]] = [(1.0 + 0.0j, factors)]
    while stack:
        coeff, fs = stack.pop()
        for i in range(len(fs) - 1):
            s1, s2 = fs[i], fs[i + 1]
            if s1.species == FERMION and s1 == s2:
                break  # Pauli exclusion kills the monomial
            if _sort_key(s1) <= _sort_key(s2):
                continue
            head, tail = fs[:i], fs[i + 2 :]
            swapped = head + (s2, s1) + tail
            if s1.species != s2.species:
                stack.append((coeff, swapped))
            elif s1.mode == s2.mode and s1.dagger != s2.dagger:
                # s1 undaggered, s2 daggered on the same mode
                if s1.species == BOSON:
                    stack.append((coeff, swapped))
                else:
                    stack.append((-coeff, swapped))
                stack.append((coeff, head + tail))
            elif s1.species == BOSON:
                stack.append((coeff, swapped))
            else:
                stack.append((-coeff, swapped))
            break
        else:
            out[fs] = out.get(fs, 0.0 + 0.0j) + coeff
    return out


def normal_order(p: LadderPolynomial) -> LadderPolynomial:
    """Rewrite into canonical form, preserving operator equality."""
    out: dict[tuple[LadderSymbol, ...], complex] = {}
    for factors, coeff in p._terms.items():
        for canon, weight in _reduce_factors(factors).items():
            out[canon] = out.get(canon, 0.0 + 0.0j) + coeff * weight
    return LadderPolynomial(out)


def commutator(p: LadderPolynomial, q: LadderPolynomial) -> LadderPolynomial:
    """Normal-ordered ``pq - qp``."""
    return normal_order(multiply(p, q) - multiply(q, p))


def vacuum_expectation(p: LadderPolynomial) -> complex:
    """<0|p|0>: the constant term after normal ordering.

    Every other normal-ordered term ends in annihilators (or starts with
    creators), so it kills the vacuum from one side.
    """
    return normal_order(p)._terms.get((), 0.0 + 0.0j)


def quadratic_generator(coefficients, modes, species_of) -> LadderPolynomial:
    """Build ``sum_pq c[p, q] adag_modes[p] a_modes[q]``."""
    c = np.asarray(coefficients, dtype=complex)
    modes = tuple(int(m) for m in modes)
    if c.shape != (len(modes), len(modes)):
        raise ValueError("coefficient matrix shape does not match the mode list")
    terms = {}
    for p_idx, mp in enumerate(modes):
        for q_idx, mq in enumerate(modes):
            if c[p_idx, q_idx] == 0:
                continue
            factors = (
                LadderSymbol(mp, species_of(mp), True),
                LadderSymbol(mq, species_of(mq), False),
            )
            terms[factors] = terms.get(factors, 0.0 + 0.0j) + c[p_idx, q_idx]
    return LadderPolynomial(terms)


# ---------------------------------------------------------------------------
# Kets: creation-only polynomials understood as applied to the vacuum
# ---------------------------------------------------------------------------


def monomial_occupations(
    factors: tuple[LadderSymbol, ...], total_modes: int
) -> tuple[int, ...]:
    """Occupations produced by a creation monomial acting on the vacuum."""
    occ = [0] * total_modes
    for s in factors:
        occ[s.mode] += 1
    return tuple(occ)


def _gram_weight(factors: tuple[LadderSymbol, ...]) -> float:
    """<0| (monomial)^dag (monomial) |0> for a canonical creation monomial.

    Equals the product of bosonic occupation factorials; fermionic factors
    contribute 1.  This is the contraction <0| a^m (adag)^n |0> = delta_mn n!
    applied mode by mode.
    """
    weight = 1.0
    counts = Counter(s.mode for s in factors if s.species == BOSON)
    for count in counts.values():
        weight *= math.factorial(count)
    return weight


@dataclass(frozen=True)
class KetExpression:
    """A creation-only polynomial applied to the vacuum.

    The polynomial is fully reduced: normal ordered, with every monomial
    containing an annihilator removed because it annihilates the vacuum.
    The attached mode system supplies mode count and species; its cutoff is
    irrelevant here and never used.
    """

    system: ModeSystem
    poly: LadderPolynomial

    def __post_init__(self):
        for factors in self.poly._terms:
            for s in factors:
                if not s.dagger:
                    raise ValueError(
                        "ket expressions may only contain creation symbols; "
                        "use reduce_to_ket to build one"
                    )
                if self.system.species(s.mode) != s.species:
                    raise ValueError(
                        f"symbol {s!r} has the wrong species for its mode"
                    )

    def norm(self) -> float:
        return math.sqrt(max(0.0, ket_inner(self, self).real))

    @property
    def is_normalized(self) -> bool:
        return abs(self.norm() - 1.0) < 1e-12

    def normalized(self) -> "KetExpression":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero ket")
        return KetExpression(self.system, self.poly * (1.0 / n))

    def occupation_amplitudes(self) -> dict[tuple[int, ...], complex]:
        """Coefficient of each occupation pattern, weighted to unit kets.

        Canonical creation monomials with different occupations are
        orthogonal, so this is a faithful summary of the ket; the weight
        sqrt(product of bosonic factorials) normalizes each monomial.
        """
        out: dict[tuple[int, ...], complex] = {}
        for factors, coeff in self.poly._terms.items():
            occ = monomial_occupations(factors, self.system.total_modes)
            out[occ] = out.get(occ, 0.0 + 0.0j) + coeff * math.sqrt(
                _gram_weight(factors)
            )
        return out

    def allclose(self, other: "KetExpression", atol: float = 1e-12) -> bool:
        return self.system == other.system and self.poly.allclose(other.poly, atol)

    def __repr__(self):
        return f"KetExpression({self.poly!r} |0>)"


def reduce_to_ket(poly: LadderPolynomial, system: ModeSystem) -> KetExpression:
    """Normal order and apply ``a|0> = 0``.

    After canonical ordering a monomial kills the vacuum exactly when it
    contains any annihilation symbol, so those monomials are dropped.
    """
    ordered = normal_order(poly)
    kept = {
        factors: coeff
        for factors, coeff in ordered._terms.items()
        if all(s.dagger for s in factors)
    }
    return KetExpression(system, LadderPolynomial(kept))


def vacuum_ket(system: ModeSystem) -> KetExpression:
    return KetExpression(system, LadderPolynomial.constant(1.0))


def basis_ket(system: ModeSystem, occupation) -> KetExpression:
    """Normalized ket for one occupation pattern."""
    occupation = tuple(int(n) for n in occupation)
    system.validate_occupation(occupation)
    factors = []
    for mode, count in enumerate(occupation):
        factors.extend([LadderSymbol(mode, system.species(mode), True)] * count)
    poly = LadderPolynomial.monomial(1.0, factors)
    return KetExpression(system, poly).normalized()


def ket_from_creations(system: ModeSystem, modes) -> KetExpression:
    """Apply creation operators for ``modes`` (in the given order) to the
    vacuum and normalize.  Raises if the result vanishes (Pauli exclusion)."""
    poly = LadderPolynomial.constant(1.0)
    for mode in modes:
        system.validate_mode(mode)
        poly = multiply(poly, creation(mode, system.species(mode)))
    ket = reduce_to_ket(poly, system)
    return ket.normalized()


def ket_inner(left: KetExpression, right: KetExpression) -> complex:
    """<left|right> evaluated through the vacuum functional.

    The adjoint product reduces, via the commutation relations alone, to
    per-mode contractions <0| a^m (adag)^n |0> = delta_mn n!; canonical
    monomials are therefore orthogonal with squared length equal to the
    product of bosonic factorials.
    """
    if left.system != right.system:
        raise ValueError("kets live on different mode systems")
    total = 0.0 + 0.0j
    lterms = left.poly._terms
    for factors, c2 in right.poly._terms.items():
        c1 = lterms.get(factors)
        if c1 is not None:
            total += c1.conjugate() * c2 * _gram_weight(factors)
    return total


def _prune_ket_poly(poly: LadderPolynomial, atol: float) -> LadderPolynomial:
    """Drop monomials whose basis amplitude |c|*sqrt(gram) is below atol."""
    kept = {
        factors: coeff
        for factors, coeff in poly._terms.items()
        if abs(coeff) * math.sqrt(_gram_weight(factors)) >= atol
    }
    return LadderPolynomial(kept)


# ---------------------------------------------------------------------------
# Evolution primitives
# ---------------------------------------------------------------------------


def substitute_modes(
    ket: KetExpression, matrix, modes, *, atol: float = 1e-12
) -> KetExpression:
    """Transform creation symbols by a unitary acting on a mode subset.

    The creation operator of ``modes[p]`` is replaced by
    ``sum_q matrix[q, p] * creation(modes[q])``.  With this placement the
    result of a linear element agrees exactly with exponentiating its
    quadratic generator; the convention was pinned against the explicit
    matrix representation once and is frozen here.
    """
    b = np.asarray(matrix, dtype=complex)
    modes = tuple(int(m) for m in modes)
    if b.ndim != 2 or b.shape[0] != b.shape[1] or b.shape[0] != len(modes):
        raise ValueError("matrix must be square with one row per listed mode")
    if len(set(modes)) != len(modes):
        raise ValueError("substitution modes must be distinct")
    species = {ket.system.species(m) for m in modes}
    if len(species) > 1:
        raise ValueError("substitution cannot mix bosonic and fermionic modes")
    if np.abs(b.conj().T @ b - np.eye(len(modes))).max() > atol:
        raise ValueError("substitution matrix is not unitary")

    col_of = {mode: p for p, mode in enumerate(modes)}
    spec = species.pop()
    replacements = {
        mode: [
            (LadderSymbol(modes[q], spec, True), b[q, col_of[mode]])
            for q in range(len(modes))
            if b[q, col_of[mode]] != 0
        ]
        for mode in modes
    }

    out: dict[tuple[LadderSymbol, ...], complex] = {}
    for factors, coeff in ket.poly._terms.items():
        partial: dict[tuple[LadderSymbol, ...], complex] = {(): coeff}
        for s in factors:
            if s.mode in col_of:
                choices = replacements[s.mode]
            else:
                choices = [(s, 1.0 + 0.0j)]
            grown: dict[tuple[LadderSymbol, ...], complex] = {}
            for prefix, c in partial.items():
                for symbol, weight in choices:
                    key = prefix + (symbol,)
                    grown[key] = grown.get(key, 0.0 + 0.0j) + c * weight
            partial = grown
        for factors_new, c in partial.items():
            out[factors_new] = out.get(factors_new, 0.0 + 0.0j) + c
    return reduce_to_ket(LadderPolynomial(out), ket.system)


def apply_number_diagonal(phases: Mapping, ket: KetExpression) -> KetExpression:
    """Apply ``exp(i * sum of number-diagonal terms)`` exactly.

    ``phases`` maps a single mode ``m`` to the coefficient of ``n_m``, or a
    mode pair ``(i, j)`` to the coefficient of ``n_i * n_j``.  A creation
    monomial has definite occupations (``N adag = adag (N + 1)``), so the
    exponential multiplies each monomial by a phase; no series is needed.
    """
    normalized: list[tuple[tuple[int, ...], float]] = []
    for key, value in phases.items():
        if isinstance(key, (tuple, list)):
            pair = tuple(int(m) for m in key)
            if len(pair) != 2:
                raise ValueError("phase keys must be a mode or a mode pair")
            normalized.append((pair, float(value)))
        else:
            normalized.append(((int(key),), float(value)))
    for grp, _ in normalized:
        for m in grp:
            ket.system.validate_mode(m)

    out = {}
    for factors, coeff in ket.poly._terms.items():
        occ = monomial_occupations(factors, ket.system.total_modes)
        angle = 0.0
        for grp, value in normalized:
            contribution = value
            for m in grp:
                contribution *= occ[m]
            angle += contribution
        out[factors] = coeff * cmath.exp(1j * angle)
    return KetExpression(ket.system, LadderPolynomial(out))


def apply_exponential_series(
    generator: LadderPolynomial,
    state: KetExpression,
    tol: float = SERIES_TOL,
    max_terms: int = SERIES_MAX_TERMS,
) -> KetExpression:
    """Apply ``exp(generator)`` through its power series.

    Each term ``generator^m / m! |state>`` is reduced exactly by the
    commutation rules and vacuum annihilation before the next power is
    taken.  The sum stops once a term norm falls below ``tol`` and the
    partial-sum norm has stabilized to within ``tol``.

    Raises :class:`SeriesConvergenceError` after ``max_terms`` terms, which
    signals a generator that does not act boundedly on the excitation
    sector reachable from the input.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    system = state.system

    def _norm(poly: LadderPolynomial) -> float:
        total = 0.0
        for factors, coeff in poly._terms.items():
            total += abs(coeff) ** 2 * _gram_weight(factors)
        return math.sqrt(total)

    term = state.poly
    total = state.poly
    prev_norm = _norm(total)
    for m in range(1, max_terms + 1):
        term = reduce_to_ket(multiply(generator, term), system).poly * (1.0 / m)
        # prune on the gram-weighted amplitude, not the raw coefficient: a
        # tiny coefficient on a high-occupation monomial can still be large
        term = _prune_ket_poly(term, 1e-18)
        total = total + term
        term_norm = _norm(term)
        total_norm = _norm(total)
        if term_norm < tol and abs(total_norm - prev_norm) < tol:
            return KetExpression(
                system, _prune_ket_poly(total, KET_PRUNE_THRESHOLD)
            )
        prev_norm = total_norm
    raise SeriesConvergenceError(
        f"exponential series did not settle within {max_terms} terms; "
        "the generator appears unbounded on this sector"
    )


# ---------------------------------------------------------------------------
# Detection statistics from the vacuum functional
# ---------------------------------------------------------------------------


def _falling_factorial(nu: int, m: int) -> int:
    """nu! / (nu - m)!, and 0 when m exceeds nu.

    This is the contraction coefficient in a^m (adag)^nu |0> =
    (nu!/(nu-m)!) (adag)^(nu-m) |0>, obtained by commuting each ``a``
    through the creation block.  The same formula covers fermions, whose
    occupations never exceed 1.
    """
    return math.perm(nu, m) if m <= nu else 0


def _projector_weight(n: int, nu: int) -> float:
    """<occupation nu| P_n |occupation nu> via the normal-ordered series.

    P_n = sum_j (-1)^j / (n! j!) adag^(n+j) a^(n+j) projects onto
    occupation ``n`` of one mode.  On a monomial with occupation ``nu``
    each insertion is diagonal with the falling-factorial coefficient, and
    the alternating sum collapses to the exact indicator of nu == n.
    """
    if nu < n:
        return 0.0
    total = 0.0
    for j in range(nu - n + 1):
        total += (
            (-1) ** j
            * _falling_factorial(nu, n + j)
            / (math.factorial(n) * math.factorial(j))
        )
    return total


def number_expectation(ket: KetExpression, mode: int) -> float:
    """<ket| N_mode |ket> via the single normal-ordered insertion adag a."""
    ket.system.validate_mode(mode)
    total = 0.0
    for factors, coeff in ket.poly._terms.items():
        occ = monomial_occupations(factors, ket.system.total_modes)
        total += abs(coeff) ** 2 * _gram_weight(factors) * _falling_factorial(occ[mode], 1)
    return total


def joint_number_distribution(
    ket: KetExpression, modes
) -> dict[tuple[int, ...], float]:
    """Joint occupation distribution over ``modes``.

    For each candidate pattern the probability is the vacuum expectation
    of the adjoint ket times the product of per-mode number projectors
    times the ket, evaluated through :func:`_projector_weight`.  Patterns
    outside the ket's support carry probability zero and are omitted.
    """
    modes = tuple(sorted(set(int(m) for m in modes)))
    for m in modes:
        ket.system.validate_mode(m)
    if not modes:
        raise ValueError("at least one mode must be measured")

    per_monomial = []
    patterns = set()
    for factors, coeff in ket.poly._terms.items():
        occ = monomial_occupations(factors, ket.system.total_modes)
        restricted = tuple(occ[m] for m in modes)
        per_monomial.append((restricted, abs(coeff) ** 2 * _gram_weight(factors)))
        patterns.add(restricted)

    distribution: dict[tuple[int, ...], float] = {}
    for pattern in sorted(patterns):
        prob = 0.0
        for restricted, weight in per_monomial:
            factor = 1.0
            for wanted, nu in zip(pattern, restricted):
                factor *= _projector_weight(wanted, nu)
                if factor == 0.0:
                    break
            prob += weight * factor
        if prob != 0.0:
            distribution[pattern] = prob
    return distribution
