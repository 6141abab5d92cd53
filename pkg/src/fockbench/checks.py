"""Runtime invariant suite and the randomized circuit generator.

Shared between the ``fockbench check`` subcommand and the test suite so
both exercise identical machinery.
"""

from __future__ import annotations

import math

import numpy as np

from . import algebra
from .algebra import LadderPolynomial, LadderSymbol, creation, annihilation
from .backends import compare_backends, heisenberg_residual, polynomial_matrix
from .circuit import (
    ANGLE,
    ANTISYMMETRIC,
    BeamSplitter,
    Circuit,
    KerrMedium,
    PhaseShifter,
    SYMMETRIC,
    build_experiment,
)
from .fock import (
    annihilation_op,
    creation_op,
    identity_op,
    mode_bipartition_entropy,
    number_op,
)
from .modes import BOSON, FERMION, ModeSystem


def random_occupation(rng, n_modes: int, max_photons: int) -> tuple[int, ...]:
    total = int(rng.integers(0, max_photons + 1))
    occ = [0] * n_modes
    for _ in range(total):
        occ[int(rng.integers(0, n_modes))] += 1
    return tuple(occ)


def random_circuit(
    rng,
    *,
    max_modes: int = 4,
    max_photons: int = 3,
    max_elements: int = 6,
    cutoff: int = 6,
) -> Circuit:
    """Random bosonic circuit built from beam splitters, phases, and Kerr media."""
    n_modes = int(rng.integers(2, max_modes + 1))
    system = ModeSystem(n_modes, 0, cutoff)

    branches = int(rng.integers(1, 3))
    poly = LadderPolynomial.zero()
    for _ in range(branches):
        occ = random_occupation(rng, n_modes, max_photons)
        amp = complex(rng.normal(), rng.normal())
        mono = LadderPolynomial.constant(amp)
        for mode, count in enumerate(occ):
            for _ in range(count):
                mono = algebra.multiply(mono, creation(mode, BOSON))
        poly = poly + mono
    ket = algebra.reduce_to_ket(poly, system)
    if ket.norm() == 0.0:
        ket = algebra.vacuum_ket(system)
    ket = ket.normalized()

    elements = []
    for _ in range(int(rng.integers(1, max_elements + 1))):
        kind = rng.choice(["bs", "phase", "kerr"])
        if kind == "phase":
            elements.append(
                PhaseShifter(int(rng.integers(0, n_modes)), float(rng.uniform(-math.pi, math.pi)))
            )
            continue
        m1, m2 = rng.choice(n_modes, size=2, replace=False)
        if kind == "kerr":
            elements.append(
                KerrMedium(int(m1), int(m2), float(rng.uniform(-math.pi, math.pi)))
            )
        else:
            variant = rng.choice([SYMMETRIC, ANTISYMMETRIC, ANGLE])
            if variant == ANGLE:
                elements.append(
                    BeamSplitter(int(m1), int(m2), ANGLE, float(rng.uniform(-math.pi, math.pi)))
                )
            else:
                elements.append(BeamSplitter(int(m1), int(m2), str(variant)))
    return Circuit(system, tuple(elements), ket, tuple(range(n_modes)))


def random_polynomial(
    rng, system: ModeSystem, max_factors: int = 6
) -> LadderPolynomial:
    """Random ladder polynomial over a system's modes (both species)."""
    poly = LadderPolynomial.zero()
    for _ in range(int(rng.integers(1, 4))):
        n_factors = int(rng.integers(0, max_factors + 1))
        factors = tuple(
            LadderSymbol(
                (mode := int(rng.integers(0, system.total_modes))),
                system.species(mode),
                bool(rng.integers(0, 2)),
            )
            for _ in range(n_factors)
        )
        coeff = complex(rng.normal(), rng.normal())
        poly = poly + LadderPolynomial.monomial(coeff, factors)
    return poly


def builtin_equivalence_cases() -> list[tuple[str, Circuit]]:
    """Every built-in experiment, each parameter choice spelled out."""
    cases = [
        ("single_photon_bs_sym", build_experiment("single_photon_bs_sym")),
        ("single_photon_bs_asym", build_experiment("single_photon_bs_asym")),
    ]
    for control in (0, 1):
        for target in (0, 1):
            cases.append(
                (
                    f"cnot_dualrail({control},{target})",
                    build_experiment("cnot_dualrail", control=control, target=target),
                )
            )
    for theta in (math.pi / 6, math.pi / 4, math.pi / 3, math.pi / 2):
        cases.append(
            (f"hardy_vertex({theta:.4f})", build_experiment("hardy_vertex", theta=theta))
        )
    return cases


# ---------------------------------------------------------------------------
# Individual checks; each returns (worst deviation, bound)
# ---------------------------------------------------------------------------


def check_ccr_below_cutoff() -> tuple[float, float]:
    system = ModeSystem(2, 0, 4)
    idx = np.arange(system.basis_size)
    safe = np.ones(system.basis_size, dtype=bool)
    for m in range(2):
        safe &= system.occupation_digits(idx, m) <= system.cutoff - 1
    worst = 0.0
    for i in range(2):
        for j in range(2):
            comm = (
                annihilation_op(system, i) @ creation_op(system, j)
                - creation_op(system, j) @ annihilation_op(system, i)
            ).matrix.toarray()
            expected = np.eye(system.basis_size) if i == j else 0.0
            diff = np.abs(comm - expected)[:, safe].max()
            worst = max(worst, float(diff))
    return worst, 1e-12


def check_car_exact() -> tuple[float, float]:
    system = ModeSystem(1, 2, 3)
    worst = 0.0
    ferm = range(system.boson_modes, system.total_modes)
    for i in ferm:
        for j in ferm:
            anti = (
                annihilation_op(system, i) @ creation_op(system, j)
                + creation_op(system, j) @ annihilation_op(system, i)
            )
            expected = identity_op(system) if i == j else 0.0 * identity_op(system)
            worst = max(worst, (anti - expected).max_abs())
            anti2 = (
                annihilation_op(system, i) @ annihilation_op(system, j)
                + annihilation_op(system, j) @ annihilation_op(system, i)
            )
            worst = max(worst, anti2.max_abs())
    return worst, 0.0


def check_number_identity() -> tuple[float, float]:
    # sqrt(n)*sqrt(n) rounds to n only within a couple of ulp, so the
    # product route matches the diagonal route entrywise, not bitwise.
    system = ModeSystem(2, 1, 4)
    worst = 0.0
    for m in range(system.total_modes):
        diff = number_op(system, m) - creation_op(system, m) @ annihilation_op(system, m)
        worst = max(worst, diff.max_abs())
    return worst, 1e-12


def check_heisenberg() -> tuple[float, float]:
    system = ModeSystem(2, 0, 6)
    worst = 0.0
    for variant in (SYMMETRIC, ANTISYMMETRIC):
        worst = max(worst, heisenberg_residual(BeamSplitter(0, 1, variant), system))
    return worst, 1e-10


def check_commutator_identity(samples: int = 10, seed: int = 7) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for species in (BOSON, FERMION):
        for _ in range(samples):
            n = int(rng.integers(1, 5))
            c = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            k = LadderPolynomial.zero()
            for i in range(n):
                for j in range(n):
                    k = k + complex(c[i, j]) * algebra.multiply(
                        creation(i, species), annihilation(j, species)
                    )
            j_mode = int(rng.integers(0, n))
            got = algebra.commutator(k, creation(j_mode, species))
            expected = LadderPolynomial.zero()
            for i in range(n):
                expected = expected + complex(c[i, j_mode]) * creation(i, species)
            diff = got - algebra.normal_order(expected)
            worst = max(worst, diff.max_abs_coefficient())
    return worst, 1e-12


def check_normal_order_oracle(samples: int = 25, seed: int = 11) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    systems = [ModeSystem(3, 0, 8), ModeSystem(2, 1, 8), ModeSystem(1, 2, 8)]
    worst = 0.0
    for trial in range(samples):
        system = systems[trial % len(systems)]
        poly = random_polynomial(rng, system)
        ordered = algebra.normal_order(poly)
        m_raw = polynomial_matrix(poly, system).matrix.toarray()
        m_ord = polynomial_matrix(ordered, system).matrix.toarray()
        idx = np.arange(system.basis_size)
        safe = np.ones(system.basis_size, dtype=bool)
        for m in range(system.boson_modes):
            safe &= system.occupation_digits(idx, m) <= system.cutoff - 6
        worst = max(worst, float(np.abs((m_raw - m_ord)[:, safe]).max()))
        vac = abs(algebra.vacuum_expectation(poly) - m_raw[0, 0])
        worst = max(worst, float(vac))
    return worst, 1e-12


def check_backend_equivalence() -> tuple[float, float]:
    worst = 0.0
    for _, circuit in builtin_equivalence_cases():
        report = compare_backends(circuit, tol=1e-9)
        worst = max(worst, report.max_deviation)
    return worst, 1e-9


def check_random_equivalence(samples: int = 10, seed: int = 5) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        report = compare_backends(random_circuit(rng), tol=1e-9)
        worst = max(worst, report.max_deviation)
    return worst, 1e-9


def check_number_conservation(samples: int = 5, seed: int = 3) -> tuple[float, float]:
    from .backends import evolve_numeric, evolve_symbolic, measure

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        circuit = random_circuit(rng)
        modes = tuple(range(circuit.system.total_modes))
        start = sum(measure(circuit.input_state, modes).expectations.values())
        for state in (evolve_numeric(circuit), evolve_symbolic(circuit)):
            end = sum(measure(state, modes).expectations.values())
            worst = max(worst, abs(end - start))
    return worst, 1e-10


def check_entropy() -> tuple[float, float]:
    from .algebra import basis_ket
    from .backends import ket_to_fock

    system = ModeSystem(2, 0, 3)
    bell_poly = (
        basis_ket(system, (1, 0)).poly + basis_ket(system, (0, 1)).poly
    ) * (1 / math.sqrt(2))
    bell = ket_to_fock(algebra.KetExpression(system, bell_poly))
    product = ket_to_fock(basis_ket(system, (1, 0)))
    worst = abs(mode_bipartition_entropy(bell, [0]) - math.log(2))
    worst = max(worst, mode_bipartition_entropy(product, [0]))
    return worst, 1e-12


def check_cutoff_robustness() -> tuple[float, float]:
    from .backends import evolve_numeric, measure
    from .circuit import with_cutoff

    worst = 0.0
    for control in (0, 1):
        circuit = build_experiment("cnot_dualrail", control=control, target=control)
        base = measure(evolve_numeric(circuit), circuit.measured_modes)
        wide = with_cutoff(circuit, 2 * circuit.system.cutoff)
        again = measure(evolve_numeric(wide), wide.measured_modes)
        patterns = set(base.distribution) | set(again.distribution)
        for p in patterns:
            worst = max(
                worst,
                abs(base.distribution.get(p, 0.0) - again.distribution.get(p, 0.0)),
            )
    return worst, 1e-12


ALL_CHECKS = [
    ("ccr below cutoff", check_ccr_below_cutoff),
    ("car exact", check_car_exact),
    ("number = creation o annihilation", check_number_identity),
    ("heisenberg residual", check_heisenberg),
    ("commutator identity", check_commutator_identity),
    ("normal-order matrix oracle", check_normal_order_oracle),
    ("built-in backend equivalence", check_backend_equivalence),
    ("randomized backend equivalence", check_random_equivalence),
    ("number conservation", check_number_conservation),
    ("mode entanglement entropy", check_entropy),
    ("cutoff robustness", check_cutoff_robustness),
]


def run_all_checks() -> list[tuple[str, bool, float, float]]:
    """Run every invariant check; returns (name, passed, worst, bound) rows."""
    results = []
    for name, fn in ALL_CHECKS:
        worst, bound = fn()
        results.append((name, worst <= bound, worst, bound))
    return results
