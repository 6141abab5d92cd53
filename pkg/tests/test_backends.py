"""Backends: numeric and symbolic evolution, measurement, comparison."""

import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from fockbench.algebra import (
    KetExpression,
    annihilation,
    basis_ket,
    creation,
    ket_inner,
    reduce_to_ket,
)
from fockbench.backends import (
    ComparisonReport,
    TruncationWarning,
    compare_backends,
    evolve_numeric,
    evolve_symbolic,
    heisenberg_residual,
    ket_to_fock,
    measure,
    polynomial_matrix,
)
from fockbench.checks import random_circuit
from fockbench.circuit import (
    ANTISYMMETRIC,
    BeamSplitter,
    Circuit,
    KerrMedium,
    PhaseShifter,
    QuadraticCustom,
    SYMMETRIC,
    build_experiment,
    cnot_expected_output,
    generator_from_unitary,
    with_cutoff,
)
from fockbench.fock import (
    FockVector,
    annihilation_op,
    creation_op,
    inner_product,
    vacuum_state,
)
from fockbench.modes import FERMION, ModeSystem


# ---------------------------------------------------------------------------
# Bridges
# ---------------------------------------------------------------------------


def test_polynomial_matrix_single_ladder():
    system = ModeSystem(2, 1, 4)
    for mode in range(system.total_modes):
        species = system.species(mode)
        got = polynomial_matrix(creation(mode, species), system)
        assert (got - creation_op(system, mode)).max_abs() == 0.0
        got = polynomial_matrix(annihilation(mode, species), system)
        assert (got - annihilation_op(system, mode)).max_abs() == 0.0


def test_polynomial_matrix_rejects_wrong_species():
    system = ModeSystem(1, 1, 4)
    with pytest.raises(ValueError, match="species"):
        polynomial_matrix(creation(1), system)  # mode 1 is fermionic


def test_polynomial_matrix_composes_left_to_right():
    system = ModeSystem(1, 0, 4)
    poly = creation(0) * annihilation(0)
    want = creation_op(system, 0) @ annihilation_op(system, 0)
    assert (polynomial_matrix(poly, system) - want).max_abs() == 0.0


def test_ket_to_fock_sqrt_weights():
    system = ModeSystem(1, 0, 4)
    ket = basis_ket(system, (3,))
    state = ket_to_fock(ket)
    assert state.amplitudes[(3,)] == pytest.approx(1.0)


def test_ket_to_fock_jordan_wigner_sign():
    system = ModeSystem(0, 2, 1)
    # canonical order b1dag b2dag gives +|1,1>; the reversed product is -|1,1>
    plus = reduce_to_ket(creation(0, FERMION) * creation(1, FERMION), system)
    minus = reduce_to_ket(creation(1, FERMION) * creation(0, FERMION), system)
    assert ket_to_fock(plus).amplitudes[(1, 1)] == pytest.approx(1.0)
    assert ket_to_fock(minus).amplitudes[(1, 1)] == pytest.approx(-1.0)


def test_ket_to_fock_matches_matrix_route():
    system = ModeSystem(2, 2, 4)
    poly = (
        creation(0) * creation(0) * creation(2, FERMION) * creation(3, FERMION) * 0.5
        + creation(1) * (0.1 - 0.4j)
    )
    ket = reduce_to_ket(poly, system)
    direct = ket_to_fock(ket)
    via_matrix = FockVector.from_dense(
        system,
        polynomial_matrix(ket.poly, system).matrix @ vacuum_state(system).to_dense(),
    )
    assert direct.allclose(via_matrix, 1e-13)
    assert inner_product(direct, direct) == pytest.approx(
        ket_inner(ket, ket), abs=1e-12
    )


def test_ket_to_fock_drops_beyond_cutoff():
    system = ModeSystem(1, 0, 2)
    ket = KetExpression(system, basis_ket(ModeSystem(1, 0, 4), (3,)).poly)
    assert ket_to_fock(ket).amplitudes == {}


# ---------------------------------------------------------------------------
# Numeric evolution
# ---------------------------------------------------------------------------


def test_numeric_empty_circuit():
    system = ModeSystem(2, 0, 4)
    circuit = Circuit(system, (), basis_ket(system, (1, 1)), (0, 1))
    out = evolve_numeric(circuit)
    assert out.allclose(ket_to_fock(circuit.input_state), 1e-14)


def test_numeric_single_photon_amplitudes():
    circuit = build_experiment("single_photon_bs_sym")
    out = evolve_numeric(circuit)
    s = 1 / math.sqrt(2)
    assert out.amplitudes[(1, 0)] == pytest.approx(s, abs=1e-12)
    assert out.amplitudes[(0, 1)] == pytest.approx(1j * s, abs=1e-12)
    assert out.norm() == pytest.approx(1.0, abs=1e-10)


def test_numeric_memory_cap():
    circuit = build_experiment("cnot_dualrail")
    with pytest.raises(ValueError, match="cap"):
        evolve_numeric(circuit, max_basis_size=100)


def test_numeric_truncation_warning():
    system = ModeSystem(2, 0, 1)
    circuit = Circuit(
        system,
        (BeamSplitter(0, 1, SYMMETRIC),),
        basis_ket(system, (1, 1)),
        (0, 1),
    )
    with pytest.warns(TruncationWarning):
        evolve_numeric(circuit)


def test_numeric_norm_preserved_through_elements():
    rng = np.random.default_rng(8)
    for _ in range(5):
        circuit = random_circuit(rng)
        assert evolve_numeric(circuit).norm() == pytest.approx(1.0, abs=1e-10)


# ---------------------------------------------------------------------------
# Symbolic evolution
# ---------------------------------------------------------------------------


def test_symbolic_empty_circuit():
    system = ModeSystem(2, 0, 4)
    circuit = Circuit(system, (), basis_ket(system, (1, 1)), (0, 1))
    assert evolve_symbolic(circuit).allclose(circuit.input_state)


def test_symbolic_matches_numeric_exactly_single_photon():
    for name in ("single_photon_bs_sym", "single_photon_bs_asym"):
        circuit = build_experiment(name)
        sym = evolve_symbolic(circuit)
        num = evolve_numeric(circuit)
        assert ket_to_fock(sym).allclose(num, 1e-12)


def test_symbolic_cnot_truth_table():
    for control in (0, 1):
        for target in (0, 1):
            circuit = build_experiment("cnot_dualrail", control=control, target=target)
            out = evolve_symbolic(circuit)
            amps = out.occupation_amplitudes()
            want = cnot_expected_output(control, target)
            assert abs(amps[want]) == pytest.approx(1.0, abs=1e-12)


def test_symbolic_hardy_certain():
    circuit = build_experiment("hardy_vertex", theta=math.pi / 2)
    out = evolve_symbolic(circuit)
    amps = out.occupation_amplitudes()
    assert set(amps) == {(1, 0, 0)}


def test_symbolic_custom_quadratic_matches_numeric():
    u = unitary_group.rvs(2, random_state=11)
    element = QuadraticCustom.from_matrix((0, 1), generator_from_unitary(u))
    system = ModeSystem(2, 0, 6)
    circuit = Circuit(system, (element,), basis_ket(system, (2, 1)), (0, 1))
    assert ket_to_fock(evolve_symbolic(circuit)).allclose(evolve_numeric(circuit), 1e-10)


def test_symbolic_amplitudes_match_numeric_on_random_circuits():
    rng = np.random.default_rng(21)
    for _ in range(5):
        circuit = random_circuit(rng)
        sym = ket_to_fock(evolve_symbolic(circuit))
        num = evolve_numeric(circuit)
        assert sym.allclose(num, 1e-10)


# ---------------------------------------------------------------------------
# Measurement
# ---------------------------------------------------------------------------


def test_measure_vacuum():
    system = ModeSystem(2, 0, 3)
    report = measure(vacuum_state(system), (0, 1))
    assert report.expectations == {0: 0.0, 1: 0.0}
    assert report.distribution == {(0, 0): 1.0}
    assert report.norm == pytest.approx(1.0)


def test_measure_single_particle_superposition_both_routes():
    system = ModeSystem(2, 0, 3)
    s = 1 / math.sqrt(2)
    fock = FockVector.from_amplitudes(system, {(1, 0): s, (0, 1): s})
    ket = KetExpression(
        system, (basis_ket(system, (1, 0)).poly + basis_ket(system, (0, 1)).poly) * s
    )
    for report in (measure(fock, (0, 1)), measure(ket, (0, 1))):
        assert report.expectations[0] == pytest.approx(0.5, abs=1e-12)
        assert report.expectations[1] == pytest.approx(0.5, abs=1e-12)
        assert report.distribution[(1, 0)] == pytest.approx(0.5, abs=1e-12)
        assert report.distribution[(0, 1)] == pytest.approx(0.5, abs=1e-12)


def test_measure_product_number_state():
    system = ModeSystem(2, 0, 3)
    ket = basis_ket(system, (1, 1))
    report = measure(ket, (0, 1))
    assert report.distribution == {(1, 1): pytest.approx(1.0)}


def test_measure_marginalizes_unmeasured_modes():
    system = ModeSystem(2, 0, 3)
    s = 1 / math.sqrt(2)
    fock = FockVector.from_amplitudes(system, {(1, 0): s, (1, 1): s})
    report = measure(fock, (0,))
    assert report.distribution == {(1,): pytest.approx(1.0)}
    ket = KetExpression(
        system, (basis_ket(system, (1, 0)).poly + basis_ket(system, (1, 1)).poly) * s
    )
    report = measure(ket, (0,))
    assert report.distribution[(1,)] == pytest.approx(1.0, abs=1e-12)


def test_measure_rejects_unnormalized():
    system = ModeSystem(1, 0, 3)
    with pytest.raises(ValueError, match="normalized"):
        measure(FockVector.from_amplitudes(system, {(1,): 0.5}), (0,))
    with pytest.raises(ValueError, match="normalized"):
        measure(KetExpression(system, basis_ket(system, (1,)).poly * 0.5), (0,))


def test_measure_probabilities_sum_to_one():
    rng = np.random.default_rng(17)
    circuit = random_circuit(rng)
    for state in (evolve_numeric(circuit), evolve_symbolic(circuit)):
        report = measure(state, circuit.measured_modes)
        assert sum(report.distribution.values()) == pytest.approx(1.0, abs=1e-10)
        for mode in circuit.measured_modes:
            via_dist = sum(
                p * occ[circuit.measured_modes.index(mode)]
                for occ, p in report.distribution.items()
            )
            assert report.expectations[mode] == pytest.approx(via_dist, abs=1e-10)


# ---------------------------------------------------------------------------
# Backend comparison
# ---------------------------------------------------------------------------


def test_compare_single_photon():
    report = compare_backends(build_experiment("single_photon_bs_sym"), 1e-10)
    assert report.passed
    assert report.max_deviation < 1e-12


def test_compare_all_cnot_inputs():
    for control in (0, 1):
        for target in (0, 1):
            circuit = build_experiment("cnot_dualrail", control=control, target=target)
            report = compare_backends(circuit, 1e-10)
            assert report.passed, report.deviations


def test_compare_reports_all_quantities():
    circuit = build_experiment("single_photon_bs_sym")
    report = compare_backends(circuit, 1e-9)
    assert set(report.deviations) >= {"N1", "N2", "P(1,0)", "P(0,1)"}
    assert report.max_deviation == max(report.deviations.values())


def test_compare_detects_truncation_mismatch():
    # cutoff 1 cannot hold the bunched two-photon component after the beam
    # splitter, so the numeric route diverges from the exact algebraic one
    system = ModeSystem(2, 0, 1)
    circuit = Circuit(
        system,
        (BeamSplitter(0, 1, SYMMETRIC),),
        basis_ket(system, (1, 1)),
        (0, 1),
    )
    with pytest.warns(TruncationWarning):
        report = compare_backends(circuit, 1e-9)
    assert not report.passed
    assert report.max_deviation > 0.1


def test_compare_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        compare_backends(build_experiment("single_photon_bs_sym"), 0.0)


# ---------------------------------------------------------------------------
# Heisenberg residual and unitarity
# ---------------------------------------------------------------------------


def test_heisenberg_identity_element():
    system = ModeSystem(2, 0, 6)
    element = QuadraticCustom.from_matrix((0, 1), np.zeros((2, 2)))
    assert heisenberg_residual(element, system) < 1e-13


@pytest.mark.parametrize("variant", [SYMMETRIC, ANTISYMMETRIC])
def test_heisenberg_beam_splitters(variant):
    system = ModeSystem(2, 0, 6)
    assert heisenberg_residual(BeamSplitter(0, 1, variant), system) < 1e-10


def test_heisenberg_phase_shifter():
    system = ModeSystem(1, 0, 6)
    assert heisenberg_residual(PhaseShifter(0, 0.83), system) < 1e-10


def test_heisenberg_fermionic_splitter_exact_everywhere():
    system = ModeSystem(0, 2, 1)
    assert heisenberg_residual(BeamSplitter(0, 1, ANTISYMMETRIC), system) < 1e-12


def test_heisenberg_rejects_nonlinear():
    system = ModeSystem(2, 0, 4)
    with pytest.raises(ValueError):
        heisenberg_residual(KerrMedium(0, 1), system)


def test_numeric_evolution_unitary_on_safe_subspace():
    from scipy.linalg import expm

    from fockbench.circuit import element_generator

    system = ModeSystem(2, 0, 6)
    gen = polynomial_matrix(
        element_generator(BeamSplitter(0, 1, SYMMETRIC), system), system
    )
    s = expm(gen.matrix.toarray())
    assert np.abs(s.conj().T @ s - np.eye(system.basis_size)).max() < 1e-10


# ---------------------------------------------------------------------------
# Conservation and truncation properties
# ---------------------------------------------------------------------------


def test_total_photon_number_conserved_element_by_element():
    rng = np.random.default_rng(2)
    circuit = random_circuit(rng, max_elements=6)
    modes = tuple(range(circuit.system.total_modes))
    expected = sum(measure(circuit.input_state, modes).expectations.values())
    partial = circuit.input_state
    running = []
    for element in circuit.elements:
        sub = Circuit(circuit.system, (element,), partial.normalized(), modes)
        partial = evolve_symbolic(sub)
        running.append(sum(measure(partial, modes).expectations.values()))
    for total in running:
        assert total == pytest.approx(expected, abs=1e-10)


def test_hardy_sector_bookkeeping():
    # the vertex maps the (0,1,1) sector into span{(0,1,1),(1,0,0)} with
    # weights cos^2, sin^2
    theta = 0.53
    circuit = build_experiment("hardy_vertex", theta=theta)
    for state in (evolve_numeric(circuit), evolve_symbolic(circuit)):
        report = measure(state, (0, 1, 2))
        assert set(report.distribution) <= {(0, 1, 1), (1, 0, 0)}
        assert report.distribution[(0, 1, 1)] == pytest.approx(
            math.cos(theta) ** 2, abs=1e-10
        )
        assert report.distribution[(1, 0, 0)] == pytest.approx(
            math.sin(theta) ** 2, abs=1e-10
        )


def test_doubling_cutoff_changes_nothing_when_conserving():
    rng = np.random.default_rng(4)
    circuit = random_circuit(rng)
    base = measure(evolve_numeric(circuit), circuit.measured_modes)
    wide = with_cutoff(circuit, 2 * circuit.system.cutoff)
    again = measure(evolve_numeric(wide), wide.measured_modes)
    keys = set(base.distribution) | set(again.distribution)
    for key in keys:
        assert base.distribution.get(key, 0.0) == pytest.approx(
            again.distribution.get(key, 0.0), abs=1e-12
        )


def test_comparison_report_verdict_logic():
    report = ComparisonReport({"N1": 1e-3}, 1e-3, 1e-9, "fail")
    assert not report.passed
