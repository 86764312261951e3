import numpy as np
import pytest
import scipy.linalg

from conftest import random_complex, random_density, random_unitary
from spinctrl import lindblad
from spinctrl.lindblad import (
    Generator,
    PulseSequence,
    assemble_dissipator,
    assemble_hamiltonian_super,
    build_generator,
    dt_validity_check,
    propagate_state,
    split_factors,
    split_propagator,
    state_fitness,
    step_propagator_exact,
    superop_fidelity,
    target_superoperator,
    total_propagator_exact,
    unitary_superoperator,
)
from spinctrl.linalg import dagger, kron, partial_trace, res, unres
from spinctrl.model import NoiseSpec, Scenario, SpinSystem, pauli, scenario_catalog

E01 = np.array([[0, 1], [0, 0]], dtype=complex)
E11 = np.diag([0.0, 1.0]).astype(complex)


def lindblad_rhs(rho, h, collapse_ops):
    """Brute-force master-equation right hand side."""
    out = -1j * (h @ rho - rho @ h)
    for op, gamma in collapse_ops:
        gram = op.conj().T @ op
        out += gamma * (op @ rho @ op.conj().T - 0.5 * (gram @ rho + rho @ gram))
    return out


def random_pulses(rng, m, dt, h_scale=2.0):
    return PulseSequence(
        rng.uniform(-h_scale, h_scale, m), rng.uniform(-h_scale, h_scale, m), dt
    )


class TestPulseSequence:
    def test_validation(self):
        with pytest.raises(ValueError):
            PulseSequence([1.0], [1.0, 2.0], 0.1)
        with pytest.raises(ValueError):
            PulseSequence([1.0], [1.0], 0.0)

    def test_genome_roundtrip(self, rng):
        p = random_pulses(rng, 5, 0.1)
        q = PulseSequence.from_genome(p.genome(), p.dt)
        assert np.array_equal(q.hx, p.hx) and np.array_equal(q.hy, p.hy)

    def test_empty_sequence_allowed(self):
        p = PulseSequence(np.empty(0), np.empty(0), 0.1)
        assert p.num_pulses == 0 and p.duration == 0.0


class TestDissipator:
    def test_zero_rate_is_zero_matrix(self):
        d = assemble_dissipator([(pauli("minus"), 0.0)])
        assert np.array_equal(d, np.zeros((4, 4)))

    def test_empty_list_rejected(self):
        with pytest.raises(ValueError):
            assemble_dissipator([])

    def test_amplitude_damping_population_rate(self):
        # analytic single-qubit decay: d rho_11 / dt = -gamma
        gamma = 0.7
        d = assemble_dissipator([(pauli("minus"), gamma)])
        drho = unres(d @ res(E11))
        assert abs(drho[1, 1] - (-gamma)) < 1e-14
        assert abs(drho[0, 0] - gamma) < 1e-14

    def test_dephasing_coherence_eigenvalue(self):
        gamma = 0.35
        d = assemble_dissipator([(pauli("z"), gamma)])
        out = d @ res(E01)
        assert np.allclose(out, -2.0 * gamma * res(E01), atol=1e-14)

    def test_matches_bruteforce_rhs(self, rng):
        ops = [
            (kron(pauli("minus"), np.eye(2)), 0.4),
            (kron(np.eye(2), pauli("z")), 0.9),
        ]
        d = assemble_dissipator(ops)
        for _ in range(5):
            rho = random_complex(rng, (4, 4))
            got = unres(d @ res(rho))
            want = lindblad_rhs(rho, np.zeros((4, 4)), ops)
            assert np.allclose(got, want, atol=1e-13)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            assemble_dissipator([(pauli("z"), 1.0), (np.eye(4), 1.0)])


class TestHamiltonianSuper:
    def test_zero(self):
        assert np.array_equal(
            assemble_hamiltonian_super(np.zeros((2, 2))), np.zeros((4, 4))
        )

    def test_sigma_z_coherence_rotation(self):
        k = assemble_hamiltonian_super(pauli("z"))
        for t in (0.3, 1.1):
            evolved = scipy.linalg.expm(t * k) @ res(E01)
            assert np.allclose(evolved, np.exp(-2j * t) * res(E01), atol=1e-12)

    def test_conjugation_oracle(self, rng):
        for _ in range(5):
            h = random_complex(rng, (2, 2))
            h = h + dagger(h)
            rho = random_density(rng, 2)
            t = rng.uniform(0.1, 1.5)
            k = assemble_hamiltonian_super(h)
            got = unres(scipy.linalg.expm(t * k) @ res(rho))
            u = scipy.linalg.expm(-1j * t * h)
            assert np.allclose(got, u @ rho @ dagger(u), atol=1e-12)

    def test_warns_on_non_hermitian(self):
        with pytest.warns(UserWarning):
            assemble_hamiltonian_super(np.array([[0, 1], [0, 0]], dtype=complex))


def single_qubit_generator(noise=None, coupling_free=True):
    system = SpinSystem(1)
    return build_generator(system, 0, noise)


class TestExactPropagation:
    def test_zero_generator_is_identity(self):
        gen = single_qubit_generator()
        step = step_propagator_exact(gen, 0.0, 0.0, 1.0)
        assert np.allclose(step, np.eye(4), atol=1e-15)

    def test_amplitude_damping_half_life(self):
        gen = single_qubit_generator(NoiseSpec("amplitude_damping", 1.0, (0,)))
        step = step_propagator_exact(gen, 0.0, 0.0, np.log(2))
        rho = propagate_state(step, E11)
        assert np.allclose(rho, np.diag([0.5, 0.5]), atol=1e-12)

    def test_phase_damping_coherence_decay(self):
        gamma, dt = 0.8, 0.6
        gen = single_qubit_generator(NoiseSpec("phase_damping", gamma, (0,)))
        step = step_propagator_exact(gen, 0.0, 0.0, dt)
        rho0 = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
        rho = propagate_state(step, rho0)
        assert abs(abs(rho[0, 1]) - 0.5 * np.exp(-2 * gamma * dt)) < 1e-12

    def test_single_interval_matches_step(self, rng):
        gen = build_generator(
            SpinSystem.chain(2), 0, NoiseSpec.on_all_sites("phase_damping", 0.2, 2)
        )
        total = total_propagator_exact(gen, PulseSequence([1.3], [-0.4], 0.25))
        step = step_propagator_exact(gen, 1.3, -0.4, 0.25)
        assert np.allclose(total, step, atol=1e-14)

    def test_noiseless_matches_unitary_conjugation(self, rng):
        # independent oracle: Hilbert-space evolution via scipy expm
        system = SpinSystem.chain(2)
        gen = build_generator(system, 1, None)
        pulses = random_pulses(rng, 6, 0.15)
        got = total_propagator_exact(gen, pulses)

        from spinctrl.model import build_controls, build_drift

        h0 = build_drift(system)
        sx, sy = build_controls(system, 1)
        u = np.eye(4, dtype=complex)
        for k in range(pulses.num_pulses):
            h = h0 + pulses.hx[k] * sx + pulses.hy[k] * sy
            u = scipy.linalg.expm(-1j * pulses.dt * h) @ u
        assert np.max(np.abs(got - kron(u, np.conj(u)))) < 1e-10

    def test_composition(self, rng):
        gen = build_generator(
            SpinSystem.chain(2), 0, NoiseSpec.on_all_sites("amplitude_damping", 0.1, 2)
        )
        p1 = random_pulses(rng, 3, 0.2)
        p2 = random_pulses(rng, 4, 0.2)
        whole = PulseSequence(
            np.concatenate([p1.hx, p2.hx]), np.concatenate([p1.hy, p2.hy]), 0.2
        )
        lhs = total_propagator_exact(gen, whole)
        rhs = total_propagator_exact(gen, p2) @ total_propagator_exact(gen, p1)
        assert np.allclose(lhs, rhs, atol=1e-11)


class TestGeneratorInvariants:
    @pytest.mark.parametrize("kind", ["amplitude_damping", "phase_damping"])
    def test_trace_preservation_of_generator(self, kind, rng):
        n = 2
        gen = build_generator(
            SpinSystem.chain(n), 0, NoiseSpec.on_all_sites(kind, 0.6, n)
        )
        full = gen.at(1.7, -0.9)
        left = res(np.eye(gen.dim)) @ full
        assert np.max(np.abs(left)) < 1e-12

    def test_propagator_preserves_trace_and_hermiticity(self, rng):
        for kind in ("amplitude_damping", "phase_damping"):
            gen = build_generator(
                SpinSystem.chain(3), 1, NoiseSpec.on_all_sites(kind, 0.4, 3)
            )
            x = total_propagator_exact(gen, random_pulses(rng, 4, 0.1))
            assert np.max(np.abs(res(np.eye(8)) @ x - res(np.eye(8)))) < 1e-10
            rho = random_density(rng, 8)
            out = propagate_state(x, rho)
            assert abs(np.trace(out) - 1) < 1e-10
            assert np.max(np.abs(out - dagger(out))) < 1e-10

    def test_positivity_spot_check(self, rng):
        gen = build_generator(
            SpinSystem.chain(2), 0, NoiseSpec.on_all_sites("amplitude_damping", 0.7, 2)
        )
        x = total_propagator_exact(gen, random_pulses(rng, 8, 0.26, h_scale=5))
        for _ in range(10):
            out = propagate_state(x, random_density(rng, 4))
            assert np.min(np.linalg.eigvalsh((out + dagger(out)) / 2)) > -1e-9


class TestSplit:
    def test_noiseless_factors_are_identity(self):
        gen = build_generator(SpinSystem.chain(2), 0, None)
        a, b, _ = split_factors(gen, 1.0, 2.0, 0.3)
        assert np.array_equal(a, np.eye(16))
        assert np.array_equal(b, np.eye(16))

    def test_dephasing_factors_diagonal(self):
        gen = single_qubit_generator(NoiseSpec("phase_damping", 0.5, (0,)))
        a, b, _ = split_factors(gen, 0.2, 0.1, 0.4)
        assert np.max(np.abs(a - np.diag(np.diag(a)))) < 1e-14
        assert np.max(np.abs(b - np.diag(np.diag(b)))) < 1e-14

    def test_local_error_second_order(self, rng):
        gen = build_generator(
            SpinSystem.chain(2), 1, NoiseSpec.on_all_sites("amplitude_damping", 0.5, 2)
        )
        errs = []
        for dt in (0.1, 0.05, 0.025):
            a, b, c = split_factors(gen, 1.4, -0.8, dt)
            exact = step_propagator_exact(gen, 1.4, -0.8, dt)
            errs.append(np.linalg.norm(a @ b @ c - exact))
        assert 3.3 < errs[0] / errs[1] < 4.7
        assert 3.5 < errs[1] / errs[2] < 4.5

    def test_noiseless_split_equals_exact(self, rng):
        gen = build_generator(SpinSystem.chain(2), 0, None)
        pulses = random_pulses(rng, 5, 0.2)
        assert np.allclose(
            split_propagator(gen, pulses),
            total_propagator_exact(gen, pulses),
            atol=1e-13,
        )

    def test_single_interval_matches_factors(self):
        gen = build_generator(
            SpinSystem.chain(2), 0, NoiseSpec.on_all_sites("phase_damping", 0.3, 2)
        )
        pulses = PulseSequence([0.9], [-1.2], 0.15)
        a, b, c = split_factors(gen, 0.9, -1.2, 0.15)
        assert np.allclose(split_propagator(gen, pulses), a @ b @ c, atol=1e-14)

    def test_global_error_first_order(self, rng):
        # halving dt at fixed total time halves the gap to the exact
        # propagator (the splitting is locally second order, globally first)
        gen = build_generator(
            SpinSystem.chain(2), 1, NoiseSpec.on_all_sites("phase_damping", 0.3, 2)
        )
        base_hx = rng.uniform(-2, 2, 4)
        base_hy = rng.uniform(-2, 2, 4)
        errs = []
        for refine in (1, 2, 4):
            hx = np.repeat(base_hx, refine)
            hy = np.repeat(base_hy, refine)
            pulses = PulseSequence(hx, hy, 0.4 / len(hx))
            errs.append(
                np.linalg.norm(
                    split_propagator(gen, pulses) - total_propagator_exact(gen, pulses)
                )
            )
        assert 1.7 < errs[0] / errs[1] < 2.4
        assert 1.7 < errs[1] / errs[2] < 2.4


class TestValidityCheck:
    def test_zero_generator_unbounded(self):
        gen = single_qubit_generator()
        ok, bound = dt_validity_check(gen, 0.0, 123.0)
        assert ok and bound == np.inf

    def test_catalog_scenario_violates_bound(self):
        scenario = scenario_catalog()[0]
        gen = build_generator(scenario.system, scenario.control_site, None)
        dt = scenario.total_time / scenario.num_pulses
        ok, bound = dt_validity_check(gen, scenario.h_max, dt)
        assert not ok
        assert bound < 5e-3

    def test_bound_halves_when_control_dominates(self):
        gen = build_generator(SpinSystem.chain(2), 0, None)
        _, b1 = dt_validity_check(gen, 200.0, 0.1)
        _, b2 = dt_validity_check(gen, 400.0, 0.1)
        assert 1.8 < b1 / b2 < 2.2


class TestSuperopFidelity:
    def test_self_fidelity_of_unitary_channel(self, rng):
        u = random_unitary(rng, 4)
        a = unitary_superoperator(u)
        assert abs(superop_fidelity(a, a, 2) - 1.0) < 1e-12

    def test_identity_vs_not(self):
        a = unitary_superoperator(np.eye(2))
        t = unitary_superoperator(pauli("x"))
        assert abs(superop_fidelity(a, t, 1)) < 1e-14

    def test_phase_damped_identity(self):
        # diagonal superoperator diag(1, e^-2gt, e^-2gt, 1) against identity
        gamma_t = 0.1
        gen = single_qubit_generator(NoiseSpec("phase_damping", 1.0, (0,)))
        a = step_propagator_exact(gen, 0.0, 0.0, gamma_t)
        expected = (2 + 2 * np.exp(-2 * gamma_t)) / 4
        assert abs(superop_fidelity(a, np.eye(4), 1) - expected) < 1e-12

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            superop_fidelity(np.eye(4), np.eye(16), 2)

    def test_relabeling_invariance(self, rng):
        # simultaneous tensor-slot relabeling of both arguments
        u = random_unitary(rng, 4)
        v = random_unitary(rng, 4)
        swap = np.zeros((4, 4))
        for i in range(2):
            for j in range(2):
                swap[j * 2 + i, i * 2 + j] = 1.0
        f1 = superop_fidelity(unitary_superoperator(u), unitary_superoperator(v), 2)
        us = swap @ u @ swap
        vs = swap @ v @ swap
        f2 = superop_fidelity(unitary_superoperator(us), unitary_superoperator(vs), 2)
        assert abs(f1 - f2) < 1e-12


def fitness_oracle(channel, scenario):
    """Direct summation over all matrix units, the definition made literal."""
    d = scenario.dim
    n = scenario.num_qubits
    dims = [2] * n
    keep = scenario.target_sites
    u = scenario.target_unitary
    z = 2 ** (2 * len(scenario.target_sites) + len(scenario.ancilla_sites))
    acc = 0.0
    for i in range(d * d):
        e = np.zeros(d * d, dtype=complex)
        e[i] = 1.0
        basis = unres(e)
        evolved = partial_trace(unres(channel @ res(basis)), dims, keep)
        target = u @ partial_trace(basis, dims, keep) @ dagger(u)
        acc += np.trace(dagger(target) @ evolved).real
    return acc / z


def tiny_scenario(system, control, target, ancilla):
    return Scenario(
        "t", system, control, target, ancilla, num_pulses=4, total_time=1.0, h_max=5.0
    )


class TestStateFitness:
    def test_perfect_channel_no_ancilla(self):
        scenario = tiny_scenario(SpinSystem.chain(2), 0, kron(pauli("x"), np.eye(2)), ())
        channel = target_superoperator(scenario)
        assert abs(state_fitness(channel, scenario) - 1.0) < 1e-12

    def test_perfect_with_any_ancilla_unitary(self, rng):
        scenario = tiny_scenario(SpinSystem.chain(2), 1, pauli("x"), (0,))
        for _ in range(5):
            w = random_unitary(rng, 2)
            channel = unitary_superoperator(kron(w, pauli("x")))
            assert abs(state_fitness(channel, scenario) - 1.0) < 1e-12

    def test_depolarizing_channel(self):
        scenario = tiny_scenario(SpinSystem(1), 0, pauli("x"), ())
        channel = np.outer(res(np.eye(2) / 2), res(np.eye(2)))
        assert abs(state_fitness(channel, scenario) - 0.25) < 1e-14

    def test_matches_bruteforce_oracle(self, rng):
        cases = [
            tiny_scenario(SpinSystem.chain(2), 1, pauli("x"), (0,)),
            tiny_scenario(SpinSystem.chain(3), 0, kron(np.eye(2), pauli("x")), (0,)),
            tiny_scenario(SpinSystem.chain(2), 0, kron(pauli("y"), pauli("x")), ()),
        ]
        for scenario in cases:
            gen = build_generator(
                scenario.system,
                scenario.control_site,
                NoiseSpec.on_all_sites("amplitude_damping", 0.3, scenario.num_qubits),
            )
            channel = total_propagator_exact(gen, random_pulses(rng, 3, 0.2))
            assert abs(
                state_fitness(channel, scenario) - fitness_oracle(channel, scenario)
            ) < 1e-11

    def test_ancilla_in_middle_slot(self, rng):
        scenario = Scenario(
            "m",
            SpinSystem.chain(3),
            1,
            kron(pauli("x"), np.eye(2)),
            ancilla_sites=(1,),
            num_pulses=4,
            total_time=1.0,
            h_max=5.0,
        )
        gen = build_generator(scenario.system, 1, None)
        channel = total_propagator_exact(gen, random_pulses(rng, 3, 0.3))
        assert abs(
            state_fitness(channel, scenario) - fitness_oracle(channel, scenario)
        ) < 1e-11

    def test_dim_mismatch(self):
        scenario = tiny_scenario(SpinSystem(1), 0, pauli("x"), ())
        with pytest.raises(ValueError):
            state_fitness(np.eye(16), scenario)


class TestTargetSuperoperator:
    def test_scenario_a_extends_with_identity(self):
        scenario = scenario_catalog()[0]
        a_t = target_superoperator(scenario)
        u_full = kron(np.eye(2), pauli("x"))
        assert np.allclose(a_t, kron(u_full, np.conj(u_full)), atol=1e-14)

    def test_fidelity_one_for_full_target(self):
        for scenario in scenario_catalog():
            a_t = target_superoperator(scenario)
            assert abs(superop_fidelity(a_t, a_t, scenario.num_qubits) - 1) < 1e-12
