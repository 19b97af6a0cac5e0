"""Spin-cluster dynamics against an independently built Kronecker oracle."""

import math

import numpy as np
import pytest

from donorgate import (
    DimensionError,
    InvalidSpecError,
    NoCleanGateError,
    PreconditionError,
    SpinSystem,
    build_hamiltonian,
    concurrence,
    effective_coupling,
    entanglement_entropy,
    entangling_power,
    evolve,
    gate_fidelity,
    induced_qubit_operator,
    propagator,
    sfg_gate,
)

HBAR = 0.6582  # meV ps

SX = np.array([[0, 1], [1, 0]]) / 2.0
SY = np.array([[0, -1j], [1j, 0]]) / 2.0
SZ = np.array([[1, 0], [0, -1]]) / 2.0


def _op(n, k, single):
    mats = [np.eye(2)] * n
    mats[k] = single
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _kron_hamiltonian(n, couplings, zeeman=None):
    H = np.zeros((2**n, 2**n), dtype=complex)
    for (i, j), J in couplings.items():
        for s in (SX, SY, SZ):
            H += J * _op(n, i, s) @ _op(n, j, s)
    for k, d in enumerate(zeeman or []):
        H += d * _op(n, k, SZ)
    return H


def test_hamiltonian_matches_kronecker_oracle():
    couplings = {(0, 1): 3.7, (0, 2): -1.2, (1, 2): 0.4}
    zeeman = (0.5, -0.25, 0.0)
    sys3 = SpinSystem(
        spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
        couplings=couplings,
        zeeman_mev=zeeman,
    )
    H = build_hamiltonian(sys3)
    want = _kron_hamiltonian(3, couplings, zeeman)
    assert np.max(np.abs(H - want)) < 1e-12
    assert np.max(np.abs(H - H.T)) < 1e-12


def test_propagator_unitary_and_conserves_total_sz():
    rng = np.random.default_rng(11)
    for _ in range(25):
        n = int(rng.integers(2, 5))
        couplings = {}
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.7:
                    couplings[(i, j)] = float(rng.normal(0.0, 20.0))
        sys_n = SpinSystem(
            spins=tuple((f"s{k}", "qubit") for k in range(n)),
            couplings=couplings,
            zeeman_mev=tuple(rng.normal(0.0, 2.0) for _ in range(n)),
        )
        H = build_hamiltonian(sys_n)
        U = propagator(H, float(rng.uniform(0.1, 50.0)))
        assert np.max(np.abs(U.conj().T @ U - np.eye(2**n))) < 1e-10
        sz_tot = sum(_op(n, k, SZ) for k in range(n))
        assert np.max(np.abs(H @ sz_tot - sz_tot @ H)) < 1e-12


def test_two_spin_swap_at_pi_hbar_over_j():
    J = 7.0
    pair = SpinSystem(spins=(("a", "qubit"), ("b", "qubit")), couplings={(0, 1): J})
    H = build_hamiltonian(pair)
    up_down = np.array([0.0, 1.0, 0.0, 0.0])  # |a up, b down>
    out = evolve(up_down, H, math.pi * HBAR / J)
    # population fully transferred
    assert abs(out[2]) ** 2 == pytest.approx(1.0, abs=1e-10)
    # and the full propagator is SWAP up to a global phase
    U = propagator(H, math.pi * HBAR / J)
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert gate_fidelity(U, swap) == pytest.approx(1.0, abs=1e-10)


def test_half_swap_interval_is_root_swap():
    J = 7.0
    pair = SpinSystem(spins=(("a", "qubit"), ("b", "qubit")), couplings={(0, 1): J})
    U = propagator(build_hamiltonian(pair), math.pi * HBAR / (2.0 * J))
    assert entangling_power(U) == pytest.approx(1.0 / 6.0, abs=1e-9)


def test_effective_coupling_formula():
    assert effective_coupling(32.3, 10.5, 600.0) == pytest.approx(0.56525, abs=1e-6)
    assert effective_coupling(41.2, 5.6, 600.0) == pytest.approx(0.384533, abs=1e-6)
    with pytest.raises(PreconditionError):
        effective_coupling(1.0, 1.0, 0.0)


def test_concurrence_and_entropy_anchors():
    bell = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
    product = np.array([1.0, 0.0, 0.0, 0.0])
    assert concurrence(bell) == pytest.approx(1.0, abs=1e-12)
    assert concurrence(product) == pytest.approx(0.0, abs=1e-12)
    assert entanglement_entropy(bell) == pytest.approx(1.0, abs=1e-12)
    assert entanglement_entropy(product) == pytest.approx(0.0, abs=1e-12)
    theta = 0.3
    partial = np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)])
    assert concurrence(partial) == pytest.approx(math.sin(2 * theta), abs=1e-12)


def test_entangling_power_anchors():
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    swap = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert entangling_power(cnot) == pytest.approx(2.0 / 9.0, abs=1e-12)
    assert entangling_power(swap) == pytest.approx(0.0, abs=1e-12)
    assert entangling_power(np.eye(4)) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(PreconditionError):
        entangling_power(np.ones((4, 4)))
    with pytest.raises(DimensionError):
        entangling_power(np.eye(8))


def test_symmetric_trio_clean_gate():
    J = 10.0
    trio = SpinSystem(
        spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
        couplings={(0, 1): J, (0, 2): J},
    )
    report = sfg_gate(trio, "C")
    # equal couplings disentangle at 4 pi hbar / 3J
    tau1 = 4.0 * math.pi * HBAR / (3.0 * J)
    assert report.duration_ps == pytest.approx(tau1, rel=1e-6)
    assert report.control_residual_entanglement < 1e-6
    assert report.entangling_power == pytest.approx(0.125, abs=1e-6)
    assert report.qubit_labels == ("Q1", "Q2")
    # the reported operator really is what the qubits see at that interval
    block, residual = induced_qubit_operator(trio, "C", report.duration_ps)
    assert residual < 1e-6
    assert gate_fidelity(block, report.qubit_unitary) == pytest.approx(1.0, abs=1e-9)


def test_generic_ratio_raises_with_best_candidate():
    # incommensurate couplings admit no exactly clean interval; the error must
    # carry a genuine entangling candidate, not the identity at tau -> 0
    trio = SpinSystem(
        spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
        couplings={(0, 1): 116.4, (0, 2): 38.6},
    )
    with pytest.raises(NoCleanGateError) as err:
        sfg_gate(trio, "C")
    best = err.value.best_candidate
    assert best is not None
    assert best.entangling_power > 1e-6
    assert best.duration_ps > 0.01 * math.pi * HBAR / 116.4
    assert best.control_residual_entanglement < 0.05


def test_sfg_gate_topology_validation():
    with pytest.raises(PreconditionError):
        # only one coupled qubit
        sfg_gate(SpinSystem(
            spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
            couplings={(0, 1): 5.0}), "C")
    with pytest.raises(PreconditionError):
        # direct qubit-qubit coupling breaks the gate topology
        sfg_gate(SpinSystem(
            spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
            couplings={(0, 1): 5.0, (0, 2): 5.0, (1, 2): 1.0}), "C")
    with pytest.raises(InvalidSpecError):
        sfg_gate(SpinSystem(
            spins=(("C", "control"), ("Q1", "qubit"), ("Q2", "qubit")),
            couplings={(0, 1): 5.0, (0, 2): 5.0}), "missing")


def test_system_validation():
    with pytest.raises(InvalidSpecError):
        SpinSystem(spins=())
    with pytest.raises(InvalidSpecError):
        SpinSystem(spins=(("a", "qubit"), ("a", "qubit")))
    with pytest.raises(InvalidSpecError):
        SpinSystem(spins=(("a", "qubit"),), couplings={(0, 0): 1.0})
    with pytest.raises(InvalidSpecError):
        SpinSystem(spins=(("a", "qubit"), ("b", "qubit")),
                   couplings={(0, 1): 1.0}, zeeman_mev=(0.0,))
    with pytest.raises(DimensionError):
        SpinSystem(spins=tuple((f"s{k}", "qubit") for k in range(15)))
