import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from greenqit.fermion import (
    LN2,
    TwoFermionMixedState,
    TwoFermionPureState,
    entanglement_of_formation,
    entropy,
    from_json,
    hf_two_rdm,
    is_fermionic_separable,
    max_slater_overlap_search,
    one_particle_rdm,
    pair_index,
    pure_state_entanglement,
    random_pure_state,
    random_slater_mixture,
    random_slater_state,
    slater_decompose,
    slater_state,
    slater_witness,
    to_json,
    wedge,
    wedge_ensemble,
)
from greenqit.numerics import rng, spawn_seeds

E4 = np.eye(4)
S12 = slater_state(E4[0], E4[1])
S34 = slater_state(E4[2], E4[3])


def bell_like(d=4):
    e = np.eye(d)
    c = slater_state(e[0], e[1]).vector() + slater_state(e[2], e[3]).vector()
    return TwoFermionPureState.from_vector(c / math.sqrt(2), d)


def haar_unitary(seed, d):
    g = rng(seed)
    q, r = np.linalg.qr(g.normal(size=(d, d)) + 1j * g.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def binary_entropy(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def fermionic_concurrence(rho):
    """Wootters-type concurrence on the six-dimensional two-fermion space of d = 4.

    The pair-basis dual map sends c_01 <-> c_23, c_02 <-> -c_13, c_03 <-> c_12.
    """
    dual = np.zeros((6, 6))
    for a, b, s in [(0, 5, 1), (1, 4, -1), (2, 3, 1)]:
        dual[a, b] = dual[b, a] = s
    sq = _psd_sqrt(rho)
    tilde = dual @ rho.conj() @ dual.T
    lam = np.sort(np.sqrt(np.maximum(np.linalg.eigvalsh(_psd_sqrt(sq @ tilde @ sq) @ _psd_sqrt(sq @ tilde @ sq)), 0)))[::-1]
    return max(0.0, lam[0] - lam[1:].sum())


def _psd_sqrt(m):
    lam, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.maximum(lam, 0))) @ v.conj().T


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------


def test_pair_basis_order():
    assert pair_index(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_pure_state_validation():
    with pytest.raises(ValueError, match="antisymmetric"):
        TwoFermionPureState(np.eye(3) / math.sqrt(3))
    a = np.zeros((3, 3))
    a[0, 1], a[1, 0] = 1.0, -1.0
    with pytest.raises(ValueError, match="normalized"):
        TwoFermionPureState(a)
    with pytest.raises(ValueError):
        TwoFermionPureState(np.zeros((1, 1)))


def test_vector_round_trip_and_norm():
    psi = random_pure_state(3, 5)
    c = psi.vector()
    assert abs(np.linalg.norm(c) - 1) < 1e-12
    np.testing.assert_allclose(TwoFermionPureState.from_vector(c, 5).A, psi.A, atol=1e-15)


def test_mixed_state_validation():
    with pytest.raises(ValueError, match="trace"):
        TwoFermionMixedState(4, np.eye(6))
    with pytest.raises(ValueError, match="positive"):
        TwoFermionMixedState(4, np.diag([2.0, -1.0, 0, 0, 0, 0]))
    with pytest.raises(ValueError):
        TwoFermionMixedState(4, np.eye(5) / 5)


# --------------------------------------------------------------------------
# Slater decomposition, RDM, entropy
# --------------------------------------------------------------------------


def test_single_determinant():
    a = np.zeros((4, 4))
    a[0, 1], a[1, 0] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    sd = slater_decompose(TwoFermionPureState(a))
    assert sd.slater_rank == 1
    assert abs(abs(sd.z[0]) - 1 / math.sqrt(2)) < 1e-12
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(one_particle_rdm(TwoFermionPureState(a))))[::-1],
                               [0.5, 0.5, 0, 0], atol=1e-14)
    assert abs(pure_state_entanglement(TwoFermionPureState(a)) - LN2) < 1e-12


def test_bell_like_state():
    psi = bell_like()
    sd = slater_decompose(psi)
    assert sd.slater_rank == 2
    np.testing.assert_allclose(np.abs(sd.z), [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(sd.reconstruct(), psi.A, atol=1e-12)
    np.testing.assert_allclose(np.linalg.eigvalsh(one_particle_rdm(psi)), [0.25] * 4, atol=1e-14)
    assert abs(pure_state_entanglement(psi) - 2 * LN2) < 1e-9


@pytest.mark.parametrize("d", [4, 5, 6, 7, 8])
def test_decomposition_invariants_random(d):
    for s in spawn_seeds(d, 10):
        psi = random_pure_state(s, d)
        sd = slater_decompose(psi)
        assert abs(2 * np.sum(np.abs(sd.z) ** 2) - 1) < 1e-8
        assert np.max(np.abs(sd.reconstruct() - psi.A)) < 1e-8
        basis = np.concatenate([sd.u, sd.v])
        assert np.max(np.abs(basis.conj() @ basis.T - np.eye(len(basis)))) < 1e-8
        assert np.all(np.diff(np.abs(sd.z)) <= 1e-12)
        assert sd.slater_rank == d // 2


def test_decomposition_with_degenerate_blocks_is_deterministic():
    u = haar_unitary(2, 6)
    # three equal blocks rotated by a generic one-particle unitary
    a = np.zeros((6, 6), dtype=complex)
    for k in range(3):
        a[2 * k, 2 * k + 1], a[2 * k + 1, 2 * k] = 1.0, -1.0
    a = u @ a @ u.T
    psi = TwoFermionPureState(a / np.linalg.norm(a))
    first, second = slater_decompose(psi), slater_decompose(psi)
    np.testing.assert_array_equal(first.u, second.u)
    np.testing.assert_allclose(np.abs(first.z), [1 / math.sqrt(6)] * 3, atol=1e-10)
    assert np.max(np.abs(first.reconstruct() - psi.A)) < 1e-8


def test_random_slater_states_have_rank_one():
    for d in (4, 6, 8):
        for s in spawn_seeds(d + 100, 20):
            psi = random_slater_state(s, d)
            assert slater_decompose(psi).slater_rank == 1
            assert abs(pure_state_entanglement(psi) - LN2) < 1e-9


def test_rdm_trace_for_random_states():
    for s in spawn_seeds(17, 100):
        assert abs(np.trace(one_particle_rdm(random_pure_state(s, 5))).real - 1) < 1e-10


def test_entropy_zero_log_zero():
    assert entropy([1.0, 0.0]) == 0.0
    assert entropy([0.5, 0.5]) == pytest.approx(LN2)


def test_cl_bound_sweep():
    values = [pure_state_entanglement(random_pure_state(s, 4)) for s in spawn_seeds(5, 200)]
    assert min(values) >= LN2 - 1e-9


def test_equality_iff_single_determinant():
    crafted = [S12, bell_like(), bell_like(6), random_slater_state(4, 6)]
    crafted += [random_pure_state(s, d) for d in (4, 6, 8) for s in spawn_seeds(d, 30)]
    crafted += [random_slater_state(s, d) for d in (4, 6, 8) for s in spawn_seeds(d + 7, 30)]
    for psi in crafted:
        at_bound = abs(pure_state_entanglement(psi) - LN2) < 1e-9
        assert at_bound == (slater_decompose(psi).slater_rank == 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**64 - 1), st.sampled_from([4, 5, 6, 8]))
def test_unitary_covariance(seed, d):
    s1, s2 = spawn_seeds(seed, 2)
    psi = random_pure_state(s1, d)
    u = haar_unitary(s2, d)
    moved = TwoFermionPureState(u @ psi.A @ u.T)
    np.testing.assert_allclose(np.abs(slater_decompose(moved).z), np.abs(slater_decompose(psi).z), atol=1e-9)
    assert abs(pure_state_entanglement(moved) - pure_state_entanglement(psi)) < 1e-9


# --------------------------------------------------------------------------
# entanglement of formation
# --------------------------------------------------------------------------


def test_eof_of_pure_input():
    for s in spawn_seeds(3, 5):
        psi = random_pure_state(s, 5)
        res = entanglement_of_formation(psi.projector())
        assert abs(res.value - pure_state_entanglement(psi)) < 1e-6
        assert res.converged


def test_eof_orthogonal_slater_mixture():
    rho = TwoFermionMixedState.mixture([0.5, 0.5], [S12, S34])
    res = entanglement_of_formation(rho, restarts=16)
    assert res.value <= LN2 + 5e-3
    assert res.value >= LN2 - 1e-9
    assert np.max(np.abs(res.decomposition.density() - rho.rho12)) < 1e-6


def test_eof_rejects_small_ensemble():
    rho = TwoFermionMixedState.mixture([0.5, 0.5], [S12, S34])
    with pytest.raises(ValueError, match="ensemble size"):
        entanglement_of_formation(rho, ensemble_size=1)


def test_concurrence_oracle_on_pure_states():
    assert fermionic_concurrence(S12.projector().rho12) < 1e-7
    assert abs(fermionic_concurrence(bell_like().projector().rho12) - 1) < 1e-7


def test_eof_matches_concurrence_formula_for_slater_bell_mixture():
    rho = TwoFermionMixedState.mixture([0.5, 0.5], [S12, bell_like()])
    c = fermionic_concurrence(rho.rho12)
    assert abs(c - 0.5) < 1e-7
    exact = LN2 + binary_entropy((1 + math.sqrt(1 - c * c)) / 2)
    values = [entanglement_of_formation(rho, ensemble_size=m).value for m in (4, 9)]
    assert LN2 < min(values) and max(values) < 2 * LN2
    assert abs(values[0] - values[1]) < 1e-2
    for v in values:
        # an upper bound that reaches the analytic value
        assert exact - 1e-6 <= v < exact + 1e-3


def test_eof_decomposition_reproduces_state():
    rho = random_slater_mixture(5, 5, 3)
    res = entanglement_of_formation(rho)
    assert abs(res.decomposition.probabilities.sum() - 1) < 1e-12
    assert np.all(res.decomposition.probabilities > 0)
    assert np.max(np.abs(res.decomposition.density() - rho.rho12)) < 1e-6
    assert len(res.restart_values) == 16


# --------------------------------------------------------------------------
# separability verdicts
# --------------------------------------------------------------------------


def test_random_slater_mixture_is_separable():
    rho = random_slater_mixture(9, 6, 3)
    res = is_fermionic_separable(rho)
    assert res.verdict == "separable"
    for s in res.certificate.states:
        assert 1 - slater_decompose(s).weights[0] <= res.tol


def test_bell_like_is_entangled():
    res = is_fermionic_separable(bell_like().projector())
    assert res.verdict == "entangled"
    assert res.eof.excess == pytest.approx(LN2, abs=1e-9)


def test_maximally_mixed_verdict_is_stable_across_seeds():
    rho = TwoFermionMixedState.maximally_mixed(4)
    results = [is_fermionic_separable(rho, seed=s) for s in range(5)]
    assert {r.verdict for r in results} == {"separable"}
    assert all(r.certificate is not None for r in results)


# --------------------------------------------------------------------------
# witness
# --------------------------------------------------------------------------


def test_witness_on_bell_like():
    psi = bell_like()
    w = slater_witness(psi)
    assert w.slater_bound == pytest.approx(0.5, abs=1e-12)
    assert w.expectation(psi.projector()) == pytest.approx(-0.5, abs=1e-12)
    assert w.detects(psi.projector())
    assert w.search_best <= 0.5 + 1e-6
    assert w.expectation(TwoFermionMixedState.maximally_mixed(4)) >= 0


def test_witness_is_nonnegative_on_slater_mixtures():
    w = slater_witness(bell_like())
    seeds = spawn_seeds(31, 1000)
    worst = min(w.expectation(random_slater_mixture(s, 4, 1 + k % 4)) for k, s in enumerate(seeds))
    assert worst >= -1e-6


def test_witness_bound_survives_search_for_random_states():
    for d in (4, 6):
        for s in spawn_seeds(d, 5):
            psi = random_pure_state(s, d)
            w = slater_witness(psi)
            assert max_slater_overlap_search(psi, seed=s) <= w.slater_bound + 1e-6


def test_witness_detection_agrees_with_separability():
    psi = random_pure_state(12, 4)
    w = slater_witness(psi)
    rho = psi.projector()
    assert w.detects(rho)
    assert is_fermionic_separable(rho).verdict == "entangled"


def test_witness_rejects_single_determinant():
    with pytest.raises(ValueError):
        slater_witness(S12)


# --------------------------------------------------------------------------
# antisymmetrized products and Hartree-Fock
# --------------------------------------------------------------------------


def test_wedge_of_orthonormal_rank_ones_is_a_slater_projector():
    u, v = haar_unitary(3, 5)[:, :2].T
    pu, pv = np.outer(u, u.conj()), np.outer(v, v.conj())
    s = slater_state(u, v).vector()
    np.testing.assert_allclose(wedge(pu, pv), 2 * np.outer(s, s.conj()), atol=1e-12)
    np.testing.assert_allclose(wedge(pu, pv), wedge(pv, pu), atol=1e-15)


def test_wedge_ensemble_reproduces_wedge():
    g = rng(2)
    a = g.normal(size=(5, 5)) + 1j * g.normal(size=(5, 5))
    b = g.normal(size=(5, 5)) + 1j * g.normal(size=(5, 5))
    a, b = a @ a.conj().T, b @ b.conj().T
    w, states = wedge_ensemble(a, b)
    rebuilt = sum(x * np.outer(s.vector(), s.vector().conj()) for x, s in zip(w, states))
    np.testing.assert_allclose(rebuilt, wedge(a, b), atol=1e-10)
    assert all(slater_decompose(s).slater_rank == 1 for s in states)


def test_hf_two_particles_is_pure_slater():
    p = np.diag([1.0, 1.0, 0, 0, 0, 0])
    gamma = hf_two_rdm(p, 2).rho12
    s = slater_state(np.eye(6)[0], np.eye(6)[1]).vector()
    assert np.max(np.abs(gamma - np.outer(s, s.conj()))) <= 1e-10


def test_hf_three_particles_is_uniform_pair_mixture():
    u = haar_unitary(7, 6)
    occ = u[:, :3]
    p = occ @ occ.conj().T
    gamma = hf_two_rdm(p, 3).rho12
    pairs = [(0, 1), (0, 2), (1, 2)]
    ref = sum(np.outer(slater_state(occ[:, i], occ[:, j]).vector(),
                       slater_state(occ[:, i], occ[:, j]).vector().conj()) for i, j in pairs) / 3
    assert np.max(np.abs(gamma - ref)) <= 1e-10
    # trace-one input is accepted too
    assert np.max(np.abs(hf_two_rdm(p / 3, 3).rho12 - gamma)) <= 1e-12


def test_hf_is_separable():
    for n in (2, 3):
        occ = haar_unitary(n, 6)[:, :n]
        res = is_fermionic_separable(hf_two_rdm(occ @ occ.conj().T, n))
        assert res.verdict == "separable"


def test_hf_rejects_non_projector():
    with pytest.raises(ValueError):
        hf_two_rdm(np.diag([0.5, 0.5, 0.5, 0.5]), 2)
    with pytest.raises(ValueError):
        hf_two_rdm(np.diag([1.0, 0, 0, 0]), 1)


# --------------------------------------------------------------------------
# serialization
# --------------------------------------------------------------------------


def test_json_round_trip():
    psi = random_pure_state(4, 5)
    back = from_json(to_json(psi))
    np.testing.assert_allclose(back.A, psi.A, atol=1e-15)
    rho = random_slater_mixture(4, 4, 2)
    np.testing.assert_allclose(from_json(to_json(rho)).rho12, rho.rho12, atol=0)
    obj = json.loads(to_json(S12))
    assert obj["basis"] == "antisym-lex" and obj["d"] == 4
    assert obj["entries"] == [[0, 1, 1.0, 0.0]]


def test_json_rejects_unknown_basis():
    with pytest.raises(ValueError):
        from_json(json.dumps({"d": 4, "basis": "tensor", "entries": []}))
