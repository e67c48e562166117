import json
import math

import numpy as np
import pytest

from greenqit.fermion import (
    LN2,
    TwoFermionPureState,
    hf_two_rdm,
    slater_decompose,
    slater_state,
)
from greenqit.greenfn import (
    OneParticleGLesser,
    TwoParticleGLesser,
    equal_time_density,
    g2_entanglement_test,
    g2_from_json,
    g2_from_pure,
    g2_to_json,
    hf_g2,
    separable_g2_construct,
)
from greenqit.numerics import rng

TIMES = np.linspace(0.0, 3.0, 4)


def orbitals(seed, d, n):
    g = rng(seed)
    return g.normal(size=(d, n)) + 1j * g.normal(size=(d, n))


def energies(seed, d):
    return np.sort(rng(seed).uniform(-1, 1, d))


def slater_g(seed, d=6, n=2):
    return OneParticleGLesser.from_orbitals(orbitals(seed, d, n), energies(seed + 1, d), TIMES)


def bell_like(d=6):
    e = np.eye(d)
    c = slater_state(e[0], e[1]).vector() + slater_state(e[2], e[3]).vector()
    return TwoFermionPureState.from_vector(c / math.sqrt(2), d)


# --------------------------------------------------------------------------
# one-particle objects
# --------------------------------------------------------------------------


def test_two_particle_slater_green_function():
    g = slater_g(1)
    for a in range(len(TIMES)):
        s = equal_time_density(g, a)
        assert abs(np.trace(s).real - 2) < 1e-8
        assert np.linalg.matrix_rank(s, tol=1e-8) == 2
        assert np.max(np.abs(s @ s - s)) < 1e-10
        assert abs(np.trace(equal_time_density(g, a, normalize=True)).real - 1) < 1e-12


def test_occupations_within_fermionic_bounds():
    for seed in range(10):
        g = rng(seed)
        occ = g.uniform(0, 1, 5)
        u, _ = np.linalg.qr(g.normal(size=(5, 5)) + 1j * g.normal(size=(5, 5)))
        gl = OneParticleGLesser((u * occ) @ u.conj().T, energies(seed, 5), TIMES)
        for a in range(len(TIMES)):
            lam = np.linalg.eigvalsh(equal_time_density(gl, a))
            assert lam.min() >= -1e-9 and lam.max() <= 1 + 1e-9
            assert abs(lam.sum() - occ.sum()) < 1e-8


def test_two_time_reduces_to_slice():
    g = slater_g(2)
    np.testing.assert_allclose(g.two_time(2, 2), g.slice(2), atol=1e-15)
    np.testing.assert_allclose(g.two_time(1, 3), g.two_time(3, 1).conj().T, atol=1e-15)


def test_index_out_of_range():
    g = slater_g(3)
    with pytest.raises(IndexError):
        equal_time_density(g, len(TIMES))


def test_one_particle_validation():
    with pytest.raises(ValueError):
        OneParticleGLesser(np.array([[1.0, 1.0], [0.0, 1.0]]), [0.0, 1.0], TIMES)
    with pytest.raises(ValueError):
        OneParticleGLesser(np.diag([1.0, -0.5]), [0.0, 1.0], TIMES)
    with pytest.raises(ValueError):
        OneParticleGLesser(np.eye(2), [0.0], TIMES)


# --------------------------------------------------------------------------
# Hartree-Fock product
# --------------------------------------------------------------------------


def test_hf_g2_two_particles_is_slater_projector():
    g = slater_g(4)
    g2 = hf_g2(g)
    for a in range(len(TIMES)):
        assert abs(g2.trace(a) - 2) < 1e-8
        rho = g2.normalized(a)
        lam, vec = np.linalg.eigh(rho)
        assert abs(lam[-1] - 1) < 1e-10
        top = TwoFermionPureState.from_vector(vec[:, -1], 6)
        assert slater_decompose(top).slater_rank == 1


@pytest.mark.parametrize("n", [2, 3])
def test_hf_g2_is_separable_at_every_time(n):
    g2 = hf_g2(slater_g(5, n=n))
    for a in range(len(TIMES)):
        assert abs(g2.trace(a) - n * (n - 1)) < 1e-8
        rep = g2_entanglement_test(g2, a)
        assert rep.verdict == "separable"
        assert rep.certificate is not None


def test_hf_g2_round_trip_through_hf_two_rdm():
    g = slater_g(6, n=3)
    g2 = hf_g2(g)
    for a in range(len(TIMES)):
        rho1 = equal_time_density(g, a) / g.n_particles
        assert np.max(np.abs(hf_two_rdm(rho1, 3).rho12 - g2.normalized(a))) < 1e-10


def test_hf_g2_rejects_non_determinantal():
    g = OneParticleGLesser(np.diag([0.5, 0.5, 0.5, 0.5]), np.zeros(4), TIMES)
    with pytest.raises(ValueError, match="determinantal"):
        hf_g2(g)


# --------------------------------------------------------------------------
# separable form
# --------------------------------------------------------------------------


def _rank_one(vec, d=6):
    e = np.zeros((d, 1), dtype=complex)
    e[vec, 0] = 1.0
    return e


def test_single_component_matches_hf():
    d = 6
    ham = energies(9, d)
    g1 = OneParticleGLesser.from_orbitals(_rank_one(0), ham, TIMES)
    g2 = OneParticleGLesser.from_orbitals(_rank_one(1), ham, TIMES)
    sep = separable_g2_construct([(1.0, g1, g2)])
    both = OneParticleGLesser.from_orbitals(np.eye(d)[:, :2], ham, TIMES)
    hf = hf_g2(both)
    for a in range(len(TIMES)):
        np.testing.assert_allclose(sep.normalized(a), hf.normalized(a), atol=1e-12)


def test_two_orthogonal_components_give_uniform_mixture():
    d = 6
    ham = energies(10, d)
    comps = [
        (0.5, OneParticleGLesser.from_orbitals(_rank_one(0), ham, TIMES),
         OneParticleGLesser.from_orbitals(_rank_one(1), ham, TIMES)),
        (0.5, OneParticleGLesser.from_orbitals(_rank_one(2), ham, TIMES),
         OneParticleGLesser.from_orbitals(_rank_one(3), ham, TIMES)),
    ]
    sep = separable_g2_construct(comps)
    e = np.eye(d)
    s12 = slater_state(e[0], e[1]).vector()
    s34 = slater_state(e[2], e[3]).vector()
    ref0 = 0.5 * np.outer(s12, s12.conj()) + 0.5 * np.outer(s34, s34.conj())
    np.testing.assert_allclose(sep.normalized(0), ref0, atol=1e-12)
    for a in range(len(TIMES)):
        # each term is 2 |S><S| for orthonormal orbitals
        assert abs(sep.trace(a) - 2.0) < 1e-8
        rep = g2_entanglement_test(sep, a)
        assert rep.verdict == "separable" and rep.certificate_source == "components"


def test_trace_is_linear_in_components():
    d = 6
    ham = energies(11, d)
    comps = []
    weights = [0.2, 0.3, 0.5]
    for k, w in enumerate(weights):
        ga = OneParticleGLesser.from_orbitals(orbitals(20 + k, d, 1), ham, TIMES)
        gb = OneParticleGLesser.from_orbitals(orbitals(30 + k, d, 2), ham, TIMES)
        comps.append((w, ga, gb))
    sep = separable_g2_construct(comps)
    for a in range(len(TIMES)):
        expected = sum(w * separable_g2_construct([(1.0, ga, gb)]).trace(a) for w, ga, gb in comps)
        assert abs(sep.trace(a) - expected) < 1e-8
        rep = g2_entanglement_test(sep, a)
        assert rep.verdict == "separable"


def test_separable_construct_validation():
    g1 = slater_g(12)
    with pytest.raises(ValueError, match="sum"):
        separable_g2_construct([(0.6, g1, g1), (0.6, g1, g1)])
    with pytest.raises(ValueError):
        separable_g2_construct([(1.0, g1, OneParticleGLesser(np.eye(4) / 4, np.zeros(4), TIMES))])
    with pytest.raises(ValueError):
        separable_g2_construct([])


# --------------------------------------------------------------------------
# entanglement test
# --------------------------------------------------------------------------


def test_bell_like_slice_is_entangled():
    g2 = g2_from_pure(bell_like(), TIMES[:2])
    rep = g2_entanglement_test(g2, 0)
    assert rep.verdict == "entangled"
    assert abs(rep.eof - 2 * LN2) < 1e-2
    assert rep.witness_value == pytest.approx(-0.5, abs=1e-9)


def test_verdict_is_time_covariant():
    psi = bell_like()
    ham = energies(13, 6)
    slices = []
    for t in TIMES:
        ph = np.exp(-1j * ham * t)
        moved = TwoFermionPureState(ph[:, None] * psi.A * ph[None, :])
        c = moved.vector()
        slices.append(2.0 * np.outer(c, c.conj()))
    g2 = TwoParticleGLesser(6, TIMES, np.array(slices))
    verdicts = {g2_entanglement_test(g2, a).verdict for a in range(len(TIMES))}
    assert verdicts == {"entangled"}


def test_non_psd_slice_is_rejected():
    bad = np.diag([2.0, -1.0, 0, 0, 0, 0]).astype(complex)
    g2 = TwoParticleGLesser(4, TIMES[:1], bad[None])
    with pytest.raises(ValueError, match="min eigenvalue"):
        g2_entanglement_test(g2, 0)


def test_json_round_trip():
    g2 = hf_g2(slater_g(14, n=3))
    text = g2_to_json(g2)
    obj = json.loads(text)
    assert obj["basis"] == "antisym-lex" and len(obj["times"]) == len(TIMES)
    back = g2_from_json(text)
    np.testing.assert_allclose(back.slices, g2.slices, atol=0)
    np.testing.assert_allclose(back.times, g2.times, atol=0)
