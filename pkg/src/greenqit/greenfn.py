"""Orbital-basis lesser Green functions and their two-particle products.

Objects here carry physical normalizations: a one-particle slice has trace
``N`` and a two-particle slice has operator trace ``N (N - 1)``.  Conversion
to trace-one states happens in :func:`equal_time_density` (when asked) and in
:func:`g2_entanglement_test`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import json

import numpy as np

from .fermion import (
    EnsembleDecomposition,
    TwoFermionMixedState,
    TwoFermionPureState,
    is_fermionic_separable,
    slater_decompose,
    slater_witness,
    wedge,
    wedge_ensemble,
)

__all__ = [
    "OneParticleGLesser",
    "TwoParticleGLesser",
    "G2Report",
    "equal_time_density",
    "hf_g2",
    "separable_g2_construct",
    "g2_entanglement_test",
    "g2_from_pure",
    "g2_to_json",
    "g2_from_json",
]


@dataclass(frozen=True)
class OneParticleGLesser:
    """``-i G^<`` in an orbital basis with energies ``energies``.

    The two-time function is ``g(t, t')_ij = rho0_ij exp(-i (e_i t - e_j t'))``,
    so equal-time slices are ``rho0`` rotated by the orbital phases.
    """

    rho0: np.ndarray
    energies: np.ndarray
    times: np.ndarray

    def __post_init__(self):
        rho0 = np.array(self.rho0, dtype=complex)
        e = np.array(self.energies, dtype=float)
        t = np.array(self.times, dtype=float).reshape(-1)
        d = rho0.shape[0]
        if rho0.shape != (d, d) or e.shape != (d,):
            raise ValueError("rho0 must be d x d and energies of length d")
        if t.size == 0:
            raise ValueError("need at least one time")
        if np.max(np.abs(rho0 - rho0.conj().T)) > 1e-9:
            raise ValueError("initial one-particle density is not Hermitian")
        if np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T))[0] < -1e-9:
            raise ValueError("initial one-particle density is not positive semidefinite")
        for arr in (rho0, e, t):
            arr.setflags(write=False)
        object.__setattr__(self, "rho0", rho0)
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "times", t)

    @classmethod
    def from_orbitals(cls, orbitals, energies, times) -> "OneParticleGLesser":
        """Determinant of the columns of ``orbitals`` (orthonormalized)."""
        q, _ = np.linalg.qr(np.asarray(orbitals, dtype=complex))
        return cls(q @ q.conj().T, energies, times)

    @property
    def d(self) -> int:
        return self.rho0.shape[0]

    @property
    def n_particles(self) -> float:
        return float(np.real(np.trace(self.rho0)))

    @property
    def g(self) -> np.ndarray:
        """Equal-time slices ``g[a, i, j]``."""
        ph = np.exp(-1j * np.outer(self.times, self.energies))
        return ph[:, :, None] * self.rho0[None] * ph.conj()[:, None, :]

    def slice(self, a: int) -> np.ndarray:
        ph = np.exp(-1j * self.energies * self.times[a])
        return ph[:, None] * self.rho0 * ph.conj()[None, :]

    def two_time(self, a: int, b: int) -> np.ndarray:
        pa = np.exp(-1j * self.energies * self.times[a])
        pb = np.exp(-1j * self.energies * self.times[b])
        return pa[:, None] * self.rho0 * pb.conj()[None, :]


@dataclass(frozen=True)
class TwoParticleGLesser:
    d: int
    times: np.ndarray
    slices: np.ndarray
    components: list = field(default_factory=list)

    def trace(self, a: int) -> float:
        return float(np.real(np.trace(self.slices[a])))

    def normalized(self, a: int) -> np.ndarray:
        s = self.slices[a]
        return s / np.real(np.trace(s))


@dataclass(frozen=True)
class G2Report:
    time_index: int
    verdict: str
    eof: float
    converged: bool
    certificate: EnsembleDecomposition | None
    certificate_source: str
    witness_value: float | None
    min_eigenvalue: float


def _check_index(times, a: int) -> None:
    if not -len(times) <= a < len(times):
        raise IndexError(f"time index {a} out of range for {len(times)} times")


def equal_time_density(g: OneParticleGLesser, a: int, normalize: bool = False) -> np.ndarray:
    """Equal-time slice (trace ``N``); ``normalize`` divides by ``N``."""
    _check_index(g.times, a)
    s = g.slice(a)
    return s / g.n_particles if normalize else s


def _hf_slice(s: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    idem = np.max(np.abs(s @ s - s))
    if idem > tol:
        raise ValueError(f"equal-time slice is not a determinantal projector (|g^2 - g| = {idem:.3e})")
    return 0.5 * wedge(s, s)


def hf_g2(g: OneParticleGLesser) -> TwoParticleGLesser:
    """Antisymmetrized product ``g_ik g_jl - g_il g_jk`` per time slice."""
    slices = np.array([_hf_slice(g.slice(a)) for a in range(len(g.times))])
    return TwoParticleGLesser(g.d, g.times, slices)


def separable_g2_construct(components) -> TwoParticleGLesser:
    """``sum_k v_k G1^k ^ G2^k`` per time slice.

    ``components`` is a list of ``(v_k, G1_k, G2_k)`` with positive weights
    summing to one and one-particle functions sharing ``d`` and times.  The
    list is kept on the result as its separability certificate.
    """
    comps = list(components)
    if not comps:
        raise ValueError("no components")
    weights = np.array([float(v) for v, _, _ in comps])
    if np.any(weights <= 0):
        raise ValueError("component weights must be positive")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError(f"component weights sum to {weights.sum()!r}, expected 1")
    ref = comps[0][1]
    for _, g1, g2 in comps:
        for g in (g1, g2):
            if g.d != ref.d or g.times.shape != ref.times.shape or np.any(g.times != ref.times):
                raise ValueError("components must share d and times")
    slices = np.array([
        sum(v * wedge(g1.slice(a), g2.slice(a)) for v, g1, g2 in comps) for a in range(len(ref.times))
    ])
    return TwoParticleGLesser(ref.d, ref.times, slices, comps)


def _component_certificate(g2: TwoParticleGLesser, a: int, target: np.ndarray, tol: float):
    weights, states = [], []
    for v, g1, g2k in g2.components:
        w, s = wedge_ensemble(g1.slice(a), g2k.slice(a))
        weights.extend(v * w)
        states.extend(s)
    if not states:
        return None
    w = np.array(weights)
    dec = EnsembleDecomposition(w / w.sum(), states)
    ok = np.max(np.abs(dec.density() - target)) <= tol and all(slater_decompose(s).slater_rank == 1 for s in states)
    return dec if ok else None


def g2_entanglement_test(g2: TwoParticleGLesser, a: int, tol: float = 5e-3, **eof_opts) -> G2Report:
    """Normalize slice ``a`` to a two-fermion state and decide its separability.

    Runs :func:`~greenqit.fermion.is_fermionic_separable`.  When the object carries a
    component list, its expansion into Slater determinants is checked against
    the slice and, if it reproduces it, serves as the certificate.  For an
    entangled verdict the witness built on the slice's leading eigenvector is
    evaluated on it.
    """
    _check_index(g2.times, a)
    rho = g2.normalized(a)
    rho = 0.5 * (rho + rho.conj().T)
    lam, vecs = np.linalg.eigh(rho)
    if lam[0] < -1e-9:
        raise ValueError(f"two-particle slice is not positive semidefinite (min eigenvalue {lam[0]:.3e})")
    state = TwoFermionMixedState(g2.d, rho)
    sep = is_fermionic_separable(state, tol=tol, **eof_opts)
    verdict, certificate, source = sep.verdict, sep.certificate, "optimizer" if sep.certificate else "none"
    if g2.components:
        comp_cert = _component_certificate(g2, a, rho, 1e-8)
        if comp_cert is not None:
            certificate, source = comp_cert, "components"
            if verdict != "separable":
                verdict = "separable"
    witness_value = None
    if verdict == "entangled":
        top = TwoFermionPureState.from_vector(vecs[:, -1], g2.d)
        if slater_decompose(top).slater_rank >= 2:
            witness_value = slater_witness(top).expectation(state)
    return G2Report(a, verdict, sep.eof.value, sep.eof.converged, certificate, source, witness_value, float(lam[0]))


def g2_from_pure(psi: TwoFermionPureState, times, n_pairs: float = 2.0) -> TwoParticleGLesser:
    """Time-independent two-particle object ``n_pairs |psi><psi|`` (trace ``N(N-1)`` for ``N = 2``)."""
    times = np.asarray(times, dtype=float).reshape(-1)
    c = psi.vector()
    proj = np.outer(c, c.conj())
    return TwoParticleGLesser(psi.d, times, np.array([n_pairs * proj for _ in times]))



def g2_to_json(g2: TwoParticleGLesser) -> str:
    """Slices in the pair-index entry format plus the ``times`` array.

    The component list is not serialized; a reloaded object has none.
    """
    slices = []
    for s in g2.slices:
        rows, cols = np.nonzero(s)
        slices.append([[int(r), int(c), float(s[r, c].real), float(s[r, c].imag)] for r, c in zip(rows, cols)])
    return json.dumps({"d": int(g2.d), "basis": "antisym-lex", "kind": "g2-lesser",
                       "times": [float(t) for t in g2.times], "slices": slices})


def g2_from_json(text: str) -> TwoParticleGLesser:
    obj = json.loads(text)
    if obj.get("basis") != "antisym-lex":
        raise ValueError(f"unsupported basis {obj.get('basis')!r}")
    d = int(obj["d"])
    dim = d * (d - 1) // 2
    times = np.array(obj["times"], dtype=float)
    if len(obj["slices"]) != times.size:
        raise ValueError("one slice per time is required")
    slices = np.zeros((times.size, dim, dim), dtype=complex)
    for a, entries in enumerate(obj["slices"]):
        for p, q, re, im in entries:
            slices[a, p, q] = complex(re, im)
    if np.max(np.abs(slices - slices.conj().transpose(0, 2, 1)), initial=0.0) > 1e-9:
        raise ValueError("slices are not Hermitian")
    return TwoParticleGLesser(d, times, slices)
