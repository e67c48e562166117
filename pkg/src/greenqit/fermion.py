"""Two-fermion states: Slater decomposition, entanglement of formation, witnesses.

Conventions
-----------
A pure two-fermion state is an antisymmetric ``d x d`` matrix ``A`` with
``sum |A_ij|^2 = 1``; it is the wavefunction ``sum_ij A_ij e_i (x) e_j`` in
``H (x) H``.  The one-particle reduced density matrix is then ``A A^H`` with
unit trace, and a single Slater determinant has entropy exactly ``ln 2``.

Mixed states live on the antisymmetric pair space with orthonormal basis
``|ij> = (e_i e_j - e_j e_i)/sqrt 2`` for ``i < j`` in lexicographic order.
The pair-space coordinate of ``A`` is ``c_ij = sqrt(2) A_ij``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .numerics import hermitian_eig, rng, spawn_seeds

__all__ = [
    "LN2",
    "TwoFermionPureState",
    "TwoFermionMixedState",
    "SlaterDecomposition",
    "EnsembleDecomposition",
    "EofResult",
    "SeparabilityResult",
    "Witness",
    "pair_index",
    "slater_state",
    "random_pure_state",
    "random_slater_state",
    "random_slater_mixture",
    "slater_decompose",
    "one_particle_rdm",
    "entropy",
    "pure_state_entanglement",
    "entanglement_of_formation",
    "is_fermionic_separable",
    "slater_witness",
    "max_slater_overlap_search",
    "wedge",
    "wedge_ensemble",
    "hf_two_rdm",
    "to_json",
    "from_json",
]

LN2 = math.log(2.0)
_SQRT2 = math.sqrt(2.0)


def pair_index(d: int) -> list[tuple[int, int]]:
    """Lexicographic list of pairs ``(i, j)``, ``i < j``."""
    return list(combinations(range(d), 2))


def _pair_arrays(d: int):
    pairs = np.array(pair_index(d), dtype=int).reshape(-1, 2)
    return pairs[:, 0], pairs[:, 1]


def _vec_to_matrix(c: np.ndarray, d: int) -> np.ndarray:
    """Pair-space coordinates (last axis) to antisymmetric matrices."""
    i, j = _pair_arrays(d)
    c = np.asarray(c)
    out = np.zeros(c.shape[:-1] + (d, d), dtype=complex)
    out[..., i, j] = c / _SQRT2
    out[..., j, i] = -c / _SQRT2
    return out


def _matrix_to_vec(a: np.ndarray) -> np.ndarray:
    d = a.shape[-1]
    i, j = _pair_arrays(d)
    return _SQRT2 * a[..., i, j]


# --------------------------------------------------------------------------
# states
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TwoFermionPureState:
    A: np.ndarray

    def __post_init__(self):
        a = np.array(self.A, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise ValueError(f"amplitude matrix must be square with d >= 2, got shape {a.shape}")
        asym = np.max(np.abs(a + a.T))
        if asym > 1e-12:
            raise ValueError(f"amplitude matrix is not antisymmetric (|A + A^T| = {asym:.3e})")
        norm = float(np.sum(np.abs(a) ** 2))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (sum |A_ij|^2 = {norm!r})")
        a.setflags(write=False)
        object.__setattr__(self, "A", a)

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @classmethod
    def from_vector(cls, c, d: int) -> "TwoFermionPureState":
        return cls(_vec_to_matrix(np.asarray(c, dtype=complex), d))

    def vector(self) -> np.ndarray:
        """Coordinates in the lexicographic pair basis (unit norm)."""
        return _matrix_to_vec(self.A)

    def projector(self) -> "TwoFermionMixedState":
        c = self.vector()
        return TwoFermionMixedState(self.d, np.outer(c, c.conj()))


@dataclass(frozen=True)
class TwoFermionMixedState:
    d: int
    rho12: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho12, dtype=complex)
        dim = self.d * (self.d - 1) // 2
        if rho.shape != (dim, dim):
            raise ValueError(f"rho12 must be {dim}x{dim} for d={self.d}, got {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > 1e-10:
            raise ValueError(f"rho12 is not Hermitian ({herm:.3e})")
        rho = 0.5 * (rho + rho.conj().T)
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"rho12 trace is {tr!r}, expected 1")
        lam_min = np.linalg.eigvalsh(rho)[0]
        if lam_min < -1e-9:
            raise ValueError(f"rho12 is not positive semidefinite (min eigenvalue {lam_min:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, "rho12", rho)

    @property
    def dim(self) -> int:
        return self.rho12.shape[0]

    def rank(self, tol: float = 1e-10) -> int:
        return int(np.count_nonzero(np.linalg.eigvalsh(self.rho12) > tol))

    @classmethod
    def maximally_mixed(cls, d: int) -> "TwoFermionMixedState":
        dim = d * (d - 1) // 2
        return cls(d, np.eye(dim) / dim)

    @classmethod
    def mixture(cls, weights, states) -> "TwoFermionMixedState":
        """``sum_k w_k |psi_k><psi_k|`` for pure states, weights renormalized."""
        w = np.asarray(weights, dtype=float)
        if np.any(w < 0) or w.sum() <= 0:
            raise ValueError("mixture weights must be nonnegative with positive sum")
        w = w / w.sum()
        d = states[0].d
        rho = sum(wk * np.outer(s.vector(), s.vector().conj()) for wk, s in zip(w, states))
        return cls(d, rho)


@dataclass(frozen=True)
class SlaterDecomposition:
    """``A = sum_i z_i (u_i v_i^T - v_i u_i^T)`` with orthonormal ``u_i, v_i``."""

    z: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @property
    def slater_rank(self) -> int:
        return int(np.count_nonzero(np.abs(self.z) > 1e-10))

    @property
    def weights(self) -> np.ndarray:
        """Slater weights ``2 |z_i|^2`` (they sum to one)."""
        return 2.0 * np.abs(self.z) ** 2

    def reconstruct(self) -> np.ndarray:
        if len(self.z) == 0:
            return np.zeros((self.u.shape[-1],) * 2, dtype=complex)
        return np.einsum("k,ki,kj->ij", self.z, self.u, self.v) - np.einsum("k,ki,kj->ij", self.z, self.v, self.u)

    def slater_states(self) -> list[TwoFermionPureState]:
        """The normalized determinants ``u_i ^ v_i``."""
        return [slater_state(u, v) for u, v in zip(self.u, self.v)]


@dataclass(frozen=True)
class EnsembleDecomposition:
    probabilities: np.ndarray
    states: list

    def density(self) -> np.ndarray:
        return sum(p * np.outer(s.vector(), s.vector().conj()) for p, s in zip(self.probabilities, self.states))


@dataclass(frozen=True)
class EofResult:
    value: float
    decomposition: EnsembleDecomposition
    converged: bool
    restart_values: list = field(default_factory=list)
    seed: int = 0

    @property
    def excess(self) -> float:
        """Fermionic correlation ``E_f - ln 2``."""
        return self.value - LN2


@dataclass(frozen=True)
class SeparabilityResult:
    verdict: str
    eof: EofResult
    certificate: EnsembleDecomposition | None
    tol: float


# --------------------------------------------------------------------------
# constructors
# --------------------------------------------------------------------------


def slater_state(u, v) -> TwoFermionPureState:
    """Normalized determinant ``u ^ v`` (``u, v`` need not be orthonormal)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    a = np.outer(u, v) - np.outer(v, u)
    norm = math.sqrt(float(np.sum(np.abs(a) ** 2)))
    if norm < 1e-14:
        raise ValueError("u and v are linearly dependent")
    return TwoFermionPureState(a / norm)


def random_pure_state(seed: int, d: int) -> TwoFermionPureState:
    gen = rng(seed)
    dim = d * (d - 1) // 2
    c = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return TwoFermionPureState.from_vector(c / np.linalg.norm(c), d)


def random_slater_state(seed: int, d: int) -> TwoFermionPureState:
    gen = rng(seed)
    uv = gen.standard_normal((2, d)) + 1j * gen.standard_normal((2, d))
    return slater_state(uv[0], uv[1])


def random_slater_mixture(seed: int, d: int, terms: int) -> TwoFermionMixedState:
    seeds = spawn_seeds(seed, terms + 1)
    w = rng(seeds[0]).random(terms) + 0.05
    return TwoFermionMixedState.mixture(w, [random_slater_state(s, d) for s in seeds[1:]])


# --------------------------------------------------------------------------
# Slater decomposition and entropies
# --------------------------------------------------------------------------


def _clusters(values: np.ndarray, tol: float) -> list[list[int]]:
    """Group indices of descending ``values`` whose neighbours differ by < ``tol``."""
    groups: list[list[int]] = []
    for idx in range(len(values)):
        if groups and abs(values[groups[-1][-1]] - values[idx]) < tol:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def _fix_phase(u: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(u) > np.max(np.abs(u)) * (1 - 1e-8)))
    return u * (abs(u[k]) / u[k])


def slater_decompose(psi: TwoFermionPureState, cluster_tol: float = 1e-8) -> SlaterDecomposition:
    """Canonical (Youla) form of the amplitude matrix.

    The eigenspaces of ``A A^H`` for eigenvalue ``s^2 > 0`` are even
    dimensional.  Inside each one the antiunitary map ``u -> -A conj(u) / s``
    squares to ``-1``, so every unit ``u`` pairs with ``v = -A conj(u)/s``
    orthogonal to it, and the complement of ``span(u, v)`` stays invariant.
    The first ``u`` in a block is the projection of the lowest-index basis
    vector with the largest overlap, with its largest entry made real
    positive, which makes the output deterministic.
    """
    if not isinstance(psi, TwoFermionPureState):
        psi = TwoFermionPureState(psi)
    a = psi.A
    d = psi.d
    lam, vecs = hermitian_eig(a @ a.conj().T)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    # eigenvalues of A A^H carry ~1e-16 absolute noise; |z| below 1e-7 is not resolvable
    keep = lam > 1e-14
    zs, us, vs = [], [], []
    for group in _clusters(lam[keep], cluster_tol):
        basis = vecs[:, group]
        remaining = basis.copy()
        for _ in range(len(group) // 2):
            proj = remaining @ remaining.conj().T
            norms = np.real(np.diag(proj))
            k = int(np.argmax(norms > norms.max() * (1 - 1e-9)))
            u = proj[:, k] / math.sqrt(norms[k])
            u = _fix_phase(u)
            w = -a @ u.conj()
            s = np.linalg.norm(w)
            v = w / s
            # re-orthogonalize against the pair already fixed (guards near-degenerate merges)
            v = v - u * (u.conj() @ v)
            v = v / np.linalg.norm(v)
            zs.append(s)
            us.append(u)
            vs.append(v)
            pair = np.stack([u, v], axis=1)
            remaining = remaining - pair @ (pair.conj().T @ remaining)
            q, r = np.linalg.qr(remaining)
            good = np.abs(np.diag(r)) > 1e-6
            remaining = q[:, good]
    order = sorted(range(len(zs)), key=lambda i: -zs[i])
    z = np.array([zs[i] for i in order], dtype=complex)
    u = np.array([us[i] for i in order]).reshape(-1, d)
    v = np.array([vs[i] for i in order]).reshape(-1, d)
    return SlaterDecomposition(z, u, v)


def one_particle_rdm(psi: TwoFermionPureState) -> np.ndarray:
    """Trace-one reduced density matrix ``A A^H``."""
    return psi.A @ psi.A.conj().T


def entropy(eigenvalues) -> float:
    """von Neumann entropy in nats with ``0 ln 0 = 0``."""
    lam = np.asarray(eigenvalues, dtype=float)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def pure_state_entanglement(psi: TwoFermionPureState) -> float:
    lam = np.linalg.eigvalsh(one_particle_rdm(psi))
    return entropy(lam)


# --------------------------------------------------------------------------
# entanglement of formation
# --------------------------------------------------------------------------


def _ensemble_objective(psi_tilde: np.ndarray, d: int, grad: bool = True):
    """Average entropy of the unnormalized ensemble ``psi_tilde`` (columns).

    For one member ``a`` with ``rho = a a^H`` and ``p = Tr rho`` the
    contribution is ``-Tr(rho ln rho) + p ln p``; its Wirtinger gradient with
    respect to ``conj(a)`` is ``-ln(rho / p) a``, well defined on the support.
    """
    amats = _vec_to_matrix(psi_tilde.T, d)
    rho = amats @ np.conj(np.swapaxes(amats, -1, -2))
    lam, vec = np.linalg.eigh(rho)
    lam = np.clip(lam, 0.0, None)
    p = lam.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lnl = np.where(lam > 1e-300, np.log(np.where(lam > 1e-300, lam, 1.0)), 0.0)
        value = float(np.sum(-np.sum(lam * lnl, axis=-1) + np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)))
    if not grad:
        return value, None
    with np.errstate(divide="ignore", invalid="ignore"):
        lnp = np.log(np.where(p > 0, p, 1.0))
    rel = np.where(lam > 1e-300, lnl - lnp[:, None], 0.0)
    log_rho = np.einsum("kia,ka,kja->kij", vec, rel, vec.conj())
    g_mat = -log_rho @ amats
    i, j = _pair_arrays(d)
    g_vec = (g_mat[:, i, j] - g_mat[:, j, i]) / _SQRT2
    return value, g_vec.T


def _polar(x: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(x, full_matrices=False)
    return u @ vh


def _optimize_isometry(v: np.ndarray, u0: np.ndarray, d: int, max_iters: int, tol: float):
    """Gradient descent over ``M x R`` isometries ``U`` on ``f(V U^T)``.

    Steps follow the Euclidean gradient, projected back onto the isometries by
    polar decomposition, with step halving until the objective decreases.
    """
    u = u0
    value, g = _ensemble_objective(v @ u.T, d)
    step = 1.0
    converged = False
    for _ in range(max_iters):
        grad_u = (v.conj().T @ g).T
        # Riemannian part: remove the component along U's own orbit
        sym = u.conj().T @ grad_u
        grad_u = grad_u - u @ (0.5 * (sym + sym.conj().T))
        gnorm = np.linalg.norm(grad_u)
        if gnorm < 1e-14:
            converged = True
            break
        step = min(step * 2.0, 4.0)
        while True:
            cand = _polar(u - step * grad_u)
            new_value, new_g = _ensemble_objective(v @ cand.T, d)
            if new_value < value or step < 1e-14:
                break
            step *= 0.5
        if step < 1e-14:
            converged = True
            break
        improvement = value - new_value
        u, value, g = cand, new_value, new_g
        if improvement < tol:
            converged = True
            break
    return u, value, converged


def _haar_isometry(gen: np.random.Generator, m: int, r: int) -> np.ndarray:
    z = gen.standard_normal((m, r)) + 1j * gen.standard_normal((m, r))
    q, rr = np.linalg.qr(z)
    return q * (np.diag(rr) / np.abs(np.diag(rr)))


def entanglement_of_formation(
    rho: TwoFermionMixedState,
    ensemble_size: int | None = None,
    restarts: int = 16,
    max_iters: int = 2000,
    tol: float = 1e-8,
    seed: int = 0,
) -> EofResult:
    """Upper bound on ``E_f`` by minimizing the average pure-state entropy.

    Candidate ensembles are ``V U^T`` where ``V`` holds the eigenvectors of
    ``rho`` scaled by the square roots of their eigenvalues and ``U`` is an
    ``M x R`` isometry, so every candidate reproduces ``rho`` exactly.
    Restart 0 starts from the eigen-ensemble, the others from Haar-random
    isometries.  The best restart wins; ties go to the lowest restart index.
    """
    lam, vecs = hermitian_eig(rho.rho12)
    keep = lam > 1e-12
    rank = int(np.count_nonzero(keep))
    m = rank * rank if ensemble_size is None else int(ensemble_size)
    if m < rank:
        raise ValueError(f"ensemble size {m} is smaller than rank(rho) = {rank}")
    v = vecs[:, keep] * np.sqrt(lam[keep])
    seeds = spawn_seeds(seed, restarts)
    best = None
    values = []
    for r_idx in range(restarts):
        if r_idx == 0:
            u0 = np.eye(m, rank, dtype=complex)
        else:
            u0 = _haar_isometry(rng(seeds[r_idx]), m, rank)
        if rank == 1:
            # single-term ensembles are the only decompositions of a pure state
            u0 = np.eye(m, 1, dtype=complex)
            val, _ = _ensemble_objective(v @ u0.T, rho.d, grad=False)
            u, conv = u0, True
        else:
            u, val, conv = _optimize_isometry(v, u0, rho.d, max_iters, tol)
        values.append(val)
        if best is None or val < best[0] - 1e-15:
            best = (val, u, conv)
        if rank == 1:
            break
    val, u, conv = best
    members = v @ u.T
    probs = np.sum(np.abs(members) ** 2, axis=0)
    nz = probs > 1e-14
    states = [TwoFermionPureState.from_vector(members[:, k] / math.sqrt(probs[k]), rho.d) for k in np.nonzero(nz)[0]]
    dec = EnsembleDecomposition(probs[nz] / probs[nz].sum(), states)
    return EofResult(float(val), dec, bool(conv), values, seed)


def _snap_to_slater(psi: TwoFermionPureState) -> TwoFermionPureState:
    sd = slater_decompose(psi)
    return slater_state(sd.u[0], sd.v[0])


def is_fermionic_separable(
    rho: TwoFermionMixedState,
    tol: float = 5e-3,
    **eof_opts,
) -> SeparabilityResult:
    """Separable / entangled / inconclusive verdict from the ``E_f`` optimizer.

    ``separable`` needs ``E_f <= ln 2 + tol`` and every ensemble member within
    ``tol`` of a single determinant (its non-leading Slater weight
    ``1 - 2|z_1|^2`` at most ``tol``); the certificate then lists those members.
    ``entangled`` needs ``E_f > ln 2 + tol`` from a converged optimizer.
    """
    res = entanglement_of_formation(rho, **eof_opts)
    if res.value <= LN2 + tol:
        leftovers = [1.0 - float(slater_decompose(s).weights[0]) for s in res.decomposition.states]
        if max(leftovers) <= tol:
            return SeparabilityResult("separable", res, res.decomposition, tol)
        return SeparabilityResult("inconclusive", res, None, tol)
    if res.converged:
        return SeparabilityResult("entangled", res, None, tol)
    return SeparabilityResult("inconclusive", res, None, tol)


# --------------------------------------------------------------------------
# witnesses
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    """``W = c I - |psi><psi|`` on the pair space; ``Tr(W sigma) >= 0`` on Slater mixtures."""

    d: int
    W: np.ndarray
    slater_bound: float
    search_best: float = float("nan")

    def expectation(self, rho) -> float:
        mat = rho.rho12 if isinstance(rho, TwoFermionMixedState) else np.asarray(rho)
        return float(np.real(np.trace(self.W @ mat)))

    def detects(self, rho, tol: float = 1e-6) -> bool:
        return self.expectation(rho) < -tol


def max_slater_overlap_search(psi: TwoFermionPureState, seed: int = 0, samples: int = 400, refine: int = 8) -> float:
    """Randomized search for ``max_S |<S|psi>|^2`` over Slater determinants.

    Random determinants are scored and the best few are polished by
    alternating exact maximizations: for fixed ``u`` the overlap
    ``|<u^v|psi>|`` is maximal at ``v ~ -A conj(u)``, and symmetrically for
    ``u`` with ``v`` fixed.
    """
    d = psi.d
    a = psi.A
    gen = rng(seed)
    uv = gen.standard_normal((samples, 2, d)) + 1j * gen.standard_normal((samples, 2, d))

    def overlap(u, v):
        s = slater_state(u, v)
        return float(abs(np.vdot(s.vector(), psi.vector())) ** 2)

    scores = np.array([overlap(x[0], x[1]) for x in uv])
    best = float(scores.max())
    for idx in np.argsort(scores)[::-1][:refine]:
        u, v = uv[idx]
        u = u / np.linalg.norm(u)
        for _ in range(200):
            v = -a @ u.conj()
            if np.linalg.norm(v) < 1e-14:
                break
            v = v / np.linalg.norm(v)
            u = a @ v.conj()
            if np.linalg.norm(u) < 1e-14:
                break
            u = u / np.linalg.norm(u)
        best = max(best, overlap(u, v))
    return best


def slater_witness(psi: TwoFermionPureState, validate: bool = True, seed: int = 0) -> Witness:
    """Witness ``c I - |psi><psi|`` with ``c`` the largest Slater weight ``2 max|z_i|^2``.

    With ``validate`` the bound is checked against :func:`max_slater_overlap_search`;
    a search result above ``c + 1e-6`` raises ``RuntimeError``.
    """
    sd = slater_decompose(psi)
    if sd.slater_rank < 2:
        raise ValueError("psi is a single Slater determinant; there is no entanglement to witness")
    c = float(np.max(sd.weights))
    vec = psi.vector()
    w = c * np.eye(vec.size) - np.outer(vec, vec.conj())
    found = float("nan")
    if validate:
        found = max_slater_overlap_search(psi, seed=seed)
        if found > c + 1e-6:
            raise RuntimeError(f"Slater overlap search found {found!r} > bound {c!r}")
    return Witness(psi.d, w, c, found)


# --------------------------------------------------------------------------
# antisymmetrized products and Hartree-Fock
# --------------------------------------------------------------------------


def wedge(a, b) -> np.ndarray:
    """Pair-space matrix of the antisymmetrized product of two one-particle operators.

    The kernel is
    ``K(ij; kl) = a_ik b_jl + b_ik a_jl - a_il b_jk - b_il a_jk``
    and the returned matrix is ``2 K`` restricted to ``i < j``, ``k < l``
    (the operator in the normalized pair basis).  For orthonormal ``u, v``,
    ``wedge(|u><u|, |v><v|) = 2 |u^v><u^v|``, and for a rank-``N`` projector
    ``P``, ``wedge(P, P) / 2`` is the Hartree-Fock pair operator of trace
    ``N (N - 1)``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    d = a.shape[0]
    i, j = _pair_arrays(d)
    ik = a[i][:, i] * b[j][:, j] + b[i][:, i] * a[j][:, j]
    il = a[i][:, j] * b[j][:, i] + b[i][:, j] * a[j][:, i]
    return 2.0 * (ik - il)


def wedge_ensemble(a, b, tol: float = 1e-12):
    """Expand ``wedge(a, b)`` for PSD ``a, b`` into weighted Slater determinants.

    With ``a = sum alpha_p |p><p|`` and ``b = sum beta_q |q><q|``,
    ``wedge(a, b) = sum alpha_p beta_q n_pq |S_pq><S_pq|`` where ``S_pq``
    is the normalized determinant of ``p`` and ``q`` and
    ``n_pq = ||p q^T - q p^T||^2`` (equal to 2 for orthonormal ``p, q``).
    """
    la, va = np.linalg.eigh(0.5 * (a + np.conj(np.transpose(a))))
    lb, vb = np.linalg.eigh(0.5 * (b + np.conj(np.transpose(b))))
    if la.min() < -1e-9 or lb.min() < -1e-9:
        raise ValueError("wedge_ensemble needs positive semidefinite operands")
    weights, states = [], []
    for alpha, p in zip(la, va.T):
        if alpha <= tol:
            continue
        for beta, q in zip(lb, vb.T):
            if beta <= tol:
                continue
            amat = np.outer(p, q) - np.outer(q, p)
            n2 = float(np.sum(np.abs(amat) ** 2))
            if n2 <= tol:
                continue
            weights.append(alpha * beta * n2)
            states.append(TwoFermionPureState(amat / math.sqrt(n2)))
    return np.array(weights), states


def hf_two_rdm(rho1, n_particles: int) -> TwoFermionMixedState:
    """Trace-one two-particle density matrix of a single determinant.

    ``rho1`` is the one-particle density of an ``N``-fermion determinant, given
    either as the rank-``N`` projector (trace ``N``) or divided by ``N``
    (trace one).  Returns ``Gamma[(ij),(kl)] ~ P_ik P_jl - P_il P_jk``
    normalized to unit trace.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    if n_particles < 2:
        raise ValueError("need at least two particles")
    tr = float(np.real(np.trace(rho1)))
    if tr <= 0:
        raise ValueError("one-particle density must have positive trace")
    p = rho1 * (n_particles / tr)
    idem = np.max(np.abs(p @ p - p))
    if idem > 1e-8:
        raise ValueError(f"one-particle density is not a rank-{n_particles} projector (|P^2 - P| = {idem:.3e})")
    gamma = 0.5 * wedge(p, p)
    gamma = gamma / np.real(np.trace(gamma))
    return TwoFermionMixedState(p.shape[0], gamma)


# --------------------------------------------------------------------------
# JSON
# --------------------------------------------------------------------------


def to_json(state) -> str:
    """``{"d", "basis": "antisym-lex", "kind", "entries": [[i, j, re, im], ...]}``.

    Pure states list pair-basis coefficients ``sqrt(2) A_ij`` for ``i < j``;
    mixed states list nonzero ``rho12[p, q]`` by pair index.
    """
    if isinstance(state, TwoFermionPureState):
        i, j = _pair_arrays(state.d)
        c = state.vector()
        entries = [[int(a), int(b), float(x.real), float(x.imag)] for a, b, x in zip(i, j, c) if x != 0]
        kind = "pure"
    elif isinstance(state, TwoFermionMixedState):
        rows, cols = np.nonzero(state.rho12)
        entries = [[int(r), int(c), float(state.rho12[r, c].real), float(state.rho12[r, c].imag)]
                   for r, c in zip(rows, cols)]
        kind = "mixed"
    else:
        raise TypeError(f"cannot serialize {type(state).__name__}")
    return json.dumps({"d": state.d, "basis": "antisym-lex", "kind": kind, "entries": entries})


def from_json(text: str):
    obj = json.loads(text)
    if obj.get("basis") != "antisym-lex":
        raise ValueError(f"unsupported basis {obj.get('basis')!r}")
    d = int(obj["d"])
    kind = obj.get("kind", "pure")
    dim = d * (d - 1) // 2
    if kind == "pure":
        a = np.zeros((d, d), dtype=complex)
        for i, j, re, im in obj["entries"]:
            if not i < j:
                raise ValueError(f"pure-state entries need i < j, got ({i}, {j})")
            a[i, j] = complex(re, im) / _SQRT2
            a[j, i] = -a[i, j]
        return TwoFermionPureState(a)
    if kind == "mixed":
        rho = np.zeros((dim, dim), dtype=complex)
        for p, q, re, im in obj["entries"]:
            rho[p, q] = complex(re, im)
        return TwoFermionMixedState(d, rho)
    raise ValueError(f"unknown state kind {kind!r}")
