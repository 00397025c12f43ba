"""Markovian generators: GKSL form, Kossakowski matrix, canonical
diagonalization, and the generator-side positivity conditions (quantum and
classical).
"""
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DimensionError
from .liouville import (
    TOL_HERM,
    TOL_PSD,
    _as_square,
    apply_superop,
    conjugation_superop,
    hs_basis,
    is_hermitian,
    left_multiply_superop,
    right_multiply_superop,
)


def hamiltonian_superop(H):
    """Superoperator of the coherent part rho -> -i[H, rho]."""
    H = _as_square(H, "Hamiltonian")
    return -1j * (left_multiply_superop(H) - right_multiply_superop(H))


def dissipator_superop(V):
    """Superoperator of the unit-rate dissipator
    rho -> V rho V^dag - (1/2){V^dag V, rho}."""
    V = _as_square(V, "jump operator")
    VdV = V.conj().T @ V
    return (
        conjugation_superop(V, V.conj().T)
        - 0.5 * left_multiply_superop(VdV)
        - 0.5 * right_multiply_superop(VdV)
    )


@dataclass
class GKSLGenerator:
    """Canonical Markovian generator: Hamiltonian plus (rate, jump) pairs.

    Rates are required nonnegative by :meth:`validate`; time-dependent
    families with possibly negative instantaneous rates should be assembled
    directly from :func:`hamiltonian_superop` and :func:`dissipator_superop`
    and judged by the divisibility witness instead.
    """

    H: np.ndarray
    jumps: List[Tuple[float, np.ndarray]] = field(default_factory=list)

    def __post_init__(self):
        self.H = _as_square(self.H, "Hamiltonian")
        self.jumps = [(float(g), _as_square(V, "jump operator")) for g, V in self.jumps]
        for _, V in self.jumps:
            if V.shape != self.H.shape:
                raise DimensionError("jump operator dimension differs from Hamiltonian")

    @property
    def dim(self):
        return self.H.shape[0]

    def validate(self, tol_herm=TOL_HERM, tol_trace=1e-10):
        """Check the generator invariants; raises ValueError on violation."""
        if not is_hermitian(self.H, tol_herm):
            raise ValueError("Hamiltonian is not Hermitian within tolerance")
        for g, _ in self.jumps:
            if g < 0:
                raise ValueError(f"negative rate {g}")
        L = superop_of_generator(self)
        scale = max(np.abs(L).max(), 1.0)
        for F in hs_basis(self.dim):
            if abs(np.trace(apply_superop(L, F))) > tol_trace * scale:
                raise ValueError("generator does not annihilate the trace")
        return self


def superop_of_generator(gen):
    """Liouvillian matrix of a GKSL generator under the global convention."""
    L = hamiltonian_superop(gen.H)
    for g, V in gen.jumps:
        L = L + g * dissipator_superop(V)
    return L


def time_dependent_superop(H_of_t, jumps_of_t):
    """Closure t -> Liouvillian for time-dependent Hamiltonians and
    (rate, jump) lists; feeds directly into the time-splitting propagator.

    Rates may go negative along the way (the family is then not Markovian in
    general); the divisibility witness is the arbiter in that case.
    """

    def gen(t):
        L = hamiltonian_superop(H_of_t(t))
        for g, V in jumps_of_t(t):
            L = L + g * dissipator_superop(V)
        return L

    return gen


@dataclass
class KossakowskiForm:
    """Generator data over a Hilbert-Schmidt basis: effective Hamiltonian plus
    the (N^2-1) x (N^2-1) coefficient matrix over the traceless elements."""

    H: np.ndarray
    a: np.ndarray
    basis: list


@dataclass
class NonGKSLDiagnosis:
    """Returned instead of a generator when the coefficient matrix fails PSD."""

    min_eigenvalue: float
    a: np.ndarray
    H: np.ndarray


def kossakowski_matrix(gen, basis=None):
    """Kossakowski coefficient matrix of a generator.

    Expands every jump over the traceless basis elements; identity components
    of the jumps are projected into the Hamiltonian part (they only generate a
    commutator term), so jumps need not be traceless on input.  The returned
    form reproduces the original dissipator exactly:
    ``sum_jk a_jk [F_j rho F_k^dag - ...] + (-i)[H, rho]``.
    """
    n = gen.dim
    basis = hs_basis(n) if basis is None else basis
    if len(basis) != n * n:
        raise DimensionError("basis size does not match generator dimension")
    traceless = basis[:-1]
    a = np.zeros((n * n - 1, n * n - 1), dtype=complex)
    H_eff = gen.H.astype(complex).copy()
    for g, V in gen.jumps:
        d = np.trace(V) / n                      # identity component
        W = V - d * np.eye(n)
        v = np.array([np.trace(F.conj().T @ W) for F in traceless])
        a += g * np.outer(v, v.conj())
        # D[W + d] = D[W] - i[(i/2)(d* W - d W^dag), rho]
        H_eff += g * 0.5j * (np.conj(d) * W - d * W.conj().T)
    return KossakowskiForm(H=H_eff, a=a, basis=basis)


def kossakowski_of_superop(L, basis=None):
    """Kossakowski form extracted from a raw trace-annihilating,
    Hermiticity-preserving superoperator.

    Expands L over the sandwich basis F_j . F_k^dag; with the identity/sqrt(N)
    element last, the traceless block of the expansion is exactly the
    Kossakowski matrix, and the identity column/row carry the Hamiltonian and
    normalization parts.
    """
    L = _as_square(L, "superoperator")
    n = int(round(np.sqrt(L.shape[0])))
    basis = hs_basis(n) if basis is None else basis
    m = n * n
    chi = np.zeros((m, m), dtype=complex)
    for j, Fj in enumerate(basis):
        for k, Fk in enumerate(basis):
            B = np.kron(Fk.conj(), Fj)
            chi[j, k] = np.trace(B.conj().T @ L)
    a = chi[:-1, :-1]
    # Hamiltonian part from the identity column (see the canonical-form
    # construction): F = (1/sqrt(N)) sum_j chi[j, m-1] F_j, H = (i/2)(F - F^dag)
    F = sum(chi[j, m - 1] * basis[j] for j in range(m - 1)) / np.sqrt(n)
    H = 0.5j * (F - F.conj().T)
    return KossakowskiForm(H=H, a=a, basis=basis)


def canonical_form(kf, tol_psd=TOL_PSD):
    """Diagonalize a Kossakowski form into canonical (rate, jump) pairs.

    Jumps are normalized to unit Hilbert-Schmidt norm with the norm absorbed
    into the rate; eigenvalues below the truncation threshold are dropped.
    If any eigenvalue is negative beyond ``tol_psd * ||a||`` the input does
    not describe a GKSL generator and a :class:`NonGKSLDiagnosis` is returned
    instead.
    """
    a = _as_square(kf.a, "coefficient matrix")
    if not is_hermitian(a, 1e-10):
        raise ValueError("coefficient matrix must be Hermitian")
    w, U = np.linalg.eigh((a + a.conj().T) / 2.0)
    scale = max(abs(w).max(), 1e-300)
    if w.min() < -tol_psd * scale:
        return NonGKSLDiagnosis(min_eigenvalue=float(w.min()), a=a, H=kf.H)
    traceless = kf.basis[:-1]
    jumps = []
    for m in range(len(w)):
        if w[m] <= 1e-14 * scale:
            continue
        W = sum(U[j, m] * traceless[j] for j in range(len(traceless)))
        norm = np.sqrt(np.trace(W.conj().T @ W).real)
        if norm < 1e-14:
            continue
        jumps.append((float(w[m]) * norm**2, W / norm))
    jumps.sort(key=lambda gv: -gv[0])
    return GKSLGenerator(H=kf.H, jumps=jumps)


class PartitionViolation(NamedTuple):
    partition_index: int
    kind: str          # "diagonal", "off-diagonal", or "column-sum"
    indices: Tuple[int, int]
    value: float


@dataclass
class KossakowskiConditionsReport:
    passed: bool
    first_violation: Optional[PartitionViolation]
    matrices: List[np.ndarray]


def _check_partition(P_list, dim, tol):
    total = sum(P_list)
    if np.abs(total - np.eye(dim)).max() > tol:
        raise ValueError("projectors do not resolve the identity")
    for i, P in enumerate(P_list):
        if np.abs(P @ P - P).max() > 1e-8 or not is_hermitian(P, 1e-8):
            raise ValueError(f"element {i} is not an orthogonal projector")


def check_kossakowski_conditions(L, partitions, tol=1e-10):
    """Generator-side contraction conditions over resolutions of the identity.

    For each partition builds A_ij = Tr[P_i L(P_j)] and verifies the three
    conditions: nonpositive diagonal, nonnegative off-diagonal, vanishing
    column sums.  A sampled check: passing is evidence, a failure is a
    counterexample.  Reports the first violation found.
    """
    L = _as_square(L, "generator")
    dim = int(round(np.sqrt(L.shape[0])))
    scale = max(np.abs(L).max(), 1.0)
    matrices = []
    violation = None
    for p_idx, P_list in enumerate(partitions):
        _check_partition(P_list, dim, 1e-8)
        m = len(P_list)
        A = np.zeros((m, m))
        for j, Pj in enumerate(P_list):
            LPj = apply_superop(L, Pj)
            for i, Pi in enumerate(P_list):
                A[i, j] = np.trace(Pi @ LPj).real
        matrices.append(A)
        if violation is not None:
            continue
        for i in range(m):
            if A[i, i] > tol * scale:
                violation = PartitionViolation(p_idx, "diagonal", (i, i), A[i, i])
                break
        if violation is None:
            for i in range(m):
                for j in range(m):
                    if i != j and A[i, j] < -tol * scale:
                        violation = PartitionViolation(p_idx, "off-diagonal", (i, j), A[i, j])
                        break
                if violation is not None:
                    break
        if violation is None:
            sums = A.sum(axis=0)
            for j in range(m):
                if abs(sums[j]) > tol * scale:
                    violation = PartitionViolation(p_idx, "column-sum", (j, j), sums[j])
                    break
    return KossakowskiConditionsReport(violation is None, violation, matrices)


def random_partitions(dim, count, rng, include_computational=True):
    """Sample resolutions of the identity: eigenbases of random Hermitian
    matrices, optionally preceded by the computational basis."""
    from .operators import rand_hermitian

    partitions = []
    if include_computational:
        partitions.append([np.diag(row).astype(complex) for row in np.eye(dim)])
    for _ in range(count - len(partitions)):
        _, V = np.linalg.eigh(rand_hermitian(dim, rng))
        partitions.append([np.outer(V[:, k], V[:, k].conj()) for k in range(dim)])
    return partitions


def eigenbasis_partition(H):
    """Resolution of the identity from the eigenbasis of a Hermitian matrix."""
    _, V = np.linalg.eigh(_as_square(H))
    return [np.outer(V[:, k], V[:, k].conj()) for k in range(V.shape[1])]


def classical_generator_check(Q, tol=1e-10):
    """Kolmogorov conditions for a classical Markov generator.

    True iff diagonal entries <= tol, off-diagonal entries >= -tol, and every
    row sums to zero within tol (so e^{tQ} is a stochastic matrix).
    """
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DimensionError(f"expected a square real matrix, got {Q.shape}")
    scale = max(np.abs(Q).max(), 1.0)
    if np.diag(Q).max() > tol * scale:
        return False
    off = Q - np.diag(np.diag(Q))
    if off.min() < -tol * scale:
        return False
    return bool(np.abs(Q.sum(axis=1)).max() <= tol * scale)
