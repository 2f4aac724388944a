"""Lindblad generator for a circuit and its stationary state.

Every bath acts locally on one qubit with the two jump operators
``sigma^-`` (rate ``gamma (N + 1)``) and ``sigma^+`` (rate ``gamma N``), where
``N`` is the Bose occupation at the qubit frequency.  Vectorization is
column-stacking throughout: ``vec(A X B) = (B^T kron A) vec(X)``.

The steady-state solver exploits a symmetry of this model.  The XX exchange
term, the ``sigma_z`` fields and the local jumps all preserve the difference
between the excitation numbers of ket and bra, so the stationary state lives in
the block of operators ``|i><j|`` with ``popcount(i) == popcount(j)``.  That
block is 6 unknowns for two qubits and 12870 for eight, instead of 16 and
65536.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    DimensionError,
    NonUniqueSteadyState,
    SolverFailure,
    StepSizeError,
)
from .hilbert import DENSE_LIMIT, DensityMatrix, Operator, embed, pauli
from .netlist import MAX_QUBITS, CircuitSpec

log = logging.getLogger(__name__)

#: blocks up to this size are solved by dense LU, larger ones iteratively
DENSE_BLOCK_LIMIT = 1000
#: singular values below this fraction of the largest one count as zero
NULLITY_RTOL = 1e-12
#: kernel searches factor the shifted block with SuperLU up to this size
SPLU_LIMIT = 5000


def thermal_occupation(omega: float, T: float) -> float:
    """Bose-Einstein occupation ``1 / (exp(omega/T) - 1)``; zero at ``T = 0``."""
    if T == 0:
        return 0.0
    x = omega / T
    if x > 700.0:  # exp overflows; the occupation is below 1e-304 anyway
        return 0.0
    return 1.0 / math.expm1(x)


def _sp(op: Operator) -> sp.csr_matrix:
    return op.to_sparse()


def system_hamiltonian(spec: CircuitSpec, sparse: bool | None = None) -> Operator:
    """``sum_k omega_k/2 sigma_z^k + sum_(l,k) J_lk (sx sx + sy sy)``."""
    n = spec.n
    d = 2 ** n
    H = sp.csr_matrix((d, d), dtype=complex)
    sz = pauli("z")
    for q in spec.qubits:
        H = H + 0.5 * q.omega * _sp(embed(sz, spec.site(q.id), n))
    for c in spec.active_couplings:
        H = H + c.J * _sp(coupling_term(spec, c.a, c.b))
    return Operator(H, sparse=sparse)


def coupling_term(spec: CircuitSpec, a: str, b: str) -> Operator:
    """``sx_a sx_b + sy_a sy_b`` (without the coupling constant)."""
    n = spec.n
    sa, sb = spec.site(a), spec.site(b)
    sx, sy = pauli("x"), pauli("y")
    m = _sp(embed(sx, sa, n)) @ _sp(embed(sx, sb, n)) + _sp(embed(sy, sa, n)) @ _sp(embed(sy, sb, n))
    return Operator(m)


def local_hamiltonian(spec: CircuitSpec, qid: str) -> Operator:
    """``omega_k/2 sigma_z^k`` embedded in the full register."""
    return embed(pauli("z"), spec.site(qid), spec.n) * (0.5 * spec.omega(qid))


def jump_operators(spec: CircuitSpec, bath_id: str) -> list[tuple[float, Operator]]:
    """``(rate, L)`` pairs of one bath; zero-rate channels are dropped."""
    b = spec.bath(bath_id)
    occ = thermal_occupation(spec.omega(b.qubit), b.T)
    site = spec.site(b.qubit)
    out = [(b.gamma * (occ + 1.0), embed(pauli("minus"), site, spec.n))]
    if occ > 0:
        out.append((b.gamma * occ, embed(pauli("plus"), site, spec.n)))
    return out


def dissipator_apply(spec: CircuitSpec, bath_id: str, rho: Operator) -> Operator:
    """``D_k(rho) = sum rate (L rho L^dag - 1/2 {L^dag L, rho})`` as a dense operator."""
    r = rho.to_dense()
    out = np.zeros_like(r, dtype=complex)
    for rate, L in jump_operators(spec, bath_id):
        Lm = L.to_sparse()
        LdL = (Lm.conj().T @ Lm)
        out += rate * (np.asarray(Lm @ (Lm @ r.conj().T).conj().T)
                       - 0.5 * np.asarray(LdL @ r) - 0.5 * np.asarray((LdL.T @ r.T).T))
    return Operator(out, sparse=False)


def _lindblad_super(rate: float, L: sp.csr_matrix, eye: sp.csr_matrix) -> sp.csr_matrix:
    LdL = (L.conj().T @ L).tocsr()
    return rate * (sp.kron(L.conj(), L) - 0.5 * sp.kron(eye, LdL) - 0.5 * sp.kron(LdL.T, eye))


@dataclass(frozen=True)
class Superoperator:
    """A linear map on ``d x d`` operators, acting on column-stacked vectors."""

    matrix: object
    hilbert_dim: int

    @property
    def dim(self) -> int:
        return self.hilbert_dim ** 2

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def apply(self, rho: Operator) -> np.ndarray:
        v = rho.to_dense().reshape(-1, order="F")
        out = self.matrix @ v
        return np.asarray(out).reshape(self.hilbert_dim, self.hilbert_dim, order="F")

    def norm_inf(self) -> float:
        """Maximum absolute row sum."""
        m = self.matrix
        if self.is_sparse:
            return float(abs(m).sum(axis=1).max())
        return float(np.abs(m).sum(axis=1).max())


def liouvillian_matrix(spec: CircuitSpec, sparse: bool | None = None) -> Superoperator:
    """Vectorized generator ``L`` with ``d vec(rho)/dt = L vec(rho)``.

    ``sparse=None`` picks dense storage for Liouville dimension <= 64.
    """
    if spec.n > MAX_QUBITS:
        raise DimensionError(f"{spec.n} qubits exceeds the limit of {MAX_QUBITS}")
    d = 2 ** spec.n
    eye = sp.identity(d, dtype=complex, format="csr")
    H = system_hamiltonian(spec).to_sparse()
    L = -1j * (sp.kron(eye, H) - sp.kron(H.T, eye))
    for b in spec.baths:
        for rate, J in jump_operators(spec, b.id):
            L = L + _lindblad_super(rate, J.to_sparse(), eye)
    L = L.tocsr()
    if sparse is None:
        sparse = d * d > DENSE_LIMIT
    return Superoperator(L if sparse else L.toarray(), d)


# --------------------------------------------------------------------------
# steady state


@dataclass(frozen=True)
class SteadyStateResult:
    rho: DensityMatrix
    residual: float       # max |L vec(rho)|
    nullity: int          # dimension of the kernel found on the solved block
    method: str = ""
    iterations: int = 0

    @property
    def unique(self) -> bool:
        return self.nullity == 1


class _Block:
    """Coherence-order-zero block of the generator, ordered sector by sector."""

    def __init__(self, spec: CircuitSpec, L: sp.csr_matrix):
        n = spec.n
        d = 2 ** n
        pc = np.array([bin(i).count("1") for i in range(d)])
        self.sectors = [np.flatnonzero(pc == k) for k in range(n + 1)]
        self.idx = np.concatenate([(s[:, None] + s[None, :] * d).ravel(order="F") for s in self.sectors])
        self.offsets = np.cumsum([0] + [len(s) ** 2 for s in self.sectors])
        self.d = d
        self.L0 = L[self.idx][:, self.idx].tocsr()
        pop = np.zeros(len(self.idx), dtype=bool)
        for k, s in enumerate(self.sectors):
            m = len(s)
            pop[self.offsets[k] + np.arange(m) * (m + 1)] = True
        self.popmask = pop
        # the trace functional is a combination of the population rows only, so
        # the replaced row has to be one of them
        cand = np.flatnonzero(pop)
        self.row = int(cand[np.argmax(np.abs(self.L0.diagonal()[cand]))])

    @property
    def size(self) -> int:
        return len(self.idx)

    def system(self) -> tuple[sp.csr_matrix, np.ndarray]:
        A = self.L0.tolil()
        A[self.row, :] = self.popmask.astype(complex)
        b = np.zeros(self.size, dtype=complex)
        b[self.row] = 1.0
        return A.tocsr(), b

    def unpack(self, x: np.ndarray) -> np.ndarray:
        full = np.zeros(self.d * self.d, dtype=complex)
        full[self.idx] = x
        return full.reshape(self.d, self.d, order="F")


def _sector_preconditioner(spec: CircuitSpec, blk: _Block, shift: float = 0.0) -> spla.LinearOperator:
    """Exact inverse of the sector-diagonal part ``X -> A X + X A^dag - shift X``.

    Within sector ``k`` the generator restricted to ``|i><j|`` is
    ``-i[H_k, X] - 1/2 {G_k, X}`` plus the gain terms that couple sectors.  With
    ``A_k = -i H_k - G_k/2`` diagonalized as ``V diag(lam) V^-1`` the Sylvester
    equation is solved entrywise in the eigenbasis.  The returned operator also
    implements the adjoint (``rmatvec``), which preconditions ``L^dag``.
    """
    n, d = spec.n, blk.d
    H = system_hamiltonian(spec).to_dense()
    loss = np.zeros(d)
    states = np.arange(d)
    for b in spec.baths:
        occ = thermal_occupation(spec.omega(b.qubit), b.T)
        excited = ((states >> (n - spec.site(b.qubit))) & 1) == 0
        loss += np.where(excited, b.gamma * (occ + 1.0), b.gamma * occ)
    parts = []
    for s in blk.sectors:
        Ak = -1j * H[np.ix_(s, s)] - 0.5 * np.diag(loss[s])
        lam, V = np.linalg.eig(Ak)
        Vi = np.linalg.inv(V)
        den = lam[:, None] + lam.conj()[None, :] - shift
        floor = 1e-10 * np.abs(den).max()
        den = np.where(np.abs(den) < floor, floor, den)
        parts.append((V, Vi, den))

    def run(y, adjoint):
        y = np.asarray(y).ravel()
        x = np.empty_like(y, dtype=complex)
        for k, s in enumerate(blk.sectors):
            m = len(s)
            lo, hi = blk.offsets[k], blk.offsets[k + 1]
            V, Vi, den = parts[k]
            Y = y[lo:hi].reshape(m, m, order="F")
            if adjoint:
                X = Vi.conj().T @ ((V.conj().T @ Y @ V) / den.conj()) @ Vi
            else:
                X = V @ ((Vi @ Y @ Vi.conj().T) / den) @ V.conj().T
            x[lo:hi] = X.reshape(-1, order="F")
        return x

    return spla.LinearOperator((blk.size, blk.size), matvec=lambda y: run(y, False),
                               rmatvec=lambda y: run(y, True), dtype=complex)


def _gmres(A, b, M, x0=None, rtol=1e-13, maxiter=4):
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = spla.gmres(A, b, x0=x0, M=M, rtol=rtol, atol=0.0, restart=300, maxiter=maxiter,
                         callback=cb, callback_type="pr_norm")
    return x, info, count[0]


def _dense_nullity(L0: np.ndarray) -> int:
    s = np.linalg.svd(L0, compute_uv=False)
    return int(np.sum(s <= NULLITY_RTOL * s[0])) if s[0] > 0 else L0.shape[0]


def steady_state(spec: CircuitSpec, tol: float = 1e-9, method: str = "auto",
                 check_unique: bool = True) -> SteadyStateResult:
    """Unique trace-one solution of ``L vec(rho) = 0``.

    ``method`` is ``"dense"``, ``"sparse"`` (SuperLU), ``"krylov"`` (GMRES with a
    sector preconditioner), ``"full"`` (dense LU on the whole generator, for
    cross-checks on small circuits) or ``"auto"``.  The result must satisfy
    ``max|L vec rho| <= tol * ||L||_inf``.
    """
    if spec.n > MAX_QUBITS:
        raise DimensionError(f"{spec.n} qubits exceeds the limit of {MAX_QUBITS}")
    sup = liouvillian_matrix(spec, sparse=True)
    L = sup.matrix
    norm = sup.norm_inf()

    if method == "full":
        x, nullity = _solve_full(L, sup.hilbert_dim, check_unique)
        rho_m, its = x, 0
    else:
        blk = _Block(spec, L)
        if method == "auto":
            method = "dense" if blk.size <= DENSE_BLOCK_LIMIT else "krylov"
        A, b = blk.system()
        if method == "dense":
            x, nullity = _solve_dense(blk, A, b, check_unique)
            its = 0
        elif method == "sparse":
            x, nullity = _solve_sparse(A, b, norm, check_unique)
            its = 0
        elif method == "krylov":
            x, nullity, its = _solve_krylov(spec, blk, A, b, check_unique)
        else:
            raise ValueError(f"unknown steady-state method {method!r}")
        rho_m = blk.unpack(x)

    rho_m = 0.5 * (rho_m + rho_m.conj().T)
    rho_m = rho_m / np.trace(rho_m).real
    residual = float(np.abs(L @ rho_m.reshape(-1, order="F")).max())
    log.debug("steady state %s: n=%d residual=%.3e nullity=%d", method, spec.n, residual, nullity)
    if residual > tol * norm:
        raise SolverFailure(f"steady-state residual {residual:.3e} exceeds {tol:.1e} * ||L|| = {tol * norm:.3e}")
    try:
        rho = DensityMatrix(rho_m)
    except ValueError as exc:
        raise SolverFailure(f"steady state is not a valid density matrix: {exc}") from None
    return SteadyStateResult(rho, residual, nullity, method, its)


def _solve_full(L, d, check_unique):
    Ld = L.toarray()
    nullity = _dense_nullity(Ld) if check_unique else 1
    if nullity > 1:
        raise NonUniqueSteadyState(nullity)
    diag_rows = np.arange(d) * (d + 1)
    r = int(diag_rows[np.argmax(np.abs(Ld.diagonal()[diag_rows]))])
    A = Ld.copy()
    A[r, :] = 0
    A[r, diag_rows] = 1
    b = np.zeros(d * d, dtype=complex)
    b[r] = 1
    x = sla.solve(A, b)
    return x.reshape(d, d, order="F"), nullity


#: blocks up to this size get an exact nullity count from the SVD
SVD_LIMIT = 300


def _solve_dense(blk: _Block, A, b, check_unique):
    nullity = 1
    if check_unique and blk.size <= SVD_LIMIT:
        nullity = _dense_nullity(blk.L0.toarray())
        if nullity > 1:
            raise NonUniqueSteadyState(nullity)
    Ad = A.toarray()
    lu = sla.lu_factor(Ad, check_finite=False)
    x = sla.lu_solve(lu, b)
    # one round of iterative refinement
    x = x + sla.lu_solve(lu, b - Ad @ x)
    if not np.all(np.isfinite(x)):
        raise NonUniqueSteadyState(2)
    if check_unique and blk.size > SVD_LIMIT:
        norm = float(np.abs(Ad).sum(axis=1).max())
        if _singular_probe(lambda z: sla.lu_solve(lu, z), blk.size, norm):
            raise NonUniqueSteadyState(2)
    return x, nullity


def _singular_probe(solve, size: int, norm: float) -> bool:
    """Inverse iteration: a huge response to a unit vector signals a kernel."""
    rng = np.random.default_rng(12345)
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    z /= np.linalg.norm(z)
    for _ in range(2):
        y = solve(z)
        if y is None or not np.all(np.isfinite(y)):
            return True
        ny = np.linalg.norm(y)
        if ny * NULLITY_RTOL * norm > 1.0:
            return True
        z = y / ny
    return False


def _solve_sparse(A, b, norm, check_unique):
    try:
        lu = spla.splu(A.tocsc())
    except RuntimeError:  # "Factor is exactly singular"
        raise NonUniqueSteadyState(2) from None
    x = lu.solve(b)
    x = x + lu.solve(b - A @ x)
    if check_unique and _singular_probe(lu.solve, A.shape[0], norm):
        raise NonUniqueSteadyState(2)
    return x, 1


def _solve_krylov(spec, blk, A, b, check_unique):
    M = _sector_preconditioner(spec, blk)
    x, info, its = _gmres(A, b, M)
    if info != 0:
        # a singular bordered system leaves GMRES stagnating; count the kernel
        # to tell a degenerate generator from a hard but regular one
        dim = steady_state_space(spec).dimension
        if dim > 1:
            raise NonUniqueSteadyState(dim)
        raise SolverFailure(f"GMRES did not converge after {its} iterations")
    if check_unique:
        norm = float(abs(A).sum(axis=1).max())

        def solve(z):
            y, inf, _ = _gmres(A, z, M, rtol=1e-8)
            return y if inf == 0 else None

        if _singular_probe(solve, blk.size, norm):
            raise NonUniqueSteadyState(2)
    return x, 1, its


# --------------------------------------------------------------------------
# time evolution

#: allowed trace drift per unit time during propagation
TRACE_DRIFT_RATE = 1e-9


def propagate(spec: CircuitSpec, rho0: Operator, t_final: float, dt: float,
              observe=None) -> DensityMatrix:
    """Integrate the master equation with classical RK4 on the vectorized state.

    ``dt`` is an upper bound; the step is shrunk so that an integer number of
    steps lands on ``t_final``.  A step is rejected (``StepSizeError``) if it is
    outside the RK4 stability region or if the trace drifts faster than
    ``TRACE_DRIFT_RATE`` per unit time.  ``observe(t, rho_matrix)`` is called
    after every step if given.
    """
    if dt <= 0 or t_final < 0:
        raise StepSizeError("need dt > 0 and t_final >= 0")
    sup = liouvillian_matrix(spec)
    if dt * sup.norm_inf() > 2.5:
        raise StepSizeError(f"dt={dt:g} exceeds the RK4 stability bound {2.5 / sup.norm_inf():.3g}")
    L = sup.matrix
    steps = max(1, math.ceil(t_final / dt - 1e-12)) if t_final > 0 else 0
    h = t_final / steps if steps else 0.0
    v = rho0.to_dense().reshape(-1, order="F").astype(complex)
    d = sup.hilbert_dim
    tr0 = np.trace(rho0.to_dense())
    diag = np.arange(d) * (d + 1)
    t = 0.0
    for _ in range(steps):
        k1 = L @ v
        k2 = L @ (v + 0.5 * h * k1)
        k3 = L @ (v + 0.5 * h * k2)
        k4 = L @ (v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        drift = abs(v[diag].sum() - tr0)
        if drift > TRACE_DRIFT_RATE * max(t, 1.0):
            raise StepSizeError(f"trace drift {drift:.3e} at t={t:g}")
        if observe is not None:
            observe(t, v.reshape(d, d, order="F"))
    m = v.reshape(d, d, order="F")
    return DensityMatrix(0.5 * (m + m.conj().T), check=False)


# --------------------------------------------------------------------------
# degenerate generators


@dataclass(frozen=True)
class SteadyStateSpace:
    """Kernel of the generator on the coherence-order-zero block.

    ``right`` holds stationary operators, ``left`` the conserved quantities,
    normalized so that ``<left_i, right_j> = delta_ij``.  Both are ``d x d``
    matrices.
    """

    right: tuple
    left: tuple
    eigenvalues: tuple

    @property
    def dimension(self) -> int:
        return len(self.right)

    def hermitian_basis(self) -> list[np.ndarray]:
        """Real-linear Hermitian spanning set of the stationary operators."""
        out = []
        for X in self.right:
            for Y in (X + X.conj().T, 1j * (X - X.conj().T)):
                if np.abs(Y).max() > 1e-12 * np.abs(X).max():
                    out.append(Y / np.abs(Y).max())
        return out


def _kernel_vectors(spec, blk, op_solve, adjoint, k, cutoff):
    size = blk.size
    L0 = blk.L0.conj().T.tocsr() if adjoint else blk.L0
    if size <= SVD_LIMIT:
        vals, vecs = np.linalg.eig(L0.toarray())
        order = np.argsort(np.abs(vals))
    else:
        Aop = spla.LinearOperator((size, size), matvec=lambda v: L0 @ v, dtype=complex)
        vals, vecs = spla.eigs(Aop, k=min(k, size - 2), sigma=0.0, OPinv=op_solve, which="LM")
        order = np.argsort(np.abs(vals))
    keep = [i for i in order if abs(vals[i]) <= cutoff]
    return vals[keep], vecs[:, keep]


def steady_state_space(spec: CircuitSpec, max_dim: int = 8, rtol: float = 1e-8) -> SteadyStateSpace:
    """All stationary states, for generators whose kernel is degenerate.

    Eigenvalues with ``|lambda| <= rtol * ||L||_inf`` count as zero.  Large
    blocks use shift-invert Arnoldi with the preconditioned Krylov solver.
    """
    if spec.n > MAX_QUBITS:
        raise DimensionError(f"{spec.n} qubits exceeds the limit of {MAX_QUBITS}")
    sup = liouvillian_matrix(spec, sparse=True)
    blk = _Block(spec, sup.matrix)
    norm = sup.norm_inf()
    cutoff = rtol * norm
    # every nonzero eigenvalue has negative real part, so a positive shift
    # keeps L0 - shift well conditioned while the kernel stays nearest to 0
    shift = 1e-4 * norm
    size = blk.size
    solvers = {}
    if size > SVD_LIMIT:
        eye = sp.identity(size, dtype=complex, format="csr")
        if size <= DENSE_BLOCK_LIMIT:
            for adj in (False, True):
                M0 = (blk.L0.conj().T if adj else blk.L0) - shift * eye
                lu = sla.lu_factor(M0.toarray())
                solvers[adj] = spla.LinearOperator((size, size), matvec=lambda v, lu=lu: sla.lu_solve(lu, v),
                                                   dtype=complex)
        elif size <= SPLU_LIMIT:
            slu = spla.splu((blk.L0 - shift * eye).tocsc())
            for adj in (False, True):
                solvers[adj] = spla.LinearOperator(
                    (size, size), matvec=lambda v, t="H" if adj else "N": slu.solve(v, trans=t), dtype=complex)
        else:
            M = _sector_preconditioner(spec, blk, shift=shift)
            for adj in (False, True):
                A = ((blk.L0.conj().T if adj else blk.L0) - shift * eye).tocsr()
                Mx = spla.LinearOperator((size, size), matvec=M.rmatvec if adj else M.matvec, dtype=complex)

                def solve(v, A=A, Mx=Mx):
                    x, info, _ = _gmres(A, v, Mx, rtol=1e-12)
                    if info != 0:
                        raise SolverFailure("shift-invert solve did not converge")
                    return x

                solvers[adj] = spla.LinearOperator((size, size), matvec=solve, dtype=complex)

    # eigs reports eigenvalues of L0 - shift when given OPinv with sigma = 0
    def find(adj):
        if size <= SVD_LIMIT:
            return _kernel_vectors(spec, blk, None, adj, max_dim, cutoff)
        # ask for a few eigenvalues first and widen only if all of them are zero
        k = min(4, max_dim)
        while True:
            vals, vecs = _kernel_vectors(spec, blk, solvers[adj], adj, k, cutoff + abs(shift))
            vals = vals + shift
            keep = np.abs(vals) <= cutoff
            if keep.sum() < k or k >= max_dim:
                return vals[keep], vecs[:, keep]
            k = min(2 * k, max_dim)

    rvals, R = find(False)
    _, Lk = find(True)
    if R.shape[1] != Lk.shape[1] or R.shape[1] == 0:
        raise SolverFailure(f"left/right kernel dimensions differ ({R.shape[1]} vs {Lk.shape[1]})")
    if R.shape[1] >= max_dim:
        raise SolverFailure(f"kernel dimension reached max_dim={max_dim}; raise it")
    G = Lk.conj().T @ R
    Lk = Lk @ np.linalg.inv(G).conj().T
    right = tuple(blk.unpack(R[:, i]) for i in range(R.shape[1]))
    left = tuple(blk.unpack(Lk[:, i]) for i in range(Lk.shape[1]))
    return SteadyStateSpace(right, left, tuple(rvals))


def asymptotic_state(spec: CircuitSpec, rho0: Operator, space: SteadyStateSpace | None = None) -> DensityMatrix:
    """Long-time limit of the evolution started in ``rho0``.

    This is the projection of ``rho0`` onto the stationary operators along
    the conserved quantities.  ``rho0`` must commute with the total
    excitation number (for example any state diagonal in the computational
    basis), so that it lies in the block where the kernel was computed.
    """
    space = space or steady_state_space(spec)
    r0 = rho0.to_dense()
    d = r0.shape[0]
    pc = np.array([bin(i).count("1") for i in range(d)])
    off = np.abs(r0[pc[:, None] != pc[None, :]])
    if off.size and off.max() > 1e-12:
        raise ValueError("initial state has coherences between excitation sectors")
    rho = np.zeros((d, d), dtype=complex)
    for R, Lq in zip(space.right, space.left):
        rho += np.vdot(Lq, r0) * R
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real)
