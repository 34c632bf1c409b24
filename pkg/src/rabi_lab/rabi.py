"""Truncated-basis quantum Rabi model.

Conventions
-----------
Energies are in units of the mode frequency. The Hamiltonian is

    H = (eps/2) sigma_3 + a^+ a + f sigma_1 (a + a^+)

on the product basis |n> (x) {down, up}, n = 0..n_max. A dense state
vector stores amplitude (n, spin) at index ``2*n + spin`` with spin 0 =
down, 1 = up.

The combined parity P = sigma_3 exp(i pi a^+ a) commutes with H. Its
eigenspace p is the chain |0, s_0>, |1, s_1>, ... with s_n = p (-1)^n
(+1 meaning spin up), on which H is tridiagonal.
"""
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .errors import ConvergenceError, DomainError, TruncationError

CONVERGENCE_TOL = 1e-8


def default_n_max(nbar, f=0.0):
    """Truncation rule ceil(nbar + 12 sqrt(nbar) + 12 f^2 + 40)."""
    nbar = max(float(nbar), 0.0)
    return int(math.ceil(nbar + 12.0 * math.sqrt(nbar) + 12.0 * f * f + 40.0))


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless single-mode parameters.

    Attributes
    ----------
    epsilon : float
        Atomic transition energy in units of the mode frequency. Zero is
        accepted for the degenerate displaced-oscillator limit.
    f : float
        Coupling constant, f >= 0.
    n_max : int
        Highest Fock index kept (basis 0..n_max), at least 4.
    """

    epsilon: float
    f: float
    n_max: int = 60

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (math.isfinite(self.f) and self.f >= 0):
            raise DomainError(f"f must be finite and >= 0, got {self.f}")
        if int(self.n_max) != self.n_max or self.n_max < 4:
            raise DomainError(f"n_max must be an integer >= 4, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def dim(self):
        return 2 * (self.n_max + 1)

    def with_n_max(self, n_max):
        return ModelParams(self.epsilon, self.f, n_max)


@dataclass
class QuantumState:
    """Amplitudes over the Fock (x) spin product basis, index ``2n + spin``."""

    amplitudes: np.ndarray
    n_max: int

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (2 * (self.n_max + 1),):
            raise DomainError(
                f"expected {2 * (self.n_max + 1)} amplitudes, got {self.amplitudes.shape}")

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    @property
    def up(self):
        return self.amplitudes[1::2]

    @property
    def down(self):
        return self.amplitudes[0::2]

    def normalized(self):
        return QuantumState(self.amplitudes / self.norm, self.n_max)

    def overlap(self, other):
        """<self|other>."""
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass
class Level:
    n: int
    p: int
    energy: float
    vector: QuantumState | None = None
    label: tuple | None = None


@dataclass
class SpectrumResult:
    """Eigenvalues grouped by combined parity.

    ``levels`` is ordered by (energy, parity) with p = +1 first on ties;
    within each parity the index ``n`` counts upward from 0.
    """

    levels: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def sector(self, p):
        return [lv for lv in self.levels if lv.p == p]

    def energies(self, p=None):
        chosen = self.levels if p is None else self.sector(p)
        return np.array([lv.energy for lv in chosen])


@dataclass(frozen=True)
class Tridiagonal:
    diag: np.ndarray
    offdiag: np.ndarray

    def dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v):
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out


def _check_parity(p):
    if p not in (1, -1):
        raise DomainError(f"parity must be +1 or -1, got {p}")


def sector_spins(n_max, p):
    """Spin (+1 up, -1 down) carried by each chain site of parity sector p."""
    _check_parity(p)
    return p * (1 - 2 * (np.arange(n_max + 1) % 2))


def sector_indices(n_max, p):
    """Positions of the chain sites of sector p inside a dense state vector."""
    spins = sector_spins(n_max, p)
    return 2 * np.arange(n_max + 1) + (spins > 0)


def parity_sector_hamiltonian(params, p):
    """Tridiagonal block of H on the parity-p chain.

    Diagonal ``n + (eps p / 2)(-1)^n``, off-diagonal ``f sqrt(n+1)``.
    """
    _check_parity(p)
    n = np.arange(params.n_max + 1, dtype=float)
    diag = n + 0.5 * params.epsilon * sector_spins(params.n_max, p)
    offdiag = params.f * np.sqrt(n[:-1] + 1.0)
    return Tridiagonal(diag, offdiag)


def tridiag_eigensolve(matrix, vectors=True, max_iter=50):
    """Eigen-decomposition of a symmetric tridiagonal matrix.

    Implicit-shift QL with Wilkinson shifts.

    Parameters
    ----------
    matrix : Tridiagonal or tuple of (diag, offdiag)
    vectors : bool
        Also return eigenvectors (as columns).
    max_iter : int
        Iteration cap per eigenvalue.

    Returns
    -------
    w : ndarray
        Eigenvalues in ascending order.
    v : ndarray or None
        Orthonormal eigenvectors, ``v[:, i]`` belonging to ``w[i]``.
    """
    if isinstance(matrix, Tridiagonal):
        diag, offdiag = matrix.diag, matrix.offdiag
    else:
        diag, offdiag = matrix
    diag = np.ascontiguousarray(diag, dtype=float)
    offdiag = np.ascontiguousarray(offdiag, dtype=float)
    n = diag.shape[0]
    if n < 1 or offdiag.shape[0] != n - 1:
        raise DomainError(f"need diag of size n >= 1 and offdiag of size n-1, got {n}, {offdiag.shape[0]}")
    w, z, status = kernels.tridiag_ql(diag, offdiag, vectors, max_iter)
    if status >= 0:
        raise ConvergenceError(
            f"QL iteration did not converge for eigenvalue {status} of {n} after {max_iter} sweeps",
            index=status, iterations=max_iter)
    order = np.argsort(w, kind="stable")
    w = w[order]
    if not vectors:
        return w, None
    v = np.ascontiguousarray(z[order].T)
    # deterministic sign: largest-magnitude component positive
    pivots = v[np.argmax(np.abs(v), axis=0), np.arange(n)]
    v *= np.where(pivots < 0, -1.0, 1.0)
    return w, v


@lru_cache(maxsize=16)
def _sector_eigensystem(epsilon, f, n_max, p, vectors):
    params = ModelParams(epsilon, f, n_max)
    w, v = tridiag_eigensolve(parity_sector_hamiltonian(params, p), vectors=vectors)
    w.setflags(write=False)
    if v is not None:
        v.setflags(write=False)
    return w, v


def sector_eigensystem(params, p, vectors=True):
    """Cached eigen-decomposition of one parity block (read-only arrays)."""
    _check_parity(p)
    return _sector_eigensystem(params.epsilon, params.f, params.n_max, p, bool(vectors))


def embed_sector_vector(vec, n_max, p):
    """Place a chain vector of sector p into the dense product basis."""
    out = np.zeros(2 * (n_max + 1), dtype=complex)
    out[sector_indices(n_max, p)] = vec
    return QuantumState(out, n_max)


def _order_levels(levels):
    levels.sort(key=lambda lv: (round(lv.energy, 9), -lv.p))
    return levels


def exact_spectrum(params, count, vectors=False, check_convergence=True):
    """Lowest ``count`` exact levels in each parity sector.

    Raises
    ------
    TruncationError
        If ``count > n_max/2`` or doubling n_max moves any reported level by
        more than 1e-8.
    """
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    if count > params.n_max // 2:
        raise TruncationError(f"count={count} exceeds n_max/2={params.n_max // 2}")
    levels = []
    worst = 0.0
    for p in (1, -1):
        w, v = sector_eigensystem(params, p, vectors)
        if check_convergence:
            w2, _ = sector_eigensystem(params.with_n_max(2 * params.n_max), p, False)
            shift = float(np.max(np.abs(w2[:count] - w[:count])))
            worst = max(worst, shift)
            if shift > CONVERGENCE_TOL:
                raise TruncationError(
                    f"parity {p:+d}: lowest {count} levels move by {shift:.3e} when n_max doubles "
                    f"from {params.n_max}")
        for i in range(count):
            vec = embed_sector_vector(v[:, i], params.n_max, p) if vectors else None
            levels.append(Level(i, p, float(w[i]), vec))
    meta = {"method": "exact", "n_max": params.n_max}
    if check_convergence:
        meta["max_doubling_shift"] = worst
    return SpectrumResult(_order_levels(levels), meta)


def rwa_spectrum(params, count, vectors=False):
    """Jaynes-Cummings (rotating-wave) spectrum.

    The ground level -eps/2 is |down, 0>; doublet n mixes |up, n> and
    |down, n+1> with energies n + 1/2 +- sqrt(detuning^2/4 + f^2 (n+1)).
    Both members of doublet n have combined parity (-1)^n.
    """
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    eps, f = params.epsilon, params.f
    detuning = eps - 1.0
    raw = [(-1, 0, -0.5 * eps, None)]
    n = 0
    per_sector = {1: 0, -1: 1}
    while min(per_sector.values()) < count:
        p = 1 if n % 2 == 0 else -1
        half = math.sqrt(0.25 * detuning * detuning + f * f * (n + 1))
        for sign in (-1, 1):
            raw.append((p, n, n + 0.5 + sign * half, sign))
        per_sector[p] += 2
        n += 1
    levels = []
    for p in (1, -1):
        members = sorted((r for r in raw if r[0] == p), key=lambda r: r[2])[:count]
        for i, (pp, doublet, energy, sign) in enumerate(members):
            vec = _rwa_vector(params, doublet, sign) if vectors and energy is not None else None
            label = ("ground",) if sign is None else (doublet, "+" if sign > 0 else "-")
            levels.append(Level(i, p, float(energy), vec, label))
    return SpectrumResult(_order_levels(levels), {"method": "rwa"})


def _rwa_vector(params, doublet, sign):
    amps = np.zeros(params.dim, dtype=complex)
    if sign is None:
        amps[0] = 1.0
        return QuantumState(amps, params.n_max)
    if doublet + 1 > params.n_max:
        raise TruncationError(f"doublet {doublet} needs n_max >= {doublet + 1}")
    # 2x2 block in basis (|up, n>, |down, n+1>)
    h = np.array([[doublet + 0.5 * params.epsilon, params.f * math.sqrt(doublet + 1)],
                  [params.f * math.sqrt(doublet + 1), doublet + 1 - 0.5 * params.epsilon]])
    w, v = np.linalg.eigh(h)
    col = v[:, 0 if sign < 0 else 1]
    amps[2 * doublet + 1] = col[0]
    amps[2 * (doublet + 1)] = col[1]
    return QuantumState(amps, params.n_max)


def dense_hamiltonian(params):
    """Full 2(n_max+1) square Hamiltonian in the product basis."""
    n_max = params.n_max
    fock = np.arange(n_max + 1, dtype=float)
    lower = np.diag(np.sqrt(fock[1:]), 1)  # a
    sigma1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    sigma3 = np.diag([-1.0, 1.0])
    h = np.kron(np.diag(fock), np.eye(2))
    h += 0.5 * params.epsilon * np.kron(np.eye(n_max + 1), sigma3)
    h += params.f * np.kron(lower + lower.T, sigma1)
    return h


def apply_hamiltonian(params, amplitudes):
    """H applied to a dense amplitude vector without forming the matrix."""
    amps = np.asarray(amplitudes)
    n_max = params.n_max
    fock = np.repeat(np.arange(n_max + 1, dtype=float), 2)
    spin = np.tile([-1.0, 1.0], n_max + 1)
    out = (fock + 0.5 * params.epsilon * spin) * amps
    # sigma_1 (a + a^+): (n, s) <-> (n+1, 1-s) with weight f sqrt(n+1)
    lo = amps.reshape(n_max + 1, 2)
    res = out.reshape(n_max + 1, 2)
    coupling = params.f * np.sqrt(np.arange(1, n_max + 1, dtype=float))[:, None]
    res[1:] += coupling * lo[:-1, ::-1]
    res[:-1] += coupling * lo[1:, ::-1]
    return out


def parity_operator_diagonal(n_max):
    """Diagonal of P = sigma_3 exp(i pi a^+ a) in the product basis."""
    fock_sign = 1 - 2 * (np.arange(n_max + 1) % 2)
    return np.kron(fock_sign, np.array([-1.0, 1.0]))


def parity_check(params):
    """Frobenius norm of [H, P] in the dense truncated basis."""
    h = dense_hamiltonian(params)
    pdiag = parity_operator_diagonal(params.n_max)
    commutator = h * pdiag[None, :] - pdiag[:, None] * h
    return float(np.linalg.norm(commutator))


def parity_expectation(state):
    """<psi|P|psi> for a normalized dense state."""
    pdiag = parity_operator_diagonal(state.n_max)
    return float(np.real(np.vdot(state.amplitudes, pdiag * state.amplitudes)))
