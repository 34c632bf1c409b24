"""Uniformly available approximation (UAA) to the Rabi spectrum.

Each eigenpair is built from a 2x2 block in the displaced Fock basis
|n, f> = D(-f)|n>, which diagonalizes the field part when the atomic
term is dropped. The spin factor uses the sigma_1 eigenstates
chi_(+-) = (up +- down)/sqrt(2), so that

    |psi_n^r> = phi chi_+ + (-1)^n S phi chi_-,
    phi = A_n^r |n, f> + B_n^r |n+1, f>,

with S = exp(i pi a^+ a) the photon-number parity. Both branches r = +-
of pair n carry combined parity (-1)^n. In this frame the parity matrix

    S_nm(u) = <n, u| S |m, u> = (-1)^m <n| D(2u) |m>

is real and symmetric, and the UAA energy is the Rayleigh-Ritz value of
H in the two-state block.

The lowest level of the odd-parity chain has no partner; it is returned
by :func:`uaa_ground` with the label ``n = -1``.
"""
import math
import threading
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError, TruncationError
from .rabi import Level, QuantumState, SpectrumResult, _order_levels, apply_hamiltonian
from .specfun import log_factorial

INV_SQRT2 = 1.0 / math.sqrt(2.0)
LEAKAGE_TOL = 1e-8
_DEGENERATE = 1e-300


@dataclass(frozen=True)
class UaaEigenpair:
    """Closed-form approximate eigenpair.

    Attributes
    ----------
    n : int
        Pair index; -1 marks the unpaired ground level.
    branch : int
        +1 or -1.
    energy : float
    lam : float
        Mixing ratio, B = -lam * A. Infinite when the pair is pure |n+1, f>.
    a_coef, b_coef : float
        Weights of |n, f> and |n+1, f>, with a^2 + b^2 = 1/2.
    """

    n: int
    branch: int
    energy: float
    lam: float
    a_coef: float
    b_coef: float

    @property
    def parity(self):
        return -1 if self.n < 0 else (1 if self.n % 2 == 0 else -1)


def _check_nm(n, m, u):
    if n < 0 or m < 0 or n > 10**5 or m > 10**5:
        raise DomainError(f"indices must lie in [0, 1e5], got ({n}, {m})")
    if not (math.isfinite(u) and u >= 0):
        raise DomainError(f"u must be finite and >= 0, got {u}")


def s_element(n, m, u):
    """Parity matrix element S_nm(u) in the displaced Fock basis.

    For n >= m this is

        (-1)^m exp(-2u^2) sqrt(m!/n!) (2u)^(n-m) L_m^(n-m)(4u^2),

    extended symmetrically. The product is accumulated by the normalized
    Laguerre recurrence along the diagonal n - m = const, with the
    prefactor and any rescaling carried as a separate logarithm, so
    neither the factorials nor the polynomial ever overflow.
    """
    n, m, u = int(n), int(m), float(u)
    _check_nm(n, m, u)
    if n < m:
        n, m = m, n
    k = n - m
    sign = -1.0 if m % 2 else 1.0
    if u == 0.0:
        return sign if k == 0 else 0.0
    x = 4.0 * u * u
    # log of the m = 0 entry: (2u)^k exp(-x/2) / sqrt(k!)
    log0 = k * math.log(2.0 * u) - 0.5 * log_factorial(k) - 0.5 * x
    g_prev, g_cur = 1.0, 0.0
    if m == 0:
        return sign * math.exp(log0)
    g_cur = (1.0 + k - x) / math.sqrt(1.0 + k)
    log_scale = 0.0
    for j in range(1, m):
        g_next = ((2.0 * j + k + 1.0 - x) * g_cur - math.sqrt(j * (j + k)) * g_prev) \
            / math.sqrt((j + 1.0) * (j + 1.0 + k))
        g_prev, g_cur = g_cur, g_next
        big = abs(g_cur)
        if big > 1e200 or (0.0 < big < 1e-200):
            shift = math.log(big)
            g_prev /= big
            g_cur /= big
            log_scale += shift
    if g_cur == 0.0:
        return 0.0
    total = log0 + log_scale + math.log(abs(g_cur))
    return sign * math.copysign(math.exp(total), g_cur) if total > -745.0 else 0.0


class SMatrixTable:
    """Memoized dense block of S_nm(u) for 0 <= n, m < size.

    The block grows by doubling on demand. Reads are lock-free once the
    requested size is present; growth is serialized and replaces the
    stored array atomically, so concurrent readers always see a complete
    table.
    """

    def __init__(self, u, size=64):
        u = float(u)
        if not (math.isfinite(u) and u >= 0):
            raise DomainError(f"u must be finite and >= 0, got {u}")
        self.u = u
        self._lock = threading.Lock()
        self._table = self._build(max(int(size), 2))

    def _build(self, size):
        d = kernels.displacement_matrix(2.0 * self.u, size)
        d[:, 1::2] *= -1.0
        d.setflags(write=False)
        return d

    @property
    def size(self):
        return self._table.shape[0]

    def block(self, size):
        """Read-only array of S_nm for n, m < size."""
        table = self._table
        if size > table.shape[0]:
            with self._lock:
                table = self._table
                if size > table.shape[0]:
                    new = max(size, 2 * table.shape[0])
                    table = self._build(new)
                    self._table = table
        return table[:size, :size]

    def entry(self, n, m):
        return float(self.block(max(n, m) + 1)[n, m])


_TABLES = {}
_TABLES_LOCK = threading.Lock()


def s_table(u, size=64):
    """Shared :class:`SMatrixTable` for displacement ``u``, grown to ``size``."""
    key = float(u)
    table = _TABLES.get(key)
    if table is None:
        with _TABLES_LOCK:
            table = _TABLES.get(key)
            if table is None:
                if len(_TABLES) > 64:
                    _TABLES.clear()
                table = SMatrixTable(key, size)
                _TABLES[key] = table
    table.block(size)
    return table


def _pair_block(n, params, table=None):
    """Entries (H11, H22, H12) of H in the frame of pair n."""
    eps, f = params.epsilon, params.f
    s = (table or s_table(f, n + 2)).block(n + 2)
    half = 0.5 * eps * (1.0 if n % 2 == 0 else -1.0)
    h11 = n - f * f + half * float(s[n, n])
    h22 = n + 1 - f * f + half * float(s[n + 1, n + 1])
    h12 = half * float(s[n + 1, n])
    return h11, h22, h12


def _check_pair(n, branch):
    if int(n) != n or n < 0:
        raise DomainError(f"pair index must be a nonnegative integer, got {n}")
    if branch not in (1, -1):
        raise DomainError(f"branch must be +1 or -1, got {branch}")


def _branch_energy(h11, h22, h12, branch):
    mean = 0.5 * (h11 + h22)
    rad = 0.5 * math.hypot(h22 - h11, 2.0 * h12)
    return mean + branch * rad


def uaa_energy(n, branch, params, table=None):
    """UAA eigenvalue E_n^(branch)."""
    _check_pair(n, branch)
    return _branch_energy(*_pair_block(int(n), params, table), branch)


def uaa_coefficients(n, branch, params, table=None):
    """Energy and mixing coefficients of pair n on the given branch.

    The eigenvector of the 2x2 block is taken from whichever row is
    better conditioned. When the block is already diagonal (f = 0,
    eps = 0, or a Laguerre zero) the lower branch is assigned the state
    with the lower diagonal entry.
    """
    _check_pair(n, branch)
    n = int(n)
    h11, h22, h12 = _pair_block(n, params, table)
    energy = _branch_energy(h11, h22, h12, branch)
    row1 = (h12, -(h11 - energy))
    row2 = (h22 - energy, -h12)
    a, b = max(row1, row2, key=lambda r: math.hypot(*r))
    scale = math.hypot(a, b)
    if scale < _DEGENERATE or abs(h12) < _DEGENERATE:
        lower_is_a = h11 <= h22
        take_a = lower_is_a if branch < 0 else not lower_is_a
        a, b = (1.0, 0.0) if take_a else (0.0, 1.0)
        scale = 1.0
    a, b = a / scale, b / scale
    if a < 0 or (a == 0 and b < 0):
        a, b = -a, -b
    lam = -b / a if a != 0 else math.inf
    return UaaEigenpair(n, branch, energy, lam, a * INV_SQRT2, b * INV_SQRT2)


def uaa_ground(params, table=None):
    """Unpaired lowest level of the odd-parity chain.

    It is the n = -1 member of the pair family with A = 0 and
    B = 1/sqrt(2), so its frame holds |0, f> alone and
    E = -f^2 - (eps/2) exp(-2 f^2).
    """
    f = params.f
    s00 = (table or s_table(f, 2)).entry(0, 0)
    energy = -f * f - 0.5 * params.epsilon * s00
    return UaaEigenpair(-1, -1, energy, math.inf, 0.0, INV_SQRT2)


def uaa_pairs(params, n_top, n_bottom=0):
    """All eigenpairs with n_bottom <= n <= n_top, plus the ground level if n_bottom == 0."""
    table = s_table(params.f, n_top + 2)
    out = [uaa_ground(params, table)] if n_bottom == 0 else []
    for n in range(n_bottom, n_top + 1):
        for branch in (-1, 1):
            out.append(uaa_coefficients(n, branch, params, table))
    return out


def uaa_levels(params, count, vectors=False):
    """Lowest ``count`` UAA levels per parity sector, sorted like ``exact_spectrum``.

    Each :class:`~rabi_lab.rabi.Level` carries ``label = (n, branch)``.
    """
    count = int(count)
    if count < 1:
        raise DomainError(f"count must be positive, got {count}")
    pairs = uaa_pairs(params, 2 * count + 4)
    levels = []
    for p in (1, -1):
        chosen = sorted((q for q in pairs if q.parity == p), key=lambda q: q.energy)[:count]
        for i, pair in enumerate(chosen):
            vec = uaa_state_vector(pair, params) if vectors else None
            levels.append(Level(i, p, pair.energy, vec, (pair.n, pair.branch)))
    meta = {"method": "uaa", "spin_basis": "sigma_1", "branch_parity": "(-1)^n for both branches"}
    return SpectrumResult(_order_levels(levels), meta)


def displaced_fock_columns(f, n_max, columns):
    """Fock amplitudes of |n, f> = D(-f)|n> for each n in ``columns``.

    Returns an array of shape (n_max + 1, len(columns)) and the squared norm
    lost to truncation for each column.
    """
    top = max(columns) + 1
    size = max(n_max + 1, top)
    d = kernels.displacement_matrix(-float(f), size)
    cols = d[: n_max + 1, list(columns)]
    lost = 1.0 - np.sum(cols * cols, axis=0)
    return cols, np.maximum(lost, 0.0)


def uaa_frame_vectors(pairs, n_max, f):
    """Fock-basis representation of phi = A|n,f> + B|n+1,f> for each pair.

    Returns ``phi`` of shape (len(pairs), n_max + 1) and the truncation
    leakage (relative lost norm) per pair.
    """
    top = max(p.n for p in pairs) + 2
    d = kernels.displacement_matrix(-float(f), max(n_max + 1, top + 1))[: n_max + 1]
    phi = np.zeros((len(pairs), n_max + 1))
    for i, q in enumerate(pairs):
        if q.n >= 0:
            phi[i] += q.a_coef * d[:, q.n]
        phi[i] += q.b_coef * d[:, q.n + 1]
    leak = 1.0 - 2.0 * np.sum(phi * phi, axis=1)
    return phi, np.maximum(leak, 0.0)


def uaa_state_vector(pair, params):
    """Materialize an eigenpair in the Fock (x) spin basis.

    Raises
    ------
    TruncationError
        If more than 1e-8 of the norm falls beyond n_max.
    """
    phi, leak = uaa_frame_vectors([pair], params.n_max, params.f)
    if leak[0] > LEAKAGE_TOL:
        raise TruncationError(
            f"UAA state n={pair.n} loses {leak[0]:.2e} of its norm at n_max={params.n_max}")
    phi = phi[0]
    sign = -1.0 if pair.parity < 0 else 1.0
    fock_parity = 1.0 - 2.0 * (np.arange(params.n_max + 1) % 2)
    minus = sign * fock_parity * phi
    amps = np.empty(params.dim, dtype=complex)
    amps[1::2] = (phi + minus) * INV_SQRT2
    amps[0::2] = (phi - minus) * INV_SQRT2
    return QuantumState(amps, params.n_max).normalized()


def uaa_residual(pair, params):
    """Norm of (H - E)|psi_uaa> in the truncated dense basis."""
    state = uaa_state_vector(pair, params)
    r = apply_hamiltonian(params, state.amplitudes) - pair.energy * state.amplitudes
    return float(np.linalg.norm(r))
