"""Population-difference dynamics W(t) = <sigma_3> from a coherent field.

The initial state is |down> (x) |alpha> with real alpha >= 0. Four engines
are provided:

``exact``
    Projection on the eigenbasis of both parity blocks, propagated by
    phases.
``uaa``
    Expansion over the closed-form eigenpairs of :mod:`rabi_lab.uaa`.
``rwa``
    Jaynes-Cummings Rabi oscillations weighted by the photon distribution.
``asymptotic``
    Strong-field closed form -cos(4 f alpha sin t).
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, TruncationError, WindowError
from .rabi import (ModelParams, QuantumState, default_n_max, sector_eigensystem,
                   sector_spins)
from .specfun import bessel_j_signed, bessel_sequence
from .uaa import s_table, uaa_pairs

COHERENT_LEAKAGE_TOL = 1e-10
COMPLETENESS_TOL = 1e-8
WINDOW_MASS_TOL = 1e-6
GAMMA_TAIL_TOL = 1e-10
UAA_BOUND = 1.05
METHODS = ("exact", "uaa", "rwa", "asymptotic")


@dataclass(frozen=True)
class CoherentInit:
    """Coherent field amplitude and Fock truncation.

    ``n_max`` defaults to ceil(alpha^2 + 12 alpha + 40).
    """

    alpha: float
    n_max: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha}")
        if self.n_max is None:
            a = self.alpha
            object.__setattr__(self, "n_max", int(math.ceil(a * a + 12 * a + 40)))
        elif int(self.n_max) != self.n_max or self.n_max < 4:
            raise DomainError(f"n_max must be an integer >= 4, got {self.n_max}")
        object.__setattr__(self, "n_max", int(self.n_max))

    @property
    def nbar(self):
        return self.alpha * self.alpha

    @classmethod
    def from_nbar(cls, nbar, n_max=None):
        if nbar < 0:
            raise DomainError(f"nbar must be >= 0, got {nbar}")
        return cls(math.sqrt(nbar), n_max)


def setup(epsilon, f, nbar, n_max=None):
    """Matching (ModelParams, CoherentInit) with the default truncation rule."""
    if n_max is None:
        n_max = default_n_max(nbar, f)
    return ModelParams(epsilon, f, n_max), CoherentInit.from_nbar(nbar, n_max)


@dataclass
class TimeSeries:
    """Sampled W(t) from one engine.

    ``tau`` = f t is the scaled time used for plotting.
    """

    times: np.ndarray
    values: np.ndarray
    method: str
    f: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def tau(self):
        return self.f * self.times


@dataclass
class EvolutionTerms:
    """Expansion of the coherent initial state over UAA eigenpairs.

    Arrays run over the eigenpairs inside the summation window, labelled by
    ``labels[i] = (n, r)``. ``gamma`` is stored multiplied by
    exp(-(alpha + f)^2 / 2) so that it stays finite for large alpha.
    ``gram[i, j]`` is <phi_i| S |phi_j> in the displaced frame.
    """

    labels: list
    energies: np.ndarray
    c: np.ndarray
    gamma: np.ndarray
    a_coef: np.ndarray
    b_coef: np.ndarray
    signs: np.ndarray
    gram: np.ndarray
    window: tuple
    m_max: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def c_coeffs(self):
        return dict(zip(self.labels, self.c))

    @property
    def gamma_coeffs(self):
        return dict(zip(self.labels, self.gamma))

    def index(self, n, r):
        return self.labels.index((n, r))

    def d_coefficient(self, k, n, r, q):
        """Weight D^{rq}_{kn} of the phase exp(-i (E_n^r - E_k^q) t) in W(t) / 2."""
        i, j = self.index(n, r), self.index(k, q)
        return self.signs[i] * self.c[i] * np.conj(self.c[j]) * self.gram[j, i]

    def omega(self, k, n, r, q):
        """Frequency E_k^r - E_n^q."""
        return self.energies[self.index(k, r)] - self.energies[self.index(n, q)]


def _check_times(times):
    t = np.asarray(times, dtype=float).ravel()
    if t.size == 0 or not np.all(np.isfinite(t)):
        raise DomainError("times must be a nonempty sequence of finite values")
    return t


def _check_consistent(params, init):
    if params.n_max != init.n_max:
        raise DomainError(f"n_max mismatch: model {params.n_max}, initial state {init.n_max}")


def coherent_amplitudes(alpha, size):
    """Poisson amplitudes exp(-alpha^2/2) alpha^k / sqrt(k!) for k < size."""
    k = np.arange(size, dtype=float)
    if alpha == 0:
        out = np.zeros(size)
        out[0] = 1.0
        return out
    lg = np.array([math.lgamma(j + 1.0) for j in range(size)])
    with np.errstate(under="ignore"):
        return np.exp(k * math.log(alpha) - 0.5 * lg - 0.5 * alpha * alpha)


def coherent_state_vector(init):
    """|down> (x) |alpha>, renormalized after truncation.

    Raises
    ------
    TruncationError
        If the discarded Poisson tail exceeds 1e-10.
    """
    amp = coherent_amplitudes(init.alpha, init.n_max + 1)
    kept = math.fsum(amp * amp)
    if 1.0 - kept > COHERENT_LEAKAGE_TOL:
        raise TruncationError(
            f"coherent state alpha={init.alpha} loses {1.0 - kept:.2e} beyond n_max={init.n_max}")
    vec = np.zeros(2 * (init.n_max + 1), dtype=complex)
    vec[0::2] = amp / math.sqrt(kept)
    return QuantumState(vec, init.n_max)


def population_difference(state):
    """<sigma_3> = sum_n |psi(n, up)|^2 - |psi(n, down)|^2."""
    a = state.amplitudes
    return float(np.sum(np.abs(a[1::2]) ** 2) - np.sum(np.abs(a[0::2]) ** 2))


def _chunks(n_times, dim, budget=4_000_000):
    step = max(1, budget // max(dim, 1))
    for start in range(0, n_times, step):
        yield slice(start, min(start + step, n_times))


def evolve_exact(params, init, times):
    """W(t) from the exact eigenbasis of both parity blocks.

    Each block is diagonalized once; the state at every time is rebuilt
    from phases, so the evolution is unitary to rounding.
    """
    _check_consistent(params, init)
    t = _check_times(times)
    psi0 = coherent_state_vector(init).amplitudes
    w = np.zeros(t.size)
    norm = np.zeros(t.size)
    captured = 0.0
    for p in (1, -1):
        energies, vecs = sector_eigensystem(params, p, vectors=True)
        spins = sector_spins(params.n_max, p)
        start = psi0[0::2].real * (spins < 0)  # initial spin is down
        proj = vecs.T @ start
        captured += float(np.dot(proj, proj))
        for sl in _chunks(t.size, params.n_max + 1):
            phases = np.exp(-1j * np.outer(energies, t[sl])) * proj[:, None]
            psi_t = vecs @ phases
            prob = psi_t.real ** 2 + psi_t.imag ** 2
            w[sl] += spins @ prob
            norm[sl] += prob.sum(axis=0)
    if abs(1.0 - captured) > COMPLETENESS_TOL:
        raise TruncationError(f"eigenbasis projection captures {captured:.12f} of the initial state")
    diag = {
        "n_max": params.n_max,
        "completeness": captured,
        "norm_drift": float(np.max(np.abs(norm - 1.0))),
        "max_abs_w": float(np.max(np.abs(w))),
    }
    return TimeSeries(t, w, "exact", params.f, diag)


def _rwa_flop(detuning, f, photons, t, sign):
    """Rabi flop of a single JC doublet; ``photons`` sets the coupling f sqrt(photons)."""
    coupling = 4.0 * f * f * photons
    omega2 = detuning * detuning + coupling
    out = np.full((photons.size, t.size), sign, dtype=float)
    live = omega2 > 0
    om = np.sqrt(omega2[live])
    frac = (coupling[live] / omega2[live])[:, None]
    out[live] = sign * (1.0 - frac + frac * np.cos(np.outer(om, t)))
    return out


def evolve_rwa(params, init, times, fock=None, spin="down"):
    """W(t) in the rotating-wave (Jaynes-Cummings) model.

    From |down, n> the atom flops with |up, n-1> at sqrt(D^2 + 4 f^2 n),
    D = eps - 1; from |up, n> it flops with |down, n+1> at
    sqrt(D^2 + 4 f^2 (n+1)).

    Parameters
    ----------
    fock : int, optional
        Replace the coherent field by the number state |fock> (diagnostic).
    spin : {"down", "up"}
        Initial spin for the diagnostic Fock mode. The coherent mode
        always starts in "down".
    """
    t = _check_times(times)
    detuning = params.epsilon - 1.0
    if fock is not None:
        if spin not in ("down", "up"):
            raise DomainError(f"spin must be 'down' or 'up', got {spin!r}")
        fock = int(fock)
        if fock < 0:
            raise DomainError(f"Fock index must be >= 0, got {fock}")
        photons = np.array([fock + (spin == "up")], dtype=float)
        sign = 1.0 if spin == "up" else -1.0
        w = _rwa_flop(detuning, params.f, photons, t, sign)[0]
        return TimeSeries(t, w, "rwa", params.f, {"fock": fock, "spin": spin})
    _check_consistent(params, init)
    weights = coherent_amplitudes(init.alpha, init.n_max + 1) ** 2
    weights /= weights.sum()
    photons = np.arange(init.n_max + 1, dtype=float)
    w = np.zeros(t.size)
    step = max(1, 4_000_000 // t.size)
    for start in range(0, photons.size, step):
        sl = slice(start, start + step)
        w += weights[sl] @ _rwa_flop(detuning, params.f, photons[sl], t, -1.0)
    return TimeSeries(t, w, "rwa", params.f, {"max_abs_w": float(np.max(np.abs(w)))})


def uaa_window(nbar, width=None):
    """Pair-index window [lo, hi] around nbar, half-width ceil(10 sqrt(nbar) + 20)."""
    if width is None:
        width = int(math.ceil(10.0 * math.sqrt(nbar) + 20.0))
    return max(0, int(math.floor(nbar - width))), int(math.ceil(nbar + width))


def _tail_m_max(beta, floor):
    """Smallest m >= floor with Poisson(beta^2) amplitude tail below the bound."""
    size = int(beta * beta + 40.0 * beta + 200) + floor
    amp = coherent_amplitudes(beta, size)
    tail = np.sqrt(np.cumsum((amp * amp)[::-1])[::-1])
    ok = np.nonzero(tail < GAMMA_TAIL_TOL)[0]
    return max(floor, int(ok[0]))


def uaa_expansion_coefficients(params, init, m_max=None, width=None, debug=False):
    """Project the initial state on the UAA eigenpairs of the window.

    C_nr = (phi_nr . w - (-1)^n phi_nr . S w) / sqrt(2), where w are the
    Poisson amplitudes of |alpha + f> and phi_nr the displaced-frame
    coefficients (A at n, B at n + 1).

    Parameters
    ----------
    m_max : int, optional
        Upper photon index of the gamma sums. By Cauchy-Schwarz the
        neglected part of each sum is bounded by the Poisson amplitude tail,
        which must stay below 1e-10.
    width : int, optional
        Window half-width, default ceil(10 sqrt(nbar) + 20).
    debug : bool
        Also compute the simplified coefficients, xi_n and the four-index
        weights of the strong-field reduction.

    Raises
    ------
    TruncationError
        If the given m_max leaves a tail above 1e-10.
    WindowError
        If more than 1e-6 of the initial state falls outside the window.
    """
    alpha, f = init.alpha, params.f
    beta = alpha + f
    lo, hi = uaa_window(init.nbar, width)
    needed = _tail_m_max(beta, hi + 2)
    if m_max is None:
        m_max = needed
    elif m_max < needed:
        amp = coherent_amplitudes(beta, needed + 1)
        tail = math.sqrt(math.fsum(amp[m_max + 1:] ** 2))
        raise TruncationError(f"m_max={m_max} leaves a gamma tail of {tail:.2e} (need m_max >= {needed})")
    size = m_max + 1
    s = s_table(f, size).block(size)
    wts = coherent_amplitudes(beta, size)
    pairs = uaa_pairs(params, hi, lo)
    idx_a = np.array([max(q.n, 0) for q in pairs])
    idx_b = np.array([q.n + 1 for q in pairs])
    a = np.array([q.a_coef for q in pairs])
    b = np.array([q.b_coef for q in pairs])
    signs = np.array([float(q.parity) for q in pairs])
    energies = np.array([q.energy for q in pairs])
    sw = s @ wts
    gamma = a * sw[idx_a] + b * sw[idx_b]
    direct = a * wts[idx_a] + b * wts[idx_b]
    c = (direct - signs * gamma) / math.sqrt(2.0)
    gram = (a[:, None] * a[None, :] * s[np.ix_(idx_a, idx_a)]
            + a[:, None] * b[None, :] * s[np.ix_(idx_a, idx_b)]
            + b[:, None] * a[None, :] * s[np.ix_(idx_b, idx_a)]
            + b[:, None] * b[None, :] * s[np.ix_(idx_b, idx_b)])
    captured = float(np.dot(c, c))
    missing = 1.0 - captured
    if missing > WINDOW_MASS_TOL:
        raise WindowError(f"window n in [{lo}, {hi}] misses {missing:.2e} of the initial state")
    diag = {"captured": captured, "missing_mass": missing, "pairs": len(pairs)}
    labels = [(q.n, q.branch) for q in pairs]
    terms = EvolutionTerms(labels, energies, c, gamma, a, b, signs, gram, (lo, hi), m_max, diag)
    if debug:
        terms.diagnostics.update(strong_field_terms(params, init, terms))
    return terms


def strong_field_terms(params, init, terms):
    """Intermediates of the strong-field reduction, evaluated as written.

    Returns the simplified gamma and C (using the sum rule for S), the
    weights xi_n multiplied by exp(-(alpha + f)^2), and the four-index
    weights D~[r, q][n, k] built from A and B frozen at n0 = round(alpha^2).
    The D~ products are transcribed literally, including their unequal
    branch pairings; they feed no production engine.
    """
    beta = init.alpha + params.f
    lo, hi = terms.window
    ns = np.arange(lo, hi + 1)
    lg = np.array([math.lgamma(n + 1.0) for n in range(hi + 3)])
    logb = math.log(beta) if beta > 0 else -np.inf
    pw = np.exp(np.arange(hi + 3) * logb - 0.5 * lg - 0.5 * beta * beta)
    out = {"gamma_simplified": {}, "c_simplified": {}}
    for (n, r), a, b in zip(terms.labels, terms.a_coef, terms.b_coef):
        if n < 0:
            continue
        sign = -1.0 if n % 2 else 1.0
        out["gamma_simplified"][(n, r)] = sign * (a * pw[n] - b * pw[n + 1])
        out["c_simplified"][(n, r)] = math.sqrt(2.0) * pw[n + 1] * b
    with np.errstate(under="ignore"):
        xi = np.exp(2.0 * (ns + 1) * logb - np.array([math.lgamma(n + 2.0) for n in ns]) - beta * beta)
    out["xi_scaled"] = np.where(ns % 2, -xi, xi)
    n0 = int(round(init.nbar))
    n0 = min(max(n0, lo), hi - 1)
    coef = {(q.n, q.branch): q for q in uaa_pairs(params, n0 + 1, n0)}
    size = hi + 3
    s = s_table(params.f, size).block(size)
    sub = ns
    d_tilde = {}
    for r in (1, -1):
        for q in (1, -1):
            ar, br = coef[(n0, r)].a_coef, coef[(n0, r)].b_coef
            aq, bq = coef[(n0, q)].a_coef, coef[(n0, q)].b_coef
            aq1, bq1 = coef[(n0 + 1, q)].a_coef, coef[(n0 + 1, q)].b_coef
            d_tilde[(r, q)] = (aq * ar * bq * br * s[np.ix_(sub, sub)]
                               + aq * br * br * bq1 * s[np.ix_(sub + 1, sub)]
                               + ar * bq * br * bq * s[np.ix_(sub, sub + 1)]
                               + br * br * aq1 * bq1 * s[np.ix_(sub + 1, sub + 1)])
    out["d_tilde"] = d_tilde
    out["n0"] = n0
    return out


def evolve_uaa(params, init, times, terms=None):
    """W(t) = 2 Re sum D^{rq}_{kn} exp(-i (E_n^r - E_k^q) t) over the UAA window.

    Values with |W| > 1.05 are counted in ``diagnostics['out_of_bounds']``
    and left as computed.
    """
    _check_consistent(params, init)
    t = _check_times(times)
    if terms is None:
        terms = uaa_expansion_coefficients(params, init)
    w = np.zeros(t.size)
    gs = terms.gram * terms.signs[None, :]
    for sl in _chunks(t.size, len(terms.c)):
        ct = terms.c[:, None] * np.exp(-1j * np.outer(terms.energies, t[sl]))
        w[sl] = 2.0 * np.real(np.sum(np.conj(ct) * (gs @ ct), axis=0))
    diag = dict(terms.diagnostics)
    diag.pop("d_tilde", None)
    diag.update({"window": terms.window, "m_max": terms.m_max,
                 "out_of_bounds": int(np.sum(np.abs(w) > UAA_BOUND)),
                 "w0": float(w[0]) if t[0] == 0 else None})
    return TimeSeries(t, w, "uaa", params.f, diag)


def beta_freq(n, params):
    """Strong-field splitting beta_n of the pair-n doublet.

    sqrt([1 - eps e^{-2f^2} J0(z)]^2 + eps^2 e^{-4f^2} J1(z)^2), z = 4 f sqrt(n).
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    eps, f = params.epsilon, params.f
    j = bessel_sequence(1, 4.0 * f * math.sqrt(n))
    damp = math.exp(-2.0 * f * f)
    return math.hypot(1.0 - eps * damp * j[0], eps * damp * j[1])


def s_asymptotic(n, k, f):
    """Bessel form (-1)^n e^{-2f^2} e^{-k^2/(4n)} J_k(4 f sqrt(n)) of S_{n+k, n}(f).

    Intended for n of order 50 and above.
    """
    n, k, f = int(n), int(k), float(f)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if not (math.isfinite(f) and f >= 0):
        raise DomainError(f"f must be finite and >= 0, got {f}")
    sign = -1.0 if n % 2 else 1.0
    return sign * math.exp(-2.0 * f * f - k * k / (4.0 * n)) * bessel_j_signed(k, 4.0 * f * math.sqrt(n))


def sum_rule_residual(n, f, m_max=None):
    """|sum_{m <= m_max} S_mn(f) - (-1)^n|.

    ``m_max`` must be at least n + 40 f^2 + 20 sqrt(n) + 60 (the default).
    """
    n = int(n)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    floor = int(math.ceil(n + 40.0 * f * f + 20.0 * math.sqrt(n) + 60.0))
    if m_max is None:
        m_max = floor
    if m_max < floor:
        raise DomainError(f"m_max={m_max} is below the required {floor}")
    col = s_table(f, m_max + 1).block(m_max + 1)[:, n]
    return abs(math.fsum(col) - (-1.0 if n % 2 else 1.0))


def asymptotic_population(alpha, f, t):
    """Strong-field closed form W(t) = -cos(4 f alpha sin t)."""
    return -np.cos(4.0 * f * alpha * np.sin(np.asarray(t, dtype=float)))


def evolve_asymptotic(params, init, times):
    """TimeSeries of :func:`asymptotic_population`.

    ``diagnostics['valid_regime']`` is True when alpha >= 10 and f alpha >= 2.
    """
    t = _check_times(times)
    w = asymptotic_population(init.alpha, params.f, t)
    valid = init.alpha >= 10 and params.f * init.alpha >= 2
    return TimeSeries(t, np.atleast_1d(w), "asymptotic", params.f, {"valid_regime": bool(valid)})


def evolve(method, params, init, times):
    """Dispatch to one of the engines named in ``METHODS``."""
    engines = {"exact": evolve_exact, "uaa": evolve_uaa, "rwa": evolve_rwa,
               "asymptotic": evolve_asymptotic}
    if method not in engines:
        raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    return engines[method](params, init, times)
