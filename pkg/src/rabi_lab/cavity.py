"""Cavity-parameter calculus for the single-mode picture.

Internally everything is in natural units hbar = c = 1 with energies in eV
and lengths in 1/eV (1/eV = 197.3269804 nm). The electron charge obeys
e0^2 = 1/137.035999 (Gaussian units). Inputs and report fields use
nm, cm, cm^3 and J as labelled.
"""
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import DomainError, RootFindingError
from .specfun import erf_phi


@dataclass(frozen=True)
class PhysicalConstants:
    hbar_c_ev_nm: float = 197.3269804
    electron_mass_ev: float = 0.51099895e6
    fine_structure: float = 1.0 / 137.035999
    joule_per_ev: float = 1.602176634e-19
    cm_per_nm: float = 1e-7

    @property
    def e0(self):
        return math.sqrt(self.fine_structure)

    @property
    def nm_per_inv_ev(self):
        return self.hbar_c_ev_nm

    def cm3_to_inv_ev3(self, volume_cm3):
        length = self.hbar_c_ev_nm * self.cm_per_nm  # cm per (1/eV)
        return volume_cm3 / length ** 3

    def cm2_to_inv_ev2(self, area_cm2):
        length = self.hbar_c_ev_nm * self.cm_per_nm
        return area_cm2 / length ** 2

    def ev_per_inv_ev3_to_j_per_cm3(self, density):
        length = self.hbar_c_ev_nm * self.cm_per_nm
        return density * self.joule_per_ev / length ** 3


CONSTANTS = PhysicalConstants()
DELTA_BRACKET = (1.0, 6.0)
MU_COEFFICIENT = 7.0


def omega_from_lambda(lambda0_nm, const=CONSTANTS):
    """Photon energy 2 pi hbar c / lambda in eV."""
    if not lambda0_nm > 0:
        raise DomainError(f"wavelength must be positive, got {lambda0_nm}")
    return 2.0 * math.pi * const.hbar_c_ev_nm / lambda0_nm


def lambda_from_omega(omega0_ev, const=CONSTANTS):
    if not omega0_ev > 0:
        raise DomainError(f"omega0 must be positive, got {omega0_ev}")
    return 2.0 * math.pi * const.hbar_c_ev_nm / omega0_ev


@dataclass(frozen=True)
class CavitySpec:
    """Resonator description.

    Give exactly one of ``lambda0_nm`` or ``omega0_ev``. ``kappa1`` (the
    angular spread) overrides the default 1 / (omega0^2 S) computed from
    ``transverse_area_cm2``; ``kappa2`` is always 1/Q.
    """

    q_factor: float
    volume_cm3: float
    transverse_area_cm2: float
    field_energy_j: float
    lambda0_nm: float | None = None
    omega0_ev: float | None = None
    kappa1: float | None = None

    def __post_init__(self):
        if (self.lambda0_nm is None) == (self.omega0_ev is None):
            raise DomainError("give exactly one of lambda0_nm and omega0_ev")
        for name in ("volume_cm3", "transverse_area_cm2", "field_energy_j"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive number, got {value!r}")
        if not (math.isfinite(self.q_factor) and self.q_factor > 1):
            raise DomainError(f"q_factor must exceed 1, got {self.q_factor!r}")
        carrier = self.lambda0_nm if self.lambda0_nm is not None else self.omega0_ev
        if not (math.isfinite(carrier) and carrier > 0):
            raise DomainError(f"carrier wavelength/energy must be positive, got {carrier!r}")
        if self.kappa1 is not None and not (math.isfinite(self.kappa1) and self.kappa1 > 0):
            raise DomainError(f"kappa1 must be positive, got {self.kappa1!r}")

    @property
    def omega0(self):
        if self.omega0_ev is not None:
            return float(self.omega0_ev)
        return omega_from_lambda(self.lambda0_nm)

    @property
    def lambda0(self):
        if self.lambda0_nm is not None:
            return float(self.lambda0_nm)
        return lambda_from_omega(self.omega0_ev)

    @property
    def kappa2(self):
        return 1.0 / self.q_factor

    def kappa1_value(self, const=CONSTANTS):
        if self.kappa1 is not None:
            return float(self.kappa1)
        return 1.0 / (self.omega0 ** 2 * const.cm2_to_inv_ev2(self.transverse_area_cm2))

    @property
    def energy_ev(self):
        return self.field_energy_j / CONSTANTS.joule_per_ev

    @property
    def volume_natural(self):
        return CONSTANTS.cm3_to_inv_ev3(self.volume_cm3)

    @property
    def energy_density_j_cm3(self):
        return self.field_energy_j / self.volume_cm3

    @classmethod
    def from_dict(cls, data):
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data and data[k] is not None}
        unknown = sorted(set(data) - set(cls.__dataclass_fields__))
        if unknown:
            raise DomainError(f"unknown cavity fields: {', '.join(unknown)}")
        missing = [k for k in ("q_factor", "volume_cm3", "transverse_area_cm2", "field_energy_j")
                   if k not in known]
        if missing:
            raise DomainError(f"missing cavity fields: {', '.join(missing)}")
        return cls(**known)


@dataclass
class PacketReport:
    delta: float
    n_modes: float
    n_d: float
    c_norm: float
    e0_energy: float
    e_fluct: float
    e_ext: float
    e_af: float
    d_e_fluct: float
    mu: float
    mu_detailed: float
    w_crit: float
    coupling_f: float
    xi: float
    xi_cavity: float
    nbar: float
    single_mode_ok: bool
    rwa_ok: bool


@dataclass(frozen=True)
class CollectiveParams:
    omega_tilde: float
    m_tilde: float


def delta_equation(delta):
    """1 - (8 pi^{3/2} / delta^3) Phi^6(delta / sqrt 2) / Phi^3(delta)."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    return 1.0 - 8.0 * math.pi ** 1.5 / delta ** 3 * erf_phi(delta / math.sqrt(2.0)) ** 6 / erf_phi(delta) ** 3


def solve_delta(tol=1e-10, bracket=DELTA_BRACKET):
    """Root of :func:`delta_equation` by bisection on [1, 6]."""
    lo, hi = bracket
    f_lo, f_hi = delta_equation(lo), delta_equation(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0) == (f_hi > 0):
        raise RootFindingError(f"no sign change of the delta equation on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = delta_equation(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def external_mode_ratio(delta):
    """Energy ratio of modes outside the packet to modes inside, (1 - Phi^3) / Phi^3."""
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    # 1 - Phi^3 = erfc (1 + Phi + Phi^2) avoids cancellation
    phi = erf_phi(delta)
    return math.erfc(delta) * (1.0 + phi + phi * phi) / phi ** 3


def mode_counts(spec, delta):
    """Mode numbers (N_D, N) of the resonator and of the packet.

    N_D = V omega0^3 / (pi^2 Q); N = V delta^3 kappa1^2 kappa2 omega0^3 / (2 pi)^3.
    """
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    v = spec.volume_natural
    w3 = spec.omega0 ** 3
    n_d = v * w3 / (math.pi ** 2 * spec.q_factor)
    n_modes = v * delta ** 3 * spec.kappa1_value() ** 2 * spec.kappa2 * w3 / (2.0 * math.pi) ** 3
    return n_d, n_modes


def electron_velocity(omega0, const=CONSTANTS):
    """Virial estimate v_e = sqrt(2 omega0 / m_e) in units of c."""
    return math.sqrt(2.0 * omega0 / const.electron_mass_ev)


def packet_energy_report(spec, delta):
    """Energy bookkeeping of the wave packet.

    Returns a dict with c_norm (dimensionless) and the energies e0_energy,
    e_fluct, e_ext, e_af and d_e_fluct in J, plus n_modes and n_d.
    """
    const = CONSTANTS
    w_ev = spec.energy_ev
    v = spec.volume_natural
    omega0 = spec.omega0
    k1, k2 = spec.kappa1_value(), spec.kappa2
    n_d, n_modes = mode_counts(spec, delta)
    phi3 = erf_phi(delta) ** 3
    c_norm = math.sqrt(8.0 * math.pi ** 1.5 * w_ev / (v * k1 * k1 * k2 * omega0 ** 4))
    e0 = w_ev * phi3
    e_ext = w_ev * math.erfc(delta) * (1.0 + erf_phi(delta) + erf_phi(delta) ** 2)
    e_fluct = e0 * delta_equation(delta)
    # transition matrix element |<up|p|down>| ~ m_e v_e (virial estimate)
    v_e = electron_velocity(omega0)
    e_af = 8.0 * math.sqrt(n_modes) * math.sqrt(math.pi ** 2.5 / delta ** 3 * w_ev / v) \
        * const.e0 * v_e / omega0
    d_e = omega0 * math.sqrt(n_modes)
    to_j = const.joule_per_ev
    return {
        "n_modes": n_modes, "n_d": n_d, "c_norm": c_norm,
        "e0_energy": e0 * to_j, "e_fluct": e_fluct * to_j, "e_ext": e_ext * to_j,
        "e_af": e_af * to_j, "d_e_fluct": d_e * to_j,
    }


def applicability_mu(spec):
    """Single-mode parameter mu = 7 e0 sqrt(W / (V m_e omega0^3))."""
    const = CONSTANTS
    return MU_COEFFICIENT * const.e0 * math.sqrt(
        spec.energy_ev / (spec.volume_natural * const.electron_mass_ev * spec.omega0 ** 3))


def critical_density(lambda0_nm):
    """Energy density w_c = m_e omega0^3 / (49 e0^2) at which mu = 1, in J/cm^3."""
    const = CONSTANTS
    omega0 = omega_from_lambda(lambda0_nm)
    density = const.electron_mass_ev * omega0 ** 3 / (MU_COEFFICIENT ** 2 * const.fine_structure)
    return const.ev_per_inv_ev3_to_j_per_cm3(density)


def coupling_and_xi(spec, nbar=None):
    """Coupling f = |e0| v_e sqrt(2 / (pi Q)) and RWA parameter xi = 2 f sqrt(nbar).

    ``nbar`` defaults to the photon number W / omega0 of the mode. Returns
    (f, xi, xi_cavity) where xi_cavity = 2 |e0| v_e sqrt(2 W / (pi Q omega0))
    is the same quantity written in resonator terms.
    """
    const = CONSTANTS
    omega0 = spec.omega0
    if nbar is None:
        nbar = spec.energy_ev / omega0
    if not (math.isfinite(nbar) and nbar >= 0):
        raise DomainError(f"nbar must be finite and >= 0, got {nbar}")
    v_e = electron_velocity(omega0)
    f = const.e0 * v_e * math.sqrt(2.0 / (math.pi * spec.q_factor))
    xi = 2.0 * f * math.sqrt(nbar)
    xi_cavity = 2.0 * const.e0 * v_e * math.sqrt(2.0 * spec.energy_ev / (math.pi * spec.q_factor * omega0))
    return f, xi, xi_cavity


def collective_average(modes):
    """Mean frequency and coupling of a list of (omega_k, m_k) pairs."""
    arr = np.asarray(list(modes), dtype=float)
    if arr.size == 0:
        raise DomainError("mode list is empty")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"modes must be (omega, m) pairs, got shape {arr.shape}")
    return CollectiveParams(float(np.mean(arr[:, 0])), float(np.mean(arr[:, 1])))


def full_report(spec, nbar=None, mu_threshold=1.0, xi_threshold=0.1):
    """Complete :class:`PacketReport` for a resonator."""
    delta = solve_delta()
    packet = packet_energy_report(spec, delta)
    mu = applicability_mu(spec)
    mu_detailed = packet["e_af"] / packet["d_e_fluct"]
    f, xi, xi_cavity = coupling_and_xi(spec, nbar)
    if nbar is None:
        nbar = spec.energy_ev / spec.omega0
    return PacketReport(
        delta=delta, mu=mu, mu_detailed=mu_detailed, w_crit=critical_density(spec.lambda0),
        coupling_f=f, xi=xi, xi_cavity=xi_cavity, nbar=nbar,
        single_mode_ok=mu >= mu_threshold, rwa_ok=xi <= xi_threshold, **packet)


UNITS = {
    "delta": "1", "n_modes": "1", "n_d": "1", "c_norm": "1",
    "e0_energy": "J", "e_fluct": "J", "e_ext": "J", "e_af": "J", "d_e_fluct": "J",
    "mu": "1", "mu_detailed": "1", "w_crit": "J/cm^3", "coupling_f": "1", "xi": "1",
    "xi_cavity": "1", "nbar": "1", "lambda0_nm": "nm", "omega0_ev": "eV",
    "volume_cm3": "cm^3", "transverse_area_cm2": "cm^2", "field_energy_j": "J",
    "energy_density_j_cm3": "J/cm^3",
}


def report_json(spec, nbar=None, mu_threshold=1.0, xi_threshold=0.1):
    """Deterministic JSON text with ``version``, ``inputs``, ``results``, ``units``."""
    report = full_report(spec, nbar, mu_threshold, xi_threshold)
    inputs = {k: v for k, v in asdict(spec).items()}
    inputs.update({"lambda0_nm": spec.lambda0, "omega0_ev": spec.omega0,
                   "kappa1_used": spec.kappa1_value(), "kappa2": spec.kappa2,
                   "energy_density_j_cm3": spec.energy_density_j_cm3,
                   "mu_threshold": mu_threshold, "xi_threshold": xi_threshold})
    units = dict(UNITS)
    units["constants"] = asdict(CONSTANTS)
    doc = {"version": __version__, "inputs": inputs, "results": asdict(report), "units": units}
    return json.dumps(doc, indent=2, sort_keys=True)
