import json
import math

import numpy as np
import pytest
from scipy.special import erf

from rabi_lab import cavity
from rabi_lab.cavity import CavitySpec
from rabi_lab.errors import DomainError

RATIO_AT_1 = 0.6710128602490739  # (1 - erf(1)^3) / erf(1)^3 via scipy.special.erf


def make_spec(**kw):
    base = dict(q_factor=1e6, volume_cm3=1.0, transverse_area_cm2=0.01,
                field_energy_j=1e-3, lambda0_nm=500.0)
    base.update(kw)
    return CavitySpec(**base)


def test_delta_root():
    d = cavity.solve_delta()
    assert d == pytest.approx(3.54, abs=0.01)
    assert abs(cavity.delta_equation(d)) <= 1e-9
    grid = np.arange(1.0, 6.0 + 1e-9, 0.01)
    vals = np.array([cavity.delta_equation(x) for x in grid])
    assert np.count_nonzero(np.diff(np.sign(vals))) == 1


def test_external_ratio():
    assert cavity.external_mode_ratio(3.54) == pytest.approx(1.64e-6, rel=0.05)
    assert cavity.external_mode_ratio(1.0) == pytest.approx(RATIO_AT_1, rel=1e-13)
    assert cavity.external_mode_ratio(1.0) == pytest.approx((1 - erf(1.0) ** 3) / erf(1.0) ** 3, rel=1e-13)
    assert cavity.external_mode_ratio(30.0) == 0.0
    with pytest.raises(DomainError):
        cavity.external_mode_ratio(0.0)


def test_wavelength_conversion_round_trip():
    assert cavity.omega_from_lambda(500.0) == pytest.approx(2 * math.pi * 197.3269804 / 500.0)
    assert cavity.lambda_from_omega(cavity.omega_from_lambda(633.0)) == pytest.approx(633.0)


def test_mode_counts():
    d = cavity.solve_delta()
    n_d, n = cavity.mode_counts(make_spec(), d)
    # omega0^3 / pi^2 = 8 pi / lambda^3 with c = 1
    assert n_d == pytest.approx(8 * math.pi * 1e21 / (500.0 ** 3 * 1e6), rel=1e-12)
    assert n_d == pytest.approx(201061929.82974672, rel=1e-12)
    n_d2, n2 = cavity.mode_counts(make_spec(volume_cm3=2.0), d)
    assert n_d2 == pytest.approx(2 * n_d) and n2 == pytest.approx(2 * n)
    n_d1, n1 = cavity.mode_counts(make_spec(kappa1=1.0), d)
    assert 0.1 < n1 / n_d1 < 10


def test_packet_energies():
    spec = make_spec()
    d = cavity.solve_delta()
    rep = cavity.packet_energy_report(spec, d)
    w = spec.field_energy_j
    assert rep["e0_energy"] / w == pytest.approx(erf(d) ** 3, rel=1e-12)
    assert rep["e0_energy"] / w == pytest.approx(1 - 1.64e-6, abs=1e-7)
    assert abs(rep["e_fluct"]) <= 1e-9 * w
    assert rep["e0_energy"] + rep["e_ext"] == pytest.approx(w, rel=1e-9)
    assert all(rep[k] >= 0 for k in ("e0_energy", "e_ext", "e_af", "d_e_fluct"))
    base = rep["e_af"] / math.sqrt(rep["n_modes"])
    for scale_w, scale_v in ((4.0, 1.0), (1.0, 4.0), (9.0, 2.0)):
        other = cavity.packet_energy_report(
            make_spec(field_energy_j=w * scale_w, volume_cm3=scale_v), d)
        assert other["e_af"] / math.sqrt(other["n_modes"]) == pytest.approx(
            base * math.sqrt(scale_w / scale_v), rel=1e-12)


def test_critical_density():
    assert cavity.critical_density(1.0) == pytest.approx(5.7e10, rel=0.02)
    # cubic scaling of the 1 nm coefficient: 5.7e10 / 1000^3
    assert cavity.critical_density(1000.0) == pytest.approx(5.7e10 / 1000.0 ** 3, rel=0.02)
    assert cavity.critical_density(500.0) == pytest.approx(4.6e2, rel=0.02)


def test_mu_consistency():
    for lam in (1.0, 500.0, 2000.0):
        wc = cavity.critical_density(lam)
        spec = make_spec(lambda0_nm=lam, field_energy_j=wc * 1.0)
        assert cavity.applicability_mu(spec) == pytest.approx(1.0, rel=0.02)
        hot = make_spec(lambda0_nm=lam, field_energy_j=wc * 3.0)
        mu = cavity.applicability_mu(hot)
        assert mu * mu * wc == pytest.approx(3.0 * wc, rel=0.02)
    spec = make_spec(field_energy_j=456.0)
    assert cavity.applicability_mu(spec) == pytest.approx(1.0, rel=0.02)


def test_coupling_and_xi():
    f, xi, _ = cavity.coupling_and_xi(make_spec(), nbar=0)
    assert xi == 0.0
    f4, _, _ = cavity.coupling_and_xi(make_spec(q_factor=4e6), nbar=0)
    assert f4 == pytest.approx(f / 2)
    f100, _, _ = cavity.coupling_and_xi(make_spec(q_factor=1e8), nbar=0)
    assert f100 == pytest.approx(f / 10)
    f, xi, xi_cav = cavity.coupling_and_xi(make_spec())
    assert abs(xi / xi_cav - 1) <= 0.10
    with pytest.raises(DomainError):
        cavity.coupling_and_xi(make_spec(), nbar=-1)


def test_collective_average():
    c = cavity.collective_average([(2.0, 0.1)])
    assert (c.omega_tilde, c.m_tilde) == (2.0, 0.1)
    c = cavity.collective_average([(1.0 - 0.01, 0.2), (1.0 + 0.01, 0.4)])
    assert c.omega_tilde == pytest.approx(1.0) and c.m_tilde == pytest.approx(0.3)
    q = 1e4
    rng = np.random.default_rng(11)
    omegas = 1.0 + rng.normal(scale=1.0 / q, size=2000)
    c = cavity.collective_average(zip(omegas, np.ones_like(omegas)))
    assert abs(c.omega_tilde - 1.0) < 1.0 / q
    with pytest.raises(DomainError):
        cavity.collective_average([])


def test_spec_validation():
    with pytest.raises(DomainError):
        make_spec(omega0_ev=2.0)
    with pytest.raises(DomainError):
        make_spec(q_factor=0.5)
    with pytest.raises(DomainError):
        make_spec(volume_cm3=-1.0)
    with pytest.raises(DomainError):
        CavitySpec.from_dict({"q_factor": 10, "volume_cm3": 1, "lambda0_nm": 500})
    with pytest.raises(DomainError):
        CavitySpec.from_dict({"q_factor": 10, "volume_cm3": 1, "transverse_area_cm2": 1,
                              "field_energy_j": 1, "lambda0_nm": 500, "colour": "red"})
    spec = make_spec(lambda0_nm=None, omega0_ev=2.0)
    assert spec.lambda0 == pytest.approx(2 * math.pi * 197.3269804 / 2.0)


def test_report_json_deterministic():
    spec = make_spec(field_energy_j=1e3)
    a, b = cavity.report_json(spec), cavity.report_json(spec)
    assert a == b
    doc = json.loads(a)
    assert set(doc) == {"version", "inputs", "results", "units"}
    res = doc["results"]
    assert res["single_mode_ok"] is True
    assert set(res) <= set(doc["units"]) | {"single_mode_ok", "rwa_ok"}
