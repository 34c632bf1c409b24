"""Acceptance checks with measured values, targets and runtimes.

Each check is registered under a short slug and returns a
:class:`CheckResult`. ``run_checks`` executes a selection in order.
"""
import math
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np

from . import cavity, dynamics, rabi, uaa


@dataclass
class CheckResult:
    slug: str
    title: str
    passed: bool
    measured: str
    expected: str
    runtime: float = 0.0
    runtime_limit: float | None = None
    details: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.runtime_limit:g} s)" if self.runtime_limit else ""
        return (f"[{status}] {self.slug}: {self.title} | measured {self.measured} | "
                f"expected {self.expected} | {self.runtime:.2f} s{limit}")

    def to_dict(self):
        return asdict(self)


REGISTRY = {}


def check(slug, title, runtime_limit=None):
    def wrap(fn):
        REGISTRY[slug] = (title, runtime_limit, fn)
        return fn
    return wrap


def _zero_crossings(values):
    s = np.sign(values)
    s = s[s != 0]
    return int(np.sum(s[1:] != s[:-1]))


def _rms(a, b):
    return float(np.sqrt(np.mean((np.asarray(a) - np.asarray(b)) ** 2)))


@lru_cache(maxsize=None)
def _tau_grid(f, tau_max=25.0, dt=0.25):
    t_max = tau_max / f
    count = int(math.ceil(t_max / dt)) + 1
    return np.linspace(0.0, t_max, count)


@lru_cache(maxsize=None)
def _exact_run(epsilon, f, nbar, grid):
    params, init = dynamics.setup(epsilon, f, nbar)
    times = _tau_grid(f) if grid == "tau" else np.linspace(0.0, 2 * math.pi, 2001)
    return params, init, dynamics.evolve_exact(params, init, times)


FIG2_CASES = [(f, nbar, eps) for (f, nbar) in ((0.01, 25), (0.1, 100)) for eps in (1.0, 1.2, 0.8)]
STRONG_CASE = (1.0, 0.1, 1000)


@check("delta-root", "packet parameter delta solves the vanishing-fluctuation condition", 1.0)
def _delta_root():
    d = cavity.solve_delta()
    resid = abs(cavity.delta_equation(d))
    ok = abs(d - 3.54) <= 0.01 and resid <= 1e-9
    return ok, f"delta={d:.6f}, residual={resid:.2e}", "3.54 +- 0.01, residual <= 1e-9", {}


@check("external-ratio", "external-mode energy ratio at delta = 3.54")
def _external_ratio():
    r = cavity.external_mode_ratio(3.54)
    rel = abs(r / 1.64e-6 - 1.0)
    return rel <= 0.05, f"{r:.4e} (rel dev {rel:.2%})", "1.64e-6 +- 5%", {}


@check("critical-density", "critical energy density at 1 nm")
def _critical_density():
    w = cavity.critical_density(1.0)
    rel = abs(w / 5.7e10 - 1.0)
    return rel <= 0.02, f"{w:.4e} J/cm^3 (rel dev {rel:.2%})", "5.7e10 J/cm^3 +- 2%", {}


@check("exact-limits", "exact solver limits f = 0 and eps = 0 at n_max = 200", 5.0)
def _exact_limits():
    n_max = 200
    worst_f0 = 0.0
    for eps in (1.0, 0.6):
        params = rabi.ModelParams(eps, 0.0, n_max)
        got = np.sort(np.concatenate([rabi.sector_eigensystem(params, p, False)[0] for p in (1, -1)]))
        n = np.arange(n_max + 1)
        want = np.sort(np.concatenate([n + eps / 2, n - eps / 2]))
        worst_f0 = max(worst_f0, float(np.max(np.abs(got - want))))
    worst_e0 = {}
    converged = {}
    for f in (0.1, 0.5, 1.0):
        params = rabi.ModelParams(0.0, f, n_max)
        top = int(math.floor(n_max - 12 * f * f - 10))
        errs = []
        for p in (1, -1):
            w = rabi.sector_eigensystem(params, p, False)[0]
            errs.append(np.abs(w[: top + 1] - (np.arange(top + 1) - f * f)))
        err = np.max(errs, axis=0)
        worst_e0[f] = float(err.max())
        good = np.nonzero(err > 1e-8)[0]
        converged[f] = int(good[0]) - 1 if good.size else top
    e0 = max(worst_e0.values())
    ok = worst_f0 <= 1e-10 and e0 <= 1e-8
    measured = f"f=0 err {worst_f0:.1e}; eps=0 err " + ", ".join(
        f"f={f}: {v:.1e}" for f, v in worst_e0.items())
    return ok, measured, "<= 1e-10 (f=0), <= 1e-8 (eps=0, n <= n_max - 12f^2 - 10)", {
        "largest_level_within_1e-8": converged}


@check("parity-exact", "[H, P] vanishes in the truncated basis")
def _parity_exact():
    vals = [rabi.parity_check(rabi.ModelParams(e, f, 40)) for e, f in ((1.0, 0.5), (0.8, 2.0))]
    return max(vals) <= 1e-12, f"max ||[H,P]|| = {max(vals):.1e}", "<= 1e-12", {}


def _crossings(upper, lower):
    out = {}
    for i in range(upper.shape[1]):
        for j in range(lower.shape[1]):
            s = np.sign(upper[:, i] - lower[:, j])
            s = s[s != 0]
            out[(i, j)] = int(np.sum(s[1:] != s[:-1]))
    return out


@check("uaa-spectrum", "closed-form levels track exact levels for eps = 1, f in [0, 1]", 60.0)
def _uaa_spectrum():
    count = 13
    fs = np.round(np.arange(0.0, 1.0 + 1e-9, 0.02), 10)
    ex = {1: [], -1: []}
    ua = {1: [], -1: []}
    worst, where = 0.0, None
    for f in fs:
        params = rabi.ModelParams(1.0, float(f), 100)
        e_res = rabi.exact_spectrum(params, count)
        u_res = uaa.uaa_levels(params, count)
        for p in (1, -1):
            e, u = e_res.energies(p), u_res.energies(p)
            ex[p].append(e)
            ua[p].append(u)
            k = int(np.argmax(np.abs(e - u)))
            if abs(e[k] - u[k]) > worst:
                worst, where = float(abs(e[k] - u[k])), (float(f), p, k)
    ce = _crossings(np.array(ex[1]), np.array(ex[-1]))
    cu = _crossings(np.array(ua[1]), np.array(ua[-1]))
    mismatched = [k for k in ce if ce[k] != cu[k]]
    ok = worst <= 0.05 and not mismatched
    measured = (f"max |dE| = {worst:.4f} at (f, p, level) = {where}; "
                f"crossing mismatches {len(mismatched)} of {sum(ce.values())} crossings")
    return ok, measured, "max |dE| <= 0.05 and identical crossings", {
        "mismatched_pairs": mismatched}


@check("exact-dynamics", "exact engine: W(0), norm drift and bounds on all runs")
def _exact_dynamics():
    runs = [_exact_run(eps, f, nbar, "tau") for f, nbar, eps in FIG2_CASES]
    runs.append(_exact_run(*STRONG_CASE, "strong"))
    w0 = max(abs(r[2].values[0] + 1.0) for r in runs)
    drift = max(r[2].diagnostics["norm_drift"] for r in runs)
    bound = max(float(np.max(np.abs(r[2].values))) for r in runs)
    ok = w0 <= 1e-9 and drift <= 1e-10 and bound <= 1 + 1e-9
    return ok, f"|W(0)+1| = {w0:.1e}, drift = {drift:.1e}, max|W| - 1 = {bound - 1:.1e}", \
        "<= 1e-9, <= 1e-10, <= 1e-9", {}


@check("uaa-dynamics", "closed-form dynamics track exact W over tau in [0, 25]", 300.0)
def _uaa_dynamics():
    rms = {}
    for f, nbar, eps in FIG2_CASES:
        params, init, ex = _exact_run(eps, f, nbar, "tau")
        ua = dynamics.evolve_uaa(params, init, ex.times)
        rms[f"f={f}, nbar={nbar}, eps={eps}"] = _rms(ua.values, ex.values)
    worst = max(rms.values())
    measured = "; ".join(f"{k}: {v:.3f}" for k, v in rms.items())
    return worst <= 0.15, measured, "every RMS <= 0.15", {"rms": rms}


@check("strong-field", "-cos(4 f alpha sin t) tracks exact W at nbar = 1000, f = 0.1", 600.0)
def _strong_field():
    params, init, ex = _exact_run(*STRONG_CASE, "strong")
    asym = dynamics.asymptotic_population(init.alpha, params.f, ex.times)
    rms = _rms(asym, ex.values)
    ze, za = _zero_crossings(ex.values), _zero_crossings(asym)
    rel = abs(za - ze) / max(ze, 1)
    ok = rms <= 0.15 and rel <= 0.05
    return ok, f"RMS {rms:.4f}; zero crossings {za} vs {ze} exact", "RMS <= 0.15, crossings within 5%", {
        "n_max": params.n_max}


@check("rwa-failure", "rotating-wave result departs from exact W at nbar = 1000, f = 0.1")
def _rwa_failure():
    params, init, ex = _exact_run(*STRONG_CASE, "strong")
    rw = dynamics.evolve_rwa(params, init, ex.times)
    diff = float(np.max(np.abs(rw.values - ex.values)))
    return diff > 0.5, f"max |W_rwa - W_exact| = {diff:.3f}", "> 0.5", {}


@check("sum-rule", "column sums of S approach (-1)^n")
def _sum_rule():
    r25 = dynamics.sum_rule_residual(25, 0.1)
    r100 = dynamics.sum_rule_residual(100, 0.1)
    ok = r100 <= 0.05 and r100 < r25
    return ok, f"n=25: {r25:.4f}, n=100: {r100:.4f}", "n=100 <= 0.05 and decreasing", {}


@check("bessel-elements", "Bessel form of S against exact elements")
def _bessel_elements():
    rel = {}
    pointwise = {}
    for n in (100, 400):
        kmax = int(2 * math.sqrt(n))
        ks = range(-kmax, kmax + 1)
        for f in (0.1, 0.2):
            exact = np.array([uaa.s_element(n + k, n, f) for k in ks])
            approx = np.array([dynamics.s_asymptotic(n, k, f) for k in ks])
            rel[f"n={n}, f={f}"] = float(np.linalg.norm(approx - exact) / np.linalg.norm(exact))
            pointwise[f"n={n}, f={f}"] = float(np.max(np.abs(approx - exact) / np.abs(exact)))
    worst = max(rel.values())
    measured = "; ".join(f"{k}: {v:.3f}" for k, v in rel.items())
    return worst <= 0.05, measured, "relative deviation <= 0.05 (l2 over |k| <= 2 sqrt n)", {
        "pointwise_max": pointwise}


@check("beta-anchor", "strong-field splitting beta_n against closed-form doublet spacing")
def _beta_anchor():
    params = rabi.ModelParams(1.0, 0.1, 60)
    b = dynamics.beta_freq(1000, params)
    split = uaa.uaa_energy(1000, 1, params) - uaa.uaa_energy(1000, -1, params)
    rel = abs(b - split) / b
    return rel <= 0.01, f"beta={b:.5f}, spacing={split:.5f}, rel {rel:.2%}", "<= 1%", {}


@check("mu-consistency", "mu^2 w_c = w across wavelengths")
def _mu_consistency():
    worst = 0.0
    for lam in (200.0, 500.0, 1000.0):
        wc = cavity.critical_density(lam)
        spec = cavity.CavitySpec(q_factor=1e6, volume_cm3=1.0, transverse_area_cm2=1.0,
                                 field_energy_j=3.0 * wc, lambda0_nm=lam)
        mu = cavity.applicability_mu(spec)
        worst = max(worst, abs(mu * mu * wc / spec.energy_density_j_cm3 - 1.0))
    return worst <= 0.02, f"max rel dev {worst:.1e}", "<= 2%", {}


def run_check(slug):
    if slug not in REGISTRY:
        raise KeyError(f"unknown check {slug!r}; known: {', '.join(REGISTRY)}")
    title, limit, fn = REGISTRY[slug]
    start = time.perf_counter()
    ok, measured, expected, details = fn()
    elapsed = time.perf_counter() - start
    if limit is not None and elapsed > limit:
        ok = False
        details = dict(details, runtime_exceeded=True)
    return CheckResult(slug, title, bool(ok), measured, expected, elapsed, limit, details)


def run_checks(only=None, stream=None):
    slugs = list(REGISTRY) if not only else list(only)
    results = []
    for slug in slugs:
        res = run_check(slug)
        if stream is not None:
            print(res.line(), file=stream, flush=True)
        results.append(res)
    return results
