import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from levyfield._rng import stream
from levyfield.noise import CylindricalWienerSpec, LevyNoiseSpec
from levyfield.spaces import SpaceSpec
from levyfield.spectral import (
    FieldSample,
    SpectralOperator,
    charfn_oracle,
    check_radonifying,
    convolution_variances,
    power_law_envelope,
    regularity_exponent_bound,
    sample_convolution,
    semigroup_norm,
    semigroup_norm_power,
    synthesize,
)
from levyfield.subordinator import SubordinatorPath, SubordinatorSpec, simulate_path


def make_noise(sub, n_modes):
    return LevyNoiseSpec(CylindricalWienerSpec(np.ones(n_modes)), sub)


# -- operator construction -----------------------------------------------


def test_dirichlet_eigenvalues_1d():
    op = SpectralOperator.dirichlet(1, 2.0, 5)
    assert np.allclose(op.lambdas, np.arange(1, 6, dtype=float) ** 4)
    assert np.all(np.diff(op.lambdas) > 0)


def test_dirichlet_eigenvalues_2d_sorted():
    op = SpectralOperator.dirichlet(2, 1.0, 3)
    # |n|^2 values for n in {1..3}^2, sorted
    mu = (op.multi_indices ** 2).sum(axis=1)
    assert np.all(np.diff(mu) >= 0)
    assert op.lambdas == pytest.approx(mu.astype(float))
    assert op.n_modes == 9


# -- semigroup norms -----------------------------------------------------


def test_semigroup_norm_unit_weights():
    op = SpectralOperator.dirichlet(1, 1.0, 32)
    U = SpaceSpec(2.0, np.ones(32), "U")
    E = SpaceSpec(2.0, np.ones(32), "E")
    out = semigroup_norm(op, U, E, t=0.7)
    assert out["norm"] == pytest.approx(math.exp(-op.lambdas[0] * 0.7), rel=1e-14)
    assert out["argmax_mode"] == 0


def test_semigroup_norm_power_matches_full_scan():
    op = SpectralOperator.dirichlet(1, 1.5, 4096)
    rng = stream(7)
    for _ in range(10):
        alpha, beta = rng.uniform(0.1, 1.5, size=2)
        r, q = rng.uniform(1.0, 4.0, size=2)
        t = float(rng.uniform(1e-4, 1.0))
        fast = semigroup_norm_power(op, alpha, beta, r, q, t)
        theta = beta + (r / q) * alpha
        scan = np.exp(-op.lambdas * t) * op.lambdas ** theta
        j = int(np.argmax(scan))
        assert fast["argmax_mode"] == j
        assert fast["norm"] == pytest.approx(float(scan[j]), rel=1e-14)


def test_power_law_envelope_dominates():
    op = SpectralOperator.dirichlet(1, 1.0, 4096)
    alpha, beta, r, q = 0.4, 0.3, 2.0, 2.0
    for t in np.geomspace(1e-5, 10.0, 40):
        sup = semigroup_norm_power(op, alpha, beta, r, q, float(t))["norm"]
        env = float(power_law_envelope(alpha, beta, r, q, t))
        assert sup <= env * (1.0 + 1e-12)


def test_semigroup_slope_matches_exponent():
    op = SpectralOperator.dirichlet(1, 1.0, 4096)
    alpha, beta, r, q = 0.5, 0.25, 2.0, 2.0
    theta = beta + (r / q) * alpha
    ts = np.geomspace(1e-6, 1e-2, 12)
    sups = [semigroup_norm_power(op, alpha, beta, r, q, float(t))["norm"] for t in ts]
    slope = np.polyfit(np.log(ts), np.log(sups), 1)[0]
    assert slope == pytest.approx(-theta, abs=0.05)


# -- radonifying certificate ---------------------------------------------


def test_radonifying_p_series_convergent():
    op = SpectralOperator.dirichlet(1, 1.0, 20000)
    ok, cert = check_radonifying(op, alpha=1.0, r=1.0)
    assert ok
    assert cert == pytest.approx(math.pi ** 2 / 6.0, rel=1e-6)


def test_radonifying_boundary_divergent():
    op = SpectralOperator.dirichlet(1, 1.0, 1000)
    ok, cert = check_radonifying(op, alpha=0.5, r=1.0)   # s*growth = 1 exactly
    assert not ok and cert == math.inf


def test_radonifying_user_eigenvalues_with_growth():
    lam = np.arange(1.0, 2001.0) ** 2.0
    op = SpectralOperator.from_eigenvalues(lam)
    assert check_radonifying(op, 0.5, 1.0, growth=2.0) == (False, math.inf)
    ok, cert = check_radonifying(op, 0.6, 1.0, growth=2.0)
    assert ok and np.isfinite(cert)
    from scipy.special import zeta
    assert cert == pytest.approx(float(zeta(1.2)), rel=1e-3)


def test_radonifying_theorem_setting():
    # for p < 2 gamma / d there are r, alpha with r*alpha*(2 gamma/d) > 1 and
    # r*alpha < 1/p; the wrong side fails
    gamma, d, p = 1.0, 1, 0.7
    op = SpectralOperator.dirichlet(d, gamma, 5000)
    ralpha_good = 0.5 * (d / (2 * gamma) + 1.0 / p)      # between the bounds
    assert check_radonifying(op, ralpha_good, 1.0)[0]
    assert ralpha_good < 1.0 / p
    ralpha_bad = 0.9 * d / (2 * gamma)
    assert not check_radonifying(op, ralpha_bad, 1.0)[0]


# -- convolution sampling ------------------------------------------------


def test_stationary_variance_drift_only():
    op = SpectralOperator.from_eigenvalues([1.0])
    zp = SubordinatorPath(horizon_T=100.0, drift_slope=1.0,
                          times=np.empty(0), sizes=np.empty(0))
    v = convolution_variances(op, zp, 50.0)
    assert v[0] == pytest.approx(0.5, rel=1e-12)


def test_single_jump_variance():
    lam, tau, dz, t = 2.0, 0.3, 1.7, 0.9
    op = SpectralOperator.from_eigenvalues([lam])
    zp = SubordinatorPath(horizon_T=1.0, drift_slope=0.0,
                          times=np.array([tau]), sizes=np.array([dz]))
    v = convolution_variances(op, zp, t)
    assert v[0] == pytest.approx(math.exp(-2 * lam * (t - tau)) * dz, rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 1000), t=st.floats(0.1, 1.0))
def test_variances_nonincreasing_in_lambda(seed, t):
    op = SpectralOperator.dirichlet(1, 1.0, 64)
    zp = simulate_path(SubordinatorSpec.stable(0.5), 1.0, cutoff_eps=1e-3,
                       seed=seed, method="jumps")
    v = convolution_variances(op, zp, t)
    assert np.all(np.diff(v) <= 1e-14)


def test_sample_convolution_mc_matches_oracle():
    N = 8
    op = SpectralOperator.dirichlet(1, 1.0, N)
    noise = make_noise(SubordinatorSpec.stable(0.5), N)
    phi = stream(5).standard_normal(N) / math.sqrt(N)
    t, mc = 0.8, 20000
    vals = np.empty(mc)
    for m in range(mc):
        zp = simulate_path(noise.subordinator, t, cutoff_eps=1e-3,
                           seed=3 * m, method="jumps")
        fs = sample_convolution(op, noise, zp, t, seed=3 * m + 1)
        vals[m] = math.cos(float(fs.coefficients @ phi))
    ana = charfn_oracle(op, noise, phi, t)
    se = vals.std() / math.sqrt(mc)
    assert abs(vals.mean() - ana) < 4.0 * se


# -- characteristic-functional oracle ------------------------------------


def test_charfn_oracle_trivial():
    op = SpectralOperator.dirichlet(1, 1.0, 4)
    noise = make_noise(SubordinatorSpec.stable(0.5), 4)
    assert charfn_oracle(op, noise, np.zeros(4), 1.0) == 1.0
    assert charfn_oracle(op, noise, np.ones(4), 0.0) == 1.0


def test_charfn_oracle_single_mode_gaussian_closed_form():
    op = SpectralOperator.dirichlet(1, 1.0, 4)
    b, c, j, t = 1.3, 0.7, 2, 0.9
    noise = make_noise(SubordinatorSpec.drift_only(b), 4)
    phi = np.zeros(4)
    phi[j] = c
    lam = op.lambdas[j]
    expected = math.exp(-b * c * c * (1.0 - math.exp(-2 * lam * t)) / (4.0 * lam))
    assert charfn_oracle(op, noise, phi, t) == pytest.approx(expected, rel=1e-8)


def test_charfn_oracle_stable_matches_direct_quadrature():
    N = 6
    op = SpectralOperator.dirichlet(1, 1.0, N)
    beta = 0.4
    noise = make_noise(SubordinatorSpec.stable(beta), N)
    phi = stream(9).standard_normal(N) * 0.5
    t = 0.7

    def integrand(sigma):
        hs = float((np.exp(-2.0 * op.lambdas * sigma) * phi ** 2).sum())
        return (0.5 * hs) ** beta

    direct, _ = integrate.quad(integrand, 0.0, t, limit=200)
    assert charfn_oracle(op, noise, phi, t) == pytest.approx(math.exp(-direct), rel=1e-7)


# -- regularity exponents ------------------------------------------------


def test_critical_exponent_stable():
    # order-2 generator (lambda ~ n^2), alpha = 1, d = 1 -> delta* = 1.5
    op = SpectralOperator.dirichlet(1, 1.0, 4)
    noise = make_noise(SubordinatorSpec.stable(0.5), 4)   # alpha = 1
    rep = regularity_exponent_bound(op, noise, ("holder", 1.0))
    assert rep["critical_exponent"] == pytest.approx(1.5)
    assert rep["admissible"]
    assert not regularity_exponent_bound(op, noise, ("holder", 1.5))["admissible"]


def test_critical_exponent_gaussian():
    op = SpectralOperator.dirichlet(1, 1.0, 4)
    noise = make_noise(SubordinatorSpec.drift_only(1.0), 4)
    rep = regularity_exponent_bound(op, noise, ("holder", 0.4))
    assert rep["critical_exponent"] == pytest.approx(0.5)
    assert rep["admissible"]


def test_critical_exponent_empty_range():
    op = SpectralOperator.dirichlet(2, 0.5, 2)   # g = 1, d = 2 -> delta* = 0
    noise = LevyNoiseSpec(CylindricalWienerSpec(np.ones(4)), SubordinatorSpec.stable(0.5))
    rep = regularity_exponent_bound(op, noise, ("holder", 0.0))
    assert rep["critical_exponent"] <= 0.0
    assert not rep["admissible"]


def test_critical_exponent_monotone_in_alpha():
    op = SpectralOperator.dirichlet(1, 2.0, 4)
    vals = []
    for alpha in (1.2, 1.5, 1.8):
        noise = make_noise(SubordinatorSpec.stable(alpha / 2.0), 4)
        vals.append(regularity_exponent_bound(op, noise, ("holder", 0.0))["critical_exponent"])
    assert vals[0] > vals[1] > vals[2]


def test_critical_exponent_sub_p_route():
    op = SpectralOperator.dirichlet(1, 2.0, 4)
    noise = make_noise(SubordinatorSpec.compound_poisson([0.5], [1.0]), 4)
    rep = regularity_exponent_bound(op, noise, ("holder", 0.0), p_certificate=1.5)
    assert rep["critical_exponent"] == pytest.approx(4.0 / 1.5 - 0.5)
    rep2 = regularity_exponent_bound(op, noise, ("holder", 0.0), p_certificate=0.8)
    assert rep2["critical_exponent"] == pytest.approx(4.0 - 0.5)


# -- synthesis -----------------------------------------------------------


def test_synthesize_single_mode_exact():
    op = SpectralOperator.dirichlet(1, 1.0, 4)
    c = np.zeros(4)
    c[2] = 1.0   # mode n=3
    vals = synthesize(op, FieldSample(c, 0.0), 16)
    x = np.arange(1, 16) / 16.0
    assert np.allclose(vals, math.sqrt(2.0) * np.sin(3 * math.pi * x), atol=1e-12)


def test_synthesize_2d_exact():
    op = SpectralOperator.dirichlet(2, 1.0, 2)
    coef = stream(13).standard_normal(op.n_modes)
    vals = synthesize(op, FieldSample(coef, 0.0), 8)
    x = np.arange(1, 8) / 8.0
    direct = np.zeros((7, 7))
    for (n1, n2), c in zip(op.multi_indices, coef):
        direct += c * 2.0 * np.outer(np.sin(n1 * math.pi * x), np.sin(n2 * math.pi * x))
    assert np.allclose(vals, direct, atol=1e-12)


def test_field_sample_csv(tmp_path):
    op = SpectralOperator.dirichlet(1, 1.0, 3)
    fs = FieldSample(np.array([1.0, -0.5, 0.25]), 2.0)
    f = tmp_path / "field.csv"
    fs.to_csv(f, op)
    lines = f.read_text().strip().splitlines()
    assert len(lines) == 5
    assert lines[2].split(",")[2] == "1.0"
