import numpy as np
import pytest

from kleinian import _kernels
from kleinian.curvedef import ValidationError, schur_weierstrass
from kleinian.exactpoly import eval_exact
from kleinian.thetasigma import (ThetaParams, all_characteristics, automorphism_apply, automorphism_multiplier,
                                 characteristic_parity, monomial_index, quasi_periodicity_factor, theta_jet,
                                 theta_value)


def _tau(g, seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(-0.5, 0.5, (g, g))
    B = rng.normal(size=(g, g))
    return 0.5 * (X + X.T) + 1j * (B @ B.T / g + 0.8 * np.eye(g))


def test_characteristic_counts():
    for g, odd in ((1, 1), (2, 6), (3, 28), (4, 120)):
        chars = list(all_characteristics(g))
        assert len(chars) == 4 ** g
        assert sum(characteristic_parity(a, b) == -1 for a, b in chars) == odd


@pytest.mark.parametrize("g", [2, 3])
def test_theta_parity_and_odd_zero(g):
    tau = _tau(g, g)
    z = np.random.default_rng(0).normal(size=g) * 0.3 + 0.1j
    for dp, dpp in all_characteristics(g):
        p = ThetaParams(tau, dp, dpp)
        e = characteristic_parity(dp, dpp)
        assert abs(theta_value(p, -z) - e * theta_value(p, z)) < 1e-12 * max(1, abs(theta_value(p, z)))
        if e == -1:
            assert abs(theta_value(p, np.zeros(g))) < 1e-13


def test_theta_quasi_periodicity():
    g = 3
    tau = _tau(g, 7)
    p = ThetaParams(tau, (0.5, 0, 0.5), (0.5, 0.5, 0))
    rng = np.random.default_rng(2)
    z = rng.normal(size=g) * 0.2 + 1j * rng.normal(size=g) * 0.1
    t0 = theta_value(p, z)
    for k in range(g):
        m = np.eye(g)[k]
        assert abs(theta_value(p, z + m) - np.exp(2j * np.pi * p.dp @ m) * t0) < 1e-12 * abs(t0)
        f = np.exp(-1j * np.pi * m @ tau @ m - 2j * np.pi * m @ (z + p.dpp))
        assert abs(theta_value(p, z + tau @ m) - f * t0) < 1e-11 * abs(f * t0)


def test_theta_derivatives_match_finite_differences():
    g = 3
    p = ThetaParams(_tau(g, 3), (0, 0, 0), (0, 0, 0))
    z = np.array([0.1, -0.2 + 0.05j, 0.3j])
    jet = theta_jet(p, z, 2)
    h = 1e-5
    for i in range(g):
        e = np.eye(g)[i] * h
        fd = (theta_value(p, z + e) - theta_value(p, z - e)) / (2 * h)
        alpha = tuple(int(x) for x in np.eye(g, dtype=int)[i])
        assert abs(jet[alpha] - fd) < 1e-7 * max(1, abs(fd))


@pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba backend disabled")
def test_backends_agree():
    g = 4
    p = ThetaParams(_tau(g, 5), (0.5,) * g, (0, 0.5, 0, 0.5))
    z = np.random.default_rng(4).normal(size=g) * 0.2
    mi = monomial_index(g, 4)
    nvec = p.lattice(z, 4)
    M = 2j * np.pi * np.eye(g)
    a = _kernels.lattice_jet(nvec, p.tau, z + p.dpp, M, mi.array, "numpy")
    b = _kernels.lattice_jet(nvec, p.tau, z + p.dpp, M, mi.array, "numba")
    assert np.max(np.abs(a - b)) < 1e-13 * np.max(np.abs(a))


def test_kappa_identified_in_genus_three(ctx27, ctx34):
    for ctx in (ctx27, ctx34):
        fit = ctx.calibration.fit_report["kappa_fit"]
        assert fit["identified"]
        assert fit["final_residual"] < 1e-10
        assert np.allclose(ctx.calibration.kappa, ctx.calibration.kappa.T)


def test_normalization_routes_agree(ctx27, ctx34):
    for ctx in (ctx27, ctx34):
        assert ctx.calibration.fit_report["normalization"]["relative_difference"] < 1e-6


@pytest.mark.slow
def test_kappa_null_space_in_genus_four(ctx29):
    fit = ctx29.calibration.fit_report["kappa_fit"]
    assert not fit["identified"]
    assert fit["jacobian_rank"] == 7
    pairs = [tuple(p) for p in fit["pair_order"]]
    free = {pairs.index((0, 0)), pairs.index((0, 1)), pairs.index((1, 1))}
    N = np.array(fit["null_space"])
    assert N.shape == (3, 10)
    assert np.max(np.abs(np.delete(N, sorted(free), axis=1))) < 1e-8


def test_small_u_limit_is_schur_weierstrass(ctx27, ctx34):
    rng = np.random.default_rng(0)
    for ctx in (ctx27, ctx34):
        c = ctx.curve
        sw = schur_weierstrass(c)
        u = (rng.normal(size=3) + 1j * rng.normal(size=3)) * 0.03 ** np.array(c.u_weights)
        ref = complex(eval_exact(sw, {f"u{i + 1}": complex(u[i]) for i in range(3)}))
        assert abs(ctx.model.value(u) - ref) < 1e-3 * abs(ref)


def test_sigma_parity_and_periodicity(ctx27, ctx34):
    for ctx in (ctx27, ctx34):
        m = ctx.model
        for u in ctx.sample(np.random.default_rng(8), 2):
            s = m.value(u)
            assert abs(m.value(-u) - ctx.curve.parity_sign * s) < 1e-10 * abs(s)
            l1, l2 = np.array([1, 0, -1]), np.array([0, 2, 1])
            ell = ctx.periods.lattice_vector(l1, l2)
            pred = quasi_periodicity_factor(m, u, l1, l2) * s
            assert abs(m.value(u + ell) - pred) < 1e-8 * abs(pred)


def test_automorphisms(ctx34, ctx34r):
    rng = np.random.default_rng(3)
    for ctx, kinds in ((ctx34, ["zeta"]), (ctx34r, ["zeta", "quartic"])):
        for kind in kinds:
            for j in (1, 2):
                mult = automorphism_multiplier(ctx.curve, kind, j)
                for u in ctx.sample(rng, 2):
                    a = ctx.model.value(automorphism_apply(ctx.curve, kind, j, u))
                    assert abs(a - mult * ctx.model.value(u)) < 1e-9 * abs(a)
    with pytest.raises(ValidationError):
        automorphism_apply(ctx34.curve, "quartic", 1, np.zeros(3))
