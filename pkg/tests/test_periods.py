from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest

from kleinian.curvedef import ValidationError, make_curve, random_lambda
from kleinian.periods import abel_map, compute_periods, random_curve_point, reduce_mod_lattice

from oracles import invariants, weierstrass_p, weierstrass_p_prime


@pytest.fixture(scope="module")
def elliptic():
    lam = [Fraction(2, 7), Fraction(-3, 5), Fraction(0)]
    c = make_curve(2, 3, lam)
    return c, compute_periods(c, precision_digits=30)


def test_genus_one_lattice_matches_curve_invariants(elliptic):
    c, per = elliptic
    w1, w2 = complex(per.omega1[0, 0]), complex(per.omega2[0, 0])
    assert (w2 / w1).imag > 0
    g2, g3 = invariants([complex(x) for x in c.lam])
    rng = np.random.default_rng(0)
    for _ in range(4):
        z = rng.uniform(-0.4, 0.4) * w1 + rng.uniform(-0.4, 0.4) * w2
        p, dp = weierstrass_p(z, w1, w2), weierstrass_p_prime(z, w1, w2)
        assert abs(dp * dp - (4 * p ** 3 - g2 * p - g3)) < 1e-10 * abs(dp * dp)


def test_genus_one_abel_map_inverts_weierstrass(elliptic):
    c, per = elliptic
    w1, w2 = complex(per.omega1[0, 0]), complex(per.omega2[0, 0])
    rng = np.random.default_rng(1)
    for _ in range(3):
        x, y = random_curve_point(c, rng)
        u = abel_map(c, per, [(x, y)]).u[0]
        p = weierstrass_p(u, w1, w2)
        assert abs(p - (x + complex(c.lam[2]) / 3)) < 1e-9 * max(1, abs(x))
        assert abs(abs(weierstrass_p_prime(u, w1, w2)) - abs(2 * y)) < 1e-9 * max(1, abs(y))


@pytest.fixture(scope="module")
def genus3():
    c = make_curve(2, 7, random_lambda(2, 7, np.random.default_rng(41)))
    return c, compute_periods(c, precision_digits=30)


def test_riemann_matrix_properties(genus3):
    c, per = genus3
    assert per.genus == 3
    assert np.max(np.abs(per.tau - per.tau.T)) < 1e-20
    assert np.all(np.linalg.eigvalsh(per.tau.imag) > 0)
    J = np.block([[np.zeros((3, 3)), np.eye(3)], [-np.eye(3), np.zeros((3, 3))]])
    T = per.symplectic_transform
    assert np.array_equal(T @ per.intersection_matrix @ T.T, J)


def test_periods_stable_under_precision(genus3):
    c, per = genus3
    hi = compute_periods(c, precision_digits=40)
    with mp.workdps(40):
        diff = max(abs(per.tau_mp[i, j] - hi.tau_mp[i, j]) for i in range(3) for j in range(3))
    assert diff < mp.mpf(10) ** -25


def test_abel_map_rejects_off_curve_point(genus3):
    c, per = genus3
    with pytest.raises(ValidationError):
        abel_map(c, per, [(0.3, 10.0)])


def test_lattice_reduction(genus3):
    c, per = genus3
    l1, l2 = np.array([1, -2, 0]), np.array([0, 1, 3])
    u0 = per.omega1 @ np.array([0.1, -0.2, 0.3]) + per.omega2 @ np.array([0.05, 0.2, -0.1])
    red, m1, m2 = reduce_mod_lattice(per, u0 + per.lattice_vector(l1, l2))
    assert np.array_equal(m1, l1) and np.array_equal(m2, l2)
    assert np.allclose(red, u0, atol=1e-12)
