"""Independent reference values used by the tests."""
import numpy as np


def weierstrass_p(z, w1, w2, rows=40):
    """Weierstrass P of the lattice Z w1 + Z w2 by Eisenstein summation: each
    row z + n w2 + Z w1 is summed in closed form with pi^2 csc^2."""
    k = np.pi / w1
    total = -k * k / 3
    for n in range(-rows, rows + 1):
        total += k * k / np.sin(k * (z + n * w2)) ** 2
        if n:
            total -= k * k / np.sin(k * n * w2) ** 2
    return total


def weierstrass_p_prime(z, w1, w2, rows=40):
    k = np.pi / w1
    total = 0j
    for n in range(-rows, rows + 1):
        s = np.sin(k * (z + n * w2))
        total += -2 * k ** 3 * np.cos(k * (z + n * w2)) / s ** 3
    return total


def invariants(lam):
    """(g2, g3) of y^2 = x^3 + l2 x^2 + l1 x + l0 written in the variables
    X = x + l2/3, 2y, so that (2y)^2 = 4X^3 - g2 X - g3."""
    l0, l1, l2 = lam
    a = l1 - l2 * l2 / 3
    b = l0 - l1 * l2 / 3 + 2 * l2 ** 3 / 27
    return -4 * a, -4 * b
