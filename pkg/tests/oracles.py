"""Independent reference computations used by the tests.

These avoid the package's vectorized code paths: everything is built from
explicit Kronecker products and traces.
"""
import itertools

import numpy as np


def born_adaptive(rho, alice, bob):
    """``sum_m Tr(rho A_{m|x} (x) B_{b|y,m})`` with explicit loops."""
    X, Y = len(alice), len(bob)
    B = len(bob[0][0])
    p = np.zeros((X, Y, B))
    for x, y, b in itertools.product(range(X), range(Y), range(B)):
        for m, a in enumerate(alice[x]):
            p[x, y, b] += np.trace(rho @ np.kron(a, bob[y][m][b])).real
    return p


def born_nonadaptive(rho, alice, base, g, n_out):
    """``sum_{m,b'} [g(y,m,b') = b] Tr(rho A_{m|x} (x) M_{b'|y})``."""
    X, Y = len(alice), len(base)
    p = np.zeros((X, Y, n_out))
    for x, y in itertools.product(range(X), range(Y)):
        for m, a in enumerate(alice[x]):
            for c, e in enumerate(base[y]):
                p[x, y, g[y][m][c]] += np.trace(rho @ np.kron(a, e)).real
    return p


def classical_value(coeffs, D, n_outputs):
    """Maximum of ``sum c[x,y,b] p`` over deterministic encodings and decodings."""
    X, Y, _ = coeffs.shape
    best = -np.inf
    for enc in itertools.product(range(D), repeat=X):
        val = 0.0
        for y in range(Y):
            # decode each message independently
            for m in range(D):
                xs = [x for x in range(X) if enc[x] == m]
                val += max(sum(coeffs[x, y, b] for x in xs) for b in range(n_outputs[y]))
        best = max(best, val)
    return best


def pauli_vector(v):
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1.0 + 0j, -1.0])
    return v[0] * X + v[1] * Y + v[2] * Z
