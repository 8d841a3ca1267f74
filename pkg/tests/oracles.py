"""Independent oracles used by the test suite.

These deliberately avoid the library's evaluation paths: direct symmetric
lattice sums for the elliptic functions, plain double loops for residuals,
and central finite differences for derivatives.
"""

import numpy as np


def zeta_lattice_sum(z: complex, tau: complex, N: int = 200) -> complex:
    """Symmetric truncated lattice sum for the Weierstrass zeta function.

    Terms are paired over +-w so the truncation error decays like 1/N^2.
    """
    total = 1.0 / z
    for mm in range(0, N + 1):
        for nn in range(-N if mm > 0 else 1, N + 1):
            w = mm + nn * tau
            total += 1.0 / (z - w) + 1.0 / w + z / w**2
            total += 1.0 / (z + w) - 1.0 / w + z / w**2
    return total


def p_lattice_sum(z: complex, tau: complex, N: int = 200) -> complex:
    """Symmetric truncated lattice sum for the Weierstrass p-function."""
    total = 1.0 / z**2
    for mm in range(0, N + 1):
        for nn in range(-N if mm > 0 else 1, N + 1):
            w = mm + nn * tau
            total += 1.0 / (z - w) ** 2 - 1.0 / w**2
            total += 1.0 / (z + w) ** 2 - 1.0 / w**2
    return total


def residual_brute(positions, circulations, v, omega, kernel) -> np.ndarray:
    """Balance residual via plain loops and a caller-supplied scalar kernel."""
    n = len(positions)
    out = np.zeros(n, dtype=complex)
    for j in range(n):
        acc = 0.0 + 0.0j
        for k in range(n):
            if k != j:
                acc += circulations[k] * kernel(positions[j] - positions[k])
        out[j] = -np.conjugate(v) + 1j * omega * np.conjugate(positions[j]) + acc / (2j * np.pi)
    return out


def wirtinger_fd(f, z: complex, h: float = 1e-7) -> tuple[complex, complex]:
    """Central-difference Wirtinger derivatives (d/dz, d/dzbar) of f at z."""
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    d_z = 0.5 * (fx - 1j * fy)
    d_zbar = 0.5 * (fx + 1j * fy)
    return d_z, d_zbar


def angle_track(path, point) -> float:
    """Accumulated continuous argument change of (w - point) along a polyline."""
    total = 0.0
    for a, b in zip(path[:-1], path[1:]):
        total += np.angle((b - point) / (a - point))
    return total
