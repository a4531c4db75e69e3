"""Independent numeric oracles shared by the test modules.

Everything here deliberately avoids the package's own code paths: widths
come from direct half-maximum interpolation, gradients from central
differences, and density matrices from explicit outer products, so tests
compare the library against a second route rather than against itself.
"""

from __future__ import annotations

import numpy as np


def lorentzian(x, amplitude: float, center: float, fwhm: float, baseline: float = 0.0):
    """Peak-normalised Lorentzian on an additive floor."""
    half = 0.5 * fwhm
    x = np.asarray(x, dtype=float)
    return amplitude * half**2 / ((x - center) ** 2 + half**2) + baseline


def interpolated_fwhm(x, y, floor: float = 0.0) -> float:
    """Full width at half maximum above ``floor`` by linear interpolation.

    Walks outward from the tallest sample to the first crossings of the
    half level on each side and interpolates the crossing coordinates.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    peak = int(np.argmax(y))
    half = floor + 0.5 * (y[peak] - floor)

    left = peak
    while left > 0 and y[left] > half:
        left -= 1
    if y[left] > half:
        raise ValueError("left crossing lies outside the sampled window")
    x_left = x[left] + (half - y[left]) * (x[left + 1] - x[left]) / (y[left + 1] - y[left])

    right = peak
    while right < y.size - 1 and y[right] > half:
        right += 1
    if y[right] > half:
        raise ValueError("right crossing lies outside the sampled window")
    x_right = x[right - 1] + (half - y[right - 1]) * (x[right] - x[right - 1]) / (
        y[right] - y[right - 1]
    )
    return float(x_right - x_left)


def central_gradient(objective, params, scales, step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient with a per-parameter step of ``step*scale``."""
    params = np.asarray(params, dtype=float)
    grad = np.empty(params.size)
    for i, scale in enumerate(scales):
        h = step * scale
        up = params.copy()
        up[i] += h
        down = params.copy()
        down[i] -= h
        grad[i] = (objective(up) - objective(down)) / (2.0 * h)
    return grad


def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Random full-rank density matrix (Hermitian, positive, unit trace)."""
    mat = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = mat @ mat.conj().T
    return rho / np.trace(rho).real


def basis_projector(dim: int, index: int) -> np.ndarray:
    """Projector onto one computational basis state."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[index, index] = 1.0
    return rho


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))
