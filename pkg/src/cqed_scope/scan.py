"""Spectral scans: emission versus laser wavelength and drive power.

A scan point is one steady-state solve of the master equation with the
laser at a given wavelength; the recorded signal is the photon flux of the
observed decay channel, ``2*kappa*<a^+a>`` for cavity emission or
``2*gamma*<sigma^+sigma>`` for direct dot emission.  Grid points are
independent, so they may be evaluated concurrently; results are assembled
in grid order and are bit-identical for any worker count.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import fit as _fit
from .analytic import (
    LinewidthModelParams,
    combined_linewidth,
    dispersive_linewidths,
    polariton_frequencies,
)
from .dataset import ScanKind, SpectrumDataset
from .errors import ConfigError, ScanError, TruncationError
from .lindblad import build_hamiltonian, build_liouvillian, steady_state, truncation_check
from .model import (
    DriveSpec,
    DriveTarget,
    IncoherentChannels,
    SPEED_OF_LIGHT_NM_GHZ,
    SystemParams,
    TWO_PI,
    angular_frequency_to_wavelength,
    wavelength_to_angular_frequency,
)

#: Laser grids must stay within this distance of both resonances (nm).
GRID_GUARD_NM = 5.0


class EmissionChannel(enum.Enum):
    CAVITY = "cavity"
    QD = "qd"


def _emission_signal(params: SystemParams, observe: EmissionChannel, observables: dict) -> float:
    if observe is EmissionChannel.CAVITY:
        value = 2.0 * params.kappa * float(observables["n_cavity"])
    else:
        value = 2.0 * params.gamma * float(observables["n_qd"])
    if value < 0.0:
        if value < -1e-12:
            raise ScanError(f"negative emission signal {value:.3e}")
        value = 0.0
    return value


def _solve_point(
    params: SystemParams,
    drive_template: DriveSpec,
    channels: IncoherentChannels | None,
    observe: EmissionChannel,
    n_max: int,
    wavelength_nm: float,
) -> float:
    drive = drive_template.with_laser_frequency(wavelength_to_angular_frequency(wavelength_nm))
    try:
        ham = build_hamiltonian(params, drive, n_max)
        ss = steady_state(build_liouvillian(ham, params, channels))
    except Exception as exc:
        raise ScanError(f"steady state failed at {wavelength_nm:.6f} nm: {exc}") from exc
    return _emission_signal(params, observe, ss.observables)


def scan_laser(
    params: SystemParams,
    drive_template: DriveSpec,
    wavelengths_nm: np.ndarray,
    observe: EmissionChannel,
    n_max: int,
    channels: IncoherentChannels | None = None,
    workers: int | None = None,
    check_truncation: bool = True,
) -> SpectrumDataset:
    """Steady emission while stepping the laser across a wavelength grid.

    Parameters
    ----------
    params, drive_template, channels
        System description; the template's laser frequency is replaced per
        grid point.
    wavelengths_nm
        Strictly increasing grid, at least 5 points, each within 5 nm of
        both bare resonances.
    observe
        Which decay channel feeds the detector.
    n_max
        Fock cutoff; checked against ``n_max + 2`` at the grid centre
        unless ``check_truncation`` is disabled.
    workers
        Number of threads; point order in the output never depends on it.
    """
    grid = np.asarray(wavelengths_nm, dtype=float)
    if grid.ndim != 1 or grid.size < 5:
        raise ValueError("wavelength grid needs at least 5 points")
    if not np.all(np.diff(grid) > 0.0):
        raise ValueError("wavelength grid must be strictly increasing")
    for name, omega in (("qd", params.omega_d), ("cavity", params.omega_c)):
        resonance = angular_frequency_to_wavelength(omega)
        distance = float(np.abs(grid - resonance).max())
        if distance > GRID_GUARD_NM:
            raise ValueError(
                f"grid strays {distance:.2f} nm from the {name} resonance "
                f"(limit {GRID_GUARD_NM} nm); check units"
            )

    if check_truncation:
        centre = float(grid[grid.size // 2])
        probe = drive_template.with_laser_frequency(wavelength_to_angular_frequency(centre))
        converged, change = truncation_check(params, probe, n_max, channels)
        if not converged:
            raise TruncationError(
                f"cutoff {n_max} not converged (relative change {change:.2e}); increase it"
            )

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(
                pool.map(
                    lambda lam: _solve_point(params, drive_template, channels, observe, n_max, lam),
                    grid,
                )
            )
    else:
        values = [
            _solve_point(params, drive_template, channels, observe, n_max, lam) for lam in grid
        ]

    return SpectrumDataset(
        kind=ScanKind.LASER_WAVELENGTH,
        x=grid,
        y=np.array(values),
        x_unit="nm",
        y_unit="intensity",
        meta={
            "observe": observe.value,
            "target": drive_template.target.value,
            "n_max": n_max,
        },
    )


def _predicted_fwhm(params: SystemParams, drive: DriveSpec) -> float:
    """A priori linewidth used only for sizing scan windows (rad/ns)."""
    if drive.target is DriveTarget.QD:
        model = LinewidthModelParams.from_system(params, alpha=1.0)
        width = model.delta_omega_c + model.delta_omega_0 * np.sqrt(1.0 + drive.p_tilde(params))
    else:
        if params.g == 0.0:
            width = 2.0 * params.kappa
        else:
            width = dispersive_linewidths(params).cavity_like
    return float(width)


def _scan_centre(params: SystemParams, drive: DriveSpec) -> float:
    """Dressed resonance of the driven branch (rad/ns)."""
    bare = params.omega_d if drive.target is DriveTarget.QD else params.omega_c
    if params.g == 0.0:
        return bare
    return float(polariton_frequencies(params).branch_near(bare).real)


def wavelength_window(
    centre_omega: float, fwhm_omega: float, span_fwhm: float, points: int
) -> np.ndarray:
    """Build an ascending wavelength grid covering ``span_fwhm`` linewidths."""
    if not np.isfinite(fwhm_omega) or fwhm_omega <= 0.0:
        raise ConfigError(f"cannot size a scan window from predicted width {fwhm_omega!r}")
    centre_nm = angular_frequency_to_wavelength(centre_omega)
    fwhm_nm = centre_nm**2 * (fwhm_omega / TWO_PI) / SPEED_OF_LIGHT_NM_GHZ
    half = 0.5 * span_fwhm * fwhm_nm
    return np.linspace(centre_nm - half, centre_nm + half, points)


def auto_scan_window(
    params: SystemParams, drive: DriveSpec, span_fwhm: float, points: int
) -> np.ndarray:
    """Wavelength grid centred on the driven branch, sized from its predicted width."""
    centre = _scan_centre(params, drive)
    predicted = _predicted_fwhm(params, drive)
    return wavelength_window(centre, predicted, span_fwhm, points)


@dataclass(frozen=True, eq=False)
class PowerSweepResult:
    """Saturation curve plus per-power fitted linewidths.

    ``linewidths`` is ``None`` when no positive power was swept; powers that
    could not produce a linewidth (zero drive) are listed in
    ``skipped_powers``.
    """

    saturation: SpectrumDataset
    linewidths: SpectrumDataset | None
    skipped_powers: tuple[float, ...]


def power_sweep(
    params: SystemParams,
    drive_template: DriveSpec,
    powers_uw: np.ndarray,
    observe: EmissionChannel,
    n_max: int,
    channels: IncoherentChannels | None = None,
    scan_points: int = 201,
    span_fwhm: float = 6.0,
    workers: int | None = None,
) -> PowerSweepResult:
    """Emulate a power series: one laser scan per drive power.

    For every power the laser is scanned across the driven branch over a
    window of at least ``span_fwhm`` predicted linewidths (minimum 201
    points); the on-resonance signal goes into the saturation dataset and a
    Lorentzian fit of the scan yields the linewidth dataset (GHz).
    """
    if drive_template.alpha is None:
        raise ValueError("power sweeps need a power-style drive template (alpha set)")
    powers = np.asarray(powers_uw, dtype=float)
    if powers.ndim != 1 or powers.size == 0:
        raise ValueError("power grid must be a non-empty 1-d array")
    if np.any(np.diff(powers) <= 0.0):
        raise ValueError("power grid must be strictly increasing")
    if float(powers[0]) < 0.0:
        raise ValueError("powers must be >= 0")
    scan_points = max(int(scan_points), 201)
    span_fwhm = max(float(span_fwhm), 6.0)

    centre = _scan_centre(params, drive_template)
    centre_nm = angular_frequency_to_wavelength(centre)

    checked_truncation = False
    intensities: list[float] = []
    fitted_powers: list[float] = []
    fitted_fwhm_ghz: list[float] = []
    skipped: list[float] = []
    for power in powers:
        drive = drive_template.with_power(float(power)).with_laser_frequency(centre)
        if power == 0.0:
            intensities.append(0.0)
            skipped.append(float(power))
            continue
        predicted = _predicted_fwhm(params, drive)
        grid = wavelength_window(centre, predicted, span_fwhm, scan_points)
        dataset = scan_laser(
            params,
            drive,
            grid,
            observe,
            n_max,
            channels=channels,
            workers=workers,
            check_truncation=not checked_truncation,
        )
        checked_truncation = True
        try:
            lor = _fit.fit_lorentzian(dataset)
        except Exception as exc:
            raise ScanError(f"linewidth fit failed at {power} uW: {exc}") from exc
        if not lor.converged:
            raise ScanError(f"linewidth fit did not converge at {power} uW: {lor.message}")
        fwhm_nm = lor.params["fwhm"]
        centre_fit_nm = lor.params["center"]
        fitted_powers.append(float(power))
        fitted_fwhm_ghz.append(fwhm_nm * SPEED_OF_LIGHT_NM_GHZ / centre_fit_nm**2)
        intensities.append(
            _solve_point(params, drive, channels, observe, n_max, centre_nm)
        )

    meta = {
        "observe": observe.value,
        "target": drive_template.target.value,
        "alpha_per_uw": drive_template.alpha,
        "n_max": n_max,
    }
    saturation = SpectrumDataset(
        kind=ScanKind.POWER_SWEEP,
        x=powers,
        y=np.array(intensities),
        x_unit="uW",
        y_unit="intensity",
        meta=dict(meta),
    )
    linewidths = None
    if fitted_powers:
        linewidths = SpectrumDataset(
            kind=ScanKind.POWER_SWEEP,
            x=np.array(fitted_powers),
            y=np.array(fitted_fwhm_ghz),
            x_unit="uW",
            y_unit="fwhm_ghz",
            meta=dict(meta),
        )
    return PowerSweepResult(
        saturation=saturation, linewidths=linewidths, skipped_powers=tuple(skipped)
    )


def synthesize_noisy(dataset: SpectrumDataset, relative_noise: float, seed: int) -> SpectrumDataset:
    """Multiplicative Gaussian noise: ``y * (1 + relative_noise * u)``.

    ``u`` are standard normal draws from a generator seeded with ``seed``,
    so the output is bit-for-bit reproducible.  ``relative_noise`` must lie
    in [0, 0.5]; zero returns an identical copy.
    """
    if not 0.0 <= relative_noise <= 0.5:
        raise ValueError(f"relative noise must be within [0, 0.5], got {relative_noise}")
    rng = np.random.default_rng(seed)
    factors = 1.0 + relative_noise * rng.standard_normal(dataset.y.size)
    meta = dict(dataset.meta)
    meta.update({"relative_noise": relative_noise, "noise_seed": seed})
    return SpectrumDataset(
        kind=dataset.kind,
        x=dataset.x.copy(),
        y=dataset.y * factors,
        x_unit=dataset.x_unit,
        y_unit=dataset.y_unit,
        meta=meta,
    )
