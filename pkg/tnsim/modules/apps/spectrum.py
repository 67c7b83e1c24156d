"""
Density of states from the trace f(t) = Tr exp(-iHt).

The trace is d^n <Phi| exp(-iHt) x I |Phi> for the maximally entangled
purification Phi. Samples on t_k = k dt, k = -K..K (f(-t) = conj f(t)),
are multiplied by a window and transformed on the N = 2K + 1 point
frequency grid omega_m = 2 pi m / (N dt), where Parseval holds exactly:

    sum_k |w_k f_k|^2 = (1 / N) sum_m |G_m|^2,   F = dt G / (2 pi).
"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np
from scipy.signal import find_peaks

from exceptions import DomainError
from modules.evolve import SchemeKind, TrotterScheme, apply_layers, trotter_layers
from modules.mpo import HamiltonianSpec, purified_identity
from modules.mps import overlap
from utils.logging import get_logger

logger = get_logger("tnsim.apps.spectrum")

WINDOWS = ("hann", "rectangular")


@dataclass
class DosResult:
    times: np.ndarray
    f_samples: np.ndarray
    omegas: np.ndarray
    spectrum: np.ndarray
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def bin_width(self) -> float:
        return float(self.metadata["bin_width"])


def window_weights(name: str, k: np.ndarray, half_width: int) -> np.ndarray:
    """Symmetric window on k = -K..K; hann vanishes at |k| = K + 1."""
    if name == "hann":
        return np.cos(0.5 * np.pi * k / (half_width + 1)) ** 2
    if name == "rectangular":
        return np.ones_like(k, dtype=float)
    raise DomainError(f"unknown window '{name}', expected one of {WINDOWS}")


def trace_samples(spec: HamiltonianSpec, t_max: float, dt: float, bond: int, order: int = 2,
                  kind: SchemeKind = SchemeKind.EVEN_ODD) -> np.ndarray:
    """f(k dt) for k = 0..K from the evolved purification."""
    n, d = spec.n, spec.d
    steps = int(round(t_max / dt))
    purification = purified_identity(n, d)
    reference = purification.state
    psi = reference
    layers = trotter_layers(spec.with_ancilla(d), TrotterScheme.real_time(dt, kind=kind, order=order))
    scale = float(d) ** n
    samples: List[complex] = [scale * overlap(reference, psi)]
    for _ in range(steps):
        psi, _, _ = apply_layers(psi, layers, bond)
        samples.append(scale * overlap(reference, psi))
    return np.asarray(samples)


def spectrum_from_samples(samples: np.ndarray, dt: float, window: str = "hann") -> DosResult:
    """Windowed transform of f(k dt), k = 0..K, onto the Parseval-exact grid."""
    half = len(samples) - 1
    k = np.arange(-half, half + 1)
    full = np.concatenate([np.conj(samples[:0:-1]), samples])
    weights = window_weights(window, k, half)
    x = weights * full
    points = 2 * half + 1
    omegas = 2.0 * np.pi * k / (points * dt)
    # G_m = sum_k x_k exp(2 pi i m k / N), both indices centred on 0
    g = points * np.fft.fftshift(np.fft.ifft(np.fft.ifftshift(x)))
    spectrum = dt * g / (2.0 * np.pi)
    time_power = float(np.sum(np.abs(x) ** 2))
    freq_power = float(np.sum(np.abs(g) ** 2)) / points
    metadata = {
        "window": window,
        "points": points,
        "dt": dt,
        "t_max": half * dt,
        "bin_width": 2.0 * np.pi / (points * dt),
        "parseval_ratio": freq_power / time_power if time_power > 0 else 1.0,
    }
    return DosResult(k * dt, full, omegas, spectrum, metadata)


def density_of_states(
    spec: HamiltonianSpec,
    t_max: float,
    dt: float,
    bond: int,
    window: str = "hann",
    order: int = 2,
) -> DosResult:
    """
    f(t) = Tr exp(-iHt) and its windowed Fourier transform F(omega).

    Args:
        spec: Open nearest-neighbour chain
        t_max: Largest sampled time (>= dt)
        dt: Time step > 0
        bond: Bond dimension of the evolved purification
        window: "hann" (default) or "rectangular"
        order: Trotter order

    Returns:
        DosResult with the samples, the spectrum and the window metadata
    """
    if dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    if t_max < dt:
        raise DomainError(f"t_max must be >= dt, got t_max={t_max}, dt={dt}")
    if window not in WINDOWS:
        raise DomainError(f"unknown window '{window}', expected one of {WINDOWS}")
    samples = trace_samples(spec, t_max, dt, bond, order)
    result = spectrum_from_samples(samples, dt, window)
    logger.debug("Density of states", n=spec.n, points=result.metadata["points"],
                 parseval_ratio=result.metadata["parseval_ratio"])
    return result


def spectral_peaks(result: DosResult, relative_height: float = 0.05) -> np.ndarray:
    """Frequencies of local maxima of Re F above relative_height * max."""
    values = result.spectrum.real
    top = float(values.max())
    if top <= 0:
        return np.zeros(0)
    indices, _ = find_peaks(values, height=relative_height * top)
    return result.omegas[indices]
