"""
Third-order Q-filter of the disturbance observer.

    Q(s) = (3 tau s + 1) / (tau s + 1)^3

Unit DC gain, relative degree 2. The discrete realization is the bilinear transform of
Q(s), prewarped so that it matches Q exactly at the -3 dB bandwidth, put in state-space
form so that every task axis carries its own filter state.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple, Union

import numpy as np
from scipy import optimize, signal

ORDER = 3


@dataclass(frozen=True)
class QFilterSpec:
    tau: float
    order: int = ORDER

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"Q-filter time constant must be positive, got {self.tau}")
        if self.order != ORDER:
            raise ValueError(f"only the 3rd-order Q-filter is supported, got order {self.order}")

    @property
    def cutoff_hz(self) -> float:
        return 1.0 / (2.0 * math.pi * self.tau)

    @property
    def numerator(self) -> np.ndarray:
        return np.array([3.0 * self.tau, 1.0])

    @property
    def denominator(self) -> np.ndarray:
        t = self.tau
        return np.array([t ** 3, 3.0 * t ** 2, 3.0 * t, 1.0])


def qfilter_from_cutoff(cutoff_hz: float) -> QFilterSpec:
    if not cutoff_hz > 0:
        raise ValueError(f"cutoff must be positive, got {cutoff_hz} Hz")
    return QFilterSpec(tau=1.0 / (2.0 * math.pi * cutoff_hz))


def qfilter_eval(spec: QFilterSpec, omega):
    """Q(j omega), scalar or array."""
    s = 1j * np.asarray(omega, dtype=float)
    value = np.polyval(spec.numerator, s) / np.polyval(spec.denominator, s)
    return complex(value) if np.ndim(value) == 0 else value


def bandwidth(spec: QFilterSpec) -> float:
    """Frequency in rad/s where |Q| falls to 1/sqrt(2)."""
    # |Q| peaks above 1 below the corner, then decays as 3/(tau w)^2
    return optimize.brentq(lambda w: abs(qfilter_eval(spec, w)) ** 2 - 0.5, 1.0 / spec.tau, 10.0 / spec.tau)


def prewarped_rate(spec: QFilterSpec, dt: float) -> float:
    """Bilinear sample rate that maps the bandwidth onto itself."""
    omega_b = bandwidth(spec)
    half_angle = 0.5 * omega_b * dt
    if half_angle >= 0.5 * math.pi:
        raise ValueError(f"Q-filter bandwidth {omega_b:.1f} rad/s is above Nyquist for dt={dt}")
    return 0.5 * omega_b / math.tan(half_angle)


@lru_cache(maxsize=32)
def discrete_coefficients(tau: float, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """Prewarped bilinear-transform transfer function (num, den) in z^-1 powers."""
    spec = QFilterSpec(tau)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    num, den = signal.bilinear(spec.numerator, spec.denominator, fs=prewarped_rate(spec, dt))
    num = np.atleast_1d(np.asarray(num, dtype=float))
    den = np.atleast_1d(np.asarray(den, dtype=float))
    num.setflags(write=False)
    den.setflags(write=False)
    return num, den


@lru_cache(maxsize=32)
def discrete_state_space(tau: float, dt: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    num, den = discrete_coefficients(tau, dt)
    A, B, C, D = signal.tf2ss(num, den)
    A, B, C = A.astype(float), B[:, 0].astype(float), C[0].astype(float)
    for arr in (A, B, C):
        arr.setflags(write=False)
    return A, B, C, float(D[0, 0])


def discrete_response(spec: QFilterSpec, dt: float, omega) -> np.ndarray:
    num, den = discrete_coefficients(spec.tau, dt)
    _, h = signal.freqz(num, den, worN=np.atleast_1d(np.asarray(omega, dtype=float)) * dt)
    return h


class DiscreteQFilter:
    """
    Per-axis discrete Q-filter bank.

    Args:
        spec: continuous filter
        dt: sample time in seconds
        axes: number of independent channels (3 for the task space)
    """

    def __init__(self, spec: QFilterSpec, dt: float, axes: int = 3):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt}")
        self.spec = spec
        self.dt = dt
        self.A, self.B, self.C, self.D = discrete_state_space(spec.tau, dt)
        self.states = np.zeros((axes, self.A.shape[0]))

    def reset(self) -> None:
        self.states[:] = 0.0

    def steady_state(self, u: np.ndarray) -> np.ndarray:
        """Filter states that hold a constant input u indefinitely."""
        x_unit = np.linalg.solve(np.eye(self.A.shape[0]) - self.A, self.B)
        return np.outer(np.asarray(u, dtype=float), x_unit)

    def prime(self, u: np.ndarray) -> None:
        self.states = self.steady_state(u)

    def output(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        return states @ self.C + self.D * u

    def advance(self, states: np.ndarray, u: np.ndarray) -> np.ndarray:
        return states @ self.A.T + np.outer(u, self.B)

    def step(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        y = self.output(self.states, u)
        self.states = self.advance(self.states, u)
        return y


Transfer = Union[complex, Callable[[float], complex]]


def sensitivity_functions(spec: QFilterSpec, R: Transfer, R_N: Transfer, omega: float) -> Tuple[complex, complex]:
    """
    Complementary and disturbance sensitivities of the observer loop at omega.

    T = Q R / (Q (R - R_N) + R_N),  S = R_N (1 - Q) / (Q (R - R_N) + R_N)
    """
    r = complex(R(omega) if callable(R) else R)
    r_n = complex(R_N(omega) if callable(R_N) else R_N)
    q = qfilter_eval(spec, omega)
    den = q * (r - r_n) + r_n
    if abs(den) <= 1e-300 or not np.isfinite(den):
        raise ValueError(f"degenerate sensitivity denominator at omega={omega} rad/s")
    return q * r / den, r_n * (1.0 - q) / den


def mass_damper_transfer(mass: float, damping: float) -> Callable[[float], complex]:
    """R(j omega) = s (m s + b), force per unit displacement."""
    return lambda omega: (1j * omega) * (mass * 1j * omega + damping)
