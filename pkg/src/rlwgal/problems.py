"""The three benchmark problems: a single solitary wave with known exact
solution, the interaction of two solitary waves, and wave generation by a
time-dependent boundary forcing.

Profiles and boundary forcings are small frozen callables (not closures)
so problems can cross process boundaries in parallel tension scans.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SolitonSpec",
    "WaveMakerSpec",
    "exact_soliton",
    "soliton_ic",
    "two_soliton_ic",
    "wavemaker_beta",
    "soliton_invariants",
    "ExactSoliton",
    "WaveMakerForcing",
    "zero_profile",
]


@dataclass(frozen=True)
class SolitonSpec:
    """Solitary wave of amplitude 3c travelling at speed 1 + eps*c."""

    c: float
    x0: float = 0.0
    epsilon: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        arg = self.epsilon * self.c / (self.mu * (1.0 + self.epsilon * self.c))
        if not arg > 0.0:
            raise ValueError("width parameter is not real for these coefficients")

    @property
    def k(self):
        return 0.5 * np.sqrt(
            self.epsilon * self.c / (self.mu * (1.0 + self.epsilon * self.c)))

    @property
    def velocity(self):
        return 1.0 + self.epsilon * self.c

    @property
    def amplitude(self):
        return 3.0 * self.c


def exact_soliton(spec, x, t=0.0):
    """3c / cosh^2(k (x - x0 - (1 + eps c) t))."""
    arg = spec.k * (np.asarray(x, dtype=float) - spec.x0 - spec.velocity * t)
    return spec.amplitude / np.cosh(arg) ** 2


@dataclass(frozen=True)
class ExactSoliton:
    """exact_soliton as a picklable (x, t) callable."""

    spec: SolitonSpec

    def __call__(self, x, t=0.0):
        return exact_soliton(self.spec, x, t)


@dataclass(frozen=True)
class _SolitonProfile:
    spec: SolitonSpec

    def __call__(self, x):
        return exact_soliton(self.spec, x, 0.0)


def soliton_ic(spec):
    """Initial profile callable for the solver."""
    return _SolitonProfile(spec)


def soliton_invariants(spec):
    """Closed-form mass, momentum and energy integrals over the real line.

    For u = 3c sech^2(k xi):  int u = 6c/k,
    int u^2 + mu u_x^2 = 12c^2/k + 48 mu c^2 k / 5,
    int u^3 + 3u^2 = (144 c^3 / 5 + 36 c^2) / k.
    """
    c, k, mu = spec.c, spec.k, spec.mu
    c1 = 6.0 * c / k
    c2 = 12.0 * c * c / k + 48.0 * mu * c * c * k / 5.0
    c3 = (144.0 * c ** 3 / 5.0 + 36.0 * c * c) / k
    return c1, c2, c3


@dataclass(frozen=True)
class _TwoSolitonProfile:
    k1: float
    k2: float
    x1: float
    x2: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a1 = 4.0 * self.k1 ** 2 / (1.0 - 4.0 * self.k1 ** 2)
        a2 = 4.0 * self.k2 ** 2 / (1.0 - 4.0 * self.k2 ** 2)
        return (3.0 * a1 / np.cosh(self.k1 * (x - self.x1)) ** 2
                + 3.0 * a2 / np.cosh(self.k2 * (x - self.x2)) ** 2)


def two_soliton_ic(k1, k2, x1t, x2t):
    """Sum of two solitary humps 3A_j / cosh^2(k_j (x - x_j)) with
    A_j = 4 k_j^2 / (1 - 4 k_j^2)."""
    for k in (k1, k2):
        if abs(1.0 - 4.0 * k * k) < 1e-12:
            raise ValueError(f"wave number {k} makes the amplitude singular")
    return _TwoSolitonProfile(k1, k2, x1t, x2t)


@dataclass(frozen=True)
class WaveMakerSpec:
    """Left-boundary forcing: linear ramp to U0, plateau, ramp back to 0."""

    U0: float
    tau: float
    t0: float

    def __post_init__(self):
        if not 0.0 < self.tau < self.t0 / 2.0:
            raise ValueError(
                f"need 0 < tau < t0/2, got tau={self.tau}, t0={self.t0}")


def wavemaker_beta(spec, t):
    """Forcing value at time t >= 0."""
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t <= spec.tau:
        return spec.U0 * t / spec.tau
    if t < spec.t0 - spec.tau:
        return spec.U0
    if t <= spec.t0:
        return spec.U0 * (spec.t0 - t) / spec.tau
    return 0.0


@dataclass(frozen=True)
class WaveMakerForcing:
    """wavemaker_beta as a picklable t -> value callable."""

    spec: WaveMakerSpec

    def __call__(self, t):
        return wavemaker_beta(self.spec, t)


def zero_profile(x):
    return np.zeros_like(np.asarray(x, dtype=float))
