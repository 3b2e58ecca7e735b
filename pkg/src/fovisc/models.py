"""Discrete viscoelastic environment: a spring in parallel with a
spring/fractional-damper branch, realized as a sampled filter.

The rendered impedance (force per unit position) is

    H(z) = K0 + K1*B1*D(z) / (K1 + B1*D(z)),    D(z) = T^-alpha * sum_i c_i z^-i,

evaluated on the unit circle with z^-i = e^{-i w T i}.  With that convention
the imaginary part of H is nonnegative for positive parameters, i.e. the
dissipative component carries the physical sign (see README, sign
conventions).  Time-domain stepping uses the equivalent recursion

    y[n] = (K1*B1/T^a * sum_i c_i x[n-i] - B1/T^a * sum_{i>=1} c_i y[n-i])
           / (K1 + B1/T^a),
    F[n] = K0*x[n] + y[n],

with zero-padded history before startup (system at rest for t < 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .glkernel import GLKernel, _s_conj_values, build_kernel

__all__ = [
    "FoSlsParams",
    "DiscreteVE",
    "relaxation_response",
    "creep_response",
    "reduce_model",
    "ReducedModel",
    "REDUCTION_KINDS",
]

REDUCTION_KINDS = ("fo_kv", "fo_maxwell", "io_sls", "io_kv", "io_maxwell")


@dataclass(frozen=True)
class FoSlsParams:
    """Constitutive parameters, fixed project-wide to {N, mm, s} units.

    k0     parallel stiffness [N/mm]; sign-unrestricted (identified sets
           can carry k0 < 0 to offset the branch stiffness)
    k1     branch stiffness [N/mm], > 0
    b1     branch fractional damping [N*s^alpha/mm], > 0
    alpha  derivative order in (0, 1]
    """

    k0: float
    k1: float
    b1: float
    alpha: float

    def __post_init__(self):
        for name in ("k0", "k1", "b1", "alpha"):
            v = getattr(self, name)
            if not math.isfinite(float(v)):
                raise ValueError(f"{name} must be finite, got {v}")
        if self.k1 <= 0.0:
            raise ValueError(f"branch stiffness k1 must be positive, got {self.k1}")
        if self.b1 <= 0.0:
            raise ValueError(f"branch damping b1 must be positive, got {self.b1}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"order alpha must lie in (0, 1], got {self.alpha}")


def _branch_filter(params: FoSlsParams, kernel: GLKernel):
    """(b, a) coefficients of the branch filter y = lfilter(b, a, x)."""
    scale = params.b1 / kernel.t_samp**params.alpha
    b = params.k1 * scale * kernel.coeffs
    a = scale * kernel.coeffs.copy()
    a[0] += params.k1
    return b, a


class DiscreteVE:
    """Stateful sampled evaluator of the viscoelastic law.

    Owns ring buffers of the last N+1 positions and last N branch forces,
    zero-initialized.  Stepping is deterministic; one simulation should own
    an instance (state is single-writer), while the frequency-domain methods
    are pure.
    """

    def __init__(self, params: FoSlsParams, kernel: GLKernel):
        if abs(params.alpha - kernel.alpha) > 1e-12:
            raise ValueError(
                f"kernel order {kernel.alpha} does not match parameter order {params.alpha}"
            )
        self.params = params
        self.kernel = kernel
        t_a = kernel.t_samp**params.alpha
        den = params.k1 + params.b1 / t_a
        self._x_gain = (params.k1 * params.b1 / t_a) / den
        self._y_gain = (params.b1 / t_a) / den
        self._c = kernel.coeffs
        self._c_tail = kernel.coeffs[1:]
        self.reset()

    def reset(self):
        """Return to rest: zero position and branch-force history."""
        self._xh = np.zeros(self.kernel.n_mem + 1)
        self._yh = np.zeros(self.kernel.n_mem)

    def force_step(self, x_new: float) -> float:
        """Advance one sample with position x_new [mm]; return force [N]."""
        xh, yh = self._xh, self._yh
        xh[1:] = xh[:-1]
        xh[0] = x_new
        y = self._x_gain * float(np.dot(self._c, xh)) - self._y_gain * float(
            np.dot(self._c_tail, yh)
        )
        if self.kernel.n_mem > 0:
            yh[1:] = yh[:-1]
            yh[0] = y
        return self.params.k0 * x_new + y

    def freq_response(self, omega: float) -> complex:
        """Impedance H(e^{i w T}) [N/mm] for 0 < omega <= pi/T."""
        p, kern = self.params, self.kernel
        omega = float(omega)
        if not (0.0 < omega <= kern.nyquist * (1.0 + 1e-12)):
            raise ValueError(f"omega must lie in (0, pi/T], got {omega}")
        d = complex(_s_conj_values(kern, np.array([omega]))[0]) / kern.t_samp**p.alpha
        den = p.k1 + p.b1 * d
        if abs(den) < 1e-300:
            raise ValueError("singular branch denominator K1 + B1*D(z)")
        return p.k0 + p.k1 * p.b1 * d / den


def relaxation_response(
    params: FoSlsParams, kernel: GLKernel, x0: float, duration: float
) -> tuple[np.ndarray, np.ndarray]:
    """Force history under a held step displacement x0 [mm].

    Returns (t, force) sampled at the kernel period.  The first sample is the
    instantaneous response x0*(K0 + K1*B1/(B1 + K1*T^a)); the tail settles
    toward x0 times the DC stiffness.
    """
    if x0 == 0.0:
        raise ValueError("step displacement must be nonzero")
    if duration <= 0.0:
        raise ValueError("duration must be positive")
    n = int(math.floor(duration / kernel.t_samp)) + 1
    t = np.arange(n) * kernel.t_samp
    x = np.full(n, float(x0))
    b, a = _branch_filter(params, kernel)
    force = params.k0 * x + lfilter(b, a, x)
    return t, force


def creep_response(
    params: FoSlsParams,
    kernel: GLKernel,
    f_hold: float,
    t_hold: float,
    f_recover: float,
    t_recover: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Displacement history under a held force step followed by recovery.

    The force law F[n] = K0 x[n] + y[n] is affine in x[n] at every step, so
    the displacement follows from the exact per-step inversion; in filter
    form x = lfilter(a_branch, den, F) with den[0] = K0*K1 + (K0+K1)*B1/T^a.
    """
    if t_hold <= 0.0 or t_recover < 0.0:
        raise ValueError("hold duration must be positive and recovery nonnegative")
    T = kernel.t_samp
    n_hold = int(math.floor(t_hold / T)) + 1
    n_rec = int(math.floor(t_recover / T)) if t_recover > 0 else 0
    force = np.concatenate([np.full(n_hold, float(f_hold)), np.full(n_rec, float(f_recover))])
    t = np.arange(force.size) * T
    _, a = _branch_filter(params, kernel)
    scale = params.b1 / T**params.alpha
    den = (params.k0 + params.k1) * scale * kernel.coeffs.copy()
    den[0] += params.k0 * params.k1
    if abs(den[0]) < 1e-300:
        raise ValueError("zero instantaneous stiffness: force cannot be inverted for position")
    x = lfilter(a, den, force)
    return t, x


@dataclass(frozen=True)
class ReducedModel:
    """Closed-form evaluator for one of the classical special cases."""

    kind: str
    params: FoSlsParams
    kernel: GLKernel | None = None

    def freq_response(self, omega: float) -> complex:
        p = self.params
        omega = float(omega)
        if omega <= 0.0:
            raise ValueError(f"omega must be positive, got {omega}")
        if self.kind in ("fo_kv", "fo_maxwell"):
            kern = self.kernel
            d = complex(_s_conj_values(kern, np.array([omega]))[0]) / kern.t_samp**p.alpha
            if self.kind == "fo_kv":
                return p.k0 + p.b1 * d
            return p.k1 * p.b1 * d / (p.k1 + p.b1 * d)
        T = self._t_samp
        d1 = (1.0 - np.exp(-1j * omega * T)) / T
        if self.kind == "io_kv":
            return p.k0 + p.b1 * d1
        if self.kind == "io_sls":
            return p.k0 + p.k1 * p.b1 * d1 / (p.k1 + p.b1 * d1)
        return p.k1 * p.b1 * d1 / (p.k1 + p.b1 * d1)  # io_maxwell

    @property
    def _t_samp(self) -> float:
        if self.kernel is None:
            raise ValueError("a kernel (for T) is required to evaluate the reduction")
        return self.kernel.t_samp


def reduce_model(kind: str, params: FoSlsParams, kernel: GLKernel | None = None) -> ReducedModel:
    """Specialized evaluator for a classical model obtained by parameter
    selection: branch stiffness to infinity for the Kelvin-Voigt forms,
    k0 = 0 for the Maxwell forms, alpha = 1 for the integer-order forms.

    Infinite-stiffness forms are dedicated formula paths, never a large-K1
    substitution.  Integer-order kinds force alpha = 1 regardless of the
    supplied order; a kernel supplies T (and the weights for the fractional
    kinds).
    """
    if kind not in REDUCTION_KINDS:
        raise ValueError(f"unsupported reduction kind {kind!r}; expected one of {REDUCTION_KINDS}")
    if kernel is None:
        raise ValueError("reduce_model needs a kernel for the sampling period")
    p = params
    if kind.startswith("io_"):
        p = FoSlsParams(k0=p.k0, k1=p.k1, b1=p.b1, alpha=1.0)
    if kind in ("fo_maxwell", "io_maxwell"):
        p = FoSlsParams(k0=0.0, k1=p.k1, b1=p.b1, alpha=p.alpha)
    if kind in ("fo_kv", "fo_maxwell") and abs(p.alpha - kernel.alpha) > 1e-12:
        kernel = build_kernel(p.alpha, kernel.n_mem, kernel.t_samp)
    return ReducedModel(kind=kind, params=p, kernel=kernel)
