"""Sampled-data passivity bounds for the rendered viscoelastic law.

A haptic interface with damping b stays passive while rendering H(z) at
period T iff

    b > f(w) = T / (2 (1 - cos w T)) * Re{ (1 - e^{-i w T}) H(e^{i w T}) }

for all w in (0, pi/T].  For odd memory length the maximum of f sits exactly
at the Nyquist frequency, which collapses the bound to the closed form

    b > K0*T/2 + (K1*T/2) * B1*dp / (B1*dp + K1*T^alpha),

with dp the alternating coefficient sum.  Even memory lengths shift the
maximum into the interior, so they are always resolved by grid search plus
local refinement, never by the Nyquist shortcut.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .glkernel import (
    GLKernel,
    _s_conj_values,
    delta_p,
    delta_p_asymptotic,
    delta_p_sufficient,
)
from .models import DiscreteVE, FoSlsParams
from .util import worker_count

__all__ = [
    "PassivityResult",
    "RegionBoundary",
    "passivity_function",
    "max_passivity",
    "bound_closed_form",
    "bound_variants",
    "special_case_bound",
    "region_scan",
    "BOUND_KINDS",
]

BOUND_KINDS = ("fo_sls", "fo_kv", "fo_maxwell", "io_sls", "io_kv", "io_maxwell")

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PassivityResult:
    """Minimum interface damping with its binding frequency and provenance.

    method 'closed_form_odd_n' implies omega_star == pi/T exactly.
    margin_ok is None unless a plant damping was supplied for comparison.
    """

    b_min: float  # N*s/mm
    omega_star: float  # rad/s
    method: str  # closed_form_odd_n | asymptotic | sufficient | grid
    margin_ok: bool | None = None


def _f_values(ve: DiscreteVE, omegas: np.ndarray) -> np.ndarray:
    """f(w) on an array of frequencies in (0, pi/T]."""
    p, kern = ve.params, ve.kernel
    T = kern.t_samp
    th = omegas * T
    s = _s_conj_values(kern, omegas)
    d = s / T**p.alpha
    h = p.k0 + p.k1 * p.b1 * d / (p.k1 + p.b1 * d)
    lead = 1.0 - np.exp(-1j * th)
    return T / (2.0 * (1.0 - np.cos(th))) * (lead * h).real


def passivity_function(ve: DiscreteVE, omega: float) -> float:
    """Colgate right-hand side f(w) [N*s/mm] at one frequency in (0, pi/T]."""
    omega = float(omega)
    nyq = ve.kernel.nyquist
    if not (0.0 < omega <= nyq * (1.0 + 1e-12)):
        raise ValueError(f"omega must lie in (0, pi/T], got {omega}")
    return float(_f_values(ve, np.array([omega]))[0])


def _nyquist_value(params: FoSlsParams, kernel: GLKernel) -> float:
    """f at w = pi/T from the alternating sum (no trigonometric roundoff)."""
    p = params
    dp = delta_p(kernel)
    t_a = kernel.t_samp**p.alpha
    return p.k0 * kernel.t_samp / 2.0 + (p.k1 * kernel.t_samp / 2.0) * p.b1 * dp / (
        p.b1 * dp + p.k1 * t_a
    )


def _golden_max(fun, lo: float, hi: float, tol: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = fun(d)
        else:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = fun(c)
    x = 0.5 * (a + b)
    return x, fun(x)


def max_passivity(ve: DiscreteVE, grid_points: int = 8192) -> PassivityResult:
    """Maximum of f over (0, pi/T], located by parity-aware search.

    Odd memory length: the maximum is at Nyquist; the grid is still swept and
    required to agree.  Even memory length: grid maximum followed by
    golden-section refinement inside the best grid cell (f oscillates under
    truncation, so refinement must stay local).
    """
    if grid_points < 256:
        raise ValueError(f"grid_points must be at least 256, got {grid_points}")
    kern = ve.kernel
    nyq = kern.nyquist
    omegas = np.linspace(0.0, nyq, grid_points + 1)[1:]
    values = _f_values(ve, omegas)
    i_best = int(np.argmax(values))
    f_nyq = _nyquist_value(ve.params, kern)
    if kern.n_mem % 2 == 1:
        slack = 1e-9 * max(1.0, abs(f_nyq))
        if values[i_best] > f_nyq + slack:
            raise AssertionError(
                f"grid maximum {values[i_best]} exceeds the Nyquist value {f_nyq} "
                "for an odd memory length"
            )
        return PassivityResult(b_min=f_nyq, omega_star=nyq, method="closed_form_odd_n")
    lo = omegas[max(i_best - 1, 0)]
    hi = omegas[min(i_best + 1, omegas.size - 1)]
    tol = (omegas[1] - omegas[0]) * 1e-6
    w_star, f_star = _golden_max(lambda w: float(_f_values(ve, np.array([w]))[0]), lo, hi, tol)
    if f_star < values[i_best]:
        w_star, f_star = float(omegas[i_best]), float(values[i_best])
    return PassivityResult(b_min=f_star, omega_star=w_star, method="grid")


def bound_closed_form(
    params: FoSlsParams, kernel: GLKernel, b_plant: float | None = None
) -> PassivityResult:
    """Minimum damping from the odd-memory closed form.

    Even memory lengths are refused (the Nyquist shortcut is invalid there);
    use max_passivity instead.
    """
    if kernel.n_mem % 2 == 0:
        raise ValueError(
            "closed-form bound requires an odd memory length; use max_passivity for even N"
        )
    b_min = _nyquist_value(params, kernel)
    ok = None if b_plant is None else bool(b_plant > b_min)
    return PassivityResult(
        b_min=b_min, omega_star=kernel.nyquist, method="closed_form_odd_n", margin_ok=ok
    )


def bound_variants(params: FoSlsParams, kernel: GLKernel) -> dict[str, float]:
    """Asymptotic (dp -> 2^alpha) and tail-bounded sufficient variants.

    For odd N the ordering is sufficient >= closed form > asymptotic; at
    alpha = 1 all three coincide.
    """
    p = params
    T = kernel.t_samp
    t_a = T**p.alpha

    def from_dp(dp: float) -> float:
        return p.k0 * T / 2.0 + (p.k1 * T / 2.0) * p.b1 * dp / (p.b1 * dp + p.k1 * t_a)

    return {
        "asymptotic": from_dp(delta_p_asymptotic(p.alpha)),
        "sufficient": from_dp(delta_p_sufficient(p.alpha, kernel.n_mem)),
    }


def special_case_bound(kind: str, params: FoSlsParams, kernel: GLKernel) -> float:
    """Minimum damping for one of the classical reductions.

    Kelvin-Voigt kinds use the dedicated infinite-branch-stiffness formula;
    integer-order kinds are exact for any N >= 1 (the alternating sum is 2).
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unsupported kind {kind!r}; expected one of {BOUND_KINDS}")
    p = params
    T = kernel.t_samp
    if kind.startswith("io_"):
        if kernel.n_mem < 1:
            raise ValueError("integer-order reductions need at least one memory term")
        k0 = 0.0 if kind == "io_maxwell" else p.k0
        if kind == "io_kv":
            return k0 * T / 2.0 + p.b1
        return k0 * T / 2.0 + p.k1 * p.b1 * T / (2.0 * p.b1 + p.k1 * T)
    dp = delta_p(kernel)
    t_a = T**p.alpha
    if kind == "fo_kv":
        return p.k0 * T / 2.0 + p.b1 * dp / (2.0 * t_a / T)
    k0 = 0.0 if kind == "fo_maxwell" else p.k0
    return k0 * T / 2.0 + (p.k1 * T / 2.0) * p.b1 * dp / (p.b1 * dp + p.k1 * t_a)


@dataclass(frozen=True)
class RegionBoundary:
    """Largest admissible branch stiffness per damping-grid column (k0 = 0).

    capped marks columns whose bound saturates below the plant damping, where
    the scan cap k1_max was reported instead of a finite boundary.  feasible
    is False when no positive stiffness is admissible at all.
    """

    b1: np.ndarray
    k1: np.ndarray
    capped: np.ndarray
    feasible: bool


def region_scan(
    alpha: float,
    kernel: GLKernel,
    b_plant: float,
    b1_grid,
    k1_max: float,
    resolution: float = 0.1,
    grid_points: int = 2048,
) -> RegionBoundary:
    """Boundary of the admissible (B1, K1) region at k0 = 0.

    Odd memory length inverts the closed form exactly; even memory length
    bisects the grid-search bound down to `resolution` [N/mm].  Columns run
    concurrently on the even-length path (worker cap: FOVISC_THREADS).
    """
    if abs(alpha - kernel.alpha) > 1e-12:
        raise ValueError(f"kernel order {kernel.alpha} does not match alpha {alpha}")
    if k1_max <= 0.0:
        raise ValueError(f"k1_max must be positive, got {k1_max}")
    b1_grid = np.asarray(list(b1_grid), dtype=float)
    if np.any(b1_grid <= 0.0):
        raise ValueError("b1 grid values must be positive")
    k1 = np.zeros(b1_grid.size)
    capped = np.zeros(b1_grid.size, dtype=bool)
    if b_plant <= 0.0:
        # bound -> 0+ as K1 -> 0+, so a nonpositive budget admits nothing
        return RegionBoundary(b1=b1_grid, k1=k1, capped=capped, feasible=False)

    T = kernel.t_samp
    t_a = T**alpha
    if kernel.n_mem % 2 == 1:
        dp = delta_p(kernel)
        for j, b1 in enumerate(b1_grid):
            sup = (T / 2.0) * b1 * dp / t_a
            if b_plant >= sup:
                k1[j], capped[j] = k1_max, True
                continue
            val = 2.0 * b_plant * b1 * dp / (T * b1 * dp - 2.0 * b_plant * t_a)
            if val >= k1_max:
                k1[j], capped[j] = k1_max, True
            else:
                k1[j] = val
        return RegionBoundary(b1=b1_grid, k1=k1, capped=capped, feasible=True)

    def column(b1: float) -> tuple[float, bool]:
        def bound(k1_val: float) -> float:
            p = FoSlsParams(k0=0.0, k1=k1_val, b1=b1, alpha=alpha)
            return max_passivity(DiscreteVE(p, kernel), grid_points).b_min

        if bound(k1_max) <= b_plant:
            return k1_max, True
        lo, hi = 0.0, k1_max
        while hi - lo > resolution:
            mid = 0.5 * (lo + hi)
            if bound(mid) <= b_plant:
                lo = mid
            else:
                hi = mid
        return lo, False

    with ThreadPoolExecutor(max_workers=worker_count(b1_grid.size)) as pool:
        for j, (val, cap) in enumerate(pool.map(column, b1_grid)):
            k1[j], capped[j] = val, cap
    return RegionBoundary(b1=b1_grid, k1=k1, capped=capped, feasible=True)
