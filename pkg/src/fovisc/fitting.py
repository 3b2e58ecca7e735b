"""Passivity-constrained identification from creep and relaxation records.

The four constitutive parameters are fit by multi-start Nelder-Mead on a
smooth reparameterization (log branch stiffness/damping, logit order,
unconstrained parallel stiffness), minimizing the mean normalized RMSE over
the supplied experiments with a quadratic penalty whenever the closed-form
minimum damping exceeds the available plant damping.  The penalty weight is
ramped tenfold over a few outer rounds so the interior optimum is not
distorted; feasibility of the returned set is re-verified against the bound
afterwards, never trusted from the penalty.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .glkernel import build_kernel
from .models import FoSlsParams, creep_response, relaxation_response
from .passivity import bound_closed_form
from .util import worker_count

__all__ = [
    "ExperimentData",
    "FitResult",
    "FitConfig",
    "CreepProtocol",
    "RelaxationProtocol",
    "nrmse",
    "fit",
    "synth_experiment",
]

NORMALIZATIONS = ("range", "mean", "rms")

_ALPHA_LO = 0.01  # logit floor keeps the order away from the degenerate spring

# Search box: wide enough for any plausible material in {N, mm, s} units,
# finite so the penalty cannot push candidates into degenerate corners
# (astronomical stiffness with vanishing damping still "satisfies" the bound).
_K0_BOX = 1e3
_LOG_BOX = math.log(1e3)


@dataclass(frozen=True)
class CreepProtocol:
    """Held force then partial unload, displacement observed throughout."""

    f_hold: float = 3.0  # N
    t_hold: float = 3.0  # s
    f_recover: float = 0.5  # N
    t_recover: float = 3.0  # s


@dataclass(frozen=True)
class RelaxationProtocol:
    """Held deformation, force observed."""

    x0: float = 5.0  # mm
    duration: float = 3.0  # s


@dataclass(frozen=True)
class ExperimentData:
    """One recorded protocol: displacement [mm] for creep, force [N] for
    relaxation, on a strictly increasing uniform time grid."""

    kind: str  # 'creep' | 'relaxation'
    time: np.ndarray  # s
    values: np.ndarray
    stimulus: CreepProtocol | RelaxationProtocol

    def __post_init__(self):
        if self.kind not in ("creep", "relaxation"):
            raise ValueError(f"kind must be 'creep' or 'relaxation', got {self.kind!r}")
        t = np.asarray(self.time, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time grid needs at least two samples")
        dt = np.diff(t)
        if np.any(dt <= 0.0):
            raise ValueError("time stamps must be strictly increasing")
        if np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise ValueError("time grid must be uniform")
        if len(self.values) != t.size:
            raise ValueError("time and value lengths differ")

    @property
    def t_samp(self) -> float:
        return float(self.time[1] - self.time[0])


@dataclass(frozen=True)
class FitResult:
    params: FoSlsParams
    n_mem: int
    nrmse: float
    passivity_ok: bool
    objective_evals: int
    converged: bool


@dataclass(frozen=True)
class FitConfig:
    b_plant: float = 0.0025  # N*s/mm available for dissipation
    n_starts: int = 8
    max_evals_per_start: int = 20000
    penalty_rounds: int = 3
    penalty_weight: float = 10.0  # first-round weight, ramped x10 per round
    normalization: str = "range"
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError("need at least one start")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"normalization must be one of {NORMALIZATIONS}")


def nrmse(predicted, measured, normalization: str = "range") -> float:
    """Root-mean-square error over the measured signal's scale.

    The default scale is the measured range (max - min); 'mean' and 'rms'
    are available for comparability with other conventions.
    """
    predicted = np.asarray(predicted, dtype=float)
    measured = np.asarray(measured, dtype=float)
    if predicted.shape != measured.shape or measured.size < 2:
        raise ValueError("series must have equal length >= 2")
    if normalization == "range":
        scale = float(np.max(measured) - np.min(measured))
    elif normalization == "mean":
        scale = abs(float(np.mean(measured)))
    elif normalization == "rms":
        scale = float(np.sqrt(np.mean(measured**2)))
    else:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    if scale <= 0.0:
        raise ValueError("measured series has zero scale; NRMSE undefined")
    return float(np.sqrt(np.mean((predicted - measured) ** 2))) / scale


def synth_experiment(
    params: FoSlsParams,
    kernel,
    protocol: CreepProtocol | RelaxationProtocol,
    noise_sd: float = 0.0,
    seed: int | None = None,
    average_16: bool = False,
) -> ExperimentData:
    """Model output under a protocol, optionally with additive Gaussian noise.

    average_16 emulates averaging 16 repeated trials (noise scaled by 1/4).
    """
    if isinstance(protocol, RelaxationProtocol):
        t, values = relaxation_response(params, kernel, protocol.x0, protocol.duration)
        kind = "relaxation"
    elif isinstance(protocol, CreepProtocol):
        t, values = creep_response(
            params, kernel, protocol.f_hold, protocol.t_hold, protocol.f_recover, protocol.t_recover
        )
        kind = "creep"
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    if noise_sd < 0.0:
        raise ValueError("noise_sd must be nonnegative")
    if noise_sd > 0.0:
        sd = noise_sd / 4.0 if average_16 else noise_sd
        values = values + np.random.default_rng(seed).normal(0.0, sd, size=values.size)
    return ExperimentData(kind=kind, time=t, values=values, stimulus=protocol)


def _theta_to_params(theta: np.ndarray) -> FoSlsParams:
    k0, log_k1, log_b1, u = theta
    alpha = _ALPHA_LO + (1.0 - _ALPHA_LO) / (1.0 + math.exp(-u))
    return FoSlsParams(k0=float(k0), k1=math.exp(log_k1), b1=math.exp(log_b1), alpha=alpha)


def _predict(params: FoSlsParams, kernel, exp: ExperimentData) -> np.ndarray:
    s = exp.stimulus
    if exp.kind == "relaxation":
        _, pred = relaxation_response(params, kernel, s.x0, s.duration)
    else:
        _, pred = creep_response(params, kernel, s.f_hold, s.t_hold, s.f_recover, s.t_recover)
    n = exp.values.size
    if pred.size < n:
        raise ValueError("protocol shorter than the measured record")
    return pred[:n]


def fit(
    data: ExperimentData | list[ExperimentData],
    n_mem: int,
    config: FitConfig = FitConfig(),
) -> FitResult:
    """Identify the constitutive parameters from one or more experiments.

    Deterministic given config.seed.  Returns the best candidate even when
    the evaluation budget runs out, with converged = False in that case.
    """
    experiments = [data] if isinstance(data, ExperimentData) else list(data)
    if not experiments:
        raise ValueError("need at least one experiment")
    if n_mem % 2 == 0:
        raise ValueError("memory length must be odd so the closed-form bound applies")
    t_samp = experiments[0].t_samp
    for exp in experiments[1:]:
        if abs(exp.t_samp - t_samp) > 1e-9 * t_samp:
            raise ValueError("experiments must share one sampling period")

    def make_objective():
        counter = [0]

        def objective(theta: np.ndarray, weight: float) -> float:
            counter[0] += 1
            k0, log_k1, log_b1, u = (float(v) for v in theta)
            outside = (
                max(0.0, abs(k0) - _K0_BOX)
                + max(0.0, abs(log_k1) - _LOG_BOX)
                + max(0.0, abs(log_b1) - _LOG_BOX)
                + max(0.0, abs(u) - 50.0)
            )
            if outside > 0.0:
                return 1e9 * (1.0 + outside)  # sloped wall so the simplex walks back
            try:
                params = _theta_to_params(theta)
            except (ValueError, OverflowError):
                return 1e9
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    kern = build_kernel(params.alpha, n_mem, t_samp)
                    errs = [
                        nrmse(_predict(params, kern, exp), exp.values, config.normalization)
                        for exp in experiments
                    ]
                    cost = float(np.mean(errs))
                    excess = bound_closed_form(params, kern).b_min - config.b_plant
            except (ValueError, FloatingPointError):
                return 1e9
            if not math.isfinite(cost):
                return 1e9
            if excess > 0.0:
                cost += weight * (excess / max(config.b_plant, 1e-12)) ** 2
            return cost

        return objective, counter

    rng = np.random.default_rng(config.seed)
    starts = [np.array([0.0, 0.0, 0.0, 0.0])]  # k0=0, k1=b1=1, alpha~0.5
    while len(starts) < config.n_starts:
        starts.append(
            np.array(
                [
                    rng.uniform(-5.0, 5.0),
                    rng.uniform(math.log(0.1), math.log(50.0)),
                    rng.uniform(math.log(0.1), math.log(50.0)),
                    rng.uniform(-3.0, 3.0),
                ]
            )
        )

    budget = max(config.max_evals_per_start // config.penalty_rounds, 100)
    weights = [config.penalty_weight * 10.0**r for r in range(config.penalty_rounds)]

    def run_start(theta0: np.ndarray) -> tuple[float, np.ndarray, bool, int]:
        objective, counter = make_objective()
        theta = theta0
        success = False
        for w in weights:
            res = minimize(
                objective,
                theta,
                args=(w,),
                method="Nelder-Mead",
                options={"maxfev": budget, "xatol": 1e-8, "fatol": 1e-12},
            )
            theta, success = res.x, bool(res.success)
        return objective(theta, weights[-1]), theta, success, counter[0]

    with ThreadPoolExecutor(max_workers=worker_count(len(starts))) as pool:
        outcomes = list(pool.map(run_start, starts))
    evals = sum(o[3] for o in outcomes)
    _, best_theta, best_ok, _ = min(outcomes, key=lambda o: o[0])

    params = _theta_to_params(best_theta)
    kern = build_kernel(params.alpha, n_mem, t_samp)
    final_err = float(
        np.mean(
            [
                nrmse(_predict(params, kern, exp), exp.values, config.normalization)
                for exp in experiments
            ]
        )
    )
    passivity_ok = bool(bound_closed_form(params, kern).b_min <= config.b_plant)
    return FitResult(
        params=params,
        n_mem=n_mem,
        nrmse=final_err,
        passivity_ok=passivity_ok,
        objective_evals=evals,
        converged=best_ok,
    )
