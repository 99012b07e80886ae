"""State-feedback policies for the campaign level (alpha) or the subsidy (sigma).

A policy maps the current impact to an effective parameter value; the
controlled planar system is the planar system re-evaluated with that value
at every state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .analysis import CycleReport, detect_limit_cycle
from .errors import ParameterError
from .meanfield import PlanarState, planar_rhs
from .model import ModelParams

TARGETS = ("alpha", "sigma")
KINDS = ("constant", "linear", "power")


@dataclass(frozen=True)
class ControlPolicy:
    """``base + gain * eps`` (linear) or ``base + gain * eps**exponent`` (power).

    ``base=None`` takes the base value from the model parameters, so the
    constant policy with no base is the uncontrolled system.
    """

    target: str = "alpha"
    kind: str = "constant"
    base: float | None = None
    gain: float = 0.0
    exponent: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ParameterError(f"policy target must be one of {TARGETS}, got {self.target!r}")
        if self.kind not in KINDS:
            raise ParameterError(f"policy kind must be one of {KINDS}, got {self.kind!r}")
        if self.base is not None and self.base < 0:
            raise ParameterError("policy base must be >= 0")
        if self.gain < 0:
            raise ParameterError("policy gain must be >= 0")
        if self.kind == "power" and self.exponent < 1:
            raise ParameterError("power policy exponent must be >= 1")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        if self.kind == "constant":
            return f"{self.target}: constant"
        if self.kind == "linear":
            return f"{self.target}: linear gain {self.gain:g}"
        return f"{self.target}: power gain {self.gain:g} exp {self.exponent:g}"

    def value(self, eps: float, base_params: ModelParams) -> float:
        base = getattr(base_params, self.target) if self.base is None else self.base
        if self.kind == "linear":
            v = base + self.gain * eps
        elif self.kind == "power":
            try:
                v = base + self.gain * eps ** self.exponent
            except OverflowError:
                v = math.inf
        else:
            v = base
        if self.target == "sigma":
            v = min(v, base_params.kappa)
        return v


def effective_params(policy: ControlPolicy, eps: float, base_params: ModelParams) -> ModelParams:
    if eps < 0:
        raise ParameterError("eps must be >= 0")
    return base_params.with_(**{policy.target: policy.value(eps, base_params)})


def controlled_planar_rhs(s, base_params: ModelParams, policy: ControlPolicy) -> tuple[float, float]:
    eps = s.eps if isinstance(s, PlanarState) else float(s[1])
    return planar_rhs(s, effective_params(policy, eps, base_params))


def controlled_chart_field(base_params: ModelParams, policy: ControlPolicy):
    """Controlled field in ``u = logit(x)``, ``v = log(eps)``.

    Arithmetic mirrors the uncontrolled chart field so a zero-gain policy
    reproduces it bit for bit.
    """
    g, t, m = base_params.gamma, base_params.tau, base_params.mu
    kappa = base_params.kappa
    alpha0, sigma0 = base_params.alpha, base_params.sigma

    def fun(_t, y):
        x = expit(y[0])
        one_minus_x = expit(-y[0])
        e = math.exp(y[1]) if y[1] < 700 else math.inf
        a = policy.value(e, base_params) if policy.target == "alpha" else alpha0
        s = policy.value(e, base_params) if policy.target == "sigma" else sigma0
        offset = a + s - kappa - 1.0
        return np.array([2.0 * x + m * e + offset, g * one_minus_x - t])

    return fun


def controlled_natural_field(base_params: ModelParams, policy: ControlPolicy):
    g, t, m = base_params.gamma, base_params.tau, base_params.mu
    kappa = base_params.kappa
    alpha0, sigma0 = base_params.alpha, base_params.sigma

    def fun(_t, y):
        x, e = y[0], y[1]
        a = policy.value(e, base_params) if policy.target == "alpha" else alpha0
        s = policy.value(e, base_params) if policy.target == "sigma" else sigma0
        offset = a + s - kappa - 1.0
        return np.array([x * (1.0 - x) * (2.0 * x + m * e + offset), (g * (1.0 - x) - t) * e])

    return fun


@dataclass
class PolicyOutcome:
    policy: ControlPolicy
    peak_eps: float
    peak_time: float
    cycle: CycleReport
    # effective parameters left the kappa > sigma + alpha + 1 regime at the peak
    regime_left: bool = False

    @property
    def amplitude(self) -> dict[str, tuple[float, float]]:
        return self.cycle.amplitude


@dataclass
class PolicyComparison:
    base_params: ModelParams
    init: PlanarState
    horizon: float
    outcomes: list[PolicyOutcome] = field(default_factory=list)

    def rows(self) -> list[dict]:
        out = []
        for o in self.outcomes:
            out.append({
                "policy": o.policy.name,
                "peak_eps": o.peak_eps,
                "peak_time": o.peak_time,
                "eps_min_last": o.amplitude["eps"][0],
                "eps_max_last": o.amplitude["eps"][1],
                "crossings": len(o.cycle.crossings),
                "converged": o.cycle.converged,
                "regime_left": o.regime_left,
            })
        return out


def compare_policies(base_params: ModelParams, init, policies, horizon: float = 50.0,
                     **cycle_opts) -> PolicyComparison:
    """Integrate each controlled system from ``init`` and collect peak and return-map data."""
    init = init if isinstance(init, PlanarState) else PlanarState(*init)
    if not init.interior:
        raise ParameterError("compare_policies needs an interior initial condition")
    result = PolicyComparison(base_params, init, horizon)
    for policy in policies:
        report = detect_limit_cycle(base_params, init, horizon=horizon,
                                    field=controlled_chart_field(base_params, policy),
                                    **cycle_opts)
        peak_t, peak = report.peak_eps_transient
        eff = effective_params(policy, peak, base_params)
        left = not eff.kappa > eff.sigma + eff.alpha + 1.0
        result.outcomes.append(PolicyOutcome(policy, peak, peak_t, report, left))
    return result
