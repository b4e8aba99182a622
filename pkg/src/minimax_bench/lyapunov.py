"""Lyapunov functions of the three GDA schemes and contraction verification.

The simultaneous scheme uses the step-size-weighted squared distance

    V(x, y) = (1/alpha) ||x - x*||^2 + (1/beta) ||y - y*||^2.

The alternating scheme couples two adjacent iterates and subtracts a
gradient-norm correction; the extrapolated scheme additionally carries
gradient terms from the previous iteration, with a dedicated formula for
the very first step.  ``verify_contraction`` replays a trace and checks
Psi_{k+1} <= r Psi_k at every step.

The (delta - 1) correction term uses the y-gradient at (tilde_x_k, y_{k-1});
the contraction argument only closes for that gradient component.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .problems import JointPoint, Problem, ProblemParams, QuadraticGame

__all__ = [
    "LyapunovKind",
    "kind_for",
    "ContractionReport",
    "verify_contraction",
    "alt_validity_lower",
    "alex_validity_lower",
]

# Psi values below this are denormal-range noise; ratio checks skip them.
PSI_FLOOR = 1e-280


def _nsq(v: np.ndarray) -> float:
    return float(v @ v)


@dataclass(frozen=True)
class LyapunovKind:
    """Which Lyapunov function to evaluate, plus the constants it needs."""

    kind: str  # Sim | Alt | Alex
    alpha: float
    beta: float
    gamma: float | None = None
    delta: float | None = None
    params: ProblemParams | None = None

    def __post_init__(self):
        if self.kind not in ("Sim", "Alt", "Alex"):
            raise ValueError(f"unknown Lyapunov kind {self.kind!r}")
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.kind in ("Alt", "Alex"):
            if self.params is None:
                raise ValueError(f"{self.kind} Lyapunov needs problem constants")
            if self.alpha >= 1.0 / self.params.mu_x:
                raise ValueError("need alpha < 1/mu_x")
            if self.kind == "Alt" and self.beta >= 1.0 / self.params.mu_y:
                raise ValueError("need beta < 1/mu_y")
        if self.kind == "Alex" and (self.gamma is None or self.delta is None):
            raise ValueError("Alex Lyapunov needs gamma and delta")

    # ------------------------------------------------------------------
    def psi_sim(self, state, z_star: JointPoint) -> float:
        return (
            _nsq(state.x - z_star.x) / self.alpha + _nsq(state.y - z_star.y) / self.beta
        )

    def psi_alt(self, s_k, s_k1, problem: Problem, z_star: JointPoint) -> float:
        """Two-iterate value; s_k1 must be the iterate right after s_k."""
        p = self.params
        a, b = self.alpha, self.beta
        gx = problem.grad_x(s_k.x, s_k.y)
        return (
            (1.0 / a - p.mu_x) * _nsq(s_k.x - z_star.x)
            + 2.0 * (1.0 / b - p.mu_y) * _nsq(s_k.y - z_star.y)
            + (1.0 / a - p.mu_x) * _nsq(s_k1.x - z_star.x)
            - a * (1.0 - a * p.L_x) * _nsq(gx)
        )

    def psi_alex(self, s_km1, s_k, s_k1, problem: Problem, z_star: JointPoint) -> float:
        """Value at step k >= 1; needs the states at k-1, k, and k+1."""
        p = self.params
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        gx_k = problem.grad_x(s_k.x, s_k.tilde_y)
        gy_tilde = problem.grad_y(s_k.tilde_x, s_km1.y)
        gx_km1 = problem.grad_x(s_km1.x, s_km1.tilde_y)
        coef = (
            (g - 1.0) * (d - 1.0) * a * b / (1.0 - a * p.mu_x)
            * p.L_xy * math.sqrt(p.mu_y / p.mu_x)
        )
        return (
            _nsq(s_k.x - z_star.x) / a
            + 2.0 * _nsq(s_k.y - z_star.y) / b
            + _nsq(s_k1.x - z_star.x) / a
            - a * _nsq(gx_k)
            + (d - 1.0) * b * _nsq(gy_tilde)
            + coef * _nsq(gx_km1)
        )

    def psi_alex0(self, s_0, s_1, problem: Problem, z_star: JointPoint) -> float:
        """Value at step k = 0, where tilde_y_0 = y_0."""
        p = self.params
        a, b, g, d = self.alpha, self.beta, self.gamma, self.delta
        gx_0 = problem.grad_x(s_0.x, s_0.tilde_y)
        coef = (
            (g - 1.0) * (d - 1.0) * a * b
            / ((1.0 - a * p.mu_x) * (1.0 - b * p.mu_y))
            * p.L_xy * math.sqrt(p.mu_y / p.mu_x)
        )
        return (
            _nsq(s_0.x - z_star.x) / a
            + 2.0 * _nsq(s_0.y - z_star.y) / b
            + _nsq(s_1.x - z_star.x) / a
            + (coef - a) * _nsq(gx_0)
        )

    def values_along(self, states, problem: Problem, z_star: JointPoint) -> list[float]:
        """Psi_k for every k the stored window allows (len(states) - 1 for Alt/Alex)."""
        n = len(states)
        if self.kind == "Sim":
            return [self.psi_sim(s, z_star) for s in states]
        if self.kind == "Alt":
            return [self.psi_alt(states[k], states[k + 1], problem, z_star) for k in range(n - 1)]
        out = []
        for k in range(n - 1):
            if k == 0:
                out.append(self.psi_alex0(states[0], states[1], problem, z_star))
            else:
                out.append(self.psi_alex(states[k - 1], states[k], states[k + 1], problem, z_star))
        return out


def kind_for(cfg, problem: Problem) -> LyapunovKind:
    """The Lyapunov kind matching an algorithm config; raises for other algorithms."""
    algo = getattr(cfg.algo, "value", cfg.algo)
    if algo == "SimGDA":
        return LyapunovKind("Sim", cfg.alpha, cfg.beta)
    params = problem.params if isinstance(problem, QuadraticGame) else None
    if algo == "AltGDA":
        return LyapunovKind("Alt", cfg.alpha, cfg.beta, params=params)
    if algo == "AlexGDA":
        return LyapunovKind(
            "Alex", cfg.alpha, cfg.beta, gamma=cfg.gamma, delta=cfg.delta, params=params
        )
    raise ValueError(f"no Lyapunov function for {algo}")


@dataclass(frozen=True)
class ContractionReport:
    kind: str
    r: float
    holds: bool
    worst_ratio: float
    first_violation: int | None

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "r": self.r,
                "holds": self.holds,
                "worst_ratio": self.worst_ratio,
                "first_violation": self.first_violation,
            }
        )


def verify_contraction(
    trace, kind: LyapunovKind, problem: Problem, r: float, slack: float = 1e-9
) -> ContractionReport:
    """Check Psi_{k+1} <= r Psi_k (1 + slack) along a trace produced with states.

    Steps where Psi_k is below the denormal floor are skipped.  Reports the
    largest observed ratio and the first violating step, if any.
    """
    if trace.states is None:
        raise ValueError("trace was produced without keep_states=True")
    psis = kind.values_along(trace.states, problem, trace.z_star)
    worst = 0.0
    first = None
    for k in range(len(psis) - 1):
        if psis[k] < PSI_FLOOR:
            continue
        ratio = psis[k + 1] / psis[k]
        worst = max(worst, ratio)
        if first is None and psis[k + 1] > r * psis[k] * (1.0 + slack):
            first = k
    return ContractionReport(
        kind=kind.kind, r=r, holds=first is None, worst_ratio=worst, first_violation=first
    )


def alt_validity_lower(kind: LyapunovKind, s_k, s_k1, z_star: JointPoint) -> float:
    """Certified lower bound on the alternating Psi_k in terms of iterate distances."""
    p = kind.params
    a, b = kind.alpha, kind.beta
    return (
        (1.0 / (2.0 * a) - p.mu_x) * _nsq(s_k.x - z_star.x)
        + 2.0 * (3.0 / (4.0 * b) - p.mu_y) * _nsq(s_k.y - z_star.y)
        + (1.0 / a - p.mu_x) * _nsq(s_k1.x - z_star.x)
    )


def alex_validity_lower(kind: LyapunovKind, s_k, s_k1, z_star: JointPoint) -> float:
    """Certified lower bound on the extrapolated Psi_k."""
    a, b = kind.alpha, kind.beta
    return (
        _nsq(s_k.x - z_star.x) / (2.0 * a)
        + _nsq(s_k.y - z_star.y) / (2.0 * b)
        + _nsq(s_k1.x - z_star.x) / a
    )
