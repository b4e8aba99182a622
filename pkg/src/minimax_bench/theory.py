"""Closed-form step sizes, contraction factors, and complexity bounds.

Each prescription returns the step sizes at the maximum values its
contraction theorem allows, the per-step factor r with which the matching
Lyapunov function contracts, the validity constant A bounding the Lyapunov
function below by A * ||z - z*||^2, and the iteration count

    K = ceil( log(Psi_0 / (A eps)) / log(1/r) )

sufficient for ||z_K - z*||^2 <= eps.

The bilinear helpers give the exact convergent step-size region of the
alternating-extrapolation scheme, the safe step-size constant C_{gamma,delta},
and the optimal delta=1 tuning together with its rate exponent.  The unit-disk
tests decide Schur stability of cubic and quartic polynomials from their
coefficients alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .problems import ProblemParams

__all__ = [
    "RatePrescription",
    "AlexConstants",
    "sim_prescription",
    "alt_prescription",
    "alex_constants",
    "alex_prescription",
    "bilinear_step_region",
    "bilinear_cgd",
    "bilinear_optimal_delta1",
    "schur_cubic",
    "schur_quartic",
]


@dataclass(frozen=True)
class RatePrescription:
    """Step sizes with a certified per-step contraction factor."""

    algo: str
    alpha: float
    beta: float
    contraction_r: float
    validity_constant_A: float

    def __post_init__(self):
        if not (0.0 <= self.contraction_r < 1.0):
            raise ValueError(f"contraction factor must lie in [0, 1), got {self.contraction_r}")
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        # A = 0 only on the perfectly conditioned boundary (kappa_x = 1 with
        # maximal alpha), where the alternating validity bound degenerates
        if self.validity_constant_A < 0.0:
            raise ValueError("A must be nonnegative")

    def complexity_estimate(self, psi0: float, eps: float) -> int:
        """Iterations sufficient for ||z_K - z*||^2 <= eps given Psi_0 = psi0."""
        if psi0 <= 0.0 or eps <= 0.0:
            raise ValueError("psi0 and eps must be positive")
        if self.validity_constant_A == 0.0:
            raise ValueError("validity constant degenerated to 0; bound is vacuous")
        gap = math.log(psi0 / (self.validity_constant_A * eps))
        if gap <= 0.0:
            return 0
        if self.contraction_r == 0.0:
            return 1
        return math.ceil(gap / math.log(1.0 / self.contraction_r))

    def to_json(self, psi0: float | None = None, eps: float | None = None) -> str:
        doc = {
            "algo": self.algo,
            "alpha": self.alpha,
            "beta": self.beta,
            "r": self.contraction_r,
            "A": self.validity_constant_A,
        }
        if psi0 is not None and eps is not None:
            doc["K_of"] = {"psi0": psi0, "eps": eps, "K": self.complexity_estimate(psi0, eps)}
        return json.dumps(doc)


@dataclass(frozen=True)
class AlexConstants:
    """Step-size constants of the extrapolated scheme, at their upper bounds."""

    C1: float
    C2: float
    C3: float
    C4: float

    @property
    def C(self) -> float:
        """Single-constant form: the minimum of the four finer constants."""
        return min(self.C1, self.C2, self.C3, self.C4)


def sim_prescription(params: ProblemParams) -> RatePrescription:
    """Optimal simultaneous-GDA tuning.

    Uses the balanced scaling alpha*mu_x = beta*mu_y = zeta* with zeta*
    minimizing the shifted 2x2 contraction norm for kappa = max(kappa_x,
    kappa_y), yielding r = ((xi^2-1)/(xi^2+1))^2 for
    xi = kappa_xy + sqrt(max(kappa_x, kappa_y) + kappa_xy^2).
    """
    kx, ky, kxy = params.kappa_x, params.kappa_y, params.kappa_xy
    kappa = max(kx, ky)
    root = math.sqrt(kappa + kxy * kxy)
    xi = kxy + root
    zeta = (1.0 / root) * (2.0 * xi / (1.0 + xi * xi))
    alpha = zeta / params.mu_x
    beta = zeta / params.mu_y
    r = ((xi * xi - 1.0) / (xi * xi + 1.0)) ** 2
    return RatePrescription(
        algo="SimGDA",
        alpha=alpha,
        beta=beta,
        contraction_r=r,
        validity_constant_A=min(1.0 / alpha, 1.0 / beta),
    )


def alt_prescription(params: ProblemParams) -> RatePrescription:
    """Alternating-GDA tuning at the maximum certified step sizes.

    alpha = (1/2) min( 1/L_x, sqrt(mu_y)/(L_xy sqrt(L_x)) ) and the
    symmetric expression for beta; r is the maximum of the three ratios
    controlling the two-iterate Lyapunov contraction.
    """
    p = params
    if p.L_xy > 0:
        alpha = 0.5 * min(1.0 / p.L_x, math.sqrt(p.mu_y) / (p.L_xy * math.sqrt(p.L_x)))
        beta = 0.5 * min(1.0 / p.L_y, math.sqrt(p.mu_x) / (p.L_xy * math.sqrt(p.L_y)))
    else:
        alpha, beta = 0.5 / p.L_x, 0.5 / p.L_y
    r = max(
        (1.0 / alpha - p.mu_x) / (1.0 / alpha - 2.0 * beta**2 * p.L_y * p.L_xy**2),
        (1.0 / beta - p.mu_y) / (1.0 / beta - alpha**2 * p.L_x * p.L_xy**2),
        (1.0 / alpha - p.mu_x) / (1.0 / alpha),
    )
    A = min(1.0 / (2.0 * alpha) - p.mu_x, 2.0 * (3.0 / (4.0 * beta) - p.mu_y))
    return RatePrescription(
        algo="AltGDA", alpha=alpha, beta=beta, contraction_r=r, validity_constant_A=A
    )


def alex_constants(gamma: float, delta: float) -> AlexConstants:
    """Step-size constants at equality with their upper bounds; needs gamma, delta > 1."""
    if gamma <= 1.0 or delta <= 1.0:
        raise ValueError("the SCSC contraction guarantee needs gamma > 1 and delta > 1")
    C1 = (gamma - 1.0) / (2.0 * gamma**2)
    C2 = (delta - 1.0) / (2.0 * delta**2)
    C3 = min(
        1.0 / (3.0 * gamma - 2.0),
        (delta - 1.0) / (2.0 * (gamma - 1.0) * delta),
        1.0 / (2.0 * (gamma - 1.0) * (delta - 1.0)),
    )
    C4 = min(
        1.0 / (3.0 * delta - 2.0),
        (gamma - 1.0) / (2.0 * gamma * (delta - 1.0)),
        1.0 / (2.0 * (gamma - 1.0) * (delta - 1.0)),
    )
    return AlexConstants(C1, C2, C3, C4)


def alex_prescription(params: ProblemParams, gamma: float, delta: float) -> RatePrescription:
    """Alternating-extrapolation tuning; r = max(1 - alpha mu_x, 1 - beta mu_y)."""
    p = params
    c = alex_constants(gamma, delta)
    if p.L_xy > 0:
        alpha = min(c.C1 / p.L_x, c.C3 * math.sqrt(p.mu_y / p.mu_x) / p.L_xy)
        beta = min(c.C2 / p.L_y, c.C4 * math.sqrt(p.mu_x / p.mu_y) / p.L_xy)
    else:
        alpha = c.C1 / p.L_x
        beta = c.C2 / p.L_y
    r = max(1.0 - alpha * p.mu_x, 1.0 - beta * p.mu_y)
    A = min(1.0 / (2.0 * alpha), 1.0 / beta)
    return RatePrescription(
        algo="AlexGDA", alpha=alpha, beta=beta, contraction_r=r, validity_constant_A=A
    )


def bilinear_step_region(gamma: float, delta: float) -> float | None:
    """Exact upper bound on alpha*beta*L_xy^2 for linear convergence on bilinear games.

    Returns None when gamma + delta <= 2, where no step size converges.
    """
    if gamma + delta <= 2.0:
        return None
    if 4.0 * gamma * delta - 3.0 * (gamma + delta) + 2.0 >= 0.0:
        return 4.0 / ((2.0 * gamma - 1.0) * (2.0 * delta - 1.0))
    return (gamma + delta - 2.0) / (
        -(gamma - 1.0) * (delta - 1.0) * (gamma + delta - 1.0)
    )


def bilinear_cgd(gamma: float, delta: float) -> float:
    """Constant C_{gamma,delta}; alpha*beta = 1/(C L_xy^2) is a certified-rate choice."""
    if gamma < 1.0 or delta < 1.0 or gamma + delta <= 2.0:
        raise ValueError("need gamma, delta >= 1 with gamma + delta > 2")
    return max(
        (2.0 * gamma - 1.0) * (2.0 * delta - 1.0) / 2.0,
        abs(gamma - delta) * max(gamma, delta) ** 2,
        2.0 * (2.0 * gamma * delta - gamma - delta) ** 2 / (gamma + delta - 2.0),
    )


def bilinear_optimal_delta1(L_xy: float, mu_xy: float) -> tuple[float, float, float]:
    """Optimal delta=1 tuning on bilinear games.

    Returns (alpha*beta, gamma, rate) with
    alpha*beta = (2 mu^2/L^2)/(L^2 + mu^2), gamma = 1 + L^2/mu^2 and rate
    exponent sqrt((L^2 - mu^2)/(L^2 + mu^2)).
    """
    if not (0.0 < mu_xy <= L_xy):
        raise ValueError(f"need 0 < mu_xy <= L_xy, got {mu_xy}, {L_xy}")
    L2, m2 = L_xy * L_xy, mu_xy * mu_xy
    ab = (2.0 * m2 / L2) / (L2 + m2)
    gamma = 1.0 + L2 / m2
    rate = math.sqrt((L2 - m2) / (L2 + m2))
    return ab, gamma, rate


def schur_cubic(a2: float, a1: float, a0: float) -> bool:
    """True iff all roots of x^3 + a2 x^2 + a1 x + a0 lie in the open unit disk."""
    return bool(
        abs(a2 + a0) < 1.0 + a1
        and abs(a2 - 3.0 * a0) < 3.0 - a1
        and a0 * (a0 - a2) + a1 - 1.0 < 0.0
    )


def schur_quartic(a3: float, a2: float, a1: float, a0: float) -> bool:
    """True iff all roots of x^4 + a3 x^3 + a2 x^2 + a1 x + a0 lie in the open unit disk."""
    return bool(
        abs(a1 + a3) < 1.0 + a0 + a2
        and abs(a1 - a3) < 2.0 * (1.0 - a0)
        and a2 - 3.0 * a0 < 3.0
        and (
            a0 + a2 + a0**2 + a1**2 + a0**2 * a2 + a0 * a3**2
            < 1.0 + 2.0 * a0 * a2 + a1 * a3 + a0 * a1 * a3 + a0**3
        )
    )
