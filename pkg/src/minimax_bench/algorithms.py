"""Iteration rules of the GDA algorithm family as pure step functions.

Covers simultaneous and alternating GDA, alternating-extrapolation GDA
(gradients at extrapolated points, hyperparameters gamma and delta),
extra-gradient with independent exploration/update step sizes, optimistic
gradient descent in its general two-coefficient form, and heavy-ball
momentum variants of the three GDA schemes.

Every step function maps an explicit :class:`AlgoState` to a new one and
counts gradient-oracle calls: two per iteration for all algorithms except
extra-gradient, which needs four.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .problems import JointPoint, Problem, QuadraticGame, nash_equilibrium

__all__ = [
    "Algo",
    "AlgorithmConfig",
    "AlgoState",
    "TraceRecord",
    "Trace",
    "initial_state",
    "step",
    "step_sim",
    "step_alt",
    "step_alex",
    "step_eg",
    "step_ogd",
    "step_momentum",
    "run",
]

# Any coordinate beyond this magnitude (or non-finite) flags the run as
# divergent instead of crashing; provably divergent cases must be reportable.
DIVERGENCE_LIMIT = 1e150


class Algo(str, enum.Enum):
    SimGDA = "SimGDA"
    AltGDA = "AltGDA"
    AlexGDA = "AlexGDA"
    EG = "EG"
    OGD = "OGD"
    SimGDA_M = "SimGDA_M"
    AltGDA_M = "AltGDA_M"
    AlexGDA_M = "AlexGDA_M"


_ALEX_FAMILY = (Algo.AlexGDA, Algo.AlexGDA_M)
_MOMENTUM_FAMILY = (Algo.SimGDA_M, Algo.AltGDA_M, Algo.AlexGDA_M)


@dataclass(frozen=True)
class AlgorithmConfig:
    """Algorithm identity plus hyperparameters.

    alpha/beta are the primary step sizes.  alpha1/beta1 are consumed only
    by EG (update-step sizes, defaulting to alpha/beta) and OGD (previous
    gradient coefficients, defaulting to alpha/2 and beta/2, which recovers
    the textbook optimistic update x+ = x - 2a g + a g_prev with a=alpha/2).
    gamma/delta are consumed only by the AlexGDA variants, m_x/m_y only by
    the momentum variants (negative momentum is allowed).
    """

    algo: Algo
    alpha: float
    beta: float
    alpha1: float | None = None
    beta1: float | None = None
    gamma: float | None = None
    delta: float | None = None
    m_x: float = 0.0
    m_y: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "algo", Algo(self.algo))
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ValueError("alpha and beta must be positive")
        if self.algo in _ALEX_FAMILY:
            if self.gamma is None or self.delta is None:
                raise ValueError(f"{self.algo.value} needs gamma and delta")
            if self.gamma < 0.0 or self.delta < 0.0:
                raise ValueError("gamma and delta must be >= 0")

    def second_steps(self) -> tuple[float, float]:
        if self.algo is Algo.EG:
            a1 = self.alpha if self.alpha1 is None else self.alpha1
            b1 = self.beta if self.beta1 is None else self.beta1
        else:
            a1 = 0.5 * self.alpha if self.alpha1 is None else self.alpha1
            b1 = 0.5 * self.beta if self.beta1 is None else self.beta1
        if a1 < 0.0 or b1 < 0.0:
            raise ValueError("alpha1 and beta1 must be >= 0")
        return a1, b1

    def calls_per_iter(self) -> int:
        return 4 if self.algo is Algo.EG else 2

    def as_dict(self) -> dict:
        d = {"algo": self.algo.value, "alpha": self.alpha, "beta": self.beta}
        if self.algo in (Algo.EG, Algo.OGD):
            d["alpha1"], d["beta1"] = self.second_steps()
        if self.algo in _ALEX_FAMILY:
            d["gamma"], d["delta"] = self.gamma, self.delta
        if self.algo in _MOMENTUM_FAMILY:
            d["m_x"], d["m_y"] = self.m_x, self.m_y
        return d


@dataclass(frozen=True)
class AlgoState:
    """Explicit algorithm state.

    Only the fields an algorithm consumes are populated: tilde_x/tilde_y
    for the AlexGDA family, prev_gx/prev_gy for OGD, v_x/v_y for the
    momentum family.  grad_calls counts oracle evaluations so far.
    """

    current: JointPoint
    tilde_x: np.ndarray | None = None
    tilde_y: np.ndarray | None = None
    prev_gx: np.ndarray | None = None
    prev_gy: np.ndarray | None = None
    v_x: np.ndarray | None = None
    v_y: np.ndarray | None = None
    grad_calls: int = 0

    @property
    def x(self) -> np.ndarray:
        return self.current.x

    @property
    def y(self) -> np.ndarray:
        return self.current.y


def initial_state(cfg: AlgorithmConfig, z0: JointPoint) -> AlgoState:
    """State at k=0: tilde_y = y0, zero velocities, zero previous gradients."""
    kw: dict = {}
    if cfg.algo in _ALEX_FAMILY:
        kw["tilde_x"] = z0.x.copy()
        kw["tilde_y"] = z0.y.copy()
    if cfg.algo is Algo.OGD:
        kw["prev_gx"] = np.zeros_like(z0.x)
        kw["prev_gy"] = np.zeros_like(z0.y)
    if cfg.algo in _MOMENTUM_FAMILY:
        kw["v_x"] = np.zeros_like(z0.x)
        kw["v_y"] = np.zeros_like(z0.y)
    return AlgoState(current=JointPoint(z0.x.copy(), z0.y.copy()), **kw)


def step_sim(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Simultaneous update: both gradients at the old point."""
    x, y = state.x, state.y
    gx = problem.grad_x(x, y)
    gy = problem.grad_y(x, y)
    return replace(
        state,
        current=JointPoint(x - cfg.alpha * gx, y + cfg.beta * gy),
        grad_calls=state.grad_calls + 2,
    )


def step_alt(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Alternating update: the y-gradient is evaluated at the new x."""
    x, y = state.x, state.y
    x_next = x - cfg.alpha * problem.grad_x(x, y)
    y_next = y + cfg.beta * problem.grad_y(x_next, y)
    return replace(
        state,
        current=JointPoint(x_next, y_next),
        grad_calls=state.grad_calls + 2,
    )


def step_alex(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Alternating update with gradients taken at extrapolated points.

    Exactly two gradient evaluations: g_x at (x_k, tilde_y_k) is reused for
    x_{k+1} and tilde_x_{k+1}; g_y at (tilde_x_{k+1}, y_k) is reused for
    y_{k+1} and tilde_y_{k+1}.  (gamma, delta) = (1, 1) reproduces the
    alternating update and (0, 1) the simultaneous one, bitwise.
    """
    if state.tilde_y is None:
        raise ValueError("AlexGDA state needs tilde_y")
    x, y = state.x, state.y
    gx = problem.grad_x(x, state.tilde_y)
    x_next = x - cfg.alpha * gx
    tx_next = x - (cfg.gamma * cfg.alpha) * gx
    gy = problem.grad_y(tx_next, y)
    y_next = y + cfg.beta * gy
    ty_next = y + (cfg.delta * cfg.beta) * gy
    return replace(
        state,
        current=JointPoint(x_next, y_next),
        tilde_x=tx_next,
        tilde_y=ty_next,
        grad_calls=state.grad_calls + 2,
    )


def step_eg(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Extra-gradient: exploration half-step, then update with half-point gradients."""
    a1, b1 = cfg.second_steps()
    x, y = state.x, state.y
    xh = x - cfg.alpha * problem.grad_x(x, y)
    yh = y + cfg.beta * problem.grad_y(x, y)
    x_next = x - a1 * problem.grad_x(xh, yh)
    y_next = y + b1 * problem.grad_y(xh, yh)
    return replace(
        state,
        current=JointPoint(x_next, y_next),
        grad_calls=state.grad_calls + 4,
    )


def step_ogd(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Optimistic update with a correction from the stored previous gradients.

    At k=0 the previous gradient is the zero pair, so the first step is a
    plain simultaneous step with (alpha, beta).
    """
    if state.prev_gx is None or state.prev_gy is None:
        raise ValueError("OGD state needs prev_gx and prev_gy")
    a1, b1 = cfg.second_steps()
    x, y = state.x, state.y
    gx = problem.grad_x(x, y)
    gy = problem.grad_y(x, y)
    x_next = x - cfg.alpha * gx + a1 * state.prev_gx
    y_next = y + cfg.beta * gy - b1 * state.prev_gy
    return replace(
        state,
        current=JointPoint(x_next, y_next),
        prev_gx=gx,
        prev_gy=gy,
        grad_calls=state.grad_calls + 2,
    )


def step_momentum(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """Heavy-ball variants: accumulate v = m v + g, then displace by step * v.

    Covers SimGDA_M, AltGDA_M and AlexGDA_M; with m_x = m_y = 0 each one
    coincides with its base algorithm.
    """
    if state.v_x is None or state.v_y is None:
        raise ValueError("momentum state needs v_x and v_y")
    x, y = state.x, state.y
    if cfg.algo is Algo.AlexGDA_M:
        vx = cfg.m_x * state.v_x + problem.grad_x(x, state.tilde_y)
        x_next = x - cfg.alpha * vx
        tx_next = x - (cfg.gamma * cfg.alpha) * vx
        vy = cfg.m_y * state.v_y + problem.grad_y(tx_next, y)
        y_next = y + cfg.beta * vy
        ty_next = y + (cfg.delta * cfg.beta) * vy
        return replace(
            state,
            current=JointPoint(x_next, y_next),
            tilde_x=tx_next,
            tilde_y=ty_next,
            v_x=vx,
            v_y=vy,
            grad_calls=state.grad_calls + 2,
        )
    vx = cfg.m_x * state.v_x + problem.grad_x(x, y)
    x_next = x - cfg.alpha * vx
    if cfg.algo is Algo.AltGDA_M:
        vy = cfg.m_y * state.v_y + problem.grad_y(x_next, y)
    else:
        vy = cfg.m_y * state.v_y + problem.grad_y(x, y)
    y_next = y + cfg.beta * vy
    return replace(
        state,
        current=JointPoint(x_next, y_next),
        v_x=vx,
        v_y=vy,
        grad_calls=state.grad_calls + 2,
    )


_STEPPERS = {
    Algo.SimGDA: step_sim,
    Algo.AltGDA: step_alt,
    Algo.AlexGDA: step_alex,
    Algo.EG: step_eg,
    Algo.OGD: step_ogd,
    Algo.SimGDA_M: step_momentum,
    Algo.AltGDA_M: step_momentum,
    Algo.AlexGDA_M: step_momentum,
}


def step(state: AlgoState, problem: Problem, cfg: AlgorithmConfig) -> AlgoState:
    """One iteration of cfg.algo."""
    return _STEPPERS[cfg.algo](state, problem, cfg)


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    grad_calls: int
    dist_sq: float
    lyapunov: float | None = None


@dataclass
class Trace:
    """Per-iteration measurements of one run, plus termination flags."""

    algo: Algo
    records: list[TraceRecord]
    converged: bool
    diverged: bool
    z_star: JointPoint
    final_state: AlgoState
    states: list[AlgoState] | None = None

    @property
    def iters(self) -> int:
        return self.records[-1].iter

    @property
    def grad_calls(self) -> int:
        return self.records[-1].grad_calls

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iter,grad_calls,dist_sq,lyapunov\n")
            for r in self.records:
                lyap = "" if r.lyapunov is None else f"{r.lyapunov:.17g}"
                fh.write(f"{r.iter},{r.grad_calls},{r.dist_sq:.17g},{lyap}\n")


def _state_ok(state: AlgoState) -> bool:
    for v in (state.x, state.y):
        if not np.all(np.isfinite(v)) or np.abs(v).max() > DIVERGENCE_LIMIT:
            return False
    return True


def run(
    problem: Problem,
    cfg: AlgorithmConfig,
    z0: JointPoint,
    eps: float,
    max_iters: int,
    keep_states: bool = False,
    record_lyapunov: bool | None = None,
    z_star: JointPoint | None = None,
) -> Trace:
    """Iterate until ||z_k - z*||^2 <= eps, divergence, or max_iters.

    The stopping distance is measured to the Nash point (for bilinear games,
    the one determined by z0).  A non-finite or astronomically large iterate
    terminates the run with the diverged flag rather than raising.

    When ``record_lyapunov`` is enabled (the default for SimGDA always and
    for AltGDA/AlexGDA on quadratic games), each record carries the value of
    the matching Lyapunov function; the alternating flavors need the next
    iterate, so their value for step k is filled in at step k+1 and the last
    record stays empty.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if z_star is None:
        z_star = nash_equilibrium(problem, z0=z0)

    lyap_kind = None
    if record_lyapunov is None:
        record_lyapunov = cfg.algo in (Algo.SimGDA, Algo.AltGDA, Algo.AlexGDA)
    if record_lyapunov:
        from . import lyapunov as _lyap

        try:
            lyap_kind = _lyap.kind_for(cfg, problem)
        except ValueError:
            lyap_kind = None

    state = initial_state(cfg, z0)
    records = [TraceRecord(0, 0, state.current.dist_sq(z_star))]
    states = [state] if keep_states else None
    converged = records[0].dist_sq <= eps
    diverged = False

    if lyap_kind is not None and lyap_kind.kind == "Sim":
        records[0] = replace(records[0], lyapunov=lyap_kind.psi_sim(state, z_star))

    prev2 = None
    k = 0
    while not converged and not diverged and k < max_iters:
        prev = state
        state = step(state, problem, cfg)
        k += 1
        if keep_states:
            states.append(state)
        if not _state_ok(state):
            diverged = True
            records.append(TraceRecord(k, state.grad_calls, float("inf")))
            break
        d2 = state.current.dist_sq(z_star)
        rec = TraceRecord(k, state.grad_calls, d2)
        if lyap_kind is not None:
            # the alternating Lyapunov values for step k-1 need the step-k iterate
            if lyap_kind.kind == "Sim":
                rec = replace(rec, lyapunov=lyap_kind.psi_sim(state, z_star))
            elif lyap_kind.kind == "Alt":
                records[k - 1] = replace(
                    records[k - 1],
                    lyapunov=lyap_kind.psi_alt(prev, state, problem, z_star),
                )
            elif lyap_kind.kind == "Alex":
                if k == 1:
                    records[0] = replace(
                        records[0],
                        lyapunov=lyap_kind.psi_alex0(prev, state, problem, z_star),
                    )
                else:
                    records[k - 1] = replace(
                        records[k - 1],
                        lyapunov=lyap_kind.psi_alex(prev2, prev, state, problem, z_star),
                    )
        records.append(rec)
        converged = d2 <= eps
        prev2 = prev

    return Trace(
        algo=cfg.algo,
        records=records,
        converged=converged,
        diverged=diverged,
        z_star=z_star,
        final_state=state,
        states=states if keep_states else None,
    )
