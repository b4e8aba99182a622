"""Exact linear iteration matrices and spectral stability analysis.

On quadratic and bilinear games every algorithm in this package is an
affine map, so K iterations equal the K-th power of a fixed matrix applied
to the stacked state (measured relative to the equilibrium).  This module
builds those matrices block by block, estimates spectral radii of general
dense matrices by Gelfand's formula with repeated squaring, and carries the
structured reductions: the per-singular-value cubic of the extrapolated
scheme on bilinear games (with a closed form for delta = 1) and the quartic
coefficients of optimistic gradient descent on the worst-case function.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .algorithms import Algo, AlgorithmConfig
from .problems import BilinearGame, JointPoint, Problem, QuadraticGame

__all__ = [
    "IterationMatrix",
    "StabilityReport",
    "build_matrix",
    "initial_deviation",
    "state_dist_sq",
    "spectral_radius",
    "cubic_roots",
    "alex_bilinear_cubic",
    "alex_bilinear_rho",
    "ogd_quartic",
]


@dataclass(frozen=True)
class IterationMatrix:
    """One algorithm step on a linear problem, as a matrix over stacked state.

    ``layout`` lists the block names in order, e.g. ("x", "y") for the
    simultaneous schemes, ("x", "y", "y~") for the extrapolated scheme on
    bilinear games, ("x", "x~", "y", "y~") on quadratic games, and
    ("x", "y", "x_prev", "y_prev") for the optimistic scheme.  The matrix
    acts on deviations from the equilibrium lift, so the equilibrium itself
    is the origin.
    """

    M: np.ndarray
    layout: tuple[str, ...]
    block_sizes: tuple[int, ...]

    def block_slice(self, name: str) -> slice:
        i = self.layout.index(name)
        start = sum(self.block_sizes[:i])
        return slice(start, start + self.block_sizes[i])


@dataclass(frozen=True)
class StabilityReport:
    """Spectral radius of an iteration matrix plus how it was obtained."""

    spectral_radius: float
    method: str  # closed_form_cubic | closed_form_delta1 | quartic_roots | gelfand
    stable: bool
    per_block_roots: tuple = field(default=())

    def to_json(self) -> str:
        return json.dumps(
            {
                "spectral_radius": self.spectral_radius,
                "method": self.method,
                "stable": self.stable,
                "per_block_roots": [
                    [[z.real, z.imag] for z in block] for block in self.per_block_roots
                ],
            }
        )


def _blocks(problem: Problem):
    dx, dy = problem.dims
    if isinstance(problem, BilinearGame):
        A = np.zeros((dx, dx))
        C = np.zeros((dy, dy))
        return A, problem.B, C
    return problem.A, problem.B, problem.C


def build_matrix(algo, problem: Problem, cfg: AlgorithmConfig) -> IterationMatrix:
    """Iteration matrix of ``algo`` on a quadratic or bilinear game."""
    algo = Algo(algo)
    if not isinstance(problem, (QuadraticGame, BilinearGame)):
        raise ValueError(f"unsupported problem type {type(problem).__name__}")
    A, B, C = _blocks(problem)
    dx, dy = problem.dims
    Ix, Iy = np.eye(dx), np.eye(dy)
    a, b = cfg.alpha, cfg.beta

    if algo is Algo.SimGDA:
        M = np.block([[Ix - a * A, -a * B], [b * B.T, Iy - b * C]])
        return IterationMatrix(M, ("x", "y"), (dx, dy))

    if algo is Algo.AltGDA:
        Sx = Ix - a * A
        M = np.block([[Sx, -a * B], [b * B.T @ Sx, Iy - b * C - a * b * B.T @ B]])
        return IterationMatrix(M, ("x", "y"), (dx, dy))

    if algo is Algo.EG:
        a1, b1 = cfg.second_steps()
        H = np.block([[Ix - a * A, -a * B], [b * B.T, Iy - b * C]])
        G = np.block([[-a1 * A, -a1 * B], [b1 * B.T, -b1 * C]])
        M = np.eye(dx + dy) + G @ H
        return IterationMatrix(M, ("x", "y"), (dx, dy))

    if algo is Algo.OGD:
        a1, b1 = cfg.second_steps()
        Z = np.zeros
        M = np.block(
            [
                [Ix - a * A, -a * B, a1 * A, a1 * B],
                [b * B.T, Iy - b * C, -b1 * B.T, b1 * C],
                [Ix, Z((dx, dy)), Z((dx, dx)), Z((dx, dy))],
                [Z((dy, dx)), Iy, Z((dy, dx)), Z((dy, dy))],
            ]
        )
        return IterationMatrix(M, ("x", "y", "x_prev", "y_prev"), (dx, dy, dx, dy))

    g, d = cfg.gamma, cfg.delta

    if algo is Algo.AlexGDA:
        if isinstance(problem, BilinearGame):
            M = np.block(
                [
                    [Ix, np.zeros((dx, dy)), -a * B],
                    [b * B.T, Iy, -g * a * b * B.T @ B],
                    [d * b * B.T, Iy, -g * a * d * b * B.T @ B],
                ]
            )
            return IterationMatrix(M, ("x", "y", "y~"), (dx, dy, dy))
        Tx = Ix - g * a * A
        Z = np.zeros
        M = np.block(
            [
                [Ix - a * A, Z((dx, dx)), Z((dx, dy)), -a * B],
                [Tx, Z((dx, dx)), Z((dx, dy)), -g * a * B],
                [b * B.T @ Tx, Z((dy, dx)), Iy - b * C, -g * a * b * B.T @ B],
                [d * b * B.T @ Tx, Z((dy, dx)), Iy - d * b * C, -g * a * d * b * B.T @ B],
            ]
        )
        return IterationMatrix(M, ("x", "x~", "y", "y~"), (dx, dx, dy, dy))

    mx, my = cfg.m_x, cfg.m_y
    Z = np.zeros

    if algo is Algo.SimGDA_M:
        M = np.block(
            [
                [Ix - a * A, -a * B, -a * mx * Ix, Z((dx, dy))],
                [b * B.T, Iy - b * C, Z((dy, dx)), b * my * Iy],
                [A, B, mx * Ix, Z((dx, dy))],
                [B.T, -C, Z((dy, dx)), my * Iy],
            ]
        )
        return IterationMatrix(M, ("x", "y", "vx", "vy"), (dx, dy, dx, dy))

    if algo is Algo.AltGDA_M:
        # v_y uses the gradient at the already-updated x
        Sx = Ix - a * A
        M = np.block(
            [
                [Sx, -a * B, -a * mx * Ix, Z((dx, dy))],
                [b * B.T @ Sx, Iy - b * C - a * b * B.T @ B, -a * b * mx * B.T, b * my * Iy],
                [A, B, mx * Ix, Z((dx, dy))],
                [B.T @ Sx, -C - a * B.T @ B, -a * mx * B.T, my * Iy],
            ]
        )
        return IterationMatrix(M, ("x", "y", "vx", "vy"), (dx, dy, dx, dy))

    if algo is Algo.AlexGDA_M:
        Tx = Ix - g * a * A
        if isinstance(problem, BilinearGame):
            BtB = B.T @ B
            M = np.block(
                [
                    [Ix, Z((dx, dy)), -a * B, -a * mx * Ix, Z((dx, dy))],
                    [b * B.T, Iy, -g * a * b * BtB, -g * a * b * mx * B.T, b * my * Iy],
                    [d * b * B.T, Iy, -g * a * d * b * BtB, -g * a * d * b * mx * B.T, d * b * my * Iy],
                    [Z((dx, dx)), Z((dx, dy)), B, mx * Ix, Z((dx, dy))],
                    [B.T, Z((dy, dy)), -g * a * BtB, -g * a * mx * B.T, my * Iy],
                ]
            )
            return IterationMatrix(M, ("x", "y", "y~", "vx", "vy"), (dx, dy, dy, dx, dy))
        BtB = B.T @ B
        M = np.block(
            [
                [Ix - a * A, Z((dx, dx)), Z((dx, dy)), -a * B, -a * mx * Ix, Z((dx, dy))],
                [Tx, Z((dx, dx)), Z((dx, dy)), -g * a * B, -g * a * mx * Ix, Z((dx, dy))],
                [b * B.T @ Tx, Z((dy, dx)), Iy - b * C, -g * a * b * BtB, -g * a * b * mx * B.T, b * my * Iy],
                [d * b * B.T @ Tx, Z((dy, dx)), Iy - d * b * C, -g * a * d * b * BtB, -g * a * d * b * mx * B.T, d * b * my * Iy],
                [A, Z((dx, dx)), Z((dx, dy)), B, mx * Ix, Z((dx, dy))],
                [B.T @ Tx, Z((dy, dx)), -C, -g * a * BtB, -g * a * mx * B.T, my * Iy],
            ]
        )
        return IterationMatrix(
            M, ("x", "x~", "y", "y~", "vx", "vy"), (dx, dx, dy, dy, dx, dy)
        )

    raise ValueError(f"unsupported algorithm {algo}")


def initial_deviation(
    im: IterationMatrix, z0: JointPoint, z_star: JointPoint
) -> np.ndarray:
    """Stacked initial state minus the equilibrium lift.

    Auxiliary blocks start at their algorithm's initialization: the tilde
    blocks at (x0, y0), velocities at zero, and the optimistic scheme's
    previous iterate at the equilibrium itself so that the stored previous
    gradient is the zero pair.
    """
    dx0 = z0.x - z_star.x
    dy0 = z0.y - z_star.y
    parts = []
    for name in im.layout:
        if name in ("x", "x~"):
            parts.append(dx0)
        elif name in ("y", "y~"):
            parts.append(dy0)
        elif name in ("x_prev", "vx"):
            parts.append(np.zeros_like(dx0))
        else:  # y_prev, vy
            parts.append(np.zeros_like(dy0))
    return np.concatenate(parts)


def state_dist_sq(im: IterationMatrix, w: np.ndarray) -> float:
    """||z - z*||^2 read off the (x, y) blocks of a stacked deviation."""
    x = w[im.block_slice("x")]
    y = w[im.block_slice("y")]
    return float(x @ x + y @ y)


def _two_norm(M: np.ndarray, iters: int = 200, tol: float = 1e-13) -> float:
    # power iteration on M^T M with a fixed, slightly tilted start vector
    n = M.shape[1]
    v = np.ones(n) + np.linspace(0.0, 0.5, n)
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        w = M.T @ (M @ v)
        s = np.linalg.norm(w)
        if s == 0.0:
            return 0.0
        v = w / s
        new = math.sqrt(s)
        if abs(new - est) <= tol * max(new, 1.0):
            return new
        est = new
    return est


def spectral_radius(M: np.ndarray, tol: float = 1e-10) -> float:
    """Gelfand estimate rho ~ ||M^(2^j)||^(1/2^j) with repeated squaring.

    Doubles j until successive estimates differ by less than ``tol`` or
    j = 40.  The 2-norm comes from power iteration on M^T M; intermediate
    powers are rescaled so entries never overflow or underflow.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"need a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    N = M.copy()
    log_scale = 0.0
    prev = None
    for j in range(41):
        nrm = _two_norm(N)
        if nrm == 0.0:
            return 0.0
        est = math.exp((log_scale + math.log(nrm)) / float(2**j))
        if prev is not None and abs(est - prev) < tol:
            return est
        prev = est
        N = N @ N
        log_scale *= 2.0
        peak = np.abs(N).max()
        if peak == 0.0:
            return 0.0
        N /= peak
        log_scale += math.log(peak)
    return prev


def cubic_roots(a2: float, a1: float, a0: float) -> tuple[complex, complex, complex]:
    """All roots of x^3 + a2 x^2 + a1 x + a0, by the trigonometric/Cardano closed form.

    A Newton polish pushes each root to ~1e-10 backward error.
    """
    # depressed cubic t^3 + p t + q via x = t - a2/3
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    scale = max((abs(q) / 2.0) ** 2, (abs(p) / 3.0) ** 3, 1e-300)
    if disc > 1e-12 * scale:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        t1 = u + v
        re = -t1 / 2.0
        im = math.sqrt(3.0) * (u - v) / 2.0
        roots = [complex(t1, 0.0), complex(re, im), complex(re, -im)]
    elif disc < -1e-12 * scale:
        # three distinct real roots
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        theta = math.acos(min(1.0, max(-1.0, arg)))
        roots = [
            complex(m * math.cos((theta - 2.0 * math.pi * k) / 3.0), 0.0) for k in range(3)
        ]
    else:
        # borderline: a repeated root
        if abs(p) < 1e-300:
            roots = [complex(0.0, 0.0)] * 3
        else:
            double = complex(-3.0 * q / (2.0 * p), 0.0)
            roots = [complex(3.0 * q / p, 0.0), double, double]
    shift = a2 / 3.0

    def poly(z):
        return ((z + a2) * z + a1) * z + a0

    out = []
    for t in roots:
        z = t - shift
        # Newton polish; a step near a repeated root is ill-conditioned, so
        # keep it only while it reduces the residual
        for _ in range(2):
            df = (3.0 * z + 2.0 * a2) * z + a1
            if abs(df) < 1e-300:
                break
            z_new = z - poly(z) / df
            if abs(poly(z_new)) >= abs(poly(z)):
                break
            z = z_new
        out.append(z)
    return tuple(out)


def alex_bilinear_cubic(phi: float, gamma: float, delta: float):
    """Per-singular-value cubic of the extrapolated scheme on a bilinear game.

    For phi = alpha*beta*sigma_i^2, one iteration restricted to the i-th
    singular triple has eigenvalues equal to the roots of

        P(lambda) = lambda (lambda-1)^2
                    + phi (gamma (lambda-1) + 1) (delta (lambda-1) + 1).

    Returns ((a2, a1, a0), roots) with P = lambda^3 + a2 lambda^2 + a1 lambda + a0.
    """
    if phi <= 0.0:
        raise ValueError("phi must be positive")
    a2 = phi * gamma * delta - 2.0
    a1 = 1.0 - phi * (2.0 * gamma * delta - gamma - delta)
    a0 = phi * (gamma - 1.0) * (delta - 1.0)
    return (a2, a1, a0), cubic_roots(a2, a1, a0)


def _delta1_branch(phi: float, gamma: float) -> float:
    if gamma * gamma * phi <= 4.0:
        return math.sqrt(max(0.0, 1.0 - (gamma - 1.0) * phi))
    return abs(1.0 - gamma * phi / 2.0) + math.sqrt((gamma * gamma * phi - 4.0) * phi) / 2.0


def alex_bilinear_rho(
    game: BilinearGame, alpha: float, beta: float, gamma: float, delta: float
) -> StabilityReport:
    """Spectral radius of the extrapolated-scheme iteration on a bilinear game.

    Maximizes the per-singular-value root magnitude over all nonzero
    singular values of B; delta = 1 uses the two-branch closed form.
    """
    ab = alpha * beta
    rho = 0.0
    blocks = []
    if delta == 1.0:
        method = "closed_form_delta1"
        for s in game.singular_values:
            phi = ab * s * s
            rho = max(rho, _delta1_branch(phi, gamma))
            _, roots = alex_bilinear_cubic(phi, gamma, delta)
            blocks.append(roots)
    else:
        method = "closed_form_cubic"
        for s in game.singular_values:
            _, roots = alex_bilinear_cubic(ab * s * s, gamma, delta)
            rho = max(rho, max(abs(z) for z in roots))
            blocks.append(roots)
    return StabilityReport(
        spectral_radius=float(rho),
        method=method,
        stable=bool(rho < 1.0),
        per_block_roots=tuple(tuple(b) for b in blocks),
    )


def ogd_quartic(a: float, b: float, kappa_xy: float):
    """Quartic coefficients (p, q, r, l) of the optimistic scheme's coupled block.

    For a = alpha*mu_x and b = beta*mu_y, the coupled (x, y) coordinates of
    the worst-case function satisfy a linear recurrence whose characteristic
    polynomial is lambda^4 - p lambda^3 + q lambda^2 - r lambda + l with

        p = 2 - 2(a+b),
        q = 1 - 3a - 3b + 4ab (kappa_xy^2 + 1),
        r = -a - b + 4ab (kappa_xy^2 + 1),
        l = ab (kappa_xy^2 + 1).
    """
    if a <= 0.0 or b <= 0.0:
        raise ValueError("a and b must be positive")
    k1 = kappa_xy * kappa_xy + 1.0
    p = 2.0 - 2.0 * (a + b)
    q = 1.0 - 3.0 * a - 3.0 * b + 4.0 * a * b * k1
    r = -a - b + 4.0 * a * b * k1
    l = a * b * k1
    return p, q, r, l


def stability_report(
    algo, problem: Problem, cfg: AlgorithmConfig, tol: float = 1e-10
) -> StabilityReport:
    """Stability of (algo, problem, cfg) via the appropriate reduction.

    The extrapolated scheme on bilinear games gets the structured
    closed-form path, canonical OGD on the worst-case game the quartic one;
    everything else goes through the Gelfand estimate on the dense
    iteration matrix.
    """
    algo = Algo(algo)
    if algo is Algo.AlexGDA and isinstance(problem, BilinearGame):
        return alex_bilinear_rho(problem, cfg.alpha, cfg.beta, cfg.gamma, cfg.delta)
    if algo is Algo.OGD and getattr(problem, "kind", "") == "worstcase6d":
        a1, b1 = cfg.second_steps()
        if math.isclose(a1, cfg.alpha / 2.0) and math.isclose(b1, cfg.beta / 2.0):
            return _ogd_worstcase_report(problem, a1, b1)
    im = build_matrix(algo, problem, cfg)
    rho = spectral_radius(im.M, tol=tol)
    return StabilityReport(spectral_radius=rho, method="gelfand", stable=bool(rho < 1.0))


def _ogd_worstcase_report(problem: QuadraticGame, a_half: float, b_half: float):
    # coupled (x, y) block: quartic in a = alpha mu_x, b = beta mu_y;
    # the remaining coordinates follow scalar two-term recurrences
    prm = problem.params
    a = a_half * prm.mu_x
    b = b_half * prm.mu_y
    p, q, r, l = ogd_quartic(a, b, prm.kappa_xy)
    quartic = [complex(z) for z in np.roots([1.0, -p, q, -r, l])]
    blocks = [tuple(quartic)]
    rho = max(abs(z) for z in quartic)
    for c in (a_half * prm.mu_x, a_half * prm.L_x, b_half * prm.mu_y, b_half * prm.L_y):
        roots = np.roots([1.0, -(1.0 - 2.0 * c), -c])
        blocks.append(tuple(complex(z) for z in roots))
        rho = max(rho, max(abs(z) for z in roots))
    return StabilityReport(
        spectral_radius=float(rho),
        method="quartic_roots",
        stable=bool(rho < 1.0),
        per_block_roots=tuple(blocks),
    )
