"""Problem instances for smooth saddle-point optimization.

Provides strongly-convex-strongly-concave (SCSC) quadratic games

    f(x, y) = 1/2 x^T A x + x^T B y - 1/2 y^T C y,    A, C positive definite,

unconstrained bilinear games f(x, y) = x^T B y, the 6-dimensional
worst-case quadratic game used for lower-bound experiments, analytic
gradients, Nash equilibria, seeded random generators, and JSON round-trips.

All problem objects are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ProblemParams",
    "JointPoint",
    "QuadraticGame",
    "BilinearGame",
    "value_and_grad",
    "nash_equilibrium",
    "worst_case_6d",
    "random_quadratic",
    "random_bilinear",
    "check_gradient",
    "problem_to_json",
    "problem_from_json",
]

# Relative cutoff below which a singular value of B counts as zero.
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Strong convexity/concavity and gradient-Lipschitz constants.

    Admissibility requires 0 < mu_x <= L_x, 0 < mu_y <= L_y and L_xy >= 0.
    The derived condition numbers are kappa_x = L_x/mu_x, kappa_y = L_y/mu_y
    and kappa_xy = L_xy/sqrt(mu_x*mu_y).
    """

    mu_x: float
    mu_y: float
    L_x: float
    L_y: float
    L_xy: float

    def __post_init__(self):
        if not (0.0 < self.mu_x <= self.L_x):
            raise ValueError(f"need 0 < mu_x <= L_x, got mu_x={self.mu_x}, L_x={self.L_x}")
        if not (0.0 < self.mu_y <= self.L_y):
            raise ValueError(f"need 0 < mu_y <= L_y, got mu_y={self.mu_y}, L_y={self.L_y}")
        if self.L_xy < 0.0:
            raise ValueError(f"need L_xy >= 0, got {self.L_xy}")

    @property
    def kappa_x(self) -> float:
        return self.L_x / self.mu_x

    @property
    def kappa_y(self) -> float:
        return self.L_y / self.mu_y

    @property
    def kappa_xy(self) -> float:
        return self.L_xy / np.sqrt(self.mu_x * self.mu_y)

    def as_dict(self) -> dict:
        return {
            "mu_x": self.mu_x,
            "mu_y": self.mu_y,
            "L_x": self.L_x,
            "L_y": self.L_y,
            "L_xy": self.L_xy,
        }


@dataclass(frozen=True)
class JointPoint:
    """A point z = (x, y) of the joint space R^dx x R^dy."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.x.ndim != 1 or self.y.ndim != 1:
            raise ValueError("x and y must be 1-d vectors")

    @property
    def dims(self) -> tuple[int, int]:
        return self.x.size, self.y.size

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    def dist_sq(self, other: "JointPoint") -> float:
        dx = self.x - other.x
        dy = self.y - other.y
        return float(dx @ dx + dy @ dy)


def _check_spd(M: np.ndarray, name: str) -> None:
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if not np.allclose(M, M.T, rtol=1e-10, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(M).min() <= 0.0:
        raise ValueError(f"{name} must be positive definite")


class QuadraticGame:
    """SCSC quadratic game f(x,y) = 1/2 x^T A x + x^T B y - 1/2 y^T C y.

    A and C are stored positive definite; the minus sign in front of the
    y-block is part of the objective, so f(x, .) is concave.  The unique
    Nash equilibrium solves A x + B y = 0, B^T x - C y = 0.
    """

    kind = "quadratic"

    def __init__(self, A, B, C, kind: str | None = None, seed: int | None = None):
        self.A = np.array(A, dtype=float)
        self.B = np.array(B, dtype=float)
        self.C = np.array(C, dtype=float)
        _check_spd(self.A, "A")
        _check_spd(self.C, "C")
        if self.B.shape != (self.A.shape[0], self.C.shape[0]):
            raise ValueError(
                f"B must be {self.A.shape[0]}x{self.C.shape[0]}, got {self.B.shape}"
            )
        for M in (self.A, self.B, self.C):
            M.setflags(write=False)
        if kind is not None:
            self.kind = kind
        self.seed = seed

    @property
    def dims(self) -> tuple[int, int]:
        return self.A.shape[0], self.C.shape[0]

    @property
    def params(self) -> ProblemParams:
        """Constants extracted from the blocks by eigen/singular value decomposition."""
        ax = np.linalg.eigvalsh(self.A)
        cy = np.linalg.eigvalsh(self.C)
        sb = np.linalg.svd(self.B, compute_uv=False)
        L_xy = float(sb[0]) if sb.size else 0.0
        return ProblemParams(
            mu_x=float(ax[0]), mu_y=float(cy[0]),
            L_x=float(ax[-1]), L_y=float(cy[-1]), L_xy=L_xy,
        )

    def value(self, p: JointPoint) -> float:
        self._check_point(p)
        return float(0.5 * p.x @ self.A @ p.x + p.x @ self.B @ p.y - 0.5 * p.y @ self.C @ p.y)

    def grad_x(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.A @ x + self.B @ y

    def grad_y(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.B.T @ x - self.C @ y

    def nash(self) -> JointPoint:
        dx, dy = self.dims
        K = np.block([[self.A, self.B], [self.B.T, -self.C]])
        try:
            z = np.linalg.solve(K, np.zeros(dx + dy))
        except np.linalg.LinAlgError as e:
            raise ValueError("singular saddle system; SCSC assumption violated") from e
        return JointPoint(z[:dx], z[dx:])

    def _check_point(self, p: JointPoint) -> None:
        if p.dims != self.dims:
            raise ValueError(f"point dims {p.dims} do not match problem dims {self.dims}")


class BilinearGame:
    """Unconstrained bilinear game f(x, y) = x^T B y with B not all zero.

    mu_xy and L_xy are the smallest nonzero and the largest singular value
    of B.  Nash equilibria form the affine set null(B^T) x null(B); the
    equilibrium an iterative method converges to depends on its start, so
    ``nash`` takes the initial point and projects it onto the null spaces.
    """

    kind = "bilinear"

    def __init__(self, B, seed: int | None = None):
        self.B = np.array(B, dtype=float)
        if self.B.ndim != 2:
            raise ValueError(f"B must be a matrix, got ndim={self.B.ndim}")
        U, s, Vt = np.linalg.svd(self.B)
        nonzero = s > _RANK_TOL * max(s[0], 1.0) if s.size else np.zeros(0, bool)
        if not nonzero.any():
            raise ValueError("B must have at least one nonzero singular value")
        r = int(nonzero.sum())
        self.B.setflags(write=False)
        self._U = U[:, :r]
        self._V = Vt[:r].T
        self.singular_values = s[:r].copy()
        self.L_xy = float(s[0])
        self.mu_xy = float(s[r - 1])
        self.seed = seed

    @property
    def dims(self) -> tuple[int, int]:
        return self.B.shape

    def value(self, p: JointPoint) -> float:
        self._check_point(p)
        return float(p.x @ self.B @ p.y)

    def grad_x(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.B @ y

    def grad_y(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.B.T @ x

    def nash(self, z0: JointPoint) -> JointPoint:
        """Projection of z0 onto null(B^T) x null(B), the equilibrium reached from z0."""
        self._check_point(z0)
        x = z0.x - self._U @ (self._U.T @ z0.x)
        y = z0.y - self._V @ (self._V.T @ z0.y)
        return JointPoint(x, y)

    def _check_point(self, p: JointPoint) -> None:
        if p.dims != self.dims:
            raise ValueError(f"point dims {p.dims} do not match problem dims {self.dims}")


Problem = QuadraticGame | BilinearGame


def value_and_grad(problem: Problem, point: JointPoint):
    """Exact objective value and gradient pair (grad_x f, grad_y f) at ``point``."""
    problem._check_point(point)
    f = problem.value(point)
    gx = problem.grad_x(point.x, point.y)
    gy = problem.grad_y(point.x, point.y)
    return f, (gx, gy)


def nash_equilibrium(problem: Problem, z0: JointPoint | None = None) -> JointPoint:
    """Nash equilibrium of ``problem``.

    Quadratic games have a unique equilibrium.  Bilinear games have an
    affine set of equilibria and require ``z0``; the returned point is the
    one the convergent iterations reach from ``z0``.
    """
    if isinstance(problem, BilinearGame):
        if z0 is None:
            raise ValueError("bilinear games need the initial point z0")
        return problem.nash(z0)
    return problem.nash()


def worst_case_6d(params: ProblemParams) -> QuadraticGame:
    """The 3+3-dimensional quadratic game with the extreme-spectrum Hessian.

    A = diag(mu_x, mu_x, L_x), B = diag(L_xy, 0, 0), C = diag(mu_y, mu_y, L_y).
    Its extracted constants equal ``params`` exactly and the equilibrium is
    the origin; under the basic GDA iterations its coordinates decouple into
    scalar recurrences plus one coupled (x, y) pair.
    """
    A = np.diag([params.mu_x, params.mu_x, params.L_x])
    B = np.diag([params.L_xy, 0.0, 0.0])
    C = np.diag([params.mu_y, params.mu_y, params.L_y])
    return QuadraticGame(A, B, C, kind="worstcase6d")


def _random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    # QR of an iid Gaussian matrix; fixing the signs of diag(R) makes the
    # factorization unique, so the draw depends only on the RNG stream.
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def random_quadratic(
    dx: int,
    dy: int,
    params: ProblemParams,
    mu_xy: float,
    seed: int,
) -> QuadraticGame:
    """Random SCSC quadratic game with pinned extreme spectra.

    Diagonal cores are drawn with the first entry pinned to the lower
    constant and the second pinned to the upper one (remaining entries
    uniform in between), then conjugated by random orthogonal U, V:

        A = U^T diag(a) U,  B = U^T diag(b) V,  C = V^T diag(c) V.

    The extracted constants of the output therefore equal the requested
    ones up to roundoff.  B's diagonal has min(dx, dy) entries and its
    first two are pinned to (mu_xy, L_xy).

    Randomness comes from ``numpy.random.default_rng(seed)`` (the PCG64
    generator), so equal seeds reproduce identical matrices on any platform.
    """
    if dx < 2 or dy < 2:
        raise ValueError("need dx, dy >= 2 to pin both spectrum endpoints")
    if not (0.0 < mu_xy <= params.L_xy):
        raise ValueError(f"need 0 < mu_xy <= L_xy, got mu_xy={mu_xy}, L_xy={params.L_xy}")
    rng = np.random.default_rng(seed)
    db = min(dx, dy)
    a = np.concatenate([[params.mu_x, params.L_x], rng.uniform(params.mu_x, params.L_x, dx - 2)])
    b = np.concatenate([[mu_xy, params.L_xy], rng.uniform(mu_xy, params.L_xy, db - 2)])
    c = np.concatenate([[params.mu_y, params.L_y], rng.uniform(params.mu_y, params.L_y, dy - 2)])
    U = _random_orthogonal(dx, rng)
    V = _random_orthogonal(dy, rng)
    Bdiag = np.zeros((dx, dy))
    Bdiag[:db, :db] = np.diag(b)
    A = U.T @ np.diag(a) @ U
    B = U.T @ Bdiag @ V
    C = V.T @ np.diag(c) @ V
    A = 0.5 * (A + A.T)
    C = 0.5 * (C + C.T)
    return QuadraticGame(A, B, C, seed=seed)


def random_bilinear(dx: int, dy: int, mu_xy: float, L_xy: float, seed: int) -> BilinearGame:
    """Random bilinear game whose nonzero singular values spread over [mu_xy, L_xy]."""
    if dx < 2 or dy < 2:
        raise ValueError("need dx, dy >= 2 to pin both spectrum endpoints")
    if not (0.0 < mu_xy <= L_xy):
        raise ValueError(f"need 0 < mu_xy <= L_xy, got mu_xy={mu_xy}, L_xy={L_xy}")
    rng = np.random.default_rng(seed)
    db = min(dx, dy)
    b = np.concatenate([[mu_xy, L_xy], rng.uniform(mu_xy, L_xy, db - 2)])
    U = _random_orthogonal(dx, rng)
    V = _random_orthogonal(dy, rng)
    Bdiag = np.zeros((dx, dy))
    Bdiag[:db, :db] = np.diag(b)
    return BilinearGame(U.T @ Bdiag @ V, seed=seed)


def check_gradient(problem: Problem, point: JointPoint, h: float = 1e-5) -> float:
    """Max relative error of the analytic gradient vs central finite differences."""
    if h <= 0.0:
        raise ValueError("h must be positive")
    _, (gx, gy) = value_and_grad(problem, point)
    analytic = np.concatenate([gx, gy])
    z = point.stacked()
    dx = point.x.size
    worst = 0.0
    for i in range(z.size):
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        fp = problem.value(JointPoint(zp[:dx], zp[dx:]))
        fm = problem.value(JointPoint(zm[:dx], zm[dx:]))
        fd = (fp - fm) / (2.0 * h)
        err = abs(analytic[i] - fd) / max(1.0, abs(analytic[i]))
        worst = max(worst, err)
    return worst


def problem_to_json(problem: Problem) -> str:
    """Serialize a problem to the interchange JSON document."""
    doc: dict = {"kind": problem.kind, "seed": problem.seed}
    if isinstance(problem, BilinearGame):
        doc["B"] = problem.B.tolist()
        doc["params"] = {"mu_xy": problem.mu_xy, "L_xy": problem.L_xy}
    else:
        doc["A"] = problem.A.tolist()
        doc["B"] = problem.B.tolist()
        doc["C"] = problem.C.tolist()
        doc["params"] = problem.params.as_dict()
    return json.dumps(doc)


def problem_from_json(text: str) -> Problem:
    """Inverse of :func:`problem_to_json`."""
    doc = json.loads(text)
    kind = doc.get("kind")
    seed = doc.get("seed")
    if kind == "bilinear":
        return BilinearGame(doc["B"], seed=seed)
    if kind in ("quadratic", "worstcase6d"):
        return QuadraticGame(doc["A"], doc["B"], doc["C"], kind=kind, seed=seed)
    raise ValueError(f"unknown problem kind: {kind!r}")
