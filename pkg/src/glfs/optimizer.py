"""Orthant-wise quasi-Newton minimization of the penalized objective.

The problem is::

    minimize  Q_exact(beta) + lam * sum(beta)   subject to  beta >= 0

Each iteration forms a limited-memory quasi-Newton direction from the
projected gradient, zeroes the components whose sign disagrees with that
gradient, and projects the trial point back onto the nonnegative orthant.
The penalty itself is tuned by :func:`lambda_line_search`.
"""

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, TextIO, Tuple

import numpy as np

from .exceptions import EmptySelectionError, InvalidParameterError, NumericalError
from .graph import ArrayOrData, as_array
from .objective import _kernel_matrix, value_and_gradient


@dataclass(frozen=True)
class OptimizerConfig:
    lbfgs_memory: int = 10
    max_iter: int = 500
    tol_obj: float = 1e-8
    tol_grad: float = 1e-6
    backtrack_shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50
    zero_threshold: float = 1e-10

    def __post_init__(self):
        if self.lbfgs_memory < 1 or self.max_iter < 1 or self.max_backtracks < 1:
            raise InvalidParameterError("memory, max_iter and max_backtracks must be >= 1")
        for name in ("tol_obj", "tol_grad", "sufficient_decrease", "zero_threshold"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive")
        if not 0 < self.backtrack_shrink < 1:
            raise InvalidParameterError("backtrack_shrink must lie in (0, 1)")


@dataclass(frozen=True)
class PenaltySchedule:
    lambda0: float = 1e-4
    C: float = 1024.0

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise InvalidParameterError(f"lambda0 must be positive, got {self.lambda0}")
        if not self.C > 1:
            raise InvalidParameterError(f"C must exceed 1, got {self.C}")

    @property
    def t_max(self) -> int:
        return int(math.floor(math.log2(self.C)))


@dataclass
class SolveResult:
    beta: np.ndarray
    objective_value: float
    iterations: int
    converged: bool
    support_size: int
    history: List[float] = field(default_factory=list, repr=False)


@dataclass
class LineSearchResult:
    lam: float
    result: SolveResult
    history: List[Tuple[float, int]]
    stopped_early: bool


def project_sign_alignment(step, gradient) -> np.ndarray:
    """Zero the components of ``step`` whose sign differs from ``gradient``.

    ``step`` is subtracted from the iterate, so keeping only agreeing signs
    leaves a direction with nonnegative inner product against ``gradient``.
    """
    step = np.asarray(step, dtype=np.float64)
    gradient = np.asarray(gradient, dtype=np.float64)
    return np.where(np.sign(step) == np.sign(gradient), step, 0.0)


def project_orthant(candidate, reference_orthant=None, zero_threshold: float = 1e-10) -> np.ndarray:
    """Project onto the nonnegative orthant and snap tiny entries to zero.

    Feasible weights always live in the nonnegative orthant, so
    ``reference_orthant`` only has to be checked, never consulted for signs.
    """
    if reference_orthant is not None and np.any(np.asarray(reference_orthant) < 0):
        raise InvalidParameterError("reference weights must be nonnegative")
    out = np.asarray(candidate, dtype=np.float64).copy()
    out[~(out >= zero_threshold)] = 0.0
    return out


def projected_gradient(beta, grad) -> np.ndarray:
    """Gradient with components masked where ``beta_i = 0`` and descent would go negative."""
    return np.where((beta > 0) | (grad < 0), grad, 0.0)


def _two_loop(pg, memory):
    q = pg.copy()
    alphas = []
    for s, y, rho in reversed(memory):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    s, y, _ = memory[-1]
    q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(memory, reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return q


def _descent_step(pg, memory):
    if memory:
        return project_sign_alignment(_two_loop(pg, memory), pg)
    norm = np.linalg.norm(pg)
    return pg / norm if norm > 0 else pg


def owd_minimize(
    X: ArrayOrData,
    M,
    lam: float,
    beta0=None,
    cfg: Optional[OptimizerConfig] = None,
    trace: Optional[TextIO] = None,
) -> SolveResult:
    """Minimize ``Q_exact + lam * sum(beta)`` over ``beta >= 0``.

    Starts from the all-ones vector unless ``beta0`` is given. Steps are
    accepted by Armijo backtracking along the projected path, so the
    recorded objective history never increases.
    """
    cfg = cfg or OptimizerConfig()
    Xv = as_array(X)
    Mm = _kernel_matrix(M)
    d = Xv.shape[0]
    if lam < 0:
        raise InvalidParameterError(f"penalty must be >= 0, got {lam}")
    beta = np.ones(d) if beta0 is None else np.asarray(beta0, dtype=np.float64).copy()
    if beta.shape != (d,) or np.any(beta < 0) or not np.all(np.isfinite(beta)):
        raise InvalidParameterError("beta0 must be a finite nonnegative vector of length d")
    beta = project_orthant(beta, zero_threshold=cfg.zero_threshold)

    def evaluate(b):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                q, g = value_and_gradient(Xv, b, Mm)
        except NumericalError as exc:
            raise NumericalError(str(exc), last_beta=beta.copy()) from exc
        J = q + lam * float(b.sum())
        if not (np.isfinite(J) and np.all(np.isfinite(g))):
            raise NumericalError("non-finite objective or gradient", last_beta=beta.copy())
        return J, g + lam

    J, g = evaluate(beta)
    history = [J]
    memory = deque(maxlen=cfg.lbfgs_memory)
    converged = False
    it = 0
    if trace is not None:
        trace.write(f"{0}\t{J:.12g}\t{np.count_nonzero(beta)}\t{0.0:.12g}\n")

    # gradient scale depends on lambda2 and the data, so the test is relative
    grad_scale = max(float(np.max(np.abs(projected_gradient(beta, g)), initial=0.0)), 1e-300)
    while it < cfg.max_iter:
        pg = projected_gradient(beta, g)
        if np.max(np.abs(pg), initial=0.0) <= cfg.tol_grad * grad_scale:
            converged = True
            break
        accepted = None
        # a failed quasi-Newton search falls back once to a fresh steepest-descent step
        for attempt in range(2):
            direction = _descent_step(pg, memory)
            step = 1.0
            for _ in range(cfg.max_backtracks):
                cand = project_orthant(beta - step * direction, zero_threshold=cfg.zero_threshold)
                J_new, g_new = evaluate(cand)
                if J_new <= J + cfg.sufficient_decrease * float(pg @ (cand - beta)):
                    accepted = (cand, J_new, g_new, step)
                    break
                step *= cfg.backtrack_shrink
            if accepted is not None or not memory:
                break
            memory.clear()
        if accepted is None:
            break
        cand, J_new, g_new, step = accepted
        it += 1
        s = cand - beta
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * max(float(y @ y), 1e-300):
            memory.append((s, y, 1.0 / sy))
        rel = abs(J - J_new) / max(abs(J), 1e-300)
        beta, J, g = cand, J_new, g_new
        history.append(J)
        if trace is not None:
            trace.write(f"{it}\t{J:.12g}\t{np.count_nonzero(beta)}\t{step:.12g}\n")
        if rel <= cfg.tol_obj:
            converged = True
            break

    return SolveResult(
        beta=beta,
        objective_value=J,
        iterations=it,
        converged=converged,
        support_size=int(np.count_nonzero(beta)),
        history=history,
    )


Solver = Callable[..., SolveResult]


def lambda_line_search(
    X: ArrayOrData,
    M,
    cfg: Optional[OptimizerConfig] = None,
    schedule: Optional[PenaltySchedule] = None,
    solver: Solver = owd_minimize,
    trace: Optional[TextIO] = None,
) -> LineSearchResult:
    """Tune the penalty by halving after empty solutions and growing otherwise.

    The penalty at step ``t + 1`` is ``lam_t / 2`` when the solution at
    ``lam_t`` is all zeros and ``lam_t * C / 2**t`` otherwise, for
    ``t = 0 .. floor(log2 C)``. The search stops as soon as an empty, a
    nonempty and an empty solution occur in a row and returns the middle
    one. Otherwise the nonempty solution with the smallest support wins,
    ties going to the larger penalty.
    """
    cfg = cfg or OptimizerConfig()
    schedule = schedule or PenaltySchedule()
    lam = schedule.lambda0
    runs: List[Tuple[float, SolveResult]] = []
    for t in range(schedule.t_max + 1):
        if trace is not None:
            trace.write(f"# lambda[{t}] = {lam:.12g}\n")
        res = solver(X, M, lam, cfg=cfg, trace=trace)
        runs.append((lam, res))
        empty = res.support_size == 0
        if (
            len(runs) >= 3
            and empty
            and runs[-3][1].support_size == 0
            and runs[-2][1].support_size > 0
        ):
            history = [(l, r.support_size) for l, r in runs]
            return LineSearchResult(runs[-2][0], runs[-2][1], history, True)
        lam = lam / 2.0 if empty else lam * schedule.C / 2.0**t

    history = [(l, r.support_size) for l, r in runs]
    nonempty = [(l, r) for l, r in runs if r.support_size > 0]
    if not nonempty:
        raise EmptySelectionError(
            f"every penalty in the schedule gave an empty selection; try lambda0 < {schedule.lambda0:g}"
        )
    best_lam, best = min(nonempty, key=lambda lr: (lr[1].support_size, -lr[0]))
    return LineSearchResult(best_lam, best, history, False)
