"""
Newton-Raphson maximisation with step-halving, shared by the logistic and Cox fits.

Objectives work on standardized design matrices and normalized weights and
return the mean log-likelihood, mean score and mean information, so
tolerances do not depend on the sample size or the weight scale.
"""

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from copsens.platform.config import settings
from copsens.platform.errors import CollinearityError, ConvergenceError, SeparationError
from copsens.platform.logging import get_logger

logger = get_logger(__name__)

Objective = Callable[[np.ndarray], tuple[float, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ConvergenceInfo:
    iterations: int
    score_norm: float
    loglik: float
    converged: bool
    trace: list[dict[str, float]] = field(default_factory=list)


def _score_tol(beta: np.ndarray) -> float:
    return settings.SCORE_TOL * (1.0 + (np.abs(beta).max() if beta.size else 0.0))


def newton_maximize(
    objective: Objective,
    beta0: np.ndarray,
    term_names: list[str],
    max_iter: int | None = None,
) -> tuple[np.ndarray, ConvergenceInfo]:
    """
    Maximise a concave objective by Newton steps.

    Stops when the score norm is below SCORE_TOL * (1 + |beta|_inf), or one
    polishing step after the relative log-likelihood change first drops below
    LOGLIK_TOL.

    Raises:
        SeparationError: a standardized coefficient exceeds SEPARATION_BOUND
        ConvergenceError: no convergence within max_iter iterations
    """
    max_iter = max_iter or settings.MAX_NEWTON_ITER
    beta = np.asarray(beta0, dtype=float).copy()
    ll, score, info = objective(beta)
    trace: list[dict[str, float]] = []
    polished = False

    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(score))
        if gnorm <= _score_tol(beta):
            return beta, ConvergenceInfo(it - 1, gnorm, ll, True, trace)

        try:
            step = linalg.solve(info, score, assume_a="sym")
        except (linalg.LinAlgError, ValueError):
            raise CollinearityError("information matrix is singular", {"terms": term_names})

        t = 1.0
        for _ in range(settings.MAX_STEP_HALVINGS + 1):
            cand = beta + t * step
            ll_c, score_c, info_c = objective(cand)
            if np.isfinite(ll_c) and ll_c >= ll - 1e-13 * (1.0 + abs(ll)):
                break
            t /= 2.0
        else:
            # stalled at floating-point resolution
            if gnorm <= np.sqrt(settings.SCORE_TOL):
                return beta, ConvergenceInfo(it - 1, gnorm, ll, True, trace)
            raise ConvergenceError(
                "step-halving failed to increase the log-likelihood",
                {"iteration": it, "trace": trace},
            )

        big = np.abs(cand) > settings.SEPARATION_BOUND
        if big.any():
            raise SeparationError(
                "coefficients diverge (separation)",
                {"terms": [n for n, b in zip(term_names, big, strict=True) if b], "iteration": it},
            )

        rel = abs(ll_c - ll) / (abs(ll) + 1e-300)
        beta, ll, score, info = cand, ll_c, score_c, info_c
        trace.append({"iteration": it, "loglik": ll, "step": t, "score_norm": float(np.linalg.norm(score))})

        if rel <= settings.LOGLIK_TOL:
            if polished:
                return beta, ConvergenceInfo(it, float(np.linalg.norm(score)), ll, True, trace)
            polished = True

    raise ConvergenceError(
        f"no convergence after {max_iter} iterations",
        {"iterations": max_iter, "trace": trace[-5:]},
    )


def standardize(
    z: np.ndarray, weights: np.ndarray, term_names: list[str], intercept: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Center and scale non-intercept columns with weighted moments.

    Raises:
        CollinearityError: a column is constant or the matrix is rank deficient
    """
    w = weights / weights.sum()
    start = 1 if intercept else 0
    mean = np.zeros(z.shape[1])
    scale = np.ones(z.shape[1])
    if z.shape[1] > start:
        mean[start:] = w @ z[:, start:]
        scale[start:] = np.sqrt(w @ (z[:, start:] - mean[start:]) ** 2)
    constant = [n for j, n in enumerate(term_names) if j >= start and scale[j] <= 1e-12 * (1 + abs(mean[j]))]
    if constant:
        raise CollinearityError(f"constant design column(s): {', '.join(constant)}", {"aliased": constant})
    zs = (z - mean) / scale

    if zs.shape[1]:
        _, r, piv = linalg.qr(zs * np.sqrt(w)[:, None], mode="economic", pivoting=True)
        diag = np.abs(np.diag(r))
        rank = int((diag > 1e-10 * diag[0]).sum()) if diag.size else 0
        if rank < zs.shape[1]:
            aliased = [term_names[j] for j in piv[rank:]]
            raise CollinearityError(f"aliased term(s): {', '.join(aliased)}", {"aliased": aliased})
    return zs, mean, scale
