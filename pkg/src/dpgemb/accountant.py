"""Renyi-DP accounting for the subsampled (without replacement) Gaussian mechanism."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln, logsumexp

DEFAULT_ORDERS = tuple(range(2, 65))


def gaussian_rdp(alpha: float, S: float, sigma: float) -> float:
    """RDP of order ``alpha`` of the Gaussian mechanism with sensitivity ``S``."""
    if alpha <= 1:
        raise ValueError("alpha must be > 1")
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return math.inf
    return alpha * S**2 / (2 * sigma**2)


def _log_comb(n: int, k: int) -> float:
    return float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1))


def subsampled_rdp(alpha: int, gamma: float, S: float, sigma: float) -> float:
    """Upper bound on the RDP of ``alpha`` for the Gaussian run on a ``gamma`` subsample.

    Evaluated in log space::

        1/(alpha-1) * log(1 + gamma^2 C(alpha,2) min{4(e^{eps(2)}-1), 2 e^{eps(2)}}
                            + sum_{j=3..alpha} 2 gamma^j C(alpha,j) e^{(j-1) eps(j)})

    where ``eps(j) = j S^2 / (2 sigma^2)``. The Gaussian has unbounded
    ``eps(inf)``, so every ``min{2, (e^{eps(inf)}-1)^j}`` factor is 2.
    """
    if isinstance(alpha, float) and not alpha.is_integer():
        raise ValueError("alpha must be an integer")
    alpha = int(alpha)
    if alpha < 2:
        raise ValueError("alpha must be an integer >= 2")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if sigma == 0:
        return math.inf

    eps2 = gaussian_rdp(2, S, sigma)
    # min{4(e^x - 1), 2 e^x} in log space
    log_m2 = min(math.log(4) + math.log(math.expm1(eps2)) if eps2 > 0 else -math.inf,
                 math.log(2) + eps2)
    log_g = math.log(gamma)
    terms = [0.0, 2 * log_g + _log_comb(alpha, 2) + log_m2]
    for j in range(3, alpha + 1):
        terms.append(
            j * log_g + _log_comb(alpha, j) + (j - 1) * gaussian_rdp(j, S, sigma) + math.log(2)
        )
    return float(logsumexp(terms)) / (alpha - 1)


@dataclass(frozen=True)
class AccountantState:
    """Composed RDP over an integer order grid.

    The accumulated bound is ``steps * per_step`` so any split of the same
    number of compositions yields identical values.
    """

    gamma: float
    S: float
    sigma: float
    orders: tuple[int, ...] = DEFAULT_ORDERS
    steps: int = 0
    per_step: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not self.orders:
            raise ValueError("empty order grid")
        if self.per_step is None:
            per = np.array(
                [subsampled_rdp(a, self.gamma, self.S, self.sigma) for a in self.orders]
            )
            object.__setattr__(self, "per_step", per)

    @property
    def eps_per_alpha(self) -> np.ndarray:
        if self.steps == 0:
            return np.zeros(len(self.orders))
        return self.steps * self.per_step


def make_accountant(gamma, S, sigma, orders=DEFAULT_ORDERS) -> AccountantState:
    return AccountantState(gamma=gamma, S=S, sigma=sigma, orders=tuple(orders))


def compose(state: AccountantState, epochs: int = 1) -> AccountantState:
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    return replace(state, steps=state.steps + epochs, per_step=state.per_step)


def to_dp(state: AccountantState, delta: float) -> tuple[float, int]:
    """Best ``(eps, alpha)`` over the grid such that the state is ``(eps, delta)``-DP."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    orders = np.asarray(state.orders, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        eps = state.eps_per_alpha + math.log(1 / delta) / (orders - 1)
    eps = np.where(np.isfinite(eps), eps, np.inf)
    best = int(np.argmin(eps))
    return float(eps[best]), int(state.orders[best])


def delta_spent(state: AccountantState, eps_target: float) -> float:
    """Smallest ``delta`` over the grid at which the state meets ``eps_target``."""
    orders = np.asarray(state.orders, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        expo = -(orders - 1) * (eps_target - state.eps_per_alpha)
        d = np.exp(np.where(np.isnan(expo), np.inf, expo))
    return float(np.clip(d.min(), 0.0, 1.0))


def rdp_table(state: AccountantState, delta: float) -> list[tuple[int, float, float]]:
    """Rows ``(alpha, accumulated rdp, converted eps)`` for every order."""
    log_inv = math.log(1 / delta)
    return [
        (a, float(e), float(e + log_inv / (a - 1)))
        for a, e in zip(state.orders, state.eps_per_alpha)
    ]
