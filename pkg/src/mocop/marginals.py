"""Nonparametric marginal CDF estimates and pseudo-observations.

Margins are estimated by the empirical CDF (complete samples) or the
Kaplan-Meier product-limit estimator (right-censored samples), then pushed
strictly inside (0, 1) with the n/(n+1) rescale so that -log(u) stays
finite in every likelihood term.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeObservation:
    """A failure time (observed=True) or a right-censoring time (observed=False)."""

    time: float
    observed: bool = True

    def __post_init__(self):
        if not self.time > 0:
            raise ValueError(f"time must be positive, got {self.time}")


@dataclass(frozen=True)
class MarginalEstimate:
    """Right-continuous step estimate of a marginal CDF, rescaled into (0, 1).

    Calling the estimate at time t returns F(t) clamped to the interior
    floor 1/(n+1); the top value is at most n/(n+1).
    """

    support: np.ndarray = field(repr=False)  # sorted distinct jump times
    values: np.ndarray = field(repr=False)  # rescaled CDF value at each jump
    method: str
    n: int
    rescale: float

    @property
    def floor(self) -> float:
        return 1.0 / (self.n + 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.support, t, side="right")
        padded = np.concatenate([[self.floor], self.values])
        return np.maximum(padded[idx], self.floor)[()]


def empirical_cdf(times) -> MarginalEstimate:
    """Empirical CDF with the n/(n+1) interior rescale.

    F(t) = #{x_i <= t} / (n + 1); ties receive the maximal rank so the
    result is a bona fide right-continuous CDF.
    """
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise ValueError("empirical_cdf requires at least one observation")
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    n = times.size
    support, counts = np.unique(times, return_counts=True)
    values = np.cumsum(counts) / (n + 1)
    return MarginalEstimate(support=support, values=values, method="empirical", n=n, rescale=n / (n + 1))


def kaplan_meier(obs) -> MarginalEstimate:
    """Kaplan-Meier CDF estimate for right-censored observations.

    F(t) = 1 - prod_{t_i <= t} (1 - d_i / n_i) over distinct observed
    failure times, with censored subjects at a failure time kept in the
    risk set at that time.  Rescaled by n/(n+1) like the empirical CDF.
    """
    obs = list(obs)
    if not obs:
        raise ValueError("kaplan_meier requires at least one observation")
    times = np.array([o.time for o in obs], dtype=float)
    observed = np.array([o.observed for o in obs], dtype=bool)
    if not np.any(observed):
        raise ValueError("kaplan_meier requires at least one observed failure")
    n = times.size
    fail_times = np.unique(times[observed])
    at_risk = np.array([(times >= t).sum() for t in fail_times], dtype=float)
    deaths = np.array([((times == t) & observed).sum() for t in fail_times], dtype=float)
    survival = np.cumprod(1.0 - deaths / at_risk)
    values = np.maximum((1.0 - survival) * n / (n + 1), 1.0 / (n + 1))
    return MarginalEstimate(support=fail_times, values=values, method="kaplan-meier", n=n, rescale=n / (n + 1))


def pseudo_observations(x_obs, y_obs, censored: bool):
    """Pseudo-observation pairs (u_i, v_i) plus censoring indicators.

    Parameters
    ----------
    x_obs, y_obs : sequences of TimeObservation
        Paired failure-time records, one per margin, equal lengths.
    censored : bool
        If True, margins are estimated by Kaplan-Meier and the indicator
        columns reflect each record's observed flag.  If False, all records
        must be observed failures and the empirical CDF is used.

    Returns
    -------
    uv : (n, 2) ndarray of pseudo-observations strictly inside (0, 1)
    deltas : (n, 2) int ndarray, 1 = failure observed, 0 = censored
    """
    x_obs = list(x_obs)
    y_obs = list(y_obs)
    if len(x_obs) != len(y_obs):
        raise ValueError(f"margins have different lengths: {len(x_obs)} vs {len(y_obs)}")
    x_times = np.array([o.time for o in x_obs], dtype=float)
    y_times = np.array([o.time for o in y_obs], dtype=float)
    dx = np.array([o.observed for o in x_obs], dtype=bool)
    dy = np.array([o.observed for o in y_obs], dtype=bool)
    if censored:
        fx = kaplan_meier(x_obs)
        fy = kaplan_meier(y_obs)
    else:
        if not (dx.all() and dy.all()):
            raise ValueError("complete-sample mode requires every record to be observed")
        fx = empirical_cdf(x_times)
        fy = empirical_cdf(y_times)
    uv = np.column_stack([fx(x_times), fy(y_times)])
    deltas = np.column_stack([dx, dy]).astype(int)
    return uv, deltas
