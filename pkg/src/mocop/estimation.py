"""Maximum-likelihood estimation for the copula families.

The Marshall-Olkin dependence parameter has closed-form estimators:

* complete samples: the conditional likelihood built from the mixed-measure
  density factorises through (n1, n2, n3, S_min) and the maximiser has the
  logit closed form theta = 1 / (1 + z);
* type-I right-censored samples: the likelihood adds partial-derivative
  terms for half-censored pairs and CDF terms for fully censored pairs;
  after the logit reparameterisation the score is a quadratic in
  exp(-psi) whose unique positive root gives the estimate.

With no censoring the two quadratics coincide algebraically, so the
censored estimator reduces to the complete one exactly.  Comparison
families are fitted by derivative-free numeric maximisation of the
pseudo-log-likelihood.

Sufficient statistics use the transforms a = -log(u), b = -log(v); ties
u = v carry the singular diagonal mass and are counted separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .copulas import (
    BivariateCopula,
    Clayton,
    FCGMixture,
    Frank,
    Gaussian,
    Gumbel,
    MarshallOlkin,
    ParameterError,
)


class SampleError(ValueError):
    """Input pairs or indicators violate the sample contract."""


class DegenerateSampleError(SampleError):
    """The sample carries no information about the dependence parameter."""


class NonConvergenceError(RuntimeError):
    """Numeric optimisation failed on every start; `best` holds the best point seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


def aicc(loglik: float, k: int, n: int) -> float:
    """Akaike information criterion with the small-sample correction.

    AIC = 2k - 2*loglik + 2k(k+1)/(n-k-1); lower is better.  Requires
    n > k + 1.
    """
    if not n > k + 1:
        raise ValueError(f"aicc requires n > k + 1, got n={n}, k={k}")
    return 2.0 * k - 2.0 * loglik + 2.0 * k * (k + 1.0) / (n - k - 1.0)


@dataclass(frozen=True)
class FitResult:
    """A fitted copula with its maximised log-likelihood and diagnostics."""

    copula: BivariateCopula
    loglik: float
    aic_c: float
    method: str  # "closed-form" | "numeric"
    flags: frozenset[str]
    n: int

    @property
    def family(self) -> str:
        return self.copula.name

    @property
    def params(self) -> tuple:
        return self.copula.params


def _finish_fit(copula, loglik, method, flags, n) -> FitResult:
    k = copula.k
    aic = aicc(loglik, k, n) if n > k + 1 else math.nan
    return FitResult(
        copula=copula,
        loglik=float(loglik),
        aic_c=aic,
        method=method,
        flags=frozenset(flags),
        n=n,
    )


# ---------------------------------------------------------------------------
# complete samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PseudoSample:
    """Paired pseudo-observations with ordering counts and log-transform sums.

    n1 = #{u < v}, n2 = #{u > v}, n3 = #ties (|u - v| <= tie_tol),
    s_min = sum of min(-log u, -log v).
    """

    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    tie_tol: float
    n: int
    n1: int
    n2: int
    n3: int
    s_min: float

    @property
    def tie_mask(self) -> np.ndarray:
        return np.abs(self.u - self.v) <= self.tie_tol


def classify_complete(pairs, tie_tol: float = 0.0) -> PseudoSample:
    """Build a PseudoSample from an (n, 2) array of pairs in (0, 1)^2.

    With rank-based pseudo-observations ties are exact, so the default
    tie tolerance is 0; a positive tolerance is only for externally
    supplied noisy (u, v).
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise SampleError(f"expected a non-empty (n, 2) array, got shape {pairs.shape}")
    if tie_tol < 0:
        raise SampleError(f"tie_tol must be >= 0, got {tie_tol}")
    u, v = pairs[:, 0], pairs[:, 1]
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise SampleError("pseudo-observations must lie strictly inside (0, 1)")
    ties = np.abs(u - v) <= tie_tol
    n3 = int(ties.sum())
    n1 = int(((u < v) & ~ties).sum())
    n2 = int(((u > v) & ~ties).sum())
    s_min = float(np.minimum(-np.log(u), -np.log(v)).sum())
    return PseudoSample(u=u, v=v, tie_tol=tie_tol, n=u.size, n1=n1, n2=n2, n3=n3, s_min=s_min)


def mo_loglik_complete(theta: float, sample: PseudoSample) -> float:
    """Log-likelihood of theta under the mixed-measure MO density.

    Off-diagonal pairs contribute log(1-theta) + theta*min(a, b); diagonal
    pairs log(theta) - (1-theta)*min(a, b).  Requires 0 < theta < 1.
    """
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"log-likelihood requires 0 < theta < 1, got {theta}")
    ties = sample.tie_mask
    mins = np.minimum(-np.log(sample.u), -np.log(sample.v))
    s_diag = float(mins[ties].sum())
    s_off = sample.s_min - s_diag
    n_off = sample.n1 + sample.n2
    out = theta * s_off - (1.0 - theta) * s_diag
    if n_off:
        out += n_off * math.log1p(-theta)
    if sample.n3:
        out += sample.n3 * math.log(theta)
    return out


def _mo_closed_form(n_eff: int, n3: int, s_min: float) -> tuple[float, set[str]]:
    # positive root of the score quadratic in z = exp(-psi); theta = 1/(1+z)
    a_coef = n_eff - 2 * n3 - s_min
    disc = a_coef * a_coef + 4.0 * n3 * (n_eff - n3)
    z = (a_coef + math.sqrt(max(disc, 0.0))) / (2.0 * n3)
    z = max(z, 0.0)
    theta = 1.0 / (1.0 + z)
    flags = {"boundary-estimate"} if theta == 1.0 else set()
    return theta, flags


def fit_mo_complete(sample: PseudoSample) -> FitResult:
    """Closed-form MO maximum-likelihood fit on a complete sample.

    With no ties the likelihood is strictly decreasing in theta, so the
    estimate is the boundary value 0 (flagged); with only ties it is 1.
    """
    if sample.n == 0:
        raise SampleError("cannot fit an empty sample")
    if sample.n3 == 0:
        theta, flags = 0.0, {"no-ties", "boundary-estimate"}
    else:
        theta, flags = _mo_closed_form(sample.n, sample.n3, sample.s_min)
    loglik = 0.0 if theta in (0.0, 1.0) else mo_loglik_complete(theta, sample)
    return _finish_fit(MarshallOlkin(theta), loglik, "closed-form", flags, sample.n)


# ---------------------------------------------------------------------------
# type-I censored samples
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CensoredSample:
    """Censoring-aware counts and accumulated log-transform sums.

    m pairs have both failures observed (m1/m2/m3 order them as in
    PseudoSample), r pairs only the first margin, s pairs only the second;
    the remaining n-m-r-s pairs are censored on both sides.  S1/S2 sum the
    per-margin transforms with the scalar censoring contribution t_c
    standing in for every censored coordinate, and S_max sums the pair
    maxima with t_c for every pair that has a censored side.
    """

    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    delta_x: np.ndarray = field(repr=False)
    delta_y: np.ndarray = field(repr=False)
    tie_tol: float
    tstar_mode: str  # "log" | "literal"
    t_star: float | None
    t_c: float
    n: int
    m: int
    r: int
    s: int
    m1: int
    m2: int
    m3: int
    s1: float
    s2: float
    s_max: float
    s_min: float


def classify_censored(
    pairs,
    deltas,
    t_star: float | None = None,
    tie_tol: float = 0.0,
    tstar_mode: str = "log",
) -> CensoredSample:
    """Build a CensoredSample from pseudo-observations and censoring indicators.

    Under the type-I scheme every censored coordinate of a margin carries
    that margin's CDF value at the threshold, so censored coordinates must
    be constant per margin and no observed coordinate may exceed them.

    The censoring contribution t_c is -log of the threshold pseudo-value
    (``tstar_mode="log"``, the default; with both margins censored the
    larger threshold value, i.e. the smaller transform, is used) or the raw
    threshold time t_star (``tstar_mode="literal"``).
    """
    pairs = np.asarray(pairs, dtype=float)
    deltas = np.asarray(deltas)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise SampleError(f"expected a non-empty (n, 2) array, got shape {pairs.shape}")
    if deltas.shape != pairs.shape:
        raise SampleError(f"indicator shape {deltas.shape} does not match pairs {pairs.shape}")
    if not np.isin(deltas, (0, 1)).all():
        raise SampleError("censoring indicators must be 0 or 1")
    if tstar_mode not in ("log", "literal"):
        raise SampleError(f"tstar_mode must be 'log' or 'literal', got {tstar_mode!r}")
    if tstar_mode == "literal" and (t_star is None or not t_star > 0):
        raise SampleError("literal mode requires a positive t_star")
    u, v = pairs[:, 0], pairs[:, 1]
    if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
        raise SampleError("pseudo-observations must lie strictly inside (0, 1)")
    dx = deltas[:, 0].astype(bool)
    dy = deltas[:, 1].astype(bool)

    tops = []
    for coords, obs, label in ((u, dx, "u"), (v, dy, "v")):
        cens = coords[~obs]
        if cens.size:
            top = cens[0]
            if not np.all(cens == top):
                raise SampleError(f"censored {label}-coordinates are not constant")
            if np.any(coords[obs] > top + 1e-12):
                raise SampleError(f"observed {label}-coordinate exceeds the censoring value")
            tops.append(top)

    if tstar_mode == "literal":
        t_c = float(t_star)
    else:
        t_c = -math.log(max(tops)) if tops else 0.0

    a = -np.log(u)
    b = -np.log(v)
    both = dx & dy
    m = int(both.sum())
    r = int((dx & ~dy).sum())
    s = int((~dx & dy).sum())
    q = u.size - m - r - s

    ub, vb = u[both], v[both]
    ties = np.abs(ub - vb) <= tie_tol
    m3 = int(ties.sum())
    m1 = int(((ub < vb) & ~ties).sum())
    m2 = int(((ub > vb) & ~ties).sum())

    s1 = float(a[dx].sum()) + (u.size - m - r) * t_c
    s2 = float(b[dy].sum()) + (u.size - m - s) * t_c
    s_max = float(np.maximum(a[both], b[both]).sum()) + (r + s) * t_c + q * t_c
    return CensoredSample(
        u=u,
        v=v,
        delta_x=dx.astype(int),
        delta_y=dy.astype(int),
        tie_tol=tie_tol,
        tstar_mode=tstar_mode,
        t_star=None if t_star is None else float(t_star),
        t_c=t_c,
        n=u.size,
        m=m,
        r=r,
        s=s,
        m1=m1,
        m2=m2,
        m3=m3,
        s1=s1,
        s2=s2,
        s_max=s_max,
        s_min=s1 + s2 - s_max,
    )


def mo_loglik_censored(theta: float, sample: CensoredSample) -> float:
    """Censored MO log-likelihood in sufficient-statistic form.

    l(theta) = (m1+m2+r+s) log(1-theta) + m3 log(theta)
               - (1-theta)(S1+S2) - theta * S_max

    which is the logit-reparameterised conditional likelihood up to a
    theta-free constant.  Requires 0 < theta < 1.
    """
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"log-likelihood requires 0 < theta < 1, got {theta}")
    p = sample.m1 + sample.m2 + sample.r + sample.s
    out = -(1.0 - theta) * (sample.s1 + sample.s2) - theta * sample.s_max
    if p:
        out += p * math.log1p(-theta)
    if sample.m3:
        out += sample.m3 * math.log(theta)
    return out


def mo_loglik_censored_terms(theta: float, pairs, deltas, tie_tol: float = 0.0) -> float:
    """Censored MO log-likelihood evaluated term by term at the data points.

    Fully observed pairs contribute the log mixed-measure density,
    half-censored pairs the log partial derivative along the observed
    margin, and fully censored pairs the log CDF.  Each partial derivative
    is taken on the branch where the observed coordinate carries the
    min(u**-theta, v**-theta) factor, consistent with the
    sufficient-statistic form (the two agree up to a theta-free constant).
    """
    if not 0.0 < theta < 1.0:
        raise ParameterError(f"log-likelihood requires 0 < theta < 1, got {theta}")
    pairs = np.asarray(pairs, dtype=float)
    deltas = np.asarray(deltas)
    u, v = pairs[:, 0], pairs[:, 1]
    dx = deltas[:, 0].astype(bool)
    dy = deltas[:, 1].astype(bool)
    a = -np.log(u)
    b = -np.log(v)
    log1m = math.log1p(-theta)
    out = 0.0
    both = dx & dy
    ties = np.abs(u - v) <= tie_tol
    diag = both & ties
    off = both & ~ties
    # log density: diagonal and off-diagonal branches
    out += float(np.sum(log1m + theta * np.minimum(a[off], b[off])))
    out += float(np.sum(math.log(theta) - (1.0 - theta) * np.minimum(a[diag], b[diag])))
    x_only = dx & ~dy
    y_only = ~dx & dy
    # dC/du = (1-theta) u**-theta v, dC/dv = (1-theta) u v**-theta
    out += float(np.sum(log1m + theta * a[x_only] - b[x_only]))
    out += float(np.sum(log1m + theta * b[y_only] - a[y_only]))
    none = ~dx & ~dy
    out += float(np.sum(-a[none] - b[none] + theta * np.minimum(a[none], b[none])))
    return out


def censored_score_psi(theta: float, sample: CensoredSample) -> float:
    """Derivative of the logit-form censored log-likelihood at psi = logit(theta)."""
    p = sample.m1 + sample.m2 + sample.r + sample.s
    q = sample.m + sample.r + sample.s
    return -p + q * (1.0 - theta) + sample.s_min * theta * (1.0 - theta)


def censored_curvature_psi(theta: float, sample: CensoredSample) -> float:
    """Second derivative of the logit-form censored log-likelihood."""
    q = sample.m + sample.r + sample.s
    return -(1.0 - theta) * theta * (q + sample.s_min * (2.0 * theta - 1.0))


def fit_mo_censored(sample: CensoredSample) -> FitResult:
    """Closed-form MO maximum-likelihood fit on a type-I censored sample.

    theta = 1 / (1 + z1) with z1 the unique positive root of the score
    quadratic m3 z^2 - (m+r+s-2m3-S_min) z - (m+r+s-m3) = 0.  On a fully
    observed sample this coincides exactly with the complete-sample fit.
    """
    if sample.m == 0:
        raise DegenerateSampleError("no pair with both failures observed")
    if sample.m3 == 0:
        theta, flags = 0.0, {"no-ties", "boundary-estimate"}
        loglik = -(sample.s1 + sample.s2)
    else:
        theta, flags = _mo_closed_form(sample.m + sample.r + sample.s, sample.m3, sample.s_min)
        loglik = -sample.s_max if theta == 1.0 else mo_loglik_censored(theta, sample)
    return _finish_fit(MarshallOlkin(theta), loglik, "closed-form", flags, sample.n)


# ---------------------------------------------------------------------------
# numeric fits for the comparison families
# ---------------------------------------------------------------------------

# parameter boxes for the derivative-free searches
PARAM_BOUNDS = {
    "gaussian": (-0.999, 0.999),
    "gumbel": (1.0, 20.0),
    "frank": (-35.0, 35.0),
    "clayton": (1e-4, 20.0),
}

_NUMERIC_BUILDERS = {
    "gaussian": Gaussian,
    "gumbel": Gumbel,
    "frank": Frank,
    "clayton": Clayton,
}


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10):
    """Golden-section maximisation of a scalar function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _expit(z):
    return special.expit(z)


def _fcg_from_vector(z) -> FCGMixture:
    e1, e2 = math.exp(min(z[0], 35.0)), math.exp(min(z[1], 35.0))
    d = 1.0 + e1 + e2
    pi_f, pi_c = e1 / d, e2 / d
    alpha = -35.0 + 70.0 * _expit(z[2])
    gamma = 1e-4 + (20.0 - 1e-4) * _expit(z[3])
    r = 1.0 + 19.0 * _expit(z[4])
    return FCGMixture(pi_f, pi_c, alpha, gamma, r)


def fit_numeric(
    family: str,
    sample: PseudoSample,
    seed: int = 0,
    starts: int = 5,
    max_iter: int = 4000,
) -> FitResult:
    """Fit a comparison family by maximising the pseudo-log-likelihood.

    One-parameter families use golden-section search over `starts`
    sub-brackets of the parameter box; the five-parameter mixture uses
    seeded multi-start Nelder-Mead on an unconstrained reparameterisation
    (softmax weights, logistic box transforms).  Deterministic given seed.
    """
    family = family.lower()
    u, v = sample.u, sample.v

    if family in _NUMERIC_BUILDERS:
        builder = _NUMERIC_BUILDERS[family]
        lo, hi = PARAM_BOUNDS[family]

        if family == "gaussian":
            # the pseudo-likelihood factorises through three cross moments
            from scipy import stats as _st

            x = _st.norm.ppf(u)
            y = _st.norm.ppf(v)
            sxx, syy, sxy = float(x @ x), float(y @ y), float(x @ y)
            n = float(u.size)

            def loglik(p):
                q = 1.0 - p * p
                return -0.5 * n * math.log(q) + (2.0 * p * sxy - p * p * (sxx + syy)) / (2.0 * q)

        else:

            def loglik(p):
                return float(np.sum(builder(p).log_pdf(u, v)))

        edges = np.linspace(lo, hi, starts + 1)
        best_p, best_l = None, -np.inf
        for i in range(starts):
            p, l = _golden_max(loglik, edges[i], edges[i + 1])
            if l > best_l:
                best_p, best_l = p, l
        copula = builder(best_p)
        flags = set()
        span = hi - lo
        if min(best_p - lo, hi - best_p) < 1e-6 * span:
            flags.add("boundary-estimate")
        return _finish_fit(copula, best_l, "numeric", flags, sample.n)

    if family == "fcg":
        def neg_loglik(z):
            val = np.sum(_fcg_from_vector(z).log_pdf(u, v))
            return -val if np.isfinite(val) else np.inf

        rng = np.random.default_rng(seed)
        inits = [np.array([0.0, 0.0, 0.0, -4.0, -2.0])]
        inits += [rng.normal(scale=1.5, size=5) for _ in range(max(starts - 1, 0))]
        best = None
        any_converged = False
        for z0 in inits:
            res = optimize.minimize(
                neg_loglik,
                z0,
                method="Nelder-Mead",
                options={"maxiter": max_iter, "xatol": 1e-9, "fatol": 1e-10},
            )
            any_converged = any_converged or bool(res.success)
            if best is None or res.fun < best.fun:
                best = res
        copula = _fcg_from_vector(best.x)
        fit = _finish_fit(copula, -best.fun, "numeric", set(), sample.n)
        if not any_converged:
            raise NonConvergenceError(
                f"Nelder-Mead failed to converge on all {len(inits)} starts", best=fit
            )
        return fit

    if family == "mo":
        raise ParameterError("the MO family has a closed-form estimator; use fit_mo_complete")
    raise ParameterError(f"unknown family {family!r}")


def fit_family(family: str, sample: PseudoSample, seed: int = 0) -> FitResult:
    """Dispatch: closed-form estimator for MO, numeric fit otherwise."""
    if family.lower() == "mo":
        return fit_mo_complete(sample)
    return fit_numeric(family, sample, seed=seed)
