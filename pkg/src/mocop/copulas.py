"""Bivariate copula families for failure-time dependence modelling.

The Marshall-Olkin (Cuadras-Auge) family is the centrepiece:

    C(u, v) = u * v * min(u**-theta, v**-theta),   theta in [0, 1]

It is an extreme-value copula whose distribution mixes an absolutely
continuous part with a singular part carried by the diagonal u = v, so the
density is taken with respect to the mixed measure "2-D Lebesgue off the
diagonal plus 1-D Lebesgue on the diagonal".  theta equals the upper tail
dependence coefficient, and the singular weight theta / (2 - theta) is the
probability of an exact tie U = V (a simultaneous common shock).

Comparison families (Gaussian, Gumbel, Frank, Clayton and their
Frank+Clayton+Gumbel mixture) expose the same interface: `cdf`, `log_pdf`
/ `pdf` (Lebesgue density), `sample`, `tail_dependence`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats


class ParameterError(ValueError):
    """A copula parameter lies outside its family's domain."""


class SupportError(ValueError):
    """An evaluation point lies outside the operation's domain."""


class DiagonalError(SupportError):
    """Point on the diagonal u = v where the requested quantity is undefined."""


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _check_unit_square(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any((u < 0) | (u > 1)) or np.any((v < 0) | (v > 1)):
        raise SupportError("copula arguments must lie in the unit square")
    return u, v


class BivariateCopula:
    """Common interface for the bivariate families used in this package."""

    name: str = ""
    k: int = 0  # number of free parameters (for information criteria)

    @property
    def params(self) -> tuple:
        raise NotImplementedError

    def cdf(self, u, v):
        raise NotImplementedError

    def log_pdf(self, u, v):
        """Log density with respect to 2-D Lebesgue measure (continuous families)."""
        raise NotImplementedError

    def pdf(self, u, v):
        return np.exp(self.log_pdf(u, v))

    def sample(self, n: int, seed=None) -> np.ndarray:
        """Draw `n` i.i.d. pairs; returns an (n, 2) array. Deterministic given seed."""
        raise NotImplementedError

    def tail_dependence(self) -> tuple[float, float]:
        """(lower, upper) tail dependence coefficients."""
        raise NotImplementedError

    def __repr__(self):
        inside = ", ".join(f"{p:g}" for p in self.params)
        return f"{type(self).__name__}({inside})"


# ---------------------------------------------------------------------------
# Marshall-Olkin
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MODecomposition:
    """Split of the MO copula into continuous and singular parts.

    The copula equals

        weight_continuous * continuous(u, v) + weight_singular * singular(u, v)

    pointwise, with weights (2-2*theta)/(2-theta) and theta/(2-theta).
    The singular part min(u, v)**(2-theta) carries the diagonal mass.
    """

    theta: float
    weight_continuous: float
    weight_singular: float

    def singular(self, u, v):
        u, v = _check_unit_square(u, v)
        return np.minimum(u, v) ** (2.0 - self.theta)

    def continuous(self, u, v):
        u, v = _check_unit_square(u, v)
        if self.theta == 1.0:
            # zero weight; any value reconstructs the copula exactly
            return np.zeros(np.broadcast(u, v).shape)[()]
        full = np.minimum(u ** (1.0 - self.theta) * v, u * v ** (1.0 - self.theta))
        t = self.theta
        return ((2.0 - t) * full - t * self.singular(u, v)) / (2.0 - 2.0 * t)


class MarshallOlkin(BivariateCopula):
    """Marshall-Olkin / Cuadras-Auge copula with dependence theta in [0, 1].

    theta = 0 is independence, theta = 1 comonotonicity.  theta > 0.5 reads
    as common (systematic) shocks dominating idiosyncratic ones.
    """

    name = "mo"
    k = 1

    def __init__(self, theta: float):
        if not 0.0 <= theta <= 1.0:
            raise ParameterError(f"theta must be in [0, 1], got {theta}")
        self.theta = float(theta)

    @property
    def params(self):
        return (self.theta,)

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        t = self.theta
        # min of the two branch expressions selects the correct branch
        return np.minimum(u ** (1.0 - t) * v, u * v ** (1.0 - t))

    def density(self, u, v):
        """Density with respect to the mixed (off-diagonal + diagonal) measure.

        Off the diagonal this is (1-theta) * C(u, v) / (u v); on it,
        theta * C(u, u) / u.  Defined for 0 < theta < 1 and u, v in (0, 1].
        """
        t = self.theta
        if not 0.0 < t < 1.0:
            raise ParameterError(f"density requires 0 < theta < 1, got {t}")
        u, v = _check_unit_square(u, v)
        if np.any(u == 0) or np.any(v == 0):
            raise SupportError("density undefined at u = 0 or v = 0")
        off = (1.0 - t) * np.maximum(u, v) ** (-t)
        diag = t * u ** (1.0 - t)
        return np.where(u == v, diag, off)[()]

    def partials(self, u, v):
        """(dC/dv, dC/du) off the diagonal; raises DiagonalError on u = v."""
        t = self.theta
        if not 0.0 < t < 1.0:
            raise ParameterError(f"partials require 0 < theta < 1, got {t}")
        u, v = _check_unit_square(u, v)
        if np.any(u == v):
            raise DiagonalError("cdf is not differentiable on the diagonal u = v")
        upper = u > v
        d_dv = np.where(upper, u ** (1.0 - t), (1.0 - t) * u * v ** (-t))
        d_du = np.where(upper, (1.0 - t) * u ** (-t) * v, v ** (1.0 - t))
        return d_dv[()], d_du[()]

    def decomposition(self) -> MODecomposition:
        t = self.theta
        return MODecomposition(
            theta=t,
            weight_continuous=(2.0 - 2.0 * t) / (2.0 - t),
            weight_singular=t / (2.0 - t),
        )

    def tie_probability(self) -> float:
        """Probability of an exact tie U = V (mass of the singular part)."""
        return self.theta / (2.0 - self.theta)

    def tail_dependence(self):
        return (0.0, self.theta)

    def sample(self, n, seed=None):
        """Common-shock construction: two idiosyncratic exponential shocks with
        rate 1-theta and one shared shock with rate theta; each margin fails at
        the earlier of its own shock and the shared one.  Ties U = V are exact
        (bit-identical) whenever the shared shock arrives first."""
        rng = _rng(seed)
        t = self.theta
        if t == 0.0:
            u = rng.random(n)
            v = rng.random(n)
        elif t == 1.0:
            u = np.exp(-rng.exponential(size=n))
            v = u.copy()
        else:
            z1 = rng.exponential(scale=1.0 / (1.0 - t), size=n)
            z2 = rng.exponential(scale=1.0 / (1.0 - t), size=n)
            z12 = rng.exponential(scale=1.0 / t, size=n)
            u = np.exp(-np.minimum(z1, z12))
            v = np.exp(-np.minimum(z2, z12))
        return np.column_stack([u, v])


# ---------------------------------------------------------------------------
# Gaussian
# ---------------------------------------------------------------------------


def _bvn_cdf(x, y, rho: float):
    """Standard bivariate normal CDF via Owen's T (vectorised).

    Uses  Phi2(h, k; rho) = (Phi(h) + Phi(k))/2 - T(h, ah) - T(k, ak) - delta
    with the usual beta correction delta = 1/2 when the arguments straddle
    the origin.  Infinite arguments reduce to the univariate CDF.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if rho == 0.0:
        return stats.norm.cdf(x) * stats.norm.cdf(y)
    x, y = np.broadcast_arrays(x, y)
    out = np.empty(x.shape, dtype=float)

    # infinite coordinates: -inf -> 0, +inf -> other margin
    neg = (x == -np.inf) | (y == -np.inf)
    pos_x = (x == np.inf) & ~neg
    pos_y = (y == np.inf) & ~neg
    out[neg] = 0.0
    out[pos_x] = stats.norm.cdf(y[pos_x])
    out[pos_y] = stats.norm.cdf(x[pos_y])

    fin = ~(neg | pos_x | pos_y)
    h, kk = x[fin], y[fin]
    r = np.sqrt(1.0 - rho * rho)
    with np.errstate(divide="ignore", invalid="ignore"):
        ah = (kk - rho * h) / (h * r)
        ak = (h - rho * kk) / (kk * r)
    # h = 0 (or k = 0): take the limit from above; T(0, +-inf) = +-1/4
    with np.errstate(invalid="ignore"):
        ah = np.where(h == 0.0, np.inf * np.sign(kk), ah)
        ak = np.where(kk == 0.0, np.inf * np.sign(h), ak)
    ah = np.where(np.isnan(ah), 0.0, ah)  # h = k = 0, overridden below
    ak = np.where(np.isnan(ak), 0.0, ak)
    t_h = np.where(np.isinf(ah), np.sign(ah) * 0.5 * stats.norm.cdf(-np.abs(h)), special.owens_t(h, np.where(np.isinf(ah), 0.0, ah)))
    t_k = np.where(np.isinf(ak), np.sign(ak) * 0.5 * stats.norm.cdf(-np.abs(kk)), special.owens_t(kk, np.where(np.isinf(ak), 0.0, ak)))
    prod = h * kk
    delta = np.where((prod < 0) | ((prod == 0) & (h + kk < 0)), 0.5, 0.0)
    val = 0.5 * (stats.norm.cdf(h) + stats.norm.cdf(kk)) - t_h - t_k - delta
    both_zero = (h == 0.0) & (kk == 0.0)
    if np.any(both_zero):
        val = np.where(both_zero, 0.25 + np.arcsin(rho) / (2.0 * np.pi), val)
    out[fin] = np.clip(val, 0.0, 1.0)
    return out[()]


class Gaussian(BivariateCopula):
    """Gaussian copula with correlation rho in (-1, 1); no tail dependence."""

    name = "gaussian"
    k = 1

    def __init__(self, rho: float):
        if not -1.0 < rho < 1.0:
            raise ParameterError(f"rho must be in (-1, 1), got {rho}")
        self.rho = float(rho)

    @property
    def params(self):
        return (self.rho,)

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        x = stats.norm.ppf(u)
        y = stats.norm.ppf(v)
        return _bvn_cdf(x, y, self.rho)

    def log_pdf(self, u, v):
        u, v = _check_unit_square(u, v)
        x = stats.norm.ppf(u)
        y = stats.norm.ppf(v)
        r = self.rho
        q = 1.0 - r * r
        return -0.5 * np.log(q) + (2.0 * r * x * y - r * r * (x * x + y * y)) / (2.0 * q)

    def tail_dependence(self):
        return (0.0, 0.0)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        x = z1
        y = self.rho * z1 + np.sqrt(1.0 - self.rho**2) * z2
        return np.column_stack([stats.norm.cdf(x), stats.norm.cdf(y)])


# ---------------------------------------------------------------------------
# Archimedean comparison families
# ---------------------------------------------------------------------------


class Gumbel(BivariateCopula):
    """Gumbel copula, r >= 1; upper tail dependence 2 - 2**(1/r)."""

    name = "gumbel"
    k = 1

    def __init__(self, r: float):
        if not r >= 1.0:
            raise ParameterError(f"r must be >= 1, got {r}")
        self.r = float(r)

    @property
    def params(self):
        return (self.r,)

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        if self.r == 1.0:
            return u * v
        with np.errstate(divide="ignore"):
            a = -np.log(u)
            b = -np.log(v)
        s = a**self.r + b**self.r
        return np.exp(-(s ** (1.0 / self.r)))

    def log_pdf(self, u, v):
        u, v = _check_unit_square(u, v)
        r = self.r
        if r == 1.0:
            return np.zeros(np.broadcast(u, v).shape)[()]
        a = -np.log(u)
        b = -np.log(v)
        s = a**r + b**r
        w = s ** (1.0 / r)
        return (
            -w
            + (r - 1.0) * (np.log(a) + np.log(b))
            + (1.0 / r - 2.0) * np.log(s)
            + np.log(w + r - 1.0)
            + a
            + b
        )

    def conditional_cdf(self, u, q_grid):
        """P(V <= q | U = u) = dC/du, used for conditional-inversion sampling."""
        r = self.r
        a = -np.log(u)
        b = -np.log(q_grid)
        s = a**r + b**r
        w = s ** (1.0 / r)
        return np.exp(-w) * s ** (1.0 / r - 1.0) * a ** (r - 1.0) / u

    def tail_dependence(self):
        return (0.0, 2.0 - 2.0 ** (1.0 / self.r))

    def sample(self, n, seed=None):
        # conditional inversion; the conditional CDF has no closed inverse,
        # so bisect it (monotone in v) to machine-level accuracy
        rng = _rng(seed)
        u = rng.random(n)
        q = rng.random(n)
        if self.r == 1.0:
            return np.column_stack([u, q])
        lo = np.full(n, 1e-300)
        hi = np.full(n, 1.0 - 1e-16)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            too_low = self.conditional_cdf(u, mid) < q
            lo = np.where(too_low, mid, lo)
            hi = np.where(too_low, hi, mid)
        return np.column_stack([u, 0.5 * (lo + hi)])


class Frank(BivariateCopula):
    """Frank copula; alpha = 0 is treated as independence by continuity."""

    name = "frank"
    k = 1

    # below this the alpha -> 0 independence limit is numerically exact
    _ALPHA_TINY = 1e-9

    def __init__(self, alpha: float):
        if not np.isfinite(alpha):
            raise ParameterError(f"alpha must be finite, got {alpha}")
        self.alpha = float(alpha)

    @property
    def params(self):
        return (self.alpha,)

    def _independent(self):
        return abs(self.alpha) < self._ALPHA_TINY

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        if self._independent():
            return u * v
        a = self.alpha
        gu = np.expm1(-a * u)
        gv = np.expm1(-a * v)
        g1 = np.expm1(-a)
        return -np.log1p(gu * gv / g1) / a

    def log_pdf(self, u, v):
        u, v = _check_unit_square(u, v)
        if self._independent():
            return np.zeros(np.broadcast(u, v).shape)[()]
        a = self.alpha
        g1 = -np.expm1(-a)  # 1 - e^-a, same sign as a
        d = g1 - (-np.expm1(-a * u)) * (-np.expm1(-a * v))
        return np.log(a * g1) - a * (u + v) - 2.0 * np.log(np.abs(d))

    def tail_dependence(self):
        return (0.0, 0.0)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        u = rng.random(n)
        q = rng.random(n)
        if self._independent():
            return np.column_stack([u, q])
        a = self.alpha
        gu = np.expm1(-a * u)
        g1 = np.expm1(-a)
        v = -np.log1p(q * g1 / (1.0 + (1.0 - q) * gu)) / a
        return np.column_stack([u, v])


class Clayton(BivariateCopula):
    """Clayton copula, gamma > 0; lower tail dependence 2**(-1/gamma)."""

    name = "clayton"
    k = 1

    def __init__(self, gamma: float):
        if not gamma > 0.0:
            raise ParameterError(f"gamma must be > 0, got {gamma}")
        self.gamma = float(gamma)

    @property
    def params(self):
        return (self.gamma,)

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        g = self.gamma
        with np.errstate(divide="ignore"):
            s = u ** (-g) + v ** (-g) - 1.0
        return s ** (-1.0 / g)

    def log_pdf(self, u, v):
        u, v = _check_unit_square(u, v)
        g = self.gamma
        s = u ** (-g) + v ** (-g) - 1.0
        return np.log1p(g) - (g + 1.0) * (np.log(u) + np.log(v)) - (1.0 / g + 2.0) * np.log(s)

    def tail_dependence(self):
        return (2.0 ** (-1.0 / self.gamma), 0.0)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        u = rng.random(n)
        q = rng.random(n)
        g = self.gamma
        v = (u ** (-g) * (q ** (-g / (1.0 + g)) - 1.0) + 1.0) ** (-1.0 / g)
        return np.column_stack([u, v])


class FCGMixture(BivariateCopula):
    """Finite mixture pi_F * Frank + pi_C * Clayton + (1 - pi_F - pi_C) * Gumbel."""

    name = "fcg"
    k = 5

    def __init__(self, pi_f: float, pi_c: float, alpha: float, gamma: float, r: float):
        if pi_f < 0.0 or pi_c < 0.0:
            raise ParameterError(f"mixture weights must be >= 0, got pi_f={pi_f}, pi_c={pi_c}")
        if pi_f + pi_c > 1.0 + 1e-12:
            raise ParameterError(f"pi_f + pi_c must be <= 1, got {pi_f + pi_c}")
        self.pi_f = float(pi_f)
        self.pi_c = float(pi_c)
        self.frank = Frank(alpha)
        self.clayton = Clayton(gamma)
        self.gumbel = Gumbel(r)

    @property
    def pi_g(self) -> float:
        return 1.0 - self.pi_f - self.pi_c

    @property
    def params(self):
        return (self.pi_f, self.pi_c, self.frank.alpha, self.clayton.gamma, self.gumbel.r)

    def _weights_components(self):
        return (
            (self.pi_f, self.frank),
            (self.pi_c, self.clayton),
            (self.pi_g, self.gumbel),
        )

    def cdf(self, u, v):
        u, v = _check_unit_square(u, v)
        total = 0.0
        for w, comp in self._weights_components():
            if w > 0.0:
                total = total + w * comp.cdf(u, v)
        return total

    def log_pdf(self, u, v):
        u, v = _check_unit_square(u, v)
        shape = np.broadcast(np.asarray(u), np.asarray(v)).shape
        parts = []
        for w, comp in self._weights_components():
            if w > 0.0:
                parts.append(np.log(w) + np.broadcast_to(comp.log_pdf(u, v), shape))
        stacked = np.stack(parts)
        return special.logsumexp(stacked, axis=0)[()]

    def tail_dependence(self, weighted: bool = True):
        """Weighted coefficients of the mixture CDF; `weighted=False` returns the
        raw component coefficients (Clayton lower, Gumbel upper) instead."""
        chi_l = 2.0 ** (-1.0 / self.clayton.gamma)
        chi_u = 2.0 - 2.0 ** (1.0 / self.gumbel.r)
        if not weighted:
            return (chi_l, chi_u)
        return (self.pi_c * chi_l, self.pi_g * chi_u)

    def sample(self, n, seed=None):
        rng = _rng(seed)
        weights = [self.pi_f, self.pi_c, self.pi_g]
        comp = rng.choice(3, size=n, p=weights)
        out = np.empty((n, 2))
        for idx, (_, c) in enumerate(self._weights_components()):
            mask = comp == idx
            if np.any(mask):
                out[mask] = c.sample(int(mask.sum()), rng)
        return out


# ---------------------------------------------------------------------------
# factory
# ---------------------------------------------------------------------------

FAMILIES = {
    "mo": (MarshallOlkin, 1),
    "gaussian": (Gaussian, 1),
    "gumbel": (Gumbel, 1),
    "frank": (Frank, 1),
    "clayton": (Clayton, 1),
    "fcg": (FCGMixture, 5),
}


def make_copula(family: str, params) -> BivariateCopula:
    """Build a copula from a family tag and a parameter vector."""
    key = family.lower()
    if key not in FAMILIES:
        raise ParameterError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    cls, nparams = FAMILIES[key]
    params = tuple(float(p) for p in np.atleast_1d(params))
    if len(params) != nparams:
        raise ParameterError(f"family {key!r} takes {nparams} parameter(s), got {len(params)}")
    return cls(*params)
