"""Bivariate copula families: CDF, density, Pickands function, dependence
measures and sampling.

Extreme-value (EV) families are described entirely by their Pickands
dependence function ``A``; everything else (CDF, conditional CDF, density,
Kendall's tau, Spearman's rho) is derived from ``A`` and its first two
derivatives.  The Khoudraji device turns any EV family into an asymmetric EV
family with Pickands function::

    A_{l,k}(t) = (1-k) t + (1-l)(1-t) + g(t) A(k t / g(t)),  g(t) = k t + l (1-t)

All Pickands helpers broadcast over ``t`` and the parameter, so a whole batch
of bootstrap fits can be evaluated on a grid in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import CubicSpline

from .errors import DomainError, TauRangeError, UnsupportedOperation
from .rng import generator

TEV_DF = 4
EULER_GAMMA = 0.57721566490153286

_SQRT_2PI = math.sqrt(2.0 * math.pi)

PickandsFn = Callable[[np.ndarray, np.ndarray, int], tuple]


# ---------------------------------------------------------------------------
# Pickands functions.  Each returns (A,) / (A, A') / (A, A', A'') for
# order 0 / 1 / 2.  Values at t in {0, 1} are exact for A; derivatives are
# only requested in the open interval.


def _finish(t, parts, order):
    A = np.where((t <= 0.0) | (t >= 1.0), 1.0, parts[0])
    return (A,) + tuple(parts[1 : order + 1])


def _gh(t, theta, order=0):
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    m = np.minimum(t, 1.0 - t)
    M = np.maximum(t, 1.0 - t)
    with np.errstate(all="ignore"):
        A = M * (1.0 + (m / M) ** th) ** (1.0 / th)
        parts = [A]
        if order >= 1:
            a = (t / A) ** (th - 1.0)
            b = ((1.0 - t) / A) ** (th - 1.0)
            parts.append(a - b)
            if order >= 2:
                parts.append((th - 1.0) * a * b / (A * t * (1.0 - t)))
    return _finish(t, parts, order)


def _galambos(t, theta, order=0):
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    m = np.minimum(t, 1.0 - t)
    M = np.maximum(t, 1.0 - t)
    with np.errstate(all="ignore"):
        B = m * (1.0 + (m / M) ** th) ** (-1.0 / th)
        B = np.where(th <= 0.0, 0.0, B)
        parts = [1.0 - B]
        if order >= 1:
            p = B / t
            q = B / (1.0 - t)
            dB = p ** (1.0 + th) - q ** (1.0 + th)
            parts.append(-dB)
            if order >= 2:
                d2B = (1.0 + th) * (
                    p**th * (dB * t - B) / t**2
                    - q**th * (dB * (1.0 - t) + B) / (1.0 - t) ** 2
                )
                parts.append(np.where(th <= 0.0, 0.0, -d2B))
    return _finish(t, parts, order)


def _husler_reiss(t, theta, order=0):
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    with np.errstate(all="ignore"):
        L = np.log(t) - np.log1p(-t)
        a = 1.0 / th
        b = th / 2.0
        z1 = a + b * L
        z2 = a - b * L
        F1, F2 = special.ndtr(z1), special.ndtr(z2)
        parts = [t * F1 + (1.0 - t) * F2]
        if order >= 1:
            parts.append(F1 - F2)
            if order >= 2:
                f = (np.exp(-0.5 * z1 * z1) + np.exp(-0.5 * z2 * z2)) / _SQRT_2PI
                parts.append(np.where(th <= 0.0, 0.0, b * f / (t * (1.0 - t))))
    return _finish(t, parts, order)


def _t_pdf(z, df):
    logc = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log(df * math.pi)
    return np.exp(logc - (df + 1) / 2 * np.log1p(z * z / df))


def _tev(t, rho, order=0):
    t, rho = np.broadcast_arrays(np.asarray(t, float), np.asarray(rho, float))
    nu = TEV_DF
    k = nu + 1.0
    with np.errstate(all="ignore"):
        c = np.sqrt(k / (1.0 - rho * rho))
        r = t / (1.0 - t)
        z1 = c * (r ** (1.0 / nu) - rho)
        z2 = c * (r ** (-1.0 / nu) - rho)
        indep = rho <= -1.0
        z1 = np.where(indep, np.inf, z1)
        z2 = np.where(indep, np.inf, z2)
        T1, T2 = special.stdtr(k, z1), special.stdtr(k, z2)
        parts = [t * T1 + (1.0 - t) * T2]
        if order >= 1:
            parts.append(T1 - T2)
            if order >= 2:
                dz1 = c / nu * r ** (1.0 / nu - 1.0) / (1.0 - t) ** 2
                dz2 = c / nu * r ** (1.0 - 1.0 / nu) / t**2
                d2 = _t_pdf(z1, k) * dz1 + _t_pdf(z2, k) * dz2
                parts.append(np.where(indep, 0.0, d2))
    return _finish(t, parts, order)


def _fgm_p(t, theta, order=0):
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    q = t * (1.0 - t)
    D = 4.0 + q * (2.0 + 3.0 * th)
    parts = [(2.0 * q + 4.0) / D]
    if order >= 1:
        dq = 1.0 - 2.0 * t
        parts.append(-12.0 * th / D**2 * dq)
        if order >= 2:
            parts.append(24.0 * th * (2.0 + 3.0 * th) * dq**2 / D**3 + 24.0 * th / D**2)
    return _finish(t, parts, order)


def _fgm_cfg(t, theta, order=0):
    t, th = np.broadcast_arrays(np.asarray(t, float), np.asarray(theta, float))
    q = t * (1.0 - t)
    A = (2.0 / (2.0 + q)) ** th
    parts = [A]
    if order >= 1:
        dq = 1.0 - 2.0 * t
        parts.append(-th * A / (2.0 + q) * dq)
        if order >= 2:
            parts.append(th * (th + 1.0) * A * dq**2 / (2.0 + q) ** 2 + 2.0 * th * A / (2.0 + q))
    return _finish(t, parts, order)


def khoudraji_pickands(base: PickandsFn, lam: float, kap: float) -> PickandsFn:
    """Wrap a Pickands function with the Khoudraji asymmetrization."""

    def pick(t, theta, order=0):
        t = np.asarray(t, float)
        g = kap * t + lam * (1.0 - t)
        r = kap * t / g
        base_parts = base(r, theta, order)
        A = (1.0 - kap) * t + (1.0 - lam) * (1.0 - t) + g * base_parts[0]
        parts = [A]
        if order >= 1:
            parts.append((kap - lam) * (base_parts[0] - 1.0) + kap * lam * base_parts[1] / g)
            if order >= 2:
                parts.append((kap * lam) ** 2 * base_parts[2] / g**3)
        return _finish(t, parts, order)

    return pick


# ---------------------------------------------------------------------------
# Family registry


@dataclass(frozen=True)
class FamilyInfo:
    name: str
    extreme_value: bool
    lower: float
    upper: float
    lower_closed: bool
    upper_closed: bool
    independence: float | None
    pickands: PickandsFn | None = None
    label: str = ""

    def contains(self, theta: float) -> bool:
        if not np.isfinite(theta):
            return False
        lo_ok = theta >= self.lower if self.lower_closed else theta > self.lower
        hi_ok = theta <= self.upper if self.upper_closed else theta < self.upper
        return bool(lo_ok and hi_ok)


FAMILIES: dict[str, FamilyInfo] = {
    f.name: f
    for f in [
        FamilyInfo("gh", True, 1.0, np.inf, True, False, 1.0, _gh, "Gumbel-Hougaard"),
        FamilyInfo("galambos", True, 0.0, np.inf, True, False, 0.0, _galambos, "Galambos"),
        FamilyInfo("hr", True, 0.0, np.inf, True, False, 0.0, _husler_reiss, "Husler-Reiss"),
        FamilyInfo("tev", True, -1.0, 1.0, True, False, -1.0, _tev, "t-EV (4 df)"),
        FamilyInfo("fgm-p", True, 0.0, 1.0, True, True, 0.0, _fgm_p, "FGM-P"),
        FamilyInfo("fgm-cfg", True, 0.0, 1.0, True, True, 0.0, _fgm_cfg, "FGM-CFG"),
        FamilyInfo("clayton", False, 0.0, np.inf, False, False, None, None, "Clayton"),
        FamilyInfo("frank", False, -np.inf, np.inf, False, False, None, None, "Frank"),
        FamilyInfo("normal", False, -1.0, 1.0, False, False, 0.0, None, "Normal"),
        FamilyInfo("plackett", False, 0.0, np.inf, False, False, 1.0, None, "Plackett"),
        FamilyInfo("fgm", False, -1.0, 1.0, True, True, 0.0, None, "Farlie-Gumbel-Morgenstern"),
    ]
}

ALIASES = {
    "gumbel": "gh",
    "gumbel-hougaard": "gh",
    "ga": "galambos",
    "husler-reiss": "hr",
    "t-ev": "tev",
    "c": "clayton",
    "f": "frank",
    "n": "normal",
    "gaussian": "normal",
    "p": "plackett",
}

EV_FAMILIES = tuple(k for k, f in FAMILIES.items() if f.extreme_value)


def family_info(name: str) -> FamilyInfo:
    key = name.strip().lower().replace("_", "-")
    key = ALIASES.get(key, key)
    try:
        return FAMILIES[key]
    except KeyError:
        raise DomainError(f"unknown copula family {name!r}") from None


# ---------------------------------------------------------------------------
# Non-EV closed forms (scalar parameter).


def _bvn_cdf(h, k, rho):
    """Standard bivariate normal CDF via Owen's T function."""
    h, k = np.broadcast_arrays(np.asarray(h, float), np.asarray(k, float))
    s = math.sqrt(1.0 - rho * rho)
    with np.errstate(all="ignore"):
        ah = (k - rho * h) / (h * s)
        ak = (h - rho * k) / (k * s)
        th = np.where(h == 0.0, np.sign(k - rho * h) * 0.25, special.owens_t(h, ah))
        tk = np.where(k == 0.0, np.sign(h - rho * k) * 0.25, special.owens_t(k, ak))
        out = 0.5 * special.ndtr(h) + 0.5 * special.ndtr(k) - th - tk
    corr = (h * k < 0) | ((h * k == 0) & (h + k < 0))
    out = np.where(corr, out - 0.5, out)
    both0 = (h == 0.0) & (k == 0.0)
    out = np.where(both0, 0.25 + math.asin(rho) / (2 * math.pi), out)
    return np.clip(out, 0.0, 1.0)


def _clayton_cdf(u, v, th):
    with np.errstate(all="ignore"):
        return np.maximum(u**-th + v**-th - 1.0, 1.0) ** (-1.0 / th)


def _clayton_logpdf(u, v, th):
    lu, lv = np.log(u), np.log(v)
    # log(u^-th + v^-th - 1) without overflow for large th
    a, b = -th * lu, -th * lv
    m = np.maximum(a, b)
    log_s = m + np.log(np.exp(a - m) + np.exp(b - m) - np.exp(-m))
    return math.log1p(th) - (th + 1.0) * (lu + lv) - (1.0 / th + 2.0) * log_s


def _clayton_h(u, v, th):
    with np.errstate(all="ignore"):
        return u ** (-th - 1.0) * (u**-th + v**-th - 1.0) ** (-1.0 / th - 1.0)


def _clayton_hinv(u, p, th):
    with np.errstate(all="ignore"):
        w = (p * u ** (th + 1.0)) ** (-th / (1.0 + th)) - u**-th + 1.0
        return w ** (-1.0 / th)


def _frank_cdf(u, v, th):
    num = np.expm1(-th * u) * np.expm1(-th * v)
    return -np.log1p(num / math.expm1(-th)) / th


def _frank_logpdf(u, v, th):
    em = -math.expm1(-th)  # 1 - e^{-th}
    den = em - (-np.expm1(-th * u)) * (-np.expm1(-th * v))
    return np.log(th * em) - th * (u + v) - 2.0 * np.log(np.abs(den))


def _frank_h(u, v, th):
    a = np.expm1(-th * u)
    b = np.expm1(-th * v)
    return np.exp(-th * u) * b / (math.expm1(-th) + a * b)


def _frank_hinv(u, p, th):
    eu = np.exp(-th * u)
    return -np.log1p(p * math.expm1(-th) / (eu - p * (eu - 1.0))) / th


def _normal_cdf(u, v, rho):
    return _bvn_cdf(special.ndtri(u), special.ndtri(v), rho)


def _normal_logpdf(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * math.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _normal_h(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    return special.ndtr((y - rho * x) / math.sqrt(1.0 - rho * rho))


def _normal_hinv(u, p, rho):
    x = special.ndtri(u)
    return special.ndtr(rho * x + math.sqrt(1.0 - rho * rho) * special.ndtri(p))


def _plackett_cdf(u, v, th):
    if th == 1.0:
        return u * v
    S = 1.0 + (th - 1.0) * (u + v)
    return (S - np.sqrt(S * S - 4.0 * u * v * th * (th - 1.0))) / (2.0 * (th - 1.0))


def _plackett_logpdf(u, v, th):
    S = 1.0 + (th - 1.0) * (u + v)
    num = th * (1.0 + (th - 1.0) * (u + v - 2.0 * u * v))
    return np.log(num) - 1.5 * np.log(S * S - 4.0 * th * (th - 1.0) * u * v)


def _plackett_h(u, v, th):
    if th == 1.0:
        return np.broadcast_to(np.asarray(v, float), np.broadcast(u, v).shape).copy()
    S = 1.0 + (th - 1.0) * (u + v)
    R = np.sqrt(S * S - 4.0 * u * v * th * (th - 1.0))
    return 0.5 * (1.0 - (S - 2.0 * v * th) / R)


def _plackett_hinv(u, p, th):
    a = p * (1.0 - p)
    b = th + a * (th - 1.0) ** 2
    c = 2.0 * a * (u * th * th + 1.0 - u) + th * (1.0 - 2.0 * a)
    d = math.sqrt(th) * np.sqrt(th + 4.0 * a * u * (1.0 - u) * (1.0 - th) ** 2)
    return (c - (1.0 - 2.0 * p) * d) / (2.0 * b)


def _fgm_cdf(u, v, th):
    return u * v * (1.0 + th * (1.0 - u) * (1.0 - v))


def _fgm_logpdf(u, v, th):
    return np.log1p(th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v))


def _fgm_h(u, v, th):
    return v * (1.0 + th * (1.0 - v) * (1.0 - 2.0 * u))


def _fgm_hinv(u, p, th):
    a = th * (1.0 - 2.0 * u)
    with np.errstate(all="ignore"):
        root = ((1.0 + a) - np.sqrt((1.0 + a) ** 2 - 4.0 * a * p)) / (2.0 * a)
    return np.where(np.abs(a) < 1e-12, p, root)


_NON_EV = {
    "clayton": (_clayton_cdf, _clayton_logpdf, _clayton_h, _clayton_hinv),
    "frank": (_frank_cdf, _frank_logpdf, _frank_h, _frank_hinv),
    "normal": (_normal_cdf, _normal_logpdf, _normal_h, _normal_hinv),
    "plackett": (_plackett_cdf, _plackett_logpdf, _plackett_h, _plackett_hinv),
    "fgm": (_fgm_cdf, _fgm_logpdf, _fgm_h, _fgm_hinv),
}


# ---------------------------------------------------------------------------
# Generic EV machinery


def _ev_parts(pick, theta, u, v, order):
    """Shared pieces for EV copulas at interior points."""
    x = -np.log(u)
    y = -np.log(v)
    s = x + y
    w = y / s
    parts = pick(w, theta, order)
    return x, y, s, w, parts


def _ev_cdf(pick, theta, u, v):
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    out = np.empty(u.shape)
    edge = (u <= 0) | (v <= 0) | (u >= 1) | (v >= 1)
    out[edge] = np.where((u[edge] <= 0) | (v[edge] <= 0), 0.0, np.minimum(u[edge], v[edge]))
    inner = ~edge
    if inner.any():
        th = np.broadcast_to(theta, u.shape)[inner] if np.ndim(theta) else theta
        _, _, s, _, (A,) = _ev_parts(pick, th, u[inner], v[inner], 0)
        out[inner] = np.exp(-s * A)
    return out


def _ev_h_logc(pick, theta, u, v):
    """Return (dC/du, log density) at interior points."""
    x, y, s, w, (A, dA, d2A) = _ev_parts(pick, theta, u, v, 2)
    lx = A - w * dA
    ly = A + (1.0 - w) * dA
    logC = -s * A
    with np.errstate(all="ignore"):
        h = np.exp(logC + x) * lx
        bracket = lx * ly + w * (1.0 - w) * d2A / s
        logc = logC + x + y + np.log(bracket)
    return h, logc


def _ev_hinv(pick, theta, u, p, rtol=1e-13, maxiter=200):
    """Solve dC/du(u, v) = p for v by bracketed Newton iteration.

    Each element is iterated on its own and frozen once converged, so the
    result for an element does not depend on the rest of the batch.
    """
    u = np.asarray(u, float)
    p = np.asarray(p, float)
    theta = np.broadcast_to(np.asarray(theta, float), u.shape)
    lo = np.zeros(u.shape)
    hi = np.ones(u.shape)
    v = p.copy()
    idx = np.arange(u.size)
    uf, pf, thf = u.ravel(), p.ravel(), theta.ravel()
    vf, lof, hif = v.ravel(), lo.ravel(), hi.ravel()
    for _ in range(maxiter):
        if idx.size == 0:
            break
        vi = vf[idx]
        h, logc = _ev_h_logc(pick, thf[idx], uf[idx], vi)
        g = h - pf[idx]
        lo_i = np.where(g < 0, vi, lof[idx])
        hi_i = np.where(g >= 0, vi, hif[idx])
        with np.errstate(all="ignore"):
            vn = vi - g / np.exp(logc)
        bad = ~((vn > lo_i) & (vn < hi_i))
        vn = np.where(bad, 0.5 * (lo_i + hi_i), vn)
        # an exact root is also a bracket end; keep it rather than bisecting
        vn = np.where(g == 0, vi, vn)
        done = (np.abs(vn - vi) <= rtol * vn) | (hi_i - lo_i <= rtol * lo_i) | (g == 0)
        vf[idx], lof[idx], hif[idx] = vn, lo_i, hi_i
        idx = idx[~done]
    return vf.reshape(u.shape)


# ---------------------------------------------------------------------------
# CopulaModel


@dataclass(frozen=True)
class CopulaModel:
    """A fully specified copula: family, parameter and optional Khoudraji pair.

    ``theta`` is the base-family parameter; ``asym = (lambda, kappa)`` turns an
    extreme-value base family into its Khoudraji transform.
    """

    family: str
    theta: float
    asym: tuple[float, float] | None = None

    def __post_init__(self):
        info = family_info(self.family)
        object.__setattr__(self, "family", info.name)
        theta = float(np.asarray(self.theta, float).reshape(-1)[0]) if np.ndim(self.theta) else float(self.theta)
        object.__setattr__(self, "theta", theta)
        if not info.contains(theta) or (info.name == "frank" and theta == 0.0):
            raise DomainError(f"theta={theta!r} outside the domain of {info.name}")
        if self.asym is not None:
            lam, kap = (float(a) for a in self.asym)
            if not (0.0 < lam < 1.0 and 0.0 < kap < 1.0):
                raise DomainError(f"asymmetry pair {self.asym!r} must lie in (0,1)^2")
            if not info.extreme_value:
                raise UnsupportedOperation("Khoudraji transforms are only provided for EV families")
            object.__setattr__(self, "asym", (lam, kap))

    # -- identity ---------------------------------------------------------
    @property
    def info(self) -> FamilyInfo:
        return FAMILIES[self.family]

    @property
    def is_extreme_value(self) -> bool:
        return self.info.extreme_value

    @property
    def name(self) -> str:
        return ("a-" if self.asym else "") + self.family

    @property
    def params(self) -> tuple[float, ...]:
        """Flat parameter vector: (theta,) or (theta, lambda, kappa)."""
        return (self.theta,) + (tuple(self.asym) if self.asym else ())

    def with_params(self, params: Sequence[float]) -> "CopulaModel":
        params = [float(p) for p in params]
        if self.asym is None:
            return CopulaModel(self.family, params[0])
        return CopulaModel(self.family, params[0], (params[1], params[2]))

    def _pick(self) -> PickandsFn:
        if not self.is_extreme_value:
            raise UnsupportedOperation(f"{self.family} is not an extreme-value copula")
        base = self.info.pickands
        if self.asym is None:
            return base
        return khoudraji_pickands(base, *self.asym)

    # -- Pickands ---------------------------------------------------------
    def pickands(self, t, order: int = 0):
        """A(t) (order 0) or the tuple (A, A', A'') up to ``order``."""
        out = self._pick()(np.asarray(t, float), self.theta, order)
        return out[0] if order == 0 else out

    # -- distribution -----------------------------------------------------
    def cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if self.is_extreme_value:
            return _ev_cdf(self._pick(), self.theta, u, v)
        fn = _NON_EV[self.family][0]
        out = np.empty(u.shape)
        edge = (u <= 0) | (v <= 0) | (u >= 1) | (v >= 1)
        out[edge] = np.where((u[edge] <= 0) | (v[edge] <= 0), 0.0, np.minimum(u[edge], v[edge]))
        inner = ~edge
        if inner.any():
            out[inner] = fn(u[inner], v[inner], self.theta)
        return out

    def logpdf(self, u, v):
        u, v = self._check_interior(u, v)
        if self.is_extreme_value:
            return _ev_h_logc(self._pick(), self.theta, u, v)[1]
        return _NON_EV[self.family][1](u, v, self.theta)

    def density(self, u, v):
        return np.exp(self.logpdf(u, v))

    def hfunc(self, u, v):
        """Conditional CDF P(V <= v | U = u) = dC/du."""
        u, v = self._check_interior(u, v)
        if self.is_extreme_value:
            return _ev_h_logc(self._pick(), self.theta, u, v)[0]
        return _NON_EV[self.family][2](u, v, self.theta)

    def hinv(self, u, p):
        """Inverse of ``hfunc`` in its second argument."""
        u, p = np.broadcast_arrays(np.asarray(u, float), np.asarray(p, float))
        if self.is_extreme_value:
            return _ev_hinv(self._pick(), self.theta, u, p)
        return _NON_EV[self.family][3](u, p, self.theta)

    @staticmethod
    def _check_interior(u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
            raise DomainError("density and conditional CDF require (u, v) in (0,1)^2")
        return u, v

    # -- sampling ---------------------------------------------------------
    def from_uniforms(self, w) -> np.ndarray:
        """Map i.i.d. uniforms of shape (..., 2) to copula draws (conditional method)."""
        w = np.clip(np.asarray(w, float), 2.0**-54, 1.0 - 2.0**-53)
        u = w[..., 0]
        v = self.hinv(u, w[..., 1])
        return np.stack([u, np.clip(v, 2.0**-1074, 1.0)], axis=-1)

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n i.i.d. pairs from the copula; deterministic given ``seed``."""
        if n < 1:
            raise DomainError("sample size must be >= 1")
        return self.from_uniforms(generator(seed).random((int(n), 2)))

    # -- dependence measures ----------------------------------------------
    def tau(self) -> float:
        return tau_of_theta(self)

    def rho(self) -> float:
        return rho_of_theta(self)


# ---------------------------------------------------------------------------
# Module-level operations


def pickands_value(model: CopulaModel, t):
    return model.pickands(t)


def cdf(model: CopulaModel, u, v):
    return model.cdf(u, v)


def density(model: CopulaModel, u, v):
    return model.density(u, v)


def sample(model: CopulaModel, n: int, seed: int) -> np.ndarray:
    return model.sample(n, seed)


def mo_tau_bound(lam: float, kap: float) -> float:
    """Kendall's tau of the Marshall-Olkin copula, an upper bound for Khoudraji models."""
    return kap * lam / (kap + lam - kap * lam)


def _debye1(x: float) -> float:
    if x == 0.0:
        return 1.0
    f = lambda s: s / math.expm1(s) if s != 0 else 1.0  # noqa: E731
    val = integrate.quad(f, 0.0, abs(x), epsabs=0.0, epsrel=1e-13, limit=200)[0] / abs(x)
    return val if x > 0 else val + abs(x) / 2.0


def _ev_tau_quad(pick, theta, peak=0.5) -> float:
    """Adaptive-quadrature tau for an EV model (reference implementation)."""

    def f(t):
        A, _, d2A = pick(np.array(t), theta, 2)
        return float(t * (1.0 - t) * d2A / A)

    edges = [0.0] + sorted({peak, 0.5}) + [1.0]
    return sum(
        integrate.quad(f, a, b, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
        for a, b in zip(edges[:-1], edges[1:])
    )


_GEOM = np.array([1e-12, 1e-10, 1e-8, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.2, 0.3, 0.4])


@lru_cache(maxsize=64)
def _ev_rule(peak: float, order: int = 24):
    """Composite Gauss-Legendre rule on [0,1], graded toward 0, ``peak`` and 1."""
    breaks = [0.0, peak, 1.0]
    for a, b in ((0.0, peak), (peak, 1.0)):
        half = 0.5 * (b - a)
        breaks += list(a + half * _GEOM) + list(b - half * _GEOM)
    b = np.unique(np.array(breaks))
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = b[:-1, None], b[1:, None]
    nodes = (0.5 * (hi - lo) * (x + 1.0) + lo).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return nodes, weights


def _ev_tau_vec(pick, thetas, peak=0.5) -> np.ndarray:
    """tau = int_0^1 t(1-t) A''(t) / A(t) dt for a batch of parameters."""
    T, W = _ev_rule(float(peak))
    thetas = np.asarray(thetas, float)
    A, _, d2A = pick(T, thetas[..., None], 2)
    return np.sum(W * T * (1.0 - T) * d2A / A, axis=-1)


def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _numeric_tau_2d(model: CopulaModel, nodes: int = 128) -> float:
    """tau = 1 - 4 * int int dC/du * dC/dv, on a Gauss-Legendre tensor grid.

    The square is split along the diagonal, where Plackett-type copulas
    concentrate their mass; dC/dv is obtained from dC/du by exchangeability.
    """
    x, w = _gl_nodes(nodes)
    # lower triangle v < u, mapped by v = u * s
    U, S = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w) * U
    V = U * S
    hu = model.hfunc(U, V)
    hv = model.hfunc(V, U)
    lower = np.sum(W * hu * hv)
    return 1.0 - 8.0 * lower


def tau_of_theta(model: CopulaModel) -> float:
    """Kendall's tau of ``model``."""
    fam, th = model.family, model.theta
    if model.asym is None:
        if fam == "gh":
            return 1.0 - 1.0 / th
        if fam == "clayton":
            return th / (th + 2.0)
        if fam == "normal":
            return 2.0 / math.pi * math.asin(th)
        if fam == "fgm":
            return 2.0 * th / 9.0
        if fam == "frank":
            if abs(th) < 0.1:
                # series of the Debye form; avoids cancellation near 0
                return th / 9.0 - th**3 / 900.0 + th**5 / 52920.0
            return 1.0 - 4.0 / th * (1.0 - _debye1(th))
        if fam == "plackett":
            if th == 1.0:
                return 0.0
            if th < 1.0:
                # C_{1/theta}(u, v) = u - C_theta(u, 1 - v), which negates tau;
                # the quadrature is laid out for mass near the main diagonal
                return -_numeric_tau_2d(CopulaModel("plackett", 1.0 / th))
            return _numeric_tau_2d(model)
    if model.is_extreme_value:
        if th == model.info.independence:
            return 0.0
        return float(_ev_tau_vec(model._pick(), th, _peak(model)))
    raise UnsupportedOperation(f"no tau available for {model.name}")


def _peak(model: CopulaModel) -> float:
    # the Khoudraji transform moves the curvature of A from 1/2 to l/(l+k)
    if model.asym is None:
        return 0.5
    lam, kap = model.asym
    return lam / (lam + kap)


def rho_of_theta(model: CopulaModel) -> float:
    """Spearman's rho of an EV model, -1 + int_0^1 A(t)^-2 dt."""
    pick = model._pick()
    f = lambda t: float(pick(np.array(t), model.theta, 0)[0]) ** -2
    val = sum(
        integrate.quad(f, a, b, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        for a, b in ((0.0, 0.5), (0.5, 1.0))
    )
    return val - 1.0


# ---------------------------------------------------------------------------
# Inversion of tau


def tau_range(family: str) -> tuple[float, float]:
    """Closed range of tau attainable by a scalar family (endpoints may be limits)."""
    name = family_info(family).name
    return {
        "gh": (0.0, 1.0),
        "galambos": (0.0, 1.0),
        "hr": (0.0, 1.0),
        "tev": (0.0, 1.0),
        "clayton": (0.0, 1.0),
        "frank": (-1.0, 1.0),
        "normal": (-1.0, 1.0),
        "plackett": (-1.0, 1.0),
        "fgm": (-2.0 / 9.0, 2.0 / 9.0),
        "fgm-p": (0.0, float(tau_of_theta(CopulaModel("fgm-p", 1.0)))),
        "fgm-cfg": (0.0, float(tau_of_theta(CopulaModel("fgm-cfg", 1.0)))),
    }[name]


# Numerically inverted families are handled in a coordinate z in which tau is
# smooth and increasing: theta = from_z(z) for z in [zlo, zhi].
_INVERSE_COORD = {
    "galambos": (np.log, np.exp, (-4.0, 5.5)),
    "hr": (np.log, np.exp, (-1.2, 5.5)),
    "tev": (np.arctanh, np.tanh, (-4.5, 6.0)),
    "frank": (np.arcsinh, np.sinh, (-7.0, 7.0)),
    "plackett": (np.log, np.exp, (-7.0, 7.0)),
}


def _tau_at(name: str, theta: float) -> float:
    if name == "frank" and theta == 0.0:
        return 0.0
    return tau_of_theta(CopulaModel(name, theta))


def _tau_z(name: str, z) -> np.ndarray:
    """tau as a function of the inversion coordinate (vectorized for EV families)."""
    _, from_z, _ = _INVERSE_COORD[name]
    theta = from_z(np.asarray(z, float))
    info = FAMILIES[name]
    if info.extreme_value:
        return _ev_tau_vec(info.pickands, theta)
    return np.vectorize(lambda th: _tau_at(name, float(th)), otypes=[float])(theta)


def theta_of_tau(family: str, tau: float, tol: float = 1e-14) -> float:
    """Parameter of a scalar family whose Kendall's tau equals ``tau``."""
    info = family_info(family)
    name = info.name
    lo, hi = tau_range(name)
    if not np.isfinite(tau) or tau < lo or tau > hi:
        raise TauRangeError(f"tau={tau!r} not attainable by {name} (range [{lo:.6g}, {hi:.6g}])")
    if name == "gh":
        if tau >= 1.0:
            raise TauRangeError("tau = 1 is only attained in the limit theta -> infinity")
        return max(1.0, 1.0 / (1.0 - tau))
    if name == "clayton":
        if tau <= 0.0 or tau >= 1.0:
            raise TauRangeError(f"tau={tau!r} not attainable by clayton (open range (0, 1))")
        return 2.0 * tau / (1.0 - tau)
    if name == "normal":
        if abs(tau) >= 1.0:
            raise TauRangeError("normal copula needs |tau| < 1")
        return math.sin(math.pi * tau / 2.0)
    if name == "fgm":
        return 4.5 * tau
    if tau == 0.0:
        if name == "frank":
            raise TauRangeError("frank copula excludes tau = 0 (theta = 0)")
        return float(info.independence)
    if name in ("fgm-p", "fgm-cfg"):
        return optimize.brentq(lambda th: _tau_at(name, th) - tau, 0.0, 1.0, xtol=tol)
    _, from_z, (zlo, zhi) = _INVERSE_COORD[name]
    tlo, thi = (float(x) for x in _tau_z(name, [zlo, zhi]))
    if tau > thi or tau < tlo and (info.independence is None or tau < 0.0):
        raise TauRangeError(f"tau={tau!r} beyond the numerically supported range of {name}")
    if tau < tlo:
        # between independence and the lower end of the z range
        return optimize.brentq(
            lambda th: _tau_at(name, th) - tau, info.independence, float(from_z(zlo)), xtol=1e-300
        )
    z = optimize.brentq(lambda z: float(_tau_z(name, z)) - tau, zlo, zhi, xtol=tol)
    return float(from_z(z))


@lru_cache(maxsize=None)
def _inverse_spline(name: str) -> CubicSpline:
    """Cubic spline of z against tau on a uniform z grid (initial guesses)."""
    _, _, (zlo, zhi) = _INVERSE_COORD[name]
    zs = np.linspace(zlo, zhi, 801)
    taus = _tau_z(name, zs)
    return CubicSpline(taus, zs)


def theta_of_tau_vec(family: str, taus) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized tau inversion with clamping, for use inside the bootstrap.

    Returns ``(theta, clamped)``.  Unattainable values are clamped to the
    closest admissible parameter and flagged.  For the numerically inverted
    EV families a spline guess is polished by Newton steps on the exact tau.
    """
    info = family_info(family)
    name = info.name
    taus = np.atleast_1d(np.asarray(taus, float))
    lo, hi = tau_range(name)
    clamped = (taus < lo) | (taus > hi)
    if name == "gh":
        t = np.clip(taus, 0.0, 1.0 - 1e-9)
        clamped |= taus > 1.0 - 1e-9
        return np.maximum(1.0, 1.0 / (1.0 - t)), clamped
    if name in _INVERSE_COORD:
        _, from_z, (zlo, zhi) = _INVERSE_COORD[name]
        spline = _inverse_spline(name)
        dspline = spline.derivative()
        tmin, tmax = spline.x[0], spline.x[-1]
        theta = np.empty(taus.shape)
        two_sided = lo < 0.0
        clamped |= (taus > tmax) | (taus < tmin) & two_sided
        mid = (taus >= tmin) & (taus <= tmax)
        target = taus[mid]
        z = spline(target)
        # the spline guess is already close; non-EV tau evaluations are costly
        for _ in range(3 if info.extreme_value else 1):
            cur = _tau_z(name, z)
            z = np.clip(z - (cur - target) * dspline(cur), zlo, zhi)
        theta[mid] = from_z(z)
        theta[taus > tmax] = from_z(zhi)
        if two_sided:
            theta[taus < tmin] = from_z(zlo)
            # frank excludes theta = 0
            theta[theta == 0.0] = 1e-12
        else:
            theta[taus <= 0.0] = info.independence
            for i in np.flatnonzero((taus > 0.0) & (taus < tmin)):
                theta[i] = theta_of_tau(name, float(taus[i]))
        return theta, clamped
    theta = np.empty(taus.shape)
    for i, t in enumerate(taus):
        t_c = min(max(t, lo), hi)
        try:
            theta[i] = theta_of_tau(name, float(t_c))
        except TauRangeError:
            # open-range boundary (e.g. clayton at tau <= 0): nudge inside
            theta[i] = theta_of_tau(name, float(min(max(t_c, lo + 1e-6), hi - 1e-6)))
            clamped[i] = True
    return theta, clamped
