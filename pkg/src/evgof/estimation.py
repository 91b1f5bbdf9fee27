"""Rank-based parameter estimation: inversion of Kendall's tau or Spearman's
rho, and maximum pseudo-likelihood."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .empirical import PseudoSample, rho_batch, sample_rho, sample_tau, tau_batch
from .errors import ConfigError, DomainError, UnsupportedOperation
from .families import (
    FAMILIES,
    CopulaModel,
    _ev_rule,
    family_info,
    theta_of_tau_vec,
    tau_range,
)

METHODS = ("itau", "irho", "mpl")
LOG_FLOOR = -745.0


@dataclass(frozen=True)
class ModelSpec:
    """A null family: a base family, optionally Khoudraji-transformed."""

    family: str
    asym: bool = False

    def __post_init__(self):
        info = family_info(self.family)
        object.__setattr__(self, "family", info.name)
        if self.asym and not info.extreme_value:
            raise ConfigError(f"no asymmetric version of the non-EV family {info.name}")

    @classmethod
    def parse(cls, name) -> "ModelSpec":
        if isinstance(name, ModelSpec):
            return name
        if isinstance(name, CopulaModel):
            return cls(name.family, name.asym is not None)
        key = str(name).strip().lower()
        if key.startswith("a-"):
            return cls(key[2:], True)
        return cls(key, False)

    @property
    def name(self) -> str:
        return ("a-" if self.asym else "") + self.family

    @property
    def n_params(self) -> int:
        return 3 if self.asym else 1

    def model(self, params) -> CopulaModel:
        params = np.atleast_1d(np.asarray(params, float))
        if self.asym:
            return CopulaModel(self.family, params[0], (params[1], params[2]))
        return CopulaModel(self.family, params[0])


@dataclass(frozen=True)
class EstimationMethod:
    tag: str = "itau"
    xatol: float = 1e-10
    maxiter: int = 4000
    multistart: bool = False

    def __post_init__(self):
        tag = self.tag.lower()
        if tag not in METHODS:
            raise ConfigError(f"unknown estimation method {self.tag!r}; choose from {METHODS}")
        object.__setattr__(self, "tag", tag)


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    theta_hat: tuple
    method: str
    loglik: float | None = None
    converged: bool = True
    n_iter: int = 0
    grad_norm: float | None = None
    flags: tuple = field(default=())

    @property
    def model(self) -> CopulaModel:
        return self.spec.model(self.theta_hat)


def _scalar_spec(family) -> ModelSpec:
    spec = ModelSpec.parse(family)
    if spec.asym:
        raise UnsupportedOperation(
            "moment inversion needs a real-valued parameter; fit Khoudraji models by MPL"
        )
    return spec


# -- inversion of Kendall's tau ---------------------------------------------

def fit_itau(family, ps: PseudoSample) -> FitResult:
    spec = _scalar_spec(family)
    tau_n = sample_tau(ps)
    theta, clamped = theta_of_tau_vec(spec.family, [tau_n])
    flags = ("tau-clamped",) if clamped[0] else ()
    return FitResult(spec, (float(theta[0]),), "itau", converged=not clamped[0], flags=flags)


def itau_batch(spec: ModelSpec, uv: np.ndarray):
    """Tau-inversion estimates for a batch of pseudo-samples (B, n, 2)."""
    theta, clamped = theta_of_tau_vec(spec.family, tau_batch(uv))
    return theta, clamped


# -- inversion of Spearman's rho --------------------------------------------

# theta = from_z(z) on [zlo, zhi]; rho is increasing in z
_RHO_COORD = {
    "gh": (lambda th: np.log(th - 1.0), lambda z: 1.0 + np.exp(z), (-14.0, 6.0)),
    "galambos": (np.log, np.exp, (-6.0, 5.0)),
    "hr": (np.log, np.exp, (-3.0, 5.0)),
    "tev": (np.arctanh, np.tanh, (-6.0, 5.0)),
}


def rho_of_theta_vec(family: str, thetas) -> np.ndarray:
    """Spearman's rho for a batch of parameters of a scalar family."""
    name = family_info(family).name
    thetas = np.asarray(thetas, float)
    if name == "normal":
        return 6.0 / math.pi * np.arcsin(thetas / 2.0)
    if name == "fgm":
        return thetas / 3.0
    info = FAMILIES[name]
    if not info.extreme_value:
        raise UnsupportedOperation(f"rho inversion is not provided for {name}")
    T, W = _ev_rule(0.5)
    A = info.pickands(T, thetas[..., None], 0)[0]
    return np.sum(W / A**2, axis=-1) - 1.0


def _theta_of_rho(name: str, rho: float):
    """(theta, clamped) solving rho_of_theta(theta) = rho."""
    info = FAMILIES[name]
    if name == "normal":
        r = min(max(rho, -1.0 + 1e-12), 1.0 - 1e-12)
        return 2.0 * math.sin(math.pi * r / 6.0), r != rho
    if name == "fgm":
        r = min(max(rho, -1.0 / 3.0), 1.0 / 3.0)
        return 3.0 * r, r != rho
    if name not in _RHO_COORD:
        raise UnsupportedOperation(f"rho inversion is not provided for {name}")
    _, from_z, (zlo, zhi) = _RHO_COORD[name]
    f = lambda z: float(rho_of_theta_vec(name, from_z(z))) - rho  # noqa: E731
    if rho <= 0.0:
        return float(info.independence), rho < 0.0
    flo, fhi = f(zlo), f(zhi)
    if fhi <= 0.0:
        return float(from_z(zhi)), fhi < 0.0
    if flo >= 0.0:
        # tiny positive rho below the coordinate range: solve in theta directly
        g = lambda th: float(rho_of_theta_vec(name, th)) - rho  # noqa: E731
        return optimize.brentq(g, float(info.independence), float(from_z(zlo)), xtol=1e-300), False
    z = optimize.brentq(f, zlo, zhi, xtol=1e-12)
    return float(from_z(z)), False


def fit_irho(family, ps: PseudoSample) -> FitResult:
    spec = _scalar_spec(family)
    theta, clamped = _theta_of_rho(spec.family, sample_rho(ps))
    flags = ("rho-clamped",) if clamped else ()
    return FitResult(spec, (theta,), "irho", converged=not clamped, flags=flags)


def irho_batch(spec: ModelSpec, uv: np.ndarray):
    out = [_theta_of_rho(spec.family, float(r)) for r in rho_batch(uv)]
    return np.array([o[0] for o in out]), np.array([o[1] for o in out])


# -- maximum pseudo-likelihood ----------------------------------------------

# optimization coordinate per family: theta = from_z(z), z in [zlo, zhi]
_MPL_COORD = {
    "gh": (lambda th: np.log(max(th - 1.0, 1e-300)), lambda z: 1.0 + math.exp(z), (-14.0, 7.0)),
    "galambos": (lambda th: np.log(max(th, 1e-300)), math.exp, (-7.0, 6.0)),
    "hr": (lambda th: np.log(max(th, 1e-300)), math.exp, (-5.0, 6.0)),
    "tev": (lambda th: math.atanh(min(max(th, -0.999999), 0.999999)), math.tanh, (-6.0, 6.0)),
    "clayton": (lambda th: np.log(max(th, 1e-300)), math.exp, (-10.0, 5.5)),
    "frank": (math.asinh, math.sinh, (-8.0, 8.0)),
    "normal": (lambda th: math.atanh(min(max(th, -0.999999), 0.999999)), math.tanh, (-6.0, 6.0)),
    "plackett": (lambda th: np.log(max(th, 1e-300)), math.exp, (-9.0, 9.0)),
    "fgm": (float, float, (-1.0, 1.0)),
    "fgm-p": (float, float, (0.0, 1.0)),
    "fgm-cfg": (float, float, (0.0, 1.0)),
}
_LOGIT_BOUND = 10.0


def _logit(p):
    return math.log(p / (1.0 - p))


def _expit(z):
    return 1.0 / (1.0 + math.exp(-z))


def loglik(model: CopulaModel, ps: PseudoSample) -> tuple[float, bool]:
    """Pseudo-log-likelihood and whether the log floor was applied."""
    lp = np.asarray(model.logpdf(ps.u, ps.v), float)
    bad = ~(lp >= LOG_FLOOR)
    if np.any(bad):
        lp = np.where(bad, LOG_FLOOR, lp)
    return float(lp.sum()), bool(bad.any())


class _Objective:
    """Mean negative pseudo-log-likelihood in unconstrained coordinates."""

    def __init__(self, spec: ModelSpec, ps: PseudoSample):
        self.spec = spec
        self.ps = ps
        self.to_z, self.from_z, self.zbox = _MPL_COORD[spec.family]
        self.floored = False
        self.nfev = 0

    def params(self, z) -> tuple:
        z = np.atleast_1d(z)
        lo, hi = self.zbox
        th = self.from_z(min(max(float(z[0]), lo), hi))
        if not self.spec.asym:
            return (th,)
        lam = _expit(min(max(float(z[1]), -_LOGIT_BOUND), _LOGIT_BOUND))
        kap = _expit(min(max(float(z[2]), -_LOGIT_BOUND), _LOGIT_BOUND))
        return (th, lam, kap)

    def coords(self, params) -> np.ndarray:
        lo, hi = self.zbox
        z0 = min(max(float(self.to_z(params[0])), lo), hi)
        if not self.spec.asym:
            return np.array([z0])
        return np.array([z0, _logit(params[1]), _logit(params[2])])

    def __call__(self, z) -> float:
        self.nfev += 1
        try:
            model = self.spec.model(self.params(z))
        except DomainError:
            return -LOG_FLOOR
        ll, floored = loglik(model, self.ps)
        self.floored |= floored
        return -ll / self.ps.n

    def gradient(self, z, h: float = 1e-5) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, float))
        g = np.empty(z.size)
        for j in range(z.size):
            e = np.zeros(z.size)
            e[j] = h
            g[j] = (self(z + e) - self(z - e)) / (2.0 * h)
        return g


def _brent_1d(obj: _Objective, z0: float, xatol: float, maxiter: int, width: float = 2.0):
    zlo, zhi = obj.zbox
    lo, hi = max(zlo, z0 - width), min(zhi, z0 + width)
    success = True
    for _ in range(40):
        r = optimize.minimize_scalar(
            obj, bounds=(lo, hi), method="bounded", options={"xatol": xatol, "maxiter": maxiter}
        )
        success = bool(r.success)
        z = float(r.x)
        if z - lo < 1e-6 and lo > zlo:
            lo, hi = max(zlo, lo - 2.0 * width), z + width
        elif hi - z < 1e-6 and hi < zhi:
            lo, hi = z - width, min(zhi, hi + 2.0 * width)
        else:
            break
    return np.array([z]), success


def _nelder_mead(obj: _Objective, z0: np.ndarray, xatol: float, maxiter: int):
    r = optimize.minimize(
        obj,
        z0,
        method="Nelder-Mead",
        options={"xatol": max(xatol, 1e-9), "fatol": 1e-14, "maxiter": maxiter, "maxfev": 2 * maxiter},
    )
    return np.asarray(r.x, float), bool(r.success)


def _default_start(spec: ModelSpec, ps: PseudoSample) -> tuple:
    base = fit_itau(spec.family, ps).theta_hat[0]
    if spec.asym:
        return (base, 0.5, 0.5)
    return (base,)


def fit_mpl(family, ps: PseudoSample, start=None, method: EstimationMethod | None = None) -> FitResult:
    """Maximum pseudo-likelihood fit.

    1-d families use bounded Brent around the start; Khoudraji models use
    Nelder-Mead over (z_theta, logit lambda, logit kappa).  The default start
    is the tau-inversion estimate, with (lambda, kappa) = (0.5, 0.5) for
    Khoudraji models.  Convergence means the optimizer succeeded, the optimum
    is interior and the numeric gradient of the mean log-likelihood in the
    optimization coordinates has norm at most 1e-6.
    """
    spec = ModelSpec.parse(family)
    method = method or EstimationMethod("mpl")
    obj = _Objective(spec, ps)
    if start is None:
        start = _default_start(spec, ps)
    start = tuple(float(s) for s in np.atleast_1d(start))
    if len(start) != spec.n_params:
        raise ConfigError(f"{spec.name} needs {spec.n_params} starting values")
    z0 = obj.coords(start)
    starts = [z0]
    if method.multistart:
        for shift in (-1.0, 1.0):
            z = z0.copy()
            z[0] = min(max(z[0] + shift, obj.zbox[0]), obj.zbox[1])
            if spec.asym:
                z[1:] = -shift
            starts.append(z)
    best = None
    for zs in starts:
        if spec.asym:
            z, ok = _nelder_mead(obj, zs, method.xatol, method.maxiter)
        else:
            z, ok = _brent_1d(obj, float(zs[0]), method.xatol, method.maxiter)
        val = obj(z)
        if best is None or val < best[1]:
            best = (z, val, ok)
    z, val, ok = best
    flags = []
    # a maximizer must not be worse than the point it started from
    if obj(z0) < val:
        z, val = z0, obj(z0)
        flags.append("start-retained")
    lo, hi = obj.zbox
    at_boundary = z[0] - lo < 1e-5 or hi - z[0] < 1e-5
    params = obj.params(z)
    info = FAMILIES[spec.family]
    if z[0] - lo < 1e-5 and info.independence is not None and info.contains(info.independence):
        # the box edge approximates a closed independence boundary; try it exactly
        edge = (float(info.independence),) + tuple(params[1:])
        ll_edge, floored = loglik(spec.model(edge), ps)
        if -ll_edge / ps.n <= val:
            params, val = edge, -ll_edge / ps.n
            obj.floored |= floored
    if spec.asym:
        at_boundary |= bool(np.any(np.abs(z[1:]) > _LOGIT_BOUND - 1e-5))
    grad = obj.gradient(z)
    if at_boundary:
        flags.append("boundary")
    gnorm = float(np.linalg.norm(grad))
    converged = ok and not at_boundary and gnorm <= 1e-6
    if not ok:
        flags.append("not-converged")
    if obj.floored:
        flags.append("log-floor")
    return FitResult(
        spec,
        tuple(float(p) for p in params),
        "mpl",
        loglik=-val * ps.n,
        converged=converged,
        n_iter=obj.nfev,
        grad_norm=gnorm,
        flags=tuple(flags),
    )


def fit(spec, ps: PseudoSample, method="itau") -> FitResult:
    """Dispatch on the estimation method."""
    tag = method.tag if isinstance(method, EstimationMethod) else EstimationMethod(method).tag
    if tag == "itau":
        return fit_itau(spec, ps)
    if tag == "irho":
        return fit_irho(spec, ps)
    return fit_mpl(spec, ps, method=method if isinstance(method, EstimationMethod) else None)


def check_method(spec: ModelSpec, method: str) -> str:
    """Validate that ``method`` can fit ``spec``; raises ConfigError otherwise."""
    tag = EstimationMethod(method).tag
    if spec.asym and tag != "mpl":
        raise ConfigError(f"{spec.name} has a vector parameter; use the mpl method")
    if tag == "irho" and spec.family not in _RHO_COORD and spec.family not in ("normal", "fgm"):
        raise ConfigError(f"rho inversion is not provided for {spec.family}")
    if tag == "itau":
        tau_range(spec.family)
    return tag

