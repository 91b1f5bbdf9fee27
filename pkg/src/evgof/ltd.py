"""Population counterparts of the P and CFG estimators for arbitrary copulas.

For a copula C the two functionals are

    A^P(t)   = 1 / int_0^inf C(e^{-s(1-t)}, e^{-st}) ds
    log A^CFG(t) = -gamma - int_0^inf {C(e^{-s(1-t)}, e^{-st}) - 1(s < 1)} / s ds

after the substitution x = e^{-s}.  Both reduce to the Pickands function
when C is an extreme-value copula.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .errors import DomainError
from .families import EULER_GAMMA, CopulaModel

S_MAX = 80.0
_QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=500)


def _cdf_of(model):
    if isinstance(model, CopulaModel):
        return model.cdf
    if callable(model):
        return model
    raise DomainError("expected a CopulaModel or a cdf callable")


def upper_frechet(u, v):
    return np.minimum(u, v)


def lower_frechet(u, v):
    return np.maximum(np.asarray(u) + np.asarray(v) - 1.0, 0.0)


def _path(cdf, t):
    def g(s):
        return float(cdf(math.exp(-s * (1.0 - t)), math.exp(-s * t)))

    return g


def _breaks(t: float, extra=()) -> list[float]:
    pts = {0.0, 1.0, S_MAX}
    for p in (0.25, 0.5, 2.0, 4.0, 8.0, 16.0, 32.0) + tuple(extra):
        if 0.0 < p < S_MAX:
            pts.add(p)
    return sorted(pts)


def _w_kink(t: float) -> float | None:
    """s* > 0 with e^{-s(1-t)} + e^{-st} = 1, where W(x^{1-t}, x^t) has a kink."""
    if t <= 0.0 or t >= 1.0:
        return None
    f = lambda s: math.exp(-s * (1.0 - t)) + math.exp(-s * t) - 1.0  # noqa: E731
    hi = 1.0
    while f(hi) > 0:
        hi *= 2.0
    return brentq(f, 1e-12, hi, xtol=1e-15)


def _integrals(cdf, t: float, extra=()):
    g = _path(cdf, t)
    pts = _breaks(t, extra)
    p_int = 0.0
    c_int = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        p_int += integrate.quad(g, a, b, **_QUAD)[0]
        if b <= 1.0:
            # quad never evaluates the end point s = 0
            c_int += integrate.quad(lambda s: (g(s) - 1.0) / s, a, b, **_QUAD)[0]
        else:
            c_int += integrate.quad(lambda s: g(s) / s, a, b, **_QUAD)[0]
    return p_int, c_int


_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_PIECES = np.concatenate([[0.0], 2.0 ** np.arange(-8, 7), [S_MAX]])


def _gl_integrals(cdf, t: float, extra=()):
    """Both integrals by a composite Gauss-Legendre rule on graded pieces."""
    edges = np.unique(np.concatenate([_PIECES, [e for e in extra if e is not None]]))
    lo, hi = edges[:-1, None], edges[1:, None]
    s = (0.5 * (hi - lo) * (_GL_X + 1.0) + lo).ravel()
    w = (0.5 * (hi - lo) * _GL_W).ravel()
    c = np.asarray(cdf(np.exp(-s * (1.0 - t)), np.exp(-s * t)), float)
    p_int = float(np.sum(w * c))
    c_int = float(np.sum(w * (c - (s < 1.0)) / s))
    return p_int, c_int


def functional_value(model, kind: str, t, method: str = "gauss") -> float | np.ndarray:
    """A_C^P(t) or A_C^CFG(t) by quadrature, truncated at s = 80.

    ``model`` is a :class:`CopulaModel` or any cdf callable C(u, v).  The
    neglected tail is at most int_80^inf min(e^{-s(1-t)}, e^{-st}) ds
    <= 2 e^{-40}.  ``method="gauss"`` uses a fixed composite Gauss-Legendre
    rule; ``method="adaptive"`` uses adaptive quadrature piece by piece.
    """
    kind = kind.upper()
    if kind not in ("P", "CFG"):
        raise DomainError("kind must be P or CFG")
    if method not in ("gauss", "adaptive"):
        raise DomainError("method must be gauss or adaptive")
    ts = np.atleast_1d(np.asarray(t, float))
    if np.any((ts < 0) | (ts > 1)):
        raise DomainError("t must lie in [0, 1]")
    cdf = _cdf_of(model)
    rule = _gl_integrals if method == "gauss" else _integrals
    out = np.empty(ts.shape)
    for i, ti in enumerate(ts):
        if ti == 0.0 or ti == 1.0:
            out[i] = 1.0
            continue
        extra = (_w_kink(ti),) if cdf is lower_frechet else ()
        p_int, c_int = rule(cdf, float(ti), extra)
        out[i] = 1.0 / p_int if kind == "P" else math.exp(-EULER_GAMMA - c_int)
    return float(out[0]) if np.ndim(t) == 0 else out


def fgm_closed_form(theta: float, kind: str, t) -> float | np.ndarray:
    """Closed forms of both functionals for the FGM copula."""
    if not -1.0 <= theta <= 1.0:
        raise DomainError("FGM parameter must lie in [-1, 1]")
    t = np.asarray(t, float)
    q = t * t - t
    if kind.upper() == "P":
        out = (2.0 * q - 4.0) / (2.0 * q - 4.0 + 3.0 * q * theta)
    elif kind.upper() == "CFG":
        out = (2.0 / (2.0 - q)) ** theta
    else:
        raise DomainError("kind must be P or CFG")
    return float(out) if out.ndim == 0 else out


def frechet_bound_functionals(kind: str, t) -> tuple:
    """(value for the upper Frechet bound M, value for the lower bound W)."""
    t_arr = np.asarray(t, float)
    m_val = np.maximum(t_arr, 1.0 - t_arr)
    w_val = functional_value(lower_frechet, kind, t)
    if m_val.ndim == 0:
        return float(m_val), float(w_val)
    return m_val, w_val


@dataclass(frozen=True)
class LtdReport:
    holds: bool
    worst_violation: float
    pair: tuple | None

    def __bool__(self):
        return self.holds


def ltd_check(model, grid: int = 50, tol: float = 1e-10) -> LtdReport:
    """Check that C(u, v)/(uv) is nonincreasing in each argument.

    The ratio is evaluated on the grid x grid lattice of interior points
    i/(grid+1); monotonicity between neighbours along both axes implies it for
    every ordered pair of lattice points.  ``pair`` locates the worst
    violation as ((u, v), (u', v')) with (u, v) <= (u', v').
    """
    if grid < 10:
        raise DomainError("grid must be at least 10")
    cdf = _cdf_of(model)
    x = np.arange(1, grid + 1) / (grid + 1.0)
    U, V = np.meshgrid(x, x, indexing="ij")
    R = cdf(U, V) / (U * V)
    du = R[1:, :] - R[:-1, :]
    dv = R[:, 1:] - R[:, :-1]
    worst = max(float(du.max()), float(dv.max()))
    pair = None
    if worst > tol:
        if du.max() >= dv.max():
            i, j = np.unravel_index(np.argmax(du), du.shape)
            pair = ((x[i], x[j]), (x[i + 1], x[j]))
        else:
            i, j = np.unravel_index(np.argmax(dv), dv.shape)
            pair = ((x[i], x[j]), (x[i], x[j + 1]))
    return LtdReport(worst <= tol, max(worst, 0.0), pair)
