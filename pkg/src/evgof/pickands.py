"""Rank-based estimators of the Pickands dependence function.

Both estimators are built from xi_i(t) = min{-log U_i / (1-t), -log V_i / t}.
For fixed i the minimum switches branch at t = b_i / (a_i + b_i) with
a_i = -log U_i and b_i = -log V_i, so sorting the switch points gives the sums
over i for a whole grid of t in O((n + m) log n).  The integral forms in terms
of the empirical copula are kept as independent cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .empirical import PseudoSample
from .errors import DegenerateError, DomainError
from .families import EULER_GAMMA

KINDS = ("P", "CFG")


def _check_kind(kind: str) -> str:
    k = kind.upper()
    if k not in KINDS:
        raise DomainError(f"estimator kind must be P or CFG, got {kind!r}")
    return k


def _check_t(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)) or np.any(np.isnan(t)):
        raise DomainError("t must lie in [0, 1]")
    return t


def grid(m: int) -> np.ndarray:
    if m < 2:
        raise DomainError("a curve grid needs at least two points")
    return np.linspace(0.0, 1.0, m)


def xi(ps: PseudoSample, i: int, t) -> np.ndarray | float:
    """xi_i(t) for one pseudo-observation."""
    t = _check_t(t)
    a = -math.log(ps.u[i])
    b = -math.log(ps.v[i])
    with np.errstate(divide="ignore"):
        out = np.minimum(a / (1.0 - t), b / t)
    return float(out) if out.ndim == 0 else out


def xi_matrix(ps: PseudoSample, t) -> np.ndarray:
    """xi_i(t_j) as an (n, len(t)) array; the direct O(n m) route."""
    t = np.atleast_1d(_check_t(t))
    a = -np.log(ps.u)[:, None]
    b = -np.log(ps.v)[:, None]
    with np.errstate(divide="ignore"):
        return np.minimum(a / (1.0 - t), b / t)


def xi_sums(a: np.ndarray, b: np.ndarray, t: np.ndarray):
    """Sums over i of xi_i(t) and log xi_i(t) for batches of samples.

    ``a`` and ``b`` are (B, n) arrays of -log U and -log V, ``t`` a sorted or
    unsorted 1-d grid.  Returns two (B, m) arrays.
    """
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    B, n = a.shape
    t = np.asarray(t, dtype=float)
    s = b / (a + b)
    order = np.argsort(s, axis=1, kind="stable")
    s = np.take_along_axis(s, order, axis=1)
    a = np.take_along_axis(a, order, axis=1)
    b = np.take_along_axis(b, order, axis=1)
    zero = np.zeros((B, 1))
    # prefix sums over indices with s_i <= t use the b-branch, the rest the a-branch
    cb = np.concatenate([zero, np.cumsum(b, axis=1)], axis=1)
    clb = np.concatenate([zero, np.cumsum(np.log(b), axis=1)], axis=1)
    ca = np.concatenate([zero, np.cumsum(a[:, ::-1], axis=1)], axis=1)[:, ::-1]
    cla = np.concatenate([zero, np.cumsum(np.log(a[:, ::-1]), axis=1)], axis=1)[:, ::-1]
    # batched searchsorted: offset each row so that rows do not interleave
    off = 2.0 * np.arange(B)[:, None]
    k = np.searchsorted((s + off).ravel(), (t[None, :] + off).ravel(), side="right")
    k = k.reshape(B, t.size) - n * np.arange(B)[:, None]
    rows = np.arange(B)[:, None]
    sum_b, sum_lb = cb[rows, k], clb[rows, k]
    sum_a, sum_la = ca[rows, k], cla[rows, k]
    with np.errstate(divide="ignore", invalid="ignore"):
        one_t = 1.0 - t
        tot = np.where(k < n, sum_a / one_t, 0.0) + np.where(k > 0, sum_b / t, 0.0)
        tot_log = (
            sum_la
            - np.where(k < n, (n - k) * np.log(one_t), 0.0)
            + sum_lb
            - np.where(k > 0, k * np.log(t), 0.0)
        )
    return tot, tot_log


def _logs(ps: PseudoSample):
    return -np.log(ps.u), -np.log(ps.v)


def estimate_P(ps: PseudoSample, t):
    """A_n^P(t) = 1 / mean_i xi_i(t)."""
    t = _check_t(t)
    out = 1.0 / xi_matrix(ps, t).mean(axis=0)
    return float(out[0]) if t.ndim == 0 else out


def estimate_CFG(ps: PseudoSample, t):
    """A_n^CFG(t) = exp(-gamma - mean_i log xi_i(t))."""
    t = _check_t(t)
    out = np.exp(-EULER_GAMMA - np.log(xi_matrix(ps, t)).mean(axis=0))
    return float(out[0]) if t.ndim == 0 else out


def _raw_curves(kind: str, a, b, t):
    """Uncorrected reciprocal (P) or log (CFG) estimates on t, shape (B, m)."""
    n = np.atleast_2d(a).shape[1]
    tot, tot_log = xi_sums(a, b, t)
    if kind == "P":
        return tot / n
    return -EULER_GAMMA - tot_log / n


def _finish(kind: str, corrected: bool, a, b, t, clamp_degenerate: bool):
    """Estimates on the grid t for a batch; returns (values, degenerate_mask)."""
    t = np.asarray(t, dtype=float)
    raw = _raw_curves(kind, a, b, t)
    degenerate = np.zeros(raw.shape[0], dtype=bool)
    if corrected:
        ends = _raw_curves(kind, a, b, np.array([0.0, 1.0]))
        if kind == "P":
            raw = raw - (1.0 - t) * (ends[:, :1] - 1.0) - t * (ends[:, 1:] - 1.0)
        else:
            raw = raw - (1.0 - t) * ends[:, :1] - t * ends[:, 1:]
    if kind == "P":
        bad = raw <= 0.0
        if np.any(bad):
            if not clamp_degenerate:
                raise DegenerateError("corrected P estimate has a non-positive reciprocal")
            degenerate = bad.any(axis=1)
            fb = np.maximum(t, 1.0 - t)
            with np.errstate(divide="ignore"):
                vals = np.where(bad, fb, 1.0 / raw)
            return vals, degenerate
        return 1.0 / raw, degenerate
    return np.exp(raw), degenerate


def estimate_corrected(kind: str, ps: PseudoSample, t, clamp: bool = False):
    """End-point-corrected P or CFG estimate, equal to 1 at t = 0 and t = 1.

    A non-positive corrected P reciprocal raises :class:`DegenerateError`
    unless ``clamp`` is set, in which case the value falls back to the lower
    Frechet bound max(t, 1-t).
    """
    kind = _check_kind(kind)
    t = _check_t(t)
    a, b = _logs(ps)
    vals, _ = _finish(kind, True, a[None], b[None], np.atleast_1d(t), clamp)
    vals = vals[0]
    # the correction is exact at the end points; remove rounding residue
    vals = np.where((np.atleast_1d(t) == 0) | (np.atleast_1d(t) == 1), 1.0, vals)
    return float(vals[0]) if t.ndim == 0 else vals


def estimate(kind: str, corrected: bool, ps: PseudoSample, t):
    kind = _check_kind(kind)
    if corrected:
        return estimate_corrected(kind, ps, t)
    return estimate_P(ps, t) if kind == "P" else estimate_CFG(ps, t)


@dataclass(frozen=True)
class PickandsCurve:
    """Values of a Pickands-type function on the inclusive grid j/(m-1)."""

    t: np.ndarray
    values: np.ndarray
    kind: str = ""
    corrected: bool = False
    flags: tuple = field(default=())

    def __call__(self, s):
        return np.interp(s, self.t, self.values)

    def __len__(self):
        return self.t.size


def batch_curves(kind: str, corrected: bool, uv: np.ndarray, m: int = 1001):
    """Estimated curves for a batch of pseudo-samples (B, n, 2) on grid(m).

    Degenerate corrected-P rows are clamped; the mask is returned too.
    """
    kind = _check_kind(kind)
    t = grid(m)
    a = -np.log(uv[..., 0])
    b = -np.log(uv[..., 1])
    vals, degenerate = _finish(kind, corrected, a, b, t, clamp_degenerate=True)
    if corrected:
        vals[:, 0] = 1.0
        vals[:, -1] = 1.0
    return vals, degenerate


def curve(kind: str, corrected: bool, ps: PseudoSample, m: int = 1001, bound: bool = False):
    """Estimate on the inclusive uniform grid of m points.

    With ``bound`` the values are clipped to the Frechet band
    [max(t, 1-t), 1], as used for plotting output.
    """
    vals, degenerate = batch_curves(kind, corrected, ps.as_array()[None], m)
    t = grid(m)
    vals = vals[0]
    flags = ("clamped-degenerate",) if degenerate[0] else ()
    if bound:
        vals = np.clip(vals, np.maximum(t, 1.0 - t), 1.0)
    return PickandsCurve(t, vals, kind.upper(), corrected, flags)


@dataclass(frozen=True)
class PickandsEstimate:
    """Estimator handle bound to a pseudo-sample; callable at any t."""

    kind: str
    corrected: bool
    ps: PseudoSample

    def __post_init__(self):
        object.__setattr__(self, "kind", _check_kind(self.kind))

    @property
    def neg_log_u(self) -> np.ndarray:
        return -np.log(self.ps.u)

    @property
    def neg_log_v(self) -> np.ndarray:
        return -np.log(self.ps.v)

    def __call__(self, t):
        return estimate(self.kind, self.corrected, self.ps, t)

    def curve(self, m: int = 1001) -> PickandsCurve:
        return curve(self.kind, self.corrected, self.ps, m)


# Integral forms.  With x = exp(-s), C_n(x^{1-t}, x^t) is a step function of s
# that jumps down at s = a_i/(1-t) and s = b_i/t; between breakpoints it is
# constant, so the integrals reduce to exact sums over the pieces.

def _cn_pieces(ps: PseudoSample, t: float):
    """Breakpoints 0 = s_0 < ... < s_K and constant C_n values on the pieces."""
    a, b = _logs(ps)
    with np.errstate(divide="ignore"):
        bp = np.concatenate([a / (1.0 - t), b / t])
    bp = np.unique(bp[np.isfinite(bp)])
    edges = np.concatenate([[0.0], bp])
    mids = np.concatenate([edges[:-1] + np.diff(edges) / 2.0, [edges[-1] + 1.0]])
    x = np.exp(-mids)
    from .empirical import empirical_copula

    vals = empirical_copula(ps, x ** (1.0 - t), x**t)
    return edges, vals


def integral_form_P(ps: PseudoSample, t: float) -> float:
    """1 / int_0^1 C_n(x^{1-t}, x^t) dx/x, integrated piece by piece."""
    t = float(t)
    edges, vals = _cn_pieces(ps, t)
    # the last piece (beyond every breakpoint) has C_n = 0
    total = float(np.sum(vals[:-1] * np.diff(edges)))
    return 1.0 / total


def integral_form_CFG(ps: PseudoSample, t: float) -> float:
    """exp(-gamma + int_0^1 {C_n(x^{1-t}, x^t) - 1(x > 1/e)} dx / (x log x)).

    In the s = -log x variable this is -int_0^inf {C_n - 1(s < 1)} / s ds,
    whose pieces integrate to logarithms.
    """
    t = float(t)
    edges, vals = _cn_pieces(ps, t)
    # add s = 1 as a breakpoint so that the indicator is constant per piece
    k = np.searchsorted(edges, 1.0)
    if k >= edges.size or edges[k] != 1.0:
        edges = np.insert(edges, k, 1.0)
        vals = np.insert(vals, k, vals[k - 1])
    total = 0.0
    for j in range(edges.size - 1):
        lo, hi = edges[j], edges[j + 1]
        g = vals[j] - (1.0 if hi <= 1.0 else 0.0)
        if g == 0.0:
            continue
        total += g * (math.log(hi) - math.log(lo))
    # the unbounded last piece has C_n = 0 and s > 1, so it contributes nothing
    return math.exp(-EULER_GAMMA - total)
