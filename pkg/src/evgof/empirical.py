"""Rank machinery: pseudo-observations, the empirical copula and sample
dependence measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import DegenerateError, DomainError, TieError


@dataclass(frozen=True, eq=False)
class PseudoSample:
    """Normalized ranks (U_i, V_i) = (R_i, S_i) / (n + 1).

    ``ties`` is True when mid-ranks were used to break ties in the raw data.
    """

    u: np.ndarray
    v: np.ndarray
    ties: bool = False

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        v = np.array(self.v, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise DomainError("u and v must be 1-d arrays of equal length")
        if np.any((u <= 0) | (u >= 1) | (v <= 0) | (v >= 1)):
            raise DomainError("pseudo-observations must lie in (0,1)^2")
        u.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @property
    def n(self) -> int:
        return self.u.size

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other):
        if not isinstance(other, PseudoSample):
            return NotImplemented
        return (
            self.ties == other.ties
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
        )

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.u, self.v])


def as_raw_sample(data) -> np.ndarray:
    """Validate raw data as an (n, 2) float array of finite values."""
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DomainError(f"expected an (n, 2) array of pairs, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise DomainError("at least two observations are required")
    if not np.all(np.isfinite(arr)):
        raise DomainError("data contain NaN or infinite values")
    return arr


def has_ties(x) -> bool:
    x = np.asarray(x)
    return np.unique(x).size < x.size


def pseudo_observations(data, ties: str = "reject") -> PseudoSample:
    """Normalized ranks of an (n, 2) sample.

    ``ties="reject"`` raises :class:`TieError` when any coordinate has ties;
    ``ties="midrank"`` uses average ranks and flags the result.
    """
    arr = as_raw_sample(data)
    n = arr.shape[0]
    tied = has_ties(arr[:, 0]) or has_ties(arr[:, 1])
    if tied and ties == "reject":
        raise TieError("ties found in the data; rerun with the mid-rank tie policy to allow them")
    if ties not in ("reject", "midrank"):
        raise DomainError(f"unknown tie policy {ties!r}")
    method = "average" if tied else "ordinal"
    r = stats.rankdata(arr[:, 0], method=method)
    s = stats.rankdata(arr[:, 1], method=method)
    return PseudoSample(r / (n + 1.0), s / (n + 1.0), ties=tied)


def ranks_batch(z: np.ndarray) -> np.ndarray:
    """Pseudo-observations of a batch of continuous samples, shape (B, n, 2)."""
    n = z.shape[-2]
    order = np.argsort(z, axis=-2, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(1, n + 1)[:, None], axis=-2)
    return ranks / (n + 1.0)


def empirical_copula(ps: PseudoSample, u, v) -> np.ndarray:
    """C_n(u, v) = (1/n) #{i : U_i <= u, V_i <= v}, vectorized over (u, v)."""
    u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
    out = np.empty(u.shape)
    uf, vf, of = u.ravel(), v.ravel(), out.ravel()
    step = max(1, 2_000_000 // max(ps.n, 1))
    for i in range(0, uf.size, step):
        sl = slice(i, i + step)
        hit = (ps.u[None, :] <= uf[sl, None]) & (ps.v[None, :] <= vf[sl, None])
        of[sl] = hit.sum(axis=1) / ps.n
    return out


def empirical_copula_at_sample(uv: np.ndarray) -> np.ndarray:
    """C_n at its own pseudo-observations for a batch (..., n, 2), O(n^2)."""
    u = uv[..., 0]
    v = uv[..., 1]
    hit = (u[..., None, :] <= u[..., :, None]) & (v[..., None, :] <= v[..., :, None])
    return hit.sum(axis=-1) / u.shape[-1]


def _pairs_total(n: int) -> int:
    return n * (n - 1) // 2


def sample_tau(ps: PseudoSample) -> float:
    """Kendall's tau of the pseudo-sample (tau-b when mid-ranks are present)."""
    n = ps.n
    if n < 2:
        raise DomainError("Kendall's tau needs n >= 2")
    if np.all(ps.u == ps.u[0]) or np.all(ps.v == ps.v[0]):
        raise DegenerateError("Kendall's tau is undefined for a constant coordinate")
    tau = stats.kendalltau(ps.u, ps.v, variant="b").statistic
    if ps.ties:
        return float(tau)
    # without ties tau = S / total with integer S; snap so that every code path
    # (including the batched bootstrap counter) returns identical floats
    total = _pairs_total(n)
    return round(tau * total) / total


def tau_batch(uv: np.ndarray) -> np.ndarray:
    """Kendall's tau of tie-free samples (B, n, 2) by direct pair counting."""
    uv = np.asarray(uv, float)
    B, n = uv.shape[0], uv.shape[1]
    total = _pairs_total(n)
    out = np.empty(B)
    chunk = max(1, 2_000_000 // (n * n))
    for s in range(0, B, chunk):
        blk = uv[s : s + chunk]
        du = blk[:, :, None, 0] > blk[:, None, :, 0]
        dv = blk[:, :, None, 1] > blk[:, None, :, 1]
        # each ordered pair with du set is concordant iff dv is also set
        conc = (du & dv).sum(axis=(1, 2))
        disc = (du & ~dv).sum(axis=(1, 2))
        out[s : s + chunk] = (conc - disc) / total
    return out


def sample_rho(ps: PseudoSample) -> float:
    """Spearman's rho: Pearson correlation of the ranks."""
    if ps.n < 2:
        raise DomainError("Spearman's rho needs n >= 2")
    if np.all(ps.u == ps.u[0]) or np.all(ps.v == ps.v[0]):
        raise DegenerateError("Spearman's rho is undefined for a constant coordinate")
    return float(rho_batch(ps.as_array()))


def rho_batch(uv: np.ndarray) -> np.ndarray:
    u = uv[..., 0] - uv[..., 0].mean(axis=-1, keepdims=True)
    v = uv[..., 1] - uv[..., 1].mean(axis=-1, keepdims=True)
    return (u * v).sum(-1) / np.sqrt((u * u).sum(-1) * (v * v).sum(-1))
