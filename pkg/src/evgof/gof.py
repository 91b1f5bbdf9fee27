"""Cramer-von Mises goodness-of-fit statistics and the parametric bootstrap."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import pickands as pk
from .empirical import PseudoSample, empirical_copula_at_sample, pseudo_observations, ranks_batch
from .errors import ConfigError
from .estimation import ModelSpec, check_method, fit, fit_mpl, irho_batch, itau_batch
from .families import FAMILIES, _ev_cdf
from .rng import generator

STAT_KINDS = ("SnP", "SnCFG", "Tn")
CHUNK = 50


def stat_kind(statistic: str, estimator: str = "CFG") -> str:
    """Canonical statistic tag from user-facing names (p, cfg, tn, Sn + kind)."""
    key = statistic.strip().lower()
    table = {"p": "SnP", "snp": "SnP", "cfg": "SnCFG", "sncfg": "SnCFG", "tn": "Tn"}
    if key == "sn":
        key = estimator.strip().lower()
    if key not in table:
        raise ConfigError(f"unknown statistic {statistic!r}; use p, cfg or tn")
    return table[key]


@dataclass(frozen=True)
class GofConfig:
    """Settings of one goodness-of-fit test.

    ``statistic`` is ``"Sn"`` (with ``estimator`` P or CFG) or ``"Tn"``; the
    shorthands ``"p"``, ``"cfg"`` and ``"tn"`` are accepted as well.
    """

    statistic: str = "Sn"
    estimator: str = "CFG"
    corrected: bool = True
    method: str = "itau"
    N: int = 1000
    grid_m: int = 1001
    master_seed: int = 0
    ties: str = "reject"
    pvalue_rule: str = "count"
    workers: int = 1

    def __post_init__(self):
        if self.N < 1:
            raise ConfigError("the bootstrap size N must be at least 1")
        if self.grid_m < 101:
            raise ConfigError("grid_m must be at least 101")
        if self.pvalue_rule not in ("count", "mid"):
            raise ConfigError("pvalue_rule must be 'count' or 'mid'")
        if self.ties not in ("reject", "midrank"):
            raise ConfigError("ties must be 'reject' or 'midrank'")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        stat_kind(self.statistic, self.estimator)

    @property
    def kind(self) -> str:
        return stat_kind(self.statistic, self.estimator)


@dataclass(frozen=True)
class GofResult:
    family: str
    statistic_kind: str
    statistic: float
    pvalue: float
    theta_hat: tuple
    replicates: np.ndarray
    method: str
    n: int
    N: int
    flags: tuple = field(default=())

    def as_dict(self) -> dict:
        out = {
            "family": self.family,
            "method": self.method,
            "statistic_kind": self.statistic_kind,
            "statistic": self.statistic,
            "pvalue": self.pvalue,
            "N": self.N,
            "theta_hat": list(self.theta_hat),
            "flags": list(self.flags),
        }
        return out


# -- statistics --------------------------------------------------------------

def _trapezoid(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    return np.trapezoid(y, t, axis=-1)


def statistic_Sn(A_n, A_theta, n: int, grid_m: int = 1001) -> float:
    """n * int_0^1 (A_n - A_theta)^2 dt by the trapezoid rule on grid_m points.

    Curves may be callables or arrays of values on the inclusive grid.
    """
    t = pk.grid(grid_m)
    a = A_n(t) if callable(A_n) else np.asarray(A_n, float)
    b = A_theta(t) if callable(A_theta) else np.asarray(A_theta, float)
    return float(n * _trapezoid((a - b) ** 2, t))


def statistic_Tn(ps: PseudoSample, model) -> float:
    """sum_i {C_n(U_i, V_i) - C_theta(U_i, V_i)}^2."""
    cn = empirical_copula_at_sample(ps.as_array())
    return float(np.sum((cn - model.cdf(ps.u, ps.v)) ** 2))


def _pickands_batch(spec: ModelSpec, params: np.ndarray, t: np.ndarray) -> np.ndarray:
    if spec.asym:
        return np.stack([spec.model(p).pickands(t) for p in params])
    pick = FAMILIES[spec.family].pickands
    return pick(t, params[:, :1], 0)[0] * np.ones((1, t.size))


def _cdf_batch(spec: ModelSpec, params: np.ndarray, uv: np.ndarray) -> np.ndarray:
    info = FAMILIES[spec.family]
    if spec.asym or not info.extreme_value:
        return np.stack([spec.model(p).cdf(x[:, 0], x[:, 1]) for p, x in zip(params, uv)])
    return _ev_cdf(info.pickands, params[:, :1], uv[..., 0], uv[..., 1])


def batch_statistics(kinds, spec: ModelSpec, uv: np.ndarray, params: np.ndarray, grid_m: int, corrected: bool):
    """Statistics for B pseudo-samples (B, n, 2) with fitted parameters (B, p).

    Returns ``({kind: (B,) array}, degenerate_count)``.
    """
    n = uv.shape[1]
    out = {}
    degenerate = 0
    t = pk.grid(grid_m)
    A_theta = None
    for kind in kinds:
        if kind == "Tn":
            cn = empirical_copula_at_sample(uv)
            out[kind] = np.sum((cn - _cdf_batch(spec, params, uv)) ** 2, axis=1)
            continue
        if A_theta is None:
            A_theta = _pickands_batch(spec, params, t)
        est = "P" if kind == "SnP" else "CFG"
        A_n, deg = pk.batch_curves(est, corrected, uv, grid_m)
        degenerate += int(deg.sum())
        out[kind] = n * _trapezoid((A_n - A_theta) ** 2, t)
    return out, degenerate


# -- bootstrap ---------------------------------------------------------------

def _validate(spec: ModelSpec, kinds, method: str) -> str:
    for kind in kinds:
        if kind not in STAT_KINDS:
            raise ConfigError(f"unknown statistic {kind!r}")
        if kind != "Tn" and not FAMILIES[spec.family].extreme_value:
            raise ConfigError(f"S_n needs an extreme-value null family, got {spec.name}")
    return check_method(spec, method)


def _method_for(spec: ModelSpec, method: str):
    """Khoudraji nulls have a vector parameter and are always fitted by MPL."""
    if spec.asym and method != "mpl":
        return "mpl", ["method-mpl-for-vector-parameter"]
    return method, []


def check_null(h0, kinds, method: str) -> str:
    """Raise ConfigError unless ``h0`` can be tested with these statistics; returns the fitting method."""
    spec = ModelSpec.parse(h0)
    used = _method_for(spec, method)[0]
    _validate(spec, tuple(kinds), used)
    return used


def _fit_batch(spec: ModelSpec, method: str, uv: np.ndarray):
    """Parameters (B, p) and flag counts for a batch of pseudo-samples."""
    counts = {}
    if method == "itau":
        theta, clamped = itau_batch(spec, uv)
        counts["tau-clamped"] = int(clamped.sum())
        return theta[:, None], counts
    if method == "irho":
        theta, clamped = irho_batch(spec, uv)
        counts["rho-clamped"] = int(clamped.sum())
        return theta[:, None], counts
    start = None
    if not spec.asym:
        start, _ = itau_batch(spec, uv)
    rows = []
    boundary = bad = 0
    for b in range(uv.shape[0]):
        ps = PseudoSample(uv[b, :, 0], uv[b, :, 1])
        res = fit_mpl(spec, ps, start=None if start is None else start[b])
        if "boundary" in res.flags:
            boundary += 1
        elif not res.converged:
            bad += 1
        rows.append(res.theta_hat)
    counts["mpl-boundary"] = boundary
    counts["mpl-not-converged"] = bad
    return np.array(rows, float), counts


def _run_chunk(task):
    spec, params, n, kinds, method, grid_m, corrected, seed, path, k0, k1 = task
    model = spec.model(params)
    w = np.stack([generator(seed, *path, k).random((n, 2)) for k in range(k0, k1)])
    uv = ranks_batch(model.from_uniforms(w))
    fitted, counts = _fit_batch(spec, method, uv)
    stats, degenerate = batch_statistics(kinds, spec, uv, fitted, grid_m, corrected)
    counts["clamped-degenerate"] = degenerate
    return stats, counts


def _merge_counts(total: dict, part: dict):
    for key, val in part.items():
        total[key] = total.get(key, 0) + val


def _pvalue(observed: float, reps: np.ndarray, rule: str) -> float:
    count = int(np.sum(reps >= observed))
    if rule == "mid":
        return (count + 0.5) / (reps.size + 1)
    return count / reps.size


def bootstrap_pseudo(ps: PseudoSample, h0, kinds, config: GofConfig, seed_path: tuple = (), pool=None):
    """Bootstrap test on a pseudo-sample for several statistics at once.

    All statistics share the fitted parameter and the simulated samples, so
    each entry equals what a single-statistic run would return.  Replicate k
    is driven by the stream ``generator(master_seed, *seed_path, k)`` and the
    replicates are processed in fixed chunks, so results do not depend on the
    number of workers.
    """
    spec = ModelSpec.parse(h0)
    kinds = tuple(kinds)
    method, flags = _method_for(spec, config.method)
    _validate(spec, kinds, method)
    fit0 = fit(spec, ps, method)
    flags += list(fit0.flags)
    if ps.ties:
        flags.append("ties-midrank")
    params = np.array(fit0.theta_hat, float)
    observed, deg0 = batch_statistics(kinds, spec, ps.as_array()[None], params[None], config.grid_m, config.corrected)
    if deg0:
        flags.append("clamped-degenerate")
    n = ps.n
    tasks = [
        (spec, params, n, kinds, method, config.grid_m, config.corrected, config.master_seed, tuple(seed_path), k0, min(k0 + CHUNK, config.N))
        for k0 in range(0, config.N, CHUNK)
    ]
    if pool is not None:
        parts = list(pool.map(_run_chunk, tasks))
    elif config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as ex:
            parts = list(ex.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    counts = {}
    for _, c in parts:
        _merge_counts(counts, c)
    rep_flags = [f"replicates-{k}:{v}" for k, v in sorted(counts.items()) if v]
    results = {}
    for kind in kinds:
        reps = np.concatenate([p[0][kind] for p in parts])
        stat = float(observed[kind][0])
        results[kind] = GofResult(
            family=spec.name,
            statistic_kind=kind,
            statistic=stat,
            pvalue=_pvalue(stat, reps, config.pvalue_rule),
            theta_hat=tuple(fit0.theta_hat),
            replicates=reps,
            method=method,
            n=n,
            N=config.N,
            flags=tuple(flags + rep_flags),
        )
    return results


def bootstrap_test(sample, h0, config: GofConfig = GofConfig()) -> GofResult:
    """Parametric bootstrap goodness-of-fit test of the null family ``h0``.

    ``sample`` holds raw (n, 2) data; it is reduced to normalized ranks under
    the configured tie policy.  The null may be a base family name such as
    ``"gh"`` or an asymmetric ``"a-gh"``.
    """
    spec = ModelSpec.parse(h0)
    _validate(spec, (config.kind,), _method_for(spec, config.method)[0])
    ps = sample if isinstance(sample, PseudoSample) else pseudo_observations(sample, config.ties)
    return bootstrap_pseudo(ps, spec, (config.kind,), config)[config.kind]


def bootstrap_many(sample, h0, kinds, config: GofConfig = GofConfig()) -> dict:
    """Like :func:`bootstrap_test` but for several statistics in one pass."""
    spec = ModelSpec.parse(h0)
    kinds = tuple(stat_kind(k) if k not in STAT_KINDS else k for k in kinds)
    _validate(spec, kinds, _method_for(spec, config.method)[0])
    ps = sample if isinstance(sample, PseudoSample) else pseudo_observations(sample, config.ties)
    return bootstrap_pseudo(ps, spec, kinds, config)


def with_seed(config: GofConfig, seed: int) -> GofConfig:
    return replace(config, master_seed=seed)
