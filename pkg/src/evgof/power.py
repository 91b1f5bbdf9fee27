"""Monte Carlo level and power study of the goodness-of-fit tests."""
from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import optimize

from .empirical import pseudo_observations
from .errors import ConfigError
from .families import _INVERSE_COORD, CopulaModel, family_info, mo_tau_bound, tau_of_theta, theta_of_tau
from .gof import STAT_KINDS, GofConfig, bootstrap_pseudo
from .rng import generator, stable_key

GROUP_I = ("gh", "galambos", "hr", "tev")
GROUP_II = ("clayton", "frank", "normal", "plackett")
H0_FAMILIES = GROUP_I
TAUS = (0.25, 0.5, 0.75)
ASYM_PAIR = (0.3, 0.8)
ASYM_TAU = 0.2
GROUPS = ("group1", "group2", "group3")


@lru_cache(maxsize=None)
def khoudraji_theta(family: str, lam: float, kap: float, tau: float) -> float:
    """Base parameter giving the Khoudraji model Kendall's tau ``tau``."""
    bound = mo_tau_bound(lam, kap)
    if not 0.0 < tau < bound:
        raise ConfigError(f"tau={tau} not below the Marshall-Olkin bound {bound:.5f}")
    name = family_info(family).name
    if name == "gh":
        from_z, (zlo, zhi) = (lambda z: 1.0 + math.exp(z)), (-10.0, 8.0)
    else:
        _, from_z, (zlo, zhi) = _INVERSE_COORD[name]

    def f(z):
        return tau_of_theta(CopulaModel(name, float(from_z(z)), (lam, kap))) - tau

    z = optimize.brentq(f, zlo, zhi, xtol=1e-13)
    return float(from_z(z))


@dataclass(frozen=True)
class Scenario:
    """One cell of the study: a true copula, a null family and a statistic.

    The true copula is given by a target Kendall's tau (resolved by tau
    inversion, or by root finding on the base parameter for Khoudraji models)
    or by an explicit ``theta``.
    """

    true_family: str
    h0: str
    statistic: str
    n: int
    N: int
    reps: int
    tau: float | None = None
    theta: float | None = None
    asym: tuple | None = None
    method: str = "itau"
    level: float = 0.05
    master_seed: int = 0
    group: str = ""
    corrected: bool = True
    grid_m: int = 1001

    def __post_init__(self):
        if self.statistic not in STAT_KINDS:
            raise ConfigError(f"statistic must be one of {STAT_KINDS}")
        if (self.tau is None) == (self.theta is None):
            raise ConfigError("give exactly one of tau and theta for the true copula")
        if self.asym is not None:
            object.__setattr__(self, "asym", tuple(float(a) for a in self.asym))
            if self.tau is not None and self.tau > mo_tau_bound(*self.asym):
                raise ConfigError("target tau exceeds the Marshall-Olkin bound of the asymmetry pair")

    def true_model(self) -> CopulaModel:
        fam = family_info(self.true_family).name
        if self.theta is not None:
            return CopulaModel(fam, self.theta, self.asym)
        if self.asym is not None:
            return CopulaModel(fam, khoudraji_theta(fam, *self.asym, self.tau), self.asym)
        return CopulaModel(fam, theta_of_tau(fam, self.tau))

    @property
    def true_name(self) -> str:
        return ("a-" if self.asym else "") + family_info(self.true_family).name

    def data_key(self) -> str:
        """Identifies everything that drives the random streams (not the statistic)."""
        dep = f"tau={self.tau!r}" if self.tau is not None else f"theta={self.theta!r}"
        asym = f"asym={self.asym!r}" if self.asym else "sym"
        return f"{self.true_name}|{dep}|{asym}|h0={self.h0}|n={self.n}|N={self.N}|{self.method}|c={self.corrected}|m={self.grid_m}"

    @property
    def id(self) -> str:
        dep = f"tau={self.tau:g}" if self.tau is not None else f"theta={self.theta:g}"
        return f"{self.group or 'custom'}:{self.true_name}:{dep}:h0={self.h0}:{self.statistic}:n={self.n}"

    def config(self) -> GofConfig:
        return GofConfig(
            corrected=self.corrected,
            method=self.method,
            N=self.N,
            grid_m=self.grid_m,
            master_seed=self.master_seed,
        )


@dataclass(frozen=True)
class PowerRow:
    scenario_id: str
    group: str
    true_model: str
    tau: float | None
    h0: str
    statistic: str
    n: int
    N: int
    reps: int
    rejections: int
    rejection_rate: float
    mc_stderr: float
    mean_runtime: float = field(default=0.0, compare=False)
    pvalues: tuple = field(default=(), compare=False, repr=False)

    @classmethod
    def from_pvalues(cls, s: Scenario, pvalues, runtime: float) -> "PowerRow":
        pvalues = np.asarray(pvalues, float)
        rej = int(np.sum(pvalues < s.level))
        p = rej / s.reps
        return cls(
            s.id, s.group, s.true_name, s.tau, s.h0, s.statistic, s.n, s.N, s.reps,
            rej, p, math.sqrt(p * (1.0 - p) / s.reps), runtime, tuple(pvalues.tolist()),
        )


CSV_FIELDS = [f for f in PowerRow.__dataclass_fields__ if f not in ("mean_runtime", "pvalues")]
JSON_FIELDS = [f for f in PowerRow.__dataclass_fields__ if f != "pvalues"]


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return "" if x is None else str(x)


@dataclass
class PowerTable:
    rows: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        """Write the table; run times are left out so that reruns compare equal."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_FIELDS)
            for r in self.rows:
                w.writerow([_fmt(getattr(r, f)) for f in CSV_FIELDS])

    def to_json(self, path) -> None:
        rows = [{f: getattr(r, f) for f in JSON_FIELDS} for r in self.rows]
        Path(path).write_text(json.dumps(rows, indent=2))

    @classmethod
    def from_json(cls, path) -> "PowerTable":
        return cls([PowerRow(**d) for d in json.loads(Path(path).read_text())])


# -- running -------------------------------------------------------------------

def _dataset_task(args):
    """Bootstrap p-values for every statistic of one data group and rep."""
    group, r = args
    s0 = group[0]
    key = stable_key(s0.data_key())
    model = s0.true_model()
    t0 = time.perf_counter()
    x = model.from_uniforms(generator(s0.master_seed, key, r, 0).random((s0.n, 2)))
    ps = pseudo_observations(x)
    kinds = tuple(s.statistic for s in group)
    res = bootstrap_pseudo(ps, s0.h0, kinds, s0.config(), seed_path=(key, r, 1))
    return {k: res[k].pvalue for k in kinds}, time.perf_counter() - t0


def _group_scenarios(scenarios):
    groups = {}
    for s in scenarios:
        key = (s.data_key(), s.master_seed)
        groups.setdefault(key, []).append(s)
    return list(groups.values())


def run_scenarios(scenarios, workers: int = 1, progress=None) -> list:
    """Rows for several scenarios, in input order.

    Scenarios that differ only in the statistic share their data sets and
    bootstrap samples; each row equals what :func:`run_scenario` gives alone.
    Work is distributed over data sets, and results do not depend on
    ``workers``.
    """
    scenarios = list(scenarios)
    for s in scenarios:
        if s.reps < 1:
            raise ConfigError(f"scenario {s.id} has no replications")
        s.true_model()
    rows = {}
    for group in _group_scenarios(scenarios):
        tasks = [(group, r) for r in range(group[0].reps)]
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                out = list(ex.map(_dataset_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
        else:
            out = [_dataset_task(t) for t in tasks]
        runtime = float(np.mean([o[1] for o in out]))
        for s in group:
            row = PowerRow.from_pvalues(s, [o[0][s.statistic] for o in out], runtime)
            rows[s] = row
            if progress is not None:
                progress(row)
    return [rows[s] for s in scenarios]


def run_scenario(s: Scenario, workers: int = 1) -> PowerRow:
    return run_scenarios([s], workers)[0]


# -- the study grid ------------------------------------------------------------

def paper_suite(scale: str = "desk", only=None, master_seed: int = 0) -> list:
    """Scenario grid of the level/power study.

    ``full``: 24 Group I/II copulas (tau in {0.25, 0.5, 0.75}) and 4 Khoudraji
    copulas (lambda=0.3, kappa=0.8, tau=0.2), each against the 4 Group I null
    families and the 3 statistics, n=300, N=1000, 1000 data sets.
    ``desk``: n=150, N=250, 200 data sets; Group I restricted to GH and
    Galambos (as truth and null), Group II tested against GH only, and the
    Khoudraji group against GH at n=300.
    """
    if scale not in ("desk", "full"):
        raise ConfigError("scale must be desk or full")
    groups = _parse_only(only)
    full = scale == "full"
    n, N, reps = (300, 1000, 1000) if full else (150, 250, 200)
    out = []

    def add(group, fam, h0, tau, asym=None, method="itau", size=n):
        for stat in STAT_KINDS:
            out.append(
                Scenario(fam, h0, stat, size, N, reps, tau=tau, asym=asym, method=method,
                         master_seed=master_seed, group=group)
            )

    if "group1" in groups:
        fams = GROUP_I if full else ("gh", "galambos")
        for fam in fams:
            for tau in TAUS:
                for h0 in fams:
                    add("group1", fam, h0, tau)
    if "group2" in groups:
        h0s = H0_FAMILIES if full else ("gh",)
        for fam in GROUP_II:
            for tau in TAUS:
                for h0 in h0s:
                    add("group2", fam, h0, tau)
    if "group3" in groups:
        h0s = H0_FAMILIES if full else ("gh",)
        for fam in GROUP_I:
            for h0 in h0s:
                add("group3", fam, h0, ASYM_TAU, asym=ASYM_PAIR, method="mpl", size=300)
    return out


def _parse_only(only) -> tuple:
    if only is None or only == "":
        return GROUPS
    items = only.split(",") if isinstance(only, str) else list(only)
    items = [i.strip().lower() for i in items]
    bad = [i for i in items if i not in GROUPS]
    if bad or not items:
        raise ConfigError(f"--only expects a comma-separated subset of {GROUPS}, got {only!r}")
    return tuple(items)


def true_models(scale: str = "full") -> list:
    """Distinct true copulas of the suite (28 at full scale)."""
    seen = {}
    for s in paper_suite(scale):
        seen.setdefault((s.true_name, s.tau), s)
    return list(seen.values())
