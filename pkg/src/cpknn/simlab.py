"""Scenario generators and study runners for size/power/sensitivity studies.

Scenarios follow the benchmark families used throughout the evaluation:
multivariate Gaussians with AR(1) covariance (Sigma_ij = rho^|i-j|, sampled
through the O(nd) AR recursion x_j = rho x_{j-1} + sqrt(1-rho^2) z_j),
sparse-coordinate mean/variance shifts, centered chi-square and t drivers
pushed through the same AR map, and per-coordinate chi-square / Weibull /
Gamma / Beta / t families.  For non-Gaussian drivers the AR map is a
lower-triangular square root of Sigma standing in for the symmetric root;
for Gaussian rows the law is exactly N(mean, b * Sigma).

All draws are deterministic given (scenario.seed, replicate_index); the
replicate RNG is PCG64 seeded from SeedSequence(seed, spawn_key=(replicate,)).

Study runners accept desk-scale replicate counts and emit CSV tables.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .detector import detect_single
from .errors import UnknownFamily

POWER_DIMS = (25, 100, 500, 1000, 2000)

# One design value per dim in POWER_DIMS: mean-vector norm and the
# second design constant of each power scenario.
POWER_DESIGN = {
    "S1": {"delta2": (0.10, 0.20, 0.45, 0.63, 0.89), "b": (1.10, 1.06, 1.03, 1.02, 1.02)},
    "S2": {"delta2": (0.20, 0.40, 0.67, 0.63, 0.89), "b": (1.8, 2.4, 3.2, 4.8, 6.2)},
    "S3": {"b": (1.10, 1.06, 1.03, 1.02, 1.02)},
    "S4": {"rho1": (0.53, 0.50, 0.48, 0.47, 0.46)},
    "S5": {"delta2": (0.05, 0.10, 0.22, 0.32, 0.45), "b": (1.10, 1.08, 1.05, 1.04, 1.03)},
    "S6": {"delta2": (0.20, 0.40, 0.67, 0.63, 0.89), "b": (1.14, 1.08, 1.05, 1.04, 1.03)},
}

# Per-coordinate families with one changed parameter (type-II studies).
TYPE2_DESIGN = {
    1: {"family": "chisq", "fixed": {"df": 3.0},
        "changed": "df", "values": (3.27, 3.20, 3.15, 3.12, 3.09)},
    2: {"family": "weibull", "fixed": {"scale": 1.0, "shape": 1.0},
        "changed": "scale", "values": (1.8, 2.4, 3.2, 4.8, 6.2)},
    3: {"family": "gamma", "fixed": {"shape": 1.0, "scale": 1.0},
        "changed": "shape", "values": (1.09, 1.08, 1.05, 1.04, 1.03)},
    4: {"family": "gamma", "fixed": {"shape": 1.0, "scale": 1.0},
        "changed": "scale", "values": (1.050, 1.040, 1.030, 1.025, 1.020)},
    5: {"family": "beta", "fixed": {"a": 0.5, "b": 0.5},
        "changed": "a", "values": (0.590, 0.550, 0.530, 0.520, 0.512)},
    6: {"family": "beta", "fixed": {"a": 0.5, "b": 0.5},
        "changed": "b", "values": (0.590, 0.550, 0.530, 0.520, 0.512)},
}


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    d: int
    tau: int
    f0: dict
    f1: dict
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.tau < self.n:
            raise ValueError(f"tau={self.tau} must be in [1, n-1]")

    @property
    def is_null(self) -> bool:
        return self.f0 == self.f1


def _ar1(rng, n, d, rho, driver):
    if driver == "normal":
        z = rng.standard_normal((n, d))
    elif driver == "chisq3c":
        z = rng.chisquare(3.0, size=(n, d)) - 3.0
    elif driver == "t5":
        z = rng.standard_t(5.0, size=(n, d))
    else:
        raise UnknownFamily(f"unknown AR driver {driver!r}")
    if rho == 0.0 or d == 1:
        return z
    x = np.empty_like(z)
    x[:, 0] = z[:, 0]
    w = math.sqrt(1.0 - rho * rho)
    for j in range(1, d):
        x[:, j] = rho * x[:, j - 1] + w * z[:, j]
    return x


def _draw(rng, n, d, spec: dict) -> np.ndarray:
    """One block of n rows from a family spec."""
    family = spec.get("family")
    p = spec
    if family == "gaussian":
        x = rng.standard_normal((n, d))
        var = p.get("var", 1.0)
        if var != 1.0:
            x *= math.sqrt(var)
        return x + p.get("mean", 0.0)
    if family == "gaussian_sub":
        # mean shift / variance change restricted to the first dc coordinates
        dc = int(p.get("dc", d))
        if not 1 <= dc <= d:
            raise ValueError(f"dc={dc} out of range 1..{d}")
        x = rng.standard_normal((n, d))
        var = p.get("var", 1.0)
        if var != 1.0:
            x[:, :dc] *= math.sqrt(var)
        x[:, :dc] += p.get("mean", 0.0)
        return x
    if family in ("gaussian_ar1", "chisq_ar1", "t_ar1"):
        driver = {"gaussian_ar1": "normal", "chisq_ar1": "chisq3c", "t_ar1": "t5"}[family]
        x = _ar1(rng, n, d, float(p.get("rho", 0.6)), driver)
        scale = p.get("var_scale", 1.0)
        if scale != 1.0:
            x *= math.sqrt(scale)
        return x + p.get("mean", 0.0)
    if family == "gaussian_moments":
        return p["mean"] + p["sd"] * rng.standard_normal((n, d))
    if family == "chisq":
        df = float(p["df"])
        if df <= 0:
            raise ValueError("chisq df must be > 0")
        return rng.chisquare(df, size=(n, d))
    if family == "t":
        return rng.standard_t(float(p["df"]), size=(n, d))
    if family == "weibull":
        shape = float(p.get("shape", 1.0))
        if shape <= 0 or float(p.get("scale", 1.0)) <= 0:
            raise ValueError("weibull parameters must be > 0")
        return float(p.get("scale", 1.0)) * rng.weibull(shape, size=(n, d))
    if family == "gamma":
        shape, scale = float(p["shape"]), float(p.get("scale", 1.0))
        if shape <= 0 or scale <= 0:
            raise ValueError("gamma parameters must be > 0")
        return rng.gamma(shape, scale, size=(n, d))
    if family == "beta":
        a, b = float(p["a"]), float(p["b"])
        if a <= 0 or b <= 0:
            raise ValueError("beta shapes must be > 0")
        return rng.beta(a, b, size=(n, d))
    raise UnknownFamily(f"unknown family {family!r}")


def generate(scenario: Scenario, replicate: int) -> np.ndarray:
    """Rows 1..tau from f0, rows tau+1..n from f1; deterministic per replicate."""
    ss = np.random.SeedSequence(entropy=scenario.seed, spawn_key=(int(replicate),))
    rng = np.random.Generator(np.random.PCG64(ss))
    head = _draw(rng, scenario.tau, scenario.d, scenario.f0)
    tail = _draw(rng, scenario.n - scenario.tau, scenario.d, scenario.f1)
    return np.vstack([head, tail])


def null_scenario(d: int = 25, n: int = 1000, seed: int = 0) -> Scenario:
    f = {"family": "gaussian"}
    return Scenario(name=f"null-d{d}", n=n, d=d, tau=n // 2, f0=f, f1=dict(f), seed=seed)


def power_scenario(name: str, d: int, n: int = 1000, tau: int = 250, seed: int = 0) -> Scenario:
    """The six power-study scenarios at their reference design points."""
    name = name.upper()
    if name not in POWER_DESIGN:
        raise UnknownFamily(f"unknown power scenario {name!r}")
    if d not in POWER_DIMS:
        raise ValueError(f"d={d} has no design row; pick from {POWER_DIMS}")
    col = POWER_DIMS.index(d)
    row = {key: vals[col] for key, vals in POWER_DESIGN[name].items()}
    if name == "S1":
        a = row["delta2"] / math.sqrt(d)
        f0 = {"family": "gaussian_ar1", "rho": 0.6}
        f1 = {"family": "gaussian_ar1", "rho": 0.6, "var_scale": row["b"], "mean": a}
    elif name == "S2":
        a = row["delta2"] / math.sqrt(5)
        f0 = {"family": "gaussian"}
        f1 = {"family": "gaussian_sub", "dc": 5, "mean": a, "var": row["b"]}
    elif name == "S3":
        f0 = {"family": "gaussian"}
        f1 = {"family": "gaussian", "var": row["b"]}
    elif name == "S4":
        f0 = {"family": "gaussian_ar1", "rho": 0.6}
        f1 = {"family": "gaussian_ar1", "rho": row["rho1"]}
    elif name == "S5":
        a = row["delta2"] / math.sqrt(d)
        f0 = {"family": "chisq_ar1", "rho": 0.6}
        f1 = {"family": "chisq_ar1", "rho": 0.6, "var_scale": row["b"], "mean": a}
    else:  # S6
        a = row["delta2"] / math.sqrt(d)
        f0 = {"family": "t_ar1", "rho": 0.6}
        f1 = {"family": "t_ar1", "rho": 0.6, "var_scale": row["b"], "mean": a}
    return Scenario(name=f"{name}-d{d}", n=n, d=d, tau=tau, f0=f0, f1=f1, seed=seed)


def type2_scenario(setting: int, d: int, n: int = 1000, tau: int = 250, seed: int = 0) -> Scenario:
    """Per-coordinate family with one parameter changed after tau."""
    if setting not in TYPE2_DESIGN:
        raise UnknownFamily(f"unknown type-II setting {setting!r}")
    if d not in POWER_DIMS:
        raise ValueError(f"d={d} has no design row; pick from {POWER_DIMS}")
    design = TYPE2_DESIGN[setting]
    f0 = {"family": design["family"], **design["fixed"]}
    f1 = dict(f0)
    f1[design["changed"]] = design["values"][POWER_DIMS.index(d)]
    return Scenario(name=f"T{setting}-d{d}", n=n, d=d, tau=tau, f0=f0, f1=f1, seed=seed)


def sensitivity_scenario(
    change: str, level: float, dc: int = 1000,
    n: int = 1000, tau: int = 250, d: int = 1000, seed: int = 0,
) -> Scenario:
    """One point of the five sensitivity curves; `level` is the change size."""
    if change == "mean":
        f0 = {"family": "gaussian"}
        f1 = {"family": "gaussian_sub", "dc": dc, "mean": level / math.sqrt(dc)}
    elif change == "variance":
        f0 = {"family": "gaussian"}
        f1 = {"family": "gaussian_sub", "dc": dc, "var": level}
    elif change == "covariance":
        f0 = {"family": "gaussian_ar1", "rho": 0.6}
        f1 = {"family": "gaussian_ar1", "rho": 0.6 - level}
    elif change == "skewness":
        # skewness of chi2_nu is sqrt(8/nu); f0 matches its mean and sd
        df = 8.0 / (level * level)
        f0 = {"family": "gaussian_moments", "mean": df, "sd": math.sqrt(2.0 * df)}
        f1 = {"family": "chisq", "df": df}
    elif change == "kurtosis":
        # excess kurtosis of t_nu is 6/(nu-4)
        df = 4.0 + 6.0 / level
        f0 = {"family": "gaussian"}
        f1 = {"family": "t", "df": df}
    else:
        raise UnknownFamily(f"unknown change type {change!r}")
    return Scenario(name=f"sens-{change}-{level}", n=n, d=d, tau=tau, f0=f0, f1=f1, seed=seed)


def _replicate_pvalue(args) -> float:
    scenario, replicate, k, eps, n0, n1 = args
    data = generate(scenario, replicate)
    window = None if n0 is None else (n0, n1)
    report = detect_single(data, k=k, eps=eps, window=window, mode="analytic")
    return report.p_analytic


def _pvalues(scenario, replicates, k, eps, n0, n1, workers) -> np.ndarray:
    payload = [(scenario, r, k, eps, n0, n1) for r in range(replicates)]
    if workers <= 1:
        return np.array([_replicate_pvalue(a) for a in payload])
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return np.array(list(pool.map(_replicate_pvalue, payload, chunksize=4)))


@dataclass
class StudyTable:
    """Generic study output: header + rows, CSV-emittable."""

    header: list
    rows: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.header)
            writer.writerows(self.rows)


def run_size_study(
    n: int = 1000, d: int = 25, replicates: int = 1000,
    alphas=(0.10, 0.05, 0.01), k: int = 5, eps: float = 0.0,
    n0: int | None = 100, seed: int = 0, workers: int = 1,
) -> StudyTable:
    """Rejection fractions on homogeneous Gaussian data, with binomial SEs."""
    scenario = null_scenario(d=d, n=n, seed=seed)
    n1 = None if n0 is None else n - n0
    pvals = _pvalues(scenario, replicates, k, eps, n0, n1, workers)
    table = StudyTable(header=["alpha", "fraction", "se", "replicates"])
    for alpha in alphas:
        frac = float(np.mean(pvals <= alpha))
        se = math.sqrt(frac * (1 - frac) / replicates)
        table.rows.append([alpha, frac, se, replicates])
    return table


def run_power_study(
    scenarios=("S1", "S2", "S3", "S4", "S5", "S6"), dims=POWER_DIMS,
    replicates: int = 100, alpha: float = 0.05, n: int = 1000, tau: int = 250,
    k: int = 5, eps: float = 0.0, n0: int | None = 100,
    seed: int = 0, workers: int = 1,
) -> StudyTable:
    """Rejection counts per (scenario, d) at level alpha, analytic p-values."""
    table = StudyTable(header=["scenario", "d", "rejected", "replicates"])
    for name in scenarios:
        for d in dims:
            sc = power_scenario(name, d, n=n, tau=tau, seed=seed)
            n1 = None if n0 is None else n - n0
            pvals = _pvalues(sc, replicates, k, eps, n0, n1, workers)
            table.rows.append([name, d, int(np.sum(pvals <= alpha)), replicates])
    return table


def run_type2_study(
    settings=(1, 2, 3, 4, 5, 6), dims=POWER_DIMS,
    replicates: int = 100, alpha: float = 0.05, n: int = 1000, tau: int = 250,
    k: int = 5, eps: float = 0.0, n0: int | None = 100,
    seed: int = 0, workers: int = 1,
) -> StudyTable:
    """Counts of non-rejections (type II errors) per (setting, d)."""
    table = StudyTable(header=["setting", "d", "not_rejected", "replicates"])
    for setting in settings:
        for d in dims:
            sc = type2_scenario(setting, d, n=n, tau=tau, seed=seed)
            n1 = None if n0 is None else n - n0
            pvals = _pvalues(sc, replicates, k, eps, n0, n1, workers)
            table.rows.append([setting, d, int(np.sum(pvals > alpha)), replicates])
    return table


DEFAULT_SENSITIVITY_GRID = {
    "mean": tuple(round(0.2 * i, 1) for i in range(1, 11)),
    "variance": tuple(round(1.0 + 0.02 * i, 2) for i in range(1, 11)),
    "covariance": tuple(round(0.02 * i, 2) for i in range(1, 11)),
    "skewness": tuple(round(0.2 * i, 1) for i in range(1, 11)),
    "kurtosis": tuple(round(0.01 * i, 2) for i in range(1, 11)),
}


def run_sensitivity_study(
    changes=("mean", "variance", "covariance", "skewness", "kurtosis"),
    grid: dict | None = None, dc: int = 1000, replicates: int = 100,
    alpha: float = 0.05, n: int = 1000, tau: int = 250, d: int = 1000,
    k: int = 5, eps: float = 0.0, n0: int | None = 100,
    seed: int = 0, workers: int = 1,
) -> StudyTable:
    """Detection-fraction curves versus change size for the five change types."""
    grid = grid or DEFAULT_SENSITIVITY_GRID
    table = StudyTable(header=["change", "level", "fraction", "replicates"])
    for change in changes:
        for level in grid[change]:
            sc = sensitivity_scenario(change, level, dc=dc, n=n, tau=tau, d=d, seed=seed)
            n1 = None if n0 is None else n - n0
            pvals = _pvalues(sc, replicates, k, eps, n0, n1, workers)
            table.rows.append([change, level, float(np.mean(pvals <= alpha)), replicates])
    return table


def parse_config(path) -> dict:
    """Plain key = value study config (comments with '#', types auto-coerced)."""
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {raw.rstrip()}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = _coerce(value)
    return out


def _coerce(value: str):
    if "," in value:
        return tuple(_coerce(v.strip()) for v in value.split(","))
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def run_study_from_config(cfg: dict, workers: int = 1) -> StudyTable:
    """Dispatch a parsed config to the matching runner."""
    cfg = dict(cfg)
    study = cfg.pop("study", None)
    cfg.setdefault("workers", workers)
    if study == "size":
        if "alphas" in cfg and isinstance(cfg["alphas"], (int, float)):
            cfg["alphas"] = (cfg["alphas"],)
        return run_size_study(**cfg)
    if study == "power":
        if "scenarios" in cfg and isinstance(cfg["scenarios"], str):
            cfg["scenarios"] = (cfg["scenarios"],)
        if "dims" in cfg and isinstance(cfg["dims"], int):
            cfg["dims"] = (cfg["dims"],)
        return run_power_study(**cfg)
    if study == "type2":
        if "settings" in cfg and isinstance(cfg["settings"], int):
            cfg["settings"] = (cfg["settings"],)
        if "dims" in cfg and isinstance(cfg["dims"], int):
            cfg["dims"] = (cfg["dims"],)
        return run_type2_study(**cfg)
    if study == "sensitivity":
        if "changes" in cfg and isinstance(cfg["changes"], str):
            cfg["changes"] = (cfg["changes"],)
        return run_sensitivity_study(**cfg)
    raise UnknownFamily(f"unknown study {study!r}")
