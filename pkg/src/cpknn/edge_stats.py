"""Edge-count processes, pair-configuration counts, exact null moments,
and the standardized scan statistic.

Conventions: the candidate split t runs over 1..n-1 and means "first group
is rows 1..t" (1-based time).  Arrays indexed by t store t at position
t - 1.  Node ids are 0-based internally.

The two raw processes count edges falling entirely inside a group:
r1(t) = #{(i,j) in G : i <= t, j <= t},  r2(t) = #{(i,j) : i > t, j > t}.
The weighted and difference combinations are

    R_w(t)    = (n-t-1)/(n-2) * r1(t) + (t-1)/(n-2) * r2(t)
    R_diff(t) = r1(t) - r2(t)

standardized by their exact permutation-null moments, and the scan value is
M(t) = max(Z_w(t), |Z_diff(t)|).

Null moments come from classifying ordered pairs of edges into seven
node-sharing configurations.  With D_i the in-neighbor set of node i:

    c1 = nk                      identical pair
    c2 = #{(i,j): (j,i) in G}    opposite pair
    c3 = c4 = n*k^2 - c2         head-to-tail chains (both orders)
    c5 = nk(k-1)                 shared source
    c6 = sum_i |D_i|^2 - |D_i|   shared target
    c7 = (nk)^2 - rest           node disjoint

and the variance/covariance of (r1, r2) are linear in the falling-factorial
probabilities p1..p3, q1..q3, r of placing the distinct nodes of a pair on
the required side of t.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateVariance
from .knn_graph import DirectedKnnGraph

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class EdgeCountProfile:
    """r1(t), r2(t) for t = 1..n-1 (index t-1)."""

    r1: np.ndarray
    r2: np.ndarray

    @property
    def n(self) -> int:
        return self.r1.size + 1


def edge_count_profile(graph: DirectedKnnGraph) -> EdgeCountProfile:
    """O(nk): each edge enters r1 at t = max(i,j) and leaves r2 at t = min(i,j)."""
    n = graph.n
    e = graph.edges() + 1  # 1-based time labels
    hi = np.maximum(e[:, 0], e[:, 1])
    lo = np.minimum(e[:, 0], e[:, 1])
    r1 = np.cumsum(np.bincount(hi, minlength=n + 1))[1:n]
    r2 = graph.num_edges - np.cumsum(np.bincount(lo, minlength=n + 1))[1:n]
    return EdgeCountProfile(r1=r1.astype(np.int64), r2=r2.astype(np.int64))


@dataclass(frozen=True)
class PairConfigCounts:
    """Counts of the seven ordered-pair-of-edges configurations."""

    n: int
    k: int
    c1: int
    c2: int
    c3: int
    c4: int
    c5: int
    c6: int
    c7: int

    @property
    def d1(self) -> int:
        return self.c1 + self.c2

    @property
    def d2(self) -> int:
        return self.c3 + self.c4 + self.c5 + self.c6

    @property
    def d3(self) -> int:
        return self.c7

    def as_tuple(self):
        return (self.c1, self.c2, self.c3, self.c4, self.c5, self.c6, self.c7)


def pair_config_counts(graph: DirectedKnnGraph) -> PairConfigCounts:
    """All seven counts in O(nk); exact integer arithmetic."""
    n, k = graph.n, graph.k
    nk = n * k
    e = graph.edges()
    mutual = graph.has_edge_many(e[:, 1], e[:, 0])
    c2 = int(np.count_nonzero(mutual))
    c3 = n * k * k - c2
    indeg = graph.in_degrees().astype(np.int64)
    c6 = int(np.sum(indeg * indeg - indeg))
    c1 = nk
    c5 = nk * (k - 1)
    c7 = nk * nk - (c1 + c2 + 2 * c3 + c5 + c6)
    counts = PairConfigCounts(n=n, k=k, c1=c1, c2=c2, c3=c3, c4=c3, c5=c5, c6=c6, c7=c7)
    assert sum(counts.as_tuple()) == nk * nk
    return counts


@dataclass(frozen=True)
class NullMoments:
    """Exact permutation-null moments of (r1, r2) at each t = 1..n-1."""

    t: np.ndarray
    mean1: np.ndarray
    mean2: np.ndarray
    var1: np.ndarray
    var2: np.ndarray
    cov: np.ndarray


def _side_fractions(t: np.ndarray, n: int):
    """The p1..p3, q1..q3, r falling-factorial fractions of the null."""
    t = t.astype(np.float64)
    s = n - t
    n1, n2, n3 = float(n), float(n - 1), float(n - 2)
    n4 = float(n - 3)
    p1 = t * (t - 1) / (n1 * n2)
    p2 = p1 * (t - 2) / n3
    p3 = p2 * (t - 3) / n4
    q1 = s * (s - 1) / (n1 * n2)
    q2 = q1 * (s - 2) / n3
    q3 = q2 * (s - 3) / n4
    r = t * (t - 1) * s * (s - 1) / (n1 * n2 * n3 * n4)
    return p1, p2, p3, q1, q2, q3, r


def null_moments(counts: PairConfigCounts, t=None) -> NullMoments:
    """Evaluate the exact mean/variance/covariance formulas at each t."""
    n, k = counts.n, counts.k
    nk = float(n * k)
    if t is None:
        t = np.arange(1, n, dtype=np.int64)
    t = np.atleast_1d(np.asarray(t, dtype=np.int64))
    p1, p2, p3, q1, q2, q3, r = _side_fractions(t, n)
    d1, d2, d3 = float(counts.d1), float(counts.d2), float(counts.d3)
    mean1 = nk * p1
    mean2 = nk * q1
    var1 = d1 * p1 + d2 * p2 + d3 * p3 - mean1**2
    var2 = d1 * q1 + d2 * q2 + d3 * q3 - mean2**2
    cov = d3 * r - mean1 * mean2
    return NullMoments(t=t, mean1=mean1, mean2=mean2, var1=var1, var2=var2, cov=cov)


@dataclass(frozen=True)
class ScanMoments:
    """Mean/sd of R_w and R_diff on a window, precomputed for scans."""

    t: np.ndarray
    mean_w: np.ndarray
    sd_w: np.ndarray
    mean_diff: np.ndarray
    sd_diff: np.ndarray


def scan_moments(counts: PairConfigCounts, n0: int, n1: int, check: bool = True) -> ScanMoments:
    n = counts.n
    if not (1 <= n0 <= n1 <= n - 1):
        raise ValueError(f"window [{n0}, {n1}] invalid for n={n}")
    t = np.arange(n0, n1 + 1, dtype=np.int64)
    m = null_moments(counts, t)
    w1 = (n - t - 1) / (n - 2)
    w2 = (t - 1) / (n - 2)
    mean_w = w1 * m.mean1 + w2 * m.mean2
    var_w = w1**2 * m.var1 + 2 * w1 * w2 * m.cov + w2**2 * m.var2
    mean_diff = m.mean1 - m.mean2
    var_diff = m.var1 + m.var2 - 2 * m.cov
    if check:
        for name, var in (("R_w", var_w), ("R_diff", var_diff)):
            bad = np.flatnonzero(var <= VARIANCE_FLOOR)
            if bad.size:
                t_bad = int(t[bad[0]])
                raise DegenerateVariance(
                    f"var({name}) is zero at t={t_bad}; the scan is not defined there "
                    "(in-degrees all equal k make R_diff constant; perturb k or the data, "
                    "or shrink the window away from t=1 and t=n-1)",
                    t=t_bad,
                )
    return ScanMoments(
        t=t,
        mean_w=mean_w,
        sd_w=np.sqrt(np.maximum(var_w, 0.0)),
        mean_diff=mean_diff,
        sd_diff=np.sqrt(np.maximum(var_diff, 0.0)),
    )


@dataclass(frozen=True)
class ScanProcesses:
    """Standardized processes and the max-type statistic on a window."""

    t: np.ndarray
    z_w: np.ndarray
    z_diff: np.ndarray
    m: np.ndarray

    @property
    def tau_hat(self) -> int:
        # smallest t on ties
        return int(self.t[int(np.argmax(self.m))])

    @property
    def max_stat(self) -> float:
        return float(self.m.max())


def scan_processes(
    profile: EdgeCountProfile,
    counts: PairConfigCounts,
    n0: int,
    n1: int,
) -> ScanProcesses:
    """Z_w, Z_diff, and M(t) = max(Z_w, |Z_diff|) over t in [n0, n1]."""
    moments = scan_moments(counts, n0, n1)
    t = moments.t
    r1 = profile.r1[t - 1].astype(np.float64)
    r2 = profile.r2[t - 1].astype(np.float64)
    n = counts.n
    w1 = (n - t - 1) / (n - 2)
    w2 = (t - 1) / (n - 2)
    z_w = (w1 * r1 + w2 * r2 - moments.mean_w) / moments.sd_w
    z_diff = (r1 - r2 - moments.mean_diff) / moments.sd_diff
    m = np.maximum(z_w, np.abs(z_diff))
    return ScanProcesses(t=t, z_w=z_w, z_diff=z_diff, m=m)
