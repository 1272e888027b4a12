"""Nonparametric trial statistics: Friedman, Kendall's W, Wilcoxon
signed-rank with Bonferroni correction, and Kendall tau-b with the
moderate-band classifier. Exact enumeration oracles live in the test suite,
not here.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.stats

W_EFFECT_BOUNDS = (0.1, 0.3, 0.5)  # negligible < small < moderate < large
TAU_MODERATE_LOW = 0.26
TAU_MODERATE_HIGH = 0.49


@dataclass(frozen=True)
class RepeatedMeasures:
    """Subjects x conditions matrix, no missing cells."""

    values: np.ndarray
    conditions: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("values must be 2-D (subjects x conditions)")
        if v.shape[0] < 3:
            raise ValueError("need at least 3 subjects")
        if v.shape[1] < 2:
            raise ValueError("need at least 2 conditions")
        if len(self.conditions) != v.shape[1]:
            raise ValueError("condition labels must match columns")
        if not np.all(np.isfinite(v)):
            raise ValueError("missing or non-finite cells")
        object.__setattr__(self, "values", v)


def _midranks(row: np.ndarray) -> np.ndarray:
    return scipy.stats.rankdata(row, method="average")


def friedman(data: RepeatedMeasures) -> dict:
    """Tie-corrected Friedman chi-square with df = k-1 and upper-tail p.

    All-equal rows carry no ranking information: statistic 0, p = 1.
    """
    values = data.values
    n, k = values.shape
    ranks = np.vstack([_midranks(row) for row in values])
    col_sums = ranks.sum(axis=0)

    chi2 = (12.0 / (n * k * (k + 1))) * float(np.sum(col_sums**2)) - 3.0 * n * (k + 1)

    tie_sum = 0.0
    for row in values:
        _, counts = np.unique(row, return_counts=True)
        tie_sum += float(np.sum(counts**3 - counts))
    correction = 1.0 - tie_sum / (n * k * (k * k - 1))
    if correction <= 0.0:  # every row fully tied
        return {"chi2": 0.0, "df": k - 1, "p": 1.0}
    chi2 /= correction
    if chi2 < 0.0:
        chi2 = 0.0
    p = float(scipy.stats.chi2.sf(chi2, df=k - 1))
    return {"chi2": float(chi2), "df": k - 1, "p": p}


def kendalls_w(data: RepeatedMeasures) -> float:
    """Agreement effect size W = chi2 / (n (k-1)); 1 iff perfect agreement."""
    n, k = data.values.shape
    return friedman(data)["chi2"] / (n * (k - 1))


def classify_kendalls_w(w: float) -> str:
    """Effect-size label over the 0.1 / 0.3 / 0.5 bounds."""
    small, moderate, large = W_EFFECT_BOUNDS
    if w < small:
        return "negligible"
    if w < moderate:
        return "small"
    if w < large:
        return "moderate"
    return "large"


def _signed_ranks(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    d = d[d != 0.0]
    ranks = scipy.stats.rankdata(np.abs(d), method="average")
    return d, ranks


def wilcoxon_signed_rank(x, y, alternative: str = "two-sided") -> dict:
    """Paired signed-rank test; statistic is W+ (positive-difference ranks).

    Exact sign-assignment distribution for n <= 25 non-zero differences
    (mid-ranks on tied magnitudes), normal approximation with tie-corrected
    variance above. Zero differences are dropped; all-zero pairs give p = 1.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length vectors")
    if len(x) < 5:
        raise ValueError("need at least 5 pairs")
    if alternative not in ("two-sided", "greater", "less"):
        raise ValueError(f"unknown alternative {alternative!r}")

    d, ranks = _signed_ranks(x, y)
    n = len(d)
    if n == 0:
        return {"statistic": 0.0, "p": 1.0, "n": 0}
    w_plus = float(np.sum(ranks[d > 0]))

    if n <= 25:
        p = _wilcoxon_exact_p(ranks, w_plus, alternative)
    else:
        mean = n * (n + 1) / 4.0
        _, counts = np.unique(ranks, return_counts=True)
        tie_term = float(np.sum(counts**3 - counts)) / 48.0
        sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
        z = (w_plus - mean) / sigma
        if alternative == "two-sided":
            p = 2.0 * float(scipy.stats.norm.sf(abs(z)))
        elif alternative == "greater":
            p = float(scipy.stats.norm.sf(z))
        else:
            p = float(scipy.stats.norm.cdf(z))
        p = min(1.0, p)
    return {"statistic": w_plus, "p": p, "n": n}


def _wilcoxon_exact_p(ranks: np.ndarray, w_plus: float, alternative: str) -> float:
    """Distribution of W+ over all 2^n sign assignments, by convolution.

    Mid-ranks are half-integers at worst, so doubling gives integer support.
    """
    scaled = np.rint(ranks * 2).astype(int)
    total = int(scaled.sum())
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for r in scaled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    counts /= counts.sum()
    w2 = int(round(w_plus * 2))
    p_le = float(counts[: w2 + 1].sum())
    p_ge = float(counts[w2:].sum())
    if alternative == "greater":
        return min(1.0, p_ge)
    if alternative == "less":
        return min(1.0, p_le)
    return min(1.0, 2.0 * min(p_le, p_ge))


def bonferroni(pvals, m: int | None = None) -> list[float]:
    """p_i' = min(1, m * p_i); m defaults to the family size."""
    pvals = list(pvals)
    if m is None:
        m = len(pvals)
    if m < 1:
        raise ValueError("m must be >= 1")
    return [min(1.0, m * p) for p in pvals]


def kendall_tau(x, y) -> float:
    """Kendall tau-b (tie corrected); errors on constant input."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 3:
        raise ValueError("x and y must be equal-length vectors of length >= 3")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ValueError("kendall tau undefined for constant input")
    tau = scipy.stats.kendalltau(x, y, variant="b").statistic
    return float(tau)


def classify_tau(tau: float) -> str:
    """Correlation strength label; moderate band [0.26, 0.49] inclusive."""
    a = abs(tau)
    if a < TAU_MODERATE_LOW:
        return "weak"
    if a <= TAU_MODERATE_HIGH:
        return "moderate"
    return "strong"


METRIC_KEYS = (
    "cumulative_dose_sv",
    "mean_dose_rate_sv_h",
    "mean_nearest_dist_m",
    "max_dose_rate_sv_h",
    "table_proximity_s",
)


def build_report(
    metric_rows: list[dict],
    encodings: tuple[str, ...] | None = None,
    covariates: dict[str, float] | None = None,
) -> dict:
    """Stats report over a metrics table (one row per trial).

    Rows of the repeated-measures design are (participant, scene) pairs:
    every encoding visits each pair exactly once, so a single participant's
    30 trials already form a complete 5 x 6 design. Per metric: Friedman,
    Kendall's W effect size, and the pairwise Wilcoxon table with Bonferroni
    correction; tau correlations against an optional per-participant
    covariate; plus the higher-exposure path counts.
    """
    if not metric_rows:
        raise ValueError("no metric rows")
    if encodings is None:
        encodings = tuple(sorted({r["encoding"] for r in metric_rows}))
    participants = sorted({r["participant"] for r in metric_rows})
    subjects = sorted({(r["participant"], r["scene"]) for r in metric_rows})

    report: dict = {"encodings": list(encodings), "participants": participants, "metrics": {}}

    for key in METRIC_KEYS:
        sums = np.zeros((len(subjects), len(encodings)))
        counts = np.zeros_like(sums)
        for r in metric_rows:
            i = subjects.index((r["participant"], r["scene"]))
            j = encodings.index(r["encoding"])
            sums[i, j] += float(r[key])
            counts[i, j] += 1
        if np.any(counts == 0):
            raise ValueError(f"missing cells for metric {key}")
        cells = sums / counts

        data = RepeatedMeasures(cells, encodings)
        fr = friedman(data)
        w = kendalls_w(data)
        pairwise = []
        raw_ps = []
        pairs = list(itertools.combinations(range(len(encodings)), 2))
        for a, b in pairs:
            res = wilcoxon_signed_rank(cells[:, a], cells[:, b])
            raw_ps.append(res["p"])
            pairwise.append(
                {
                    "a": encodings[a],
                    "b": encodings[b],
                    "statistic": res["statistic"],
                    "p": res["p"],
                }
            )
        for entry, adj in zip(pairwise, bonferroni(raw_ps)):
            entry["p_bonferroni"] = adj

        entry = {
            "test": "friedman",
            "chi2": fr["chi2"],
            "df": fr["df"],
            "p": fr["p"],
            "kendalls_w": w,
            "effect_size": classify_kendalls_w(w),
            "pairwise": pairwise,
        }
        if covariates:
            xs, ys = [], []
            for pid in participants:
                if pid in covariates:
                    rows_i = [i for i, (p, _) in enumerate(subjects) if p == pid]
                    xs.append(covariates[pid])
                    ys.append(float(np.mean(cells[rows_i])))
            if len(xs) >= 3 and len(set(xs)) > 1 and len(set(ys)) > 1:
                tau = kendall_tau(xs, ys)
                entry["covariate_tau"] = tau
                entry["covariate_tau_strength"] = classify_tau(tau)
        report["metrics"][key] = entry

    designated = [r for r in metric_rows if r.get("scene_designates_side")]
    took = [r for r in designated if r.get("took_higher_exposure")]
    report["higher_exposure_path"] = {
        "trials_with_designated_side": len(designated),
        "times_taken": len(took),
        "by_encoding": {
            enc: sum(1 for r in took if r["encoding"] == enc) for enc in encodings
        },
    }
    return report
