"""Transfer entropy between coarse-grained bubble-probability series.

Probabilities are binned into B equal-width cells and treated as symbols.
With one lag of history on both sides, the transfer entropy from a source
series v to a target series u reduces to

    TE = sum p(u_t, u_{t-1}, v_{t-1}) *
         log_s [ p(u_t, u_{t-1}, v_{t-1}) p(u_{t-1}) /
                 (p(u_t, u_{t-1}) p(u_{t-1}, v_{t-1})) ]

over occupied triples, all four tables estimated by counting. The pairwise
matrix of these values over a basket of assets is the raw material of the
influence network.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .series import ProbabilitySeries

NEGATIVE_RESIDUE_WARN = 1e-9


@dataclass(frozen=True)
class BinnedSeries:
    """Integer symbol sequence over ``bin_count`` equal-width bins."""

    bins: np.ndarray
    bin_count: int = 10

    def __post_init__(self):
        b = np.asarray(self.bins, dtype=np.int64)
        if self.bin_count < 2:
            raise ValueError("bin_count must be >= 2")
        if len(b) and (b.min() < 0 or b.max() >= self.bin_count):
            raise ValueError(f"bins must lie in [0, {self.bin_count - 1}]")
        b.setflags(write=False)
        object.__setattr__(self, "bins", b)

    def __len__(self) -> int:
        return len(self.bins)


@dataclass(frozen=True)
class JointHistogram:
    """Empirical tables over the aligned triples (u_t, u_{t-1}, v_{t-1}).

    The pair and single tables are marginals of the triple counts, so the
    marginalisation identities hold exactly by construction.
    """

    triple: np.ndarray        # counts over (u_t, u_prev, v_prev)
    sample_size: int = field(init=False)

    def __post_init__(self):
        c = np.asarray(self.triple, dtype=np.int64)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise ValueError("triple counts must be a cubic 3-d array")
        c.setflags(write=False)
        object.__setattr__(self, "triple", c)
        object.__setattr__(self, "sample_size", int(c.sum()))

    @property
    def freq_triple(self) -> np.ndarray:
        return self.triple / self.sample_size

    @property
    def freq_target_pair(self) -> np.ndarray:
        """p(u_t, u_{t-1})"""
        return self.triple.sum(axis=2) / self.sample_size

    @property
    def freq_lagged_pair(self) -> np.ndarray:
        """p(u_{t-1}, v_{t-1})"""
        return self.triple.sum(axis=0) / self.sample_size

    @property
    def freq_lagged_single(self) -> np.ndarray:
        """p(u_{t-1})"""
        return self.triple.sum(axis=(0, 2)) / self.sample_size


@dataclass(frozen=True)
class SIIMatrix:
    """Pairwise speculative-influence intensities with a zero diagonal."""

    nodes: tuple[str, ...]
    values: np.ndarray
    window: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        k = len(self.nodes)
        if v.shape != (k, k):
            raise ValueError(f"values must be {k}x{k} to match nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("SII values must be finite")
        if np.any(np.diag(v) != 0.0):
            raise ValueError("diagonal must be zero")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "nodes", tuple(self.nodes))

    def index_of(self, node: str) -> int:
        try:
            return self.nodes.index(node)
        except ValueError:
            raise KeyError(f"unknown node {node!r}") from None

    def __getitem__(self, pair) -> float:
        x, y = pair
        return float(self.values[self.index_of(x), self.index_of(y)])


def discretize(probs: ProbabilitySeries, bin_count: int = 10) -> BinnedSeries:
    """Map probabilities to equal-width bins: k = floor(value * B).

    Bins are left-closed and right-open except the last, which also contains
    the value 1.0 exactly.
    """
    if bin_count < 2:
        raise ValueError("bin_count must be >= 2")
    v = probs.values
    if len(v) and (v.min() < 0.0 or v.max() > 1.0):
        raise ValueError("probability values must lie in [0, 1]")
    bins = np.minimum(np.floor(v * bin_count).astype(np.int64), bin_count - 1)
    return BinnedSeries(bins, bin_count)


def joint_histogram(u: BinnedSeries, v: BinnedSeries, mask=None) -> JointHistogram:
    """Count occurrences of the aligned triples (u_t, u_{t-1}, v_{t-1}).

    ``mask`` (length T-1, aligned with t = 1..T-1) restricts counting to
    selected triples.
    """
    if len(u) != len(v):
        raise ValueError(f"series lengths differ: {len(u)} vs {len(v)}")
    if len(u) < 3:
        raise ValueError("need at least 3 observations to form lagged triples")
    if u.bin_count != v.bin_count:
        raise ValueError("series must share the same bin count")
    B = u.bin_count
    codes = (u.bins[1:] * B + u.bins[:-1]) * B + v.bins[:-1]
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != codes.shape:
            raise ValueError("mask must align with the lagged triples")
        codes = codes[mask]
        if len(codes) < 2:
            raise ValueError("mask keeps fewer than 2 triples")
    counts = np.bincount(codes, minlength=B**3).reshape(B, B, B)
    return JointHistogram(counts)


def transfer_entropy(
    u: BinnedSeries, v: BinnedSeries, base: float = 10.0, mask=None
) -> float:
    """Transfer entropy from source v to target u, one lag each side.

    Zero-probability triples are skipped (the 0*log(0) convention); a tiny
    negative rounding residue is clamped to zero. ``mask`` restricts the
    histogram to selected triples.
    """
    if base <= 1.0:
        raise ValueError("log base must exceed 1")
    hist = joint_histogram(u, v, mask)
    p3 = hist.freq_triple
    p_tp = hist.freq_target_pair     # (u_t, u_prev)
    p_lp = hist.freq_lagged_pair     # (u_prev, v_prev)
    p_l = hist.freq_lagged_single    # (u_prev,)

    a, b, c = np.nonzero(hist.triple)
    num = p3[a, b, c] * p_l[b]
    den = p_tp[a, b] * p_lp[b, c]
    value = float(np.dot(p3[a, b, c], np.log(num / den))) / float(np.log(base))
    if value < 0.0:
        if value < -NEGATIVE_RESIDUE_WARN:
            warnings.warn(
                f"transfer entropy rounding residue {value:.3e} clamped to 0",
                RuntimeWarning,
                stacklevel=2,
            )
        value = 0.0
    return value


def _bubble_day_mask(
    x_probs: ProbabilitySeries, y_probs: ProbabilitySeries, level: float
) -> np.ndarray:
    """Triples where both assets sit at or above ``level`` on both days."""
    both = np.minimum(x_probs.values, y_probs.values) >= level
    return both[1:] & both[:-1]


def sii(
    x_probs: ProbabilitySeries,
    y_probs: ProbabilitySeries,
    bin_count: int = 10,
    base: float = 10.0,
    bubble_only: bool = False,
    bubble_level: float = 0.5,
) -> float:
    """Speculative influence intensity of asset x on asset y.

    This is the transfer entropy with x's bubble-probability series as the
    source and y's as the target, over the full window by default.
    ``bubble_only`` restricts the histogram to days on which both assets'
    bubble probabilities reach ``bubble_level`` (an alternative reading of
    conditioning on the joint bubble state; not the default).
    """
    mask = _bubble_day_mask(x_probs, y_probs, bubble_level) if bubble_only else None
    return transfer_entropy(
        discretize(y_probs, bin_count), discretize(x_probs, bin_count),
        base=base, mask=mask,
    )


def nsii(x: str, y: str, m: SIIMatrix) -> float:
    """Net influence of x on y: SII(x -> y) - SII(y -> x)."""
    return m[x, y] - m[y, x]


def sii_matrix(
    assets: dict[str, ProbabilitySeries],
    bin_count: int = 10,
    base: float = 10.0,
    window: str = "",
    bubble_only: bool = False,
    bubble_level: float = 0.5,
) -> SIIMatrix:
    """All ordered-pair influence intensities for a basket of assets.

    Series must be aligned (equal timestamps). Each pair is independent of
    the others, so the loop is trivially parallelisable; evaluation order
    does not affect the result.
    """
    if len(assets) < 2:
        raise ValueError("need at least 2 assets")
    names = list(assets)
    first = assets[names[0]]
    for name in names[1:]:
        s = assets[name]
        if len(s) != len(first) or not np.array_equal(s.timestamps, first.timestamps):
            raise ValueError(f"series {name!r} is not aligned with {names[0]!r}")

    binned = {name: discretize(assets[name], bin_count) for name in names}
    k = len(names)
    values = np.zeros((k, k))
    for i, src in enumerate(names):
        for j, dst in enumerate(names):
            if i == j:
                continue
            mask = (
                _bubble_day_mask(assets[src], assets[dst], bubble_level)
                if bubble_only else None
            )
            values[i, j] = transfer_entropy(
                binned[dst], binned[src], base=base, mask=mask
            )
    return SIIMatrix(tuple(names), values, window=window)
