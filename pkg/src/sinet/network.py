"""Influence indicators and the thresholded unidirectional network.

Nodes carry an industrial or financial group label. Gross indicators sum the
pairwise influence intensities a node sends to (or receives from) a target
set; net indicators are their differences. The network keeps, per unordered
pair, only the positive net direction, drops values below a threshold, and
rescales the survivors' weights into [0, 1].
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .analysis import rank_transform
from .entropy import SIIMatrix
from .errors import ConfigurationError

INDUSTRIAL = "industrial"
FINANCIAL = "financial"

GROSS_INDICATORS = (
    "SI-to-All",
    "SI-from-All",
    "SI-to-Fin",
    "SI-from-Fin",
    "SI-to-IX",
    "SI-from-IX",
)
NET_INDICATORS = ("NSII-on-All", "NSII-on-Fin", "NSII-on-IX")
ALL_INDICATORS = GROSS_INDICATORS + NET_INDICATORS


@dataclass(frozen=True)
class NodeGroup:
    """Group labels (and optional sub-sector) for every node."""

    groups: dict[str, str]
    subsectors: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        bad = {n: g for n, g in self.groups.items() if g not in (INDUSTRIAL, FINANCIAL)}
        if bad:
            raise ConfigurationError(f"unknown group labels: {bad}")
        unknown = set(self.subsectors) - set(self.groups)
        if unknown:
            raise ConfigurationError(f"sub-sector given for unlabeled nodes: {sorted(unknown)}")

    def group_of(self, node: str) -> str:
        try:
            return self.groups[node]
        except KeyError:
            raise ConfigurationError(f"node {node!r} has no group label") from None

    @property
    def industrial(self) -> set[str]:
        return {n for n, g in self.groups.items() if g == INDUSTRIAL}

    @property
    def financial(self) -> set[str]:
        return {n for n, g in self.groups.items() if g == FINANCIAL}


@dataclass(frozen=True)
class IndicatorTable:
    """Per-node aggregate indicators, keyed by indicator name."""

    nodes: tuple[str, ...]
    values: dict[str, np.ndarray]

    def __post_init__(self):
        for name in ALL_INDICATORS:
            if name not in self.values:
                raise ValueError(f"missing indicator column {name!r}")
            if len(self.values[name]) != len(self.nodes):
                raise ValueError(f"indicator column {name!r} has wrong length")
        for suffix in ("All", "Fin", "IX"):
            net = np.asarray(self.values[f"NSII-on-{suffix}"], dtype=float)
            gross = np.asarray(self.values[f"SI-to-{suffix}"], dtype=float) - np.asarray(
                self.values[f"SI-from-{suffix}"], dtype=float
            )
            if not np.array_equal(net, gross):
                raise ValueError(f"NSII-on-{suffix} must equal its gross difference exactly")

    def column(self, name: str) -> np.ndarray:
        return np.asarray(self.values[name], dtype=float)

    def value(self, node: str, name: str) -> float:
        return float(self.values[name][self.nodes.index(node)])


@dataclass(frozen=True)
class SINGraph:
    """Thresholded unidirectional influence network.

    ``nodes`` maps node id to display attributes (group, size value, color
    value); ``edges`` are (source, target, weight) with weight the rescaled
    net intensity in [0, 1]. ``threshold`` applies to raw net intensities.
    """

    nodes: tuple[str, ...]
    groups: dict[str, str]
    size_values: dict[str, float]
    color_values: dict[str, Optional[float]]
    edges: tuple[tuple[str, str, float], ...]
    threshold: float

    def __post_init__(self):
        seen_pairs = set()
        for src, dst, w in self.edges:
            if src == dst:
                raise ValueError("self-edges are not allowed")
            if (src, dst) in seen_pairs or (dst, src) in seen_pairs:
                raise ValueError(f"duplicate or bidirectional pair ({src}, {dst})")
            seen_pairs.add((src, dst))
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"edge weight {w} outside [0, 1]")

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def compute_indicators(m: SIIMatrix, groups: NodeGroup) -> IndicatorTable:
    """Gross and net influence indicators for every node of the matrix.

    Sums exclude the diagonal. Net indicators are exact differences of the
    gross ones, so NSII-on-All sums to zero over all nodes.
    """
    for node in m.nodes:
        groups.group_of(node)

    v = m.values
    nodes = m.nodes
    fin = np.array([groups.group_of(n) == FINANCIAL for n in nodes])
    ind = ~fin

    def masked_sums(mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sel = np.where(mask, 1.0, 0.0)
        to = v @ sel            # sum over targets j in mask of v[i, j]
        frm = v.T @ sel         # sum over sources j in mask of v[j, i]
        return to, frm

    to_all, from_all = masked_sums(np.ones(len(nodes), dtype=bool))
    to_fin, from_fin = masked_sums(fin)
    to_ix, from_ix = masked_sums(ind)

    values = {
        "SI-to-All": to_all,
        "SI-from-All": from_all,
        "SI-to-Fin": to_fin,
        "SI-from-Fin": from_fin,
        "SI-to-IX": to_ix,
        "SI-from-IX": from_ix,
        "NSII-on-All": to_all - from_all,
        "NSII-on-Fin": to_fin - from_fin,
        "NSII-on-IX": to_ix - from_ix,
    }
    return IndicatorTable(nodes, values)


def _rescale(values: np.ndarray) -> np.ndarray:
    """Dilation onto [0, 1]: affine min-max map, all-equal inputs map to 1."""
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.ones_like(values)
    return (values - lo) / (hi - lo)


def build_sin(
    m: SIIMatrix,
    groups: NodeGroup,
    threshold: float = 0.3,
    losses: Optional[dict[str, float]] = None,
) -> SINGraph:
    """Build the unidirectional network from an intensity matrix.

    For each unordered pair the positive net direction is a candidate edge;
    candidates at or above ``threshold`` (raw, pre-rescaling) are kept with
    min-max rescaled weights. Industrial node sizes rank NSII-on-IX within
    their group; financial node sizes rank NSII-on-Fin minus SI-from-IX.
    Color values rank the supplied losses within each group.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    table = compute_indicators(m, groups)
    nodes = m.nodes

    candidates: list[tuple[str, str, float]] = []
    for i, x in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            y = nodes[j]
            net = float(m.values[i, j] - m.values[j, i])
            if net > 0.0:
                candidates.append((x, y, net))
            elif net < 0.0:
                candidates.append((y, x, -net))

    edges: list[tuple[str, str, float]] = []
    if candidates:
        raw = np.array([c[2] for c in candidates])
        weights = _rescale(raw)
        for (src, dst, net), w in zip(candidates, weights):
            if net >= threshold:
                edges.append((src, dst, float(w)))

    size_values: dict[str, float] = {}
    ind_nodes = [n for n in nodes if groups.group_of(n) == INDUSTRIAL]
    fin_nodes = [n for n in nodes if groups.group_of(n) == FINANCIAL]
    if ind_nodes:
        score = np.array([table.value(n, "NSII-on-IX") for n in ind_nodes])
        for n, r in zip(ind_nodes, rank_transform(score)):
            size_values[n] = float(r)
    if fin_nodes:
        score = np.array(
            [table.value(n, "NSII-on-Fin") - table.value(n, "SI-from-IX") for n in fin_nodes]
        )
        for n, r in zip(fin_nodes, rank_transform(score)):
            size_values[n] = float(r)

    color_values: dict[str, Optional[float]] = {n: None for n in nodes}
    if losses is not None:
        missing = [n for n in nodes if n not in losses]
        if missing:
            raise ConfigurationError(f"losses missing for nodes: {missing}")
        for members in (ind_nodes, fin_nodes):
            if members:
                ranks = rank_transform(np.array([losses[n] for n in members]))
                for n, r in zip(members, ranks):
                    color_values[n] = float(r)

    return SINGraph(
        nodes=nodes,
        groups={n: groups.group_of(n) for n in nodes},
        size_values=size_values,
        color_values=color_values,
        edges=tuple(edges),
        threshold=threshold,
    )
