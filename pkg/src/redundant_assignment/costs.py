"""Joint Gaussian edge travel times, clamped at zero, and derived path-cost samples."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

MEAN_RANGE = (10.0, 20.0)
VARIANCE_RANGE = (25.0, 100.0)


@dataclass(frozen=True, eq=False)
class JointEdgeCostModel:
    mean: np.ndarray
    chol_factor: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        chol = np.asarray(self.chol_factor, dtype=float)
        if mean.ndim != 1 or chol.shape != (mean.size, mean.size):
            raise ValueError("chol_factor must be square and match the mean vector")
        if np.any(np.triu(chol, k=1) != 0):
            raise ValueError("chol_factor must be lower-triangular")
        mean.setflags(write=False)
        chol.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "chol_factor", chol)

    @property
    def edge_count(self) -> int:
        return self.mean.size

    @property
    def covariance(self) -> np.ndarray:
        return self.chol_factor @ self.chol_factor.T

    def to_dict(self) -> dict[str, Any]:
        return {
            "means": self.mean.tolist(),
            "chol_factor": [self.chol_factor[i, : i + 1].tolist() for i in range(self.edge_count)],
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "JointEdgeCostModel":
        try:
            mean = np.asarray(doc["means"], dtype=float)
            rows = doc["chol_factor"]
        except KeyError as exc:
            raise ValueError(f"missing field {exc.args[0]!r}") from None
        n = mean.size
        if len(rows) != n:
            raise ValueError(f"field 'chol_factor' has {len(rows)} rows, expected {n}")
        chol = np.zeros((n, n))
        for i, row in enumerate(rows):
            if len(row) != i + 1:
                raise ValueError(f"field 'chol_factor[{i}]' must have {i + 1} entries")
            chol[i, : i + 1] = row
        return cls(mean, chol)


@dataclass(frozen=True, eq=False)
class EdgeSampleMatrix:
    samples: np.ndarray  # (S, E)
    seed: int

    @property
    def sample_count(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class ObservedCosts:
    realized: np.ndarray  # (E,)
    seed: int


def build_random_cost_model(
    edge_count: int, correlation_strength: float = 0.5, seed: int = 0
) -> JointEdgeCostModel:
    """Random mean vector and lower-triangular covariance factor.

    Row ``e`` of the factor is ``sqrt(v_e) * (sqrt(1 - c) * unit_e + sqrt(c) * g / |g|)``
    where ``g`` is a Gaussian vector over the earlier edges and ``c`` the
    correlation strength, so ``diag(L L^T)`` equals the drawn variances ``v``
    exactly and ``c`` is the share of each edge's variance coupled to other edges.
    """
    if edge_count < 1:
        raise ValueError("edge_count must be >= 1")
    if not 0.0 <= correlation_strength <= 1.0:
        raise ValueError("correlation_strength must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    mean = rng.uniform(*MEAN_RANGE, size=edge_count)
    variances = rng.uniform(*VARIANCE_RANGE, size=edge_count)
    raw = np.tril(rng.standard_normal((edge_count, edge_count)), k=-1)

    chol = np.zeros((edge_count, edge_count))
    c = correlation_strength
    for e in range(edge_count):
        norm = np.linalg.norm(raw[e, :e])
        if e == 0 or c == 0.0 or norm == 0.0:
            chol[e, e] = 1.0
        else:
            chol[e, :e] = np.sqrt(c) * raw[e, :e] / norm
            chol[e, e] = np.sqrt(1.0 - c)
        chol[e] *= np.sqrt(variances[e])
    return JointEdgeCostModel(mean, chol)


def _truncated_draws(model: JointEdgeCostModel, rng: np.random.Generator, s: int) -> np.ndarray:
    z = rng.standard_normal((s, model.edge_count))
    return np.maximum(model.mean + z @ model.chol_factor.T, 0.0)


def sample_edge_costs(model: JointEdgeCostModel, s: int, seed: int) -> EdgeSampleMatrix:
    if s < 1:
        raise ValueError("sample count must be >= 1")
    samples = _truncated_draws(model, np.random.default_rng(seed), s)
    samples.setflags(write=False)
    return EdgeSampleMatrix(samples, seed)


def draw_observed(model: JointEdgeCostModel, seed: int) -> ObservedCosts:
    realized = _truncated_draws(model, np.random.default_rng(seed), 1)[0]
    realized.setflags(write=False)
    return ObservedCosts(realized, seed)


def path_cost_samples(samples: EdgeSampleMatrix | np.ndarray, edge_indices: Sequence[int]) -> np.ndarray:
    """Per-sample path travel time: sum of the path's edge columns, summed in path order."""
    mat = samples.samples if isinstance(samples, EdgeSampleMatrix) else np.asarray(samples)
    idx = list(edge_indices)
    if not idx:
        raise ValueError("path has no edges")
    n_edges = mat.shape[1]
    if any(not 0 <= e < n_edges for e in idx):
        raise IndexError(f"edge index out of range for {n_edges} edges: {idx}")
    out = mat[:, idx[0]].copy()
    for e in idx[1:]:
        out += mat[:, e]
    return out
