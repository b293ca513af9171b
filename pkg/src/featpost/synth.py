"""Synthetic labeled feature sets with planted structure and known ground truth.

Rows follow the decomposition the rest of the package is built to undo: a
shared offset vector (the planted common mean), high-variance noise along a
few planted dominating directions, isotropic base noise elsewhere, and
class centroids orthogonal to both so the discriminative geometry survives
their removal. All planted directions sit on coordinate axes, which makes
the orthogonality exact rather than approximate.

Axis layout: axis 0 carries the offset, axes 1..s the spikes, the next
``n_classes`` axes the class centroids. Noise consumes the deterministic
gaussian stream row-major, dimension-major within each row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .rng import gaussian_block


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic dataset; equal specs generate identical data."""

    n_per_class: int
    n_classes: int
    dim: int
    offset_norm: float = 0.0
    spike_variances: tuple = ()
    base_variance: float = 1.0
    class_sep: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "spike_variances", tuple(float(v) for v in self.spike_variances))
        if self.n_per_class < 1 or self.n_classes < 1 or self.dim < 1:
            raise ValidationError("counts and dim must all be at least 1")
        if not (math.isfinite(self.offset_norm) and self.offset_norm >= 0.0):
            raise ValidationError("offset_norm must be finite and non-negative")
        if not (math.isfinite(self.base_variance) and self.base_variance > 0.0):
            raise ValidationError("base_variance must be finite and positive")
        if not (math.isfinite(self.class_sep) and self.class_sep >= 0.0):
            raise ValidationError("class_sep must be finite and non-negative")
        for v in self.spike_variances:
            if not (math.isfinite(v) and v > self.base_variance):
                raise ValidationError(
                    f"every spike variance must exceed base_variance, got {v!r}")
        needed = 1 + len(self.spike_variances) + self.n_classes
        if needed > self.dim:
            raise ValidationError(
                f"dim={self.dim} too small to host offset, "
                f"{len(self.spike_variances)} spikes and {self.n_classes} classes "
                f"orthogonally (needs {needed})")


def ground_truth(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Planted (offset vector, spike directions, class centroids) for a spec."""
    s = len(spec.spike_variances)
    offset = np.zeros(spec.dim)
    offset[0] = spec.offset_norm
    spikes = np.zeros((s, spec.dim))
    for j in range(s):
        spikes[j, 1 + j] = 1.0
    centroids = np.zeros((spec.n_classes, spec.dim))
    # Pairwise centroid distance is exactly class_sep.
    coord = spec.class_sep / math.sqrt(2.0)
    for c in range(spec.n_classes):
        centroids[c, 1 + s + c] = coord
    return offset, spikes, centroids


def generate(spec: SynthSpec) -> tuple[np.ndarray, np.ndarray]:
    """Sample the dataset: (features, labels), rows grouped by class."""
    offset, spikes, centroids = ground_truth(spec)
    n = spec.n_per_class * spec.n_classes
    noise = gaussian_block(spec.seed, n * spec.dim).reshape(n, spec.dim)
    stds = np.full(spec.dim, math.sqrt(spec.base_variance))
    for j, var in enumerate(spec.spike_variances):
        stds[1 + j] = math.sqrt(var)
    F = noise * stds
    F += offset
    labels = np.repeat(np.arange(spec.n_classes, dtype=np.int64), spec.n_per_class)
    F += centroids[labels]
    return F, labels
