"""Synthetic expression-like datasets for experiments and tests."""
from __future__ import annotations

import numpy as np

from .data_io import LabeledDataset
from .errors import ConfigError


def planted_dataset(n_samples: int = 60, n_genes: int = 50, n_informative: int = 5,
                    shift: float = 3.0, seed: int = 0,
                    positive_fraction: float = 0.5) -> LabeledDataset:
    """Gaussian noise genes with the first n_informative shifted by class.

    Informative columns have class means +/- shift/2 against unit noise, so
    shift is the between-class mean separation. Rows are shuffled; labels
    are balanced per positive_fraction.
    """
    if not 0 < n_informative <= n_genes:
        raise ConfigError("n_informative must lie in 1..n_genes")
    rng = np.random.default_rng(seed)
    n_pos = round(n_samples * positive_fraction)
    if n_pos < 2 or n_samples - n_pos < 2:
        raise ConfigError("each class needs at least 2 samples")
    labels = np.concatenate([np.ones(n_pos, dtype=np.int64),
                             -np.ones(n_samples - n_pos, dtype=np.int64)])
    features = rng.standard_normal((n_samples, n_genes))
    features[:, :n_informative] += (shift / 2.0) * labels[:, None]
    order = rng.permutation(n_samples)
    names = [f"g{i:04d}" for i in range(n_genes)]
    return LabeledDataset(features[order], labels[order], names)


def blobs_dataset(n_samples: int = 40, n_features: int = 6, separation: float = 3.0,
                  seed: int = 0) -> LabeledDataset:
    """Two spherical Gaussian blobs offset by `separation` on every axis."""
    rng = np.random.default_rng(seed)
    n_pos = n_samples // 2
    labels = np.concatenate([np.ones(n_pos, dtype=np.int64),
                             -np.ones(n_samples - n_pos, dtype=np.int64)])
    features = rng.standard_normal((n_samples, n_features))
    features += (separation / 2.0) * labels[:, None]
    order = rng.permutation(n_samples)
    names = [f"f{i:02d}" for i in range(n_features)]
    return LabeledDataset(features[order], labels[order], names)
