from typing import Sequence, Tuple

import numpy as np
from numpy.random import Generator, SeedSequence, default_rng

from seroclass.models.density import TruncatedDensity
from seroclass.models.sampling import sample_array
from seroclass.utils.exceptions import InvalidParameterException, InvalidPrevalenceException


def trial_seed(base_seed: int, key: Sequence[int]) -> SeedSequence:
    """Independent stream for one trial, addressed by its indices."""
    return SeedSequence(base_seed, spawn_key=tuple(int(k) for k in key))


def positive_count(p: float, size: int, rng: Generator, stratified: bool = True) -> int:
    if not 0.0 <= p <= 1.0:
        raise InvalidPrevalenceException(f"Prevalence must lie in [0, 1], got {p}")
    if stratified:
        return int(round(p * size))
    return int(rng.binomial(size, p))


def draw_labeled_sample(
    pos_density: TruncatedDensity,
    neg_density: TruncatedDensity,
    p: float,
    size: int,
    rng: Generator,
    stratified: bool = True,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Points from the mixture at prevalence ``p`` and whether each one is truly
    positive. Stratified draws take exactly ``round(p * size)`` positives;
    otherwise the count is binomial. Positives come first.
    """
    if size < 0:
        raise InvalidParameterException(f"Sample size must be non-negative, got {size}")
    n_pos = positive_count(p, size, rng, stratified)
    positives = sample_array(pos_density, n_pos, rng)
    negatives = sample_array(neg_density, size - n_pos, rng)
    truth = np.zeros(size, dtype=bool)
    truth[:n_pos] = True
    return np.concatenate([positives, negatives]), truth


def draw_counts(
    pos_density: TruncatedDensity, neg_density: TruncatedDensity, n_pos: int, n_neg: int, seed
) -> Tuple[np.ndarray, np.ndarray]:
    """Fixed numbers of positives and negatives, positives first."""
    rng = default_rng(seed)
    points = np.concatenate([sample_array(pos_density, n_pos, rng), sample_array(neg_density, n_neg, rng)])
    truth = np.zeros(n_pos + n_neg, dtype=bool)
    truth[:n_pos] = True
    return points, truth
