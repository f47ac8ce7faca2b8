"""
Committed parameter sets standing in for densities fitted to real assay data.

They reproduce the qualitative picture of a two-antibody serology assay:
negatives concentrated near the origin along a narrow diagonal ridge, positives
further out and broader, with a thin overlap between the two.
"""
from functools import lru_cache
from typing import Tuple

from seroclass.core.params import DomainSpec, NegativeModelParams, PositiveModelParams, QuadratureSpec
from seroclass.models.density import TruncatedDensity, normalize

REFERENCE_NEGATIVE = NegativeModelParams(theta=0.12, k=4.0, alpha=0.07, mu=0.0, beta=2.5)
REFERENCE_POSITIVE = PositiveModelParams(alpha=12.0, beta_shape=10.0, theta=0.6, mu=0.1, z_scale=9.0)

# prevalence of the assay validation set the reference densities mimic
REFERENCE_PREVALENCE = 58 / 401


@lru_cache(maxsize=8)
def reference_densities(
    quad: QuadratureSpec = QuadratureSpec(), domain: DomainSpec = DomainSpec()
) -> Tuple[TruncatedDensity, TruncatedDensity]:
    """(positive, negative) reference densities truncated to ``domain``."""
    return (
        normalize("positive", REFERENCE_POSITIVE, domain, quad),
        normalize("negative", REFERENCE_NEGATIVE, domain, quad),
    )
