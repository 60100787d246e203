"""Point and variance estimators for SRS, ACS and traditional cluster sampling.

SRS and ACS share the without-replacement form

    mean = sum(v) / n
    var(mean) = (1 - n / N) * sum((v - mean)^2) / (n (n - 1))

with v the sampled y-values (SRS) or the network means w_k(i) of the initial
units (ACS). Totals are N * mean with variance N^2 * var(mean).
"""

import logging
import math
from typing import Optional, Sequence, Union

from .designs import block_cluster_partition, draw_acs, draw_cluster_sample, draw_srs
from .errors import DegreesOfFreedomError, PartitionMismatchError, SampleSizeError
from .models import (
    AcsSample,
    ClusterData,
    ClusterPartitionSpec,
    ClusterSample,
    Design,
    EstimateReport,
    GridFrame,
    RngSeed,
    SrsSample,
)

logger = logging.getLogger(__name__)


def _mean_and_variance(values: Sequence[float], N: int, design: Design) -> tuple[float, float]:
    n = len(values)
    if n < 2:
        raise DegreesOfFreedomError(
            f"{design.value} variance needs a sample of at least 2, got {n}"
        )
    if n > N:
        raise SampleSizeError(f"Sample size {n} exceeds population size {N}")
    mean = math.fsum(values) / n
    sum_sq = math.fsum((v - mean) ** 2 for v in values)
    variance = (1.0 - n / N) * sum_sq / (n * (n - 1))
    return mean, max(variance, 0.0)


def estimate_srs(sample: SrsSample, N: int, seed: Optional[int] = None) -> EstimateReport:
    """Sample mean and its finite-population-corrected variance."""
    mean, variance = _mean_and_variance(sample.y_values, N, Design.SRS)
    return EstimateReport(
        design=Design.SRS,
        mean_estimate=mean,
        total_estimate=N * mean,
        variance_of_mean=variance,
        variance_of_total=N * N * variance,
        sample_size=sample.m,
        seed=seed,
    )


def estimate_acs(sample: AcsSample, N: int, seed: Optional[int] = None) -> EstimateReport:
    """Network-mean estimator: the initial units contribute w_k(i), duplicates included."""
    w = [network.w_k for network in sample.networks]
    mean, variance = _mean_and_variance(w, N, Design.ACS)
    return EstimateReport(
        design=Design.ACS,
        mean_estimate=mean,
        total_estimate=N * mean,
        variance_of_mean=variance,
        variance_of_total=N * N * variance,
        sample_size=sample.n1,
        final_effort=sample.final_effort,
        seed=seed,
    )


def estimate_cluster(
    data: ClusterData, M_0: int, N_cl: int, seed: Optional[int] = None
) -> EstimateReport:
    """Traditional cluster estimator over the sampled clusters.

    The per-unit mean is the average of the sampled cluster means ybar_i, the
    total estimate is M_0 times that, and

        V[Y_hat] = M_0^2 / (n (n - 1)) * sum((ybar_i - ybarbar)^2)

    with V of the per-unit mean equal to V[Y_hat] / M_0^2.

    Args:
        data: Unit values of the n sampled clusters
        M_0: Number of units in the population
        N_cl: Number of clusters in the population
    """
    n = data.N_cl
    if n < 2:
        raise DegreesOfFreedomError(f"cluster variance needs at least 2 clusters, got {n}")
    if n > N_cl:
        raise SampleSizeError(f"Sampled {n} clusters but the population has {N_cl}")

    cluster_means = data.Ybar_i
    mean = math.fsum(cluster_means) / n
    sum_sq = math.fsum((ybar - mean) ** 2 for ybar in cluster_means)
    variance_of_total = M_0 * M_0 * sum_sq / (n * (n - 1))
    return EstimateReport(
        design=Design.CLUSTER,
        mean_estimate=mean,
        total_estimate=M_0 * mean,
        variance_of_mean=variance_of_total / (M_0 * M_0),
        variance_of_total=variance_of_total,
        sample_size=n,
        final_effort=data.M_0,
        seed=seed,
    )


def cluster_population_data(frame: GridFrame, spec: ClusterPartitionSpec) -> ClusterData:
    """Group every frame unit by cluster (ascending cluster id)."""
    if spec.M_0 != frame.N:
        raise PartitionMismatchError(
            f"Cluster assignment covers {spec.M_0} units but the frame has {frame.N}"
        )
    counts = frame.counts
    return ClusterData(
        cluster_values=tuple(
            tuple(counts[i] for i in units) for units in spec.members().values()
        )
    )


def draw_and_estimate(
    frame: GridFrame,
    design: Design,
    size: int,
    seed: RngSeed,
    condition: float = 0.0,
    neighborhood: int = 4,
    block: tuple[int, int] = (2, 2),
) -> tuple[Union[SrsSample, AcsSample, ClusterSample], EstimateReport]:
    """Draw one sample under a design and estimate from it.

    Args:
        frame: Population to sample
        design: srs, acs or cluster
        size: m (srs), n1 (acs) or number of clusters (cluster)
        seed: Random stream for the draw
        condition: Condition to adapt (acs)
        neighborhood: 4 or 8 (acs)
        block: Cluster block width and height (cluster)

    Returns:
        The sample and its EstimateReport
    """
    if design == Design.SRS:
        srs = draw_srs(frame, size, seed)
        return srs, estimate_srs(srs, frame.N, seed=seed.seed)
    if design == Design.ACS:
        acs = draw_acs(frame, size, condition, seed, neighborhood=neighborhood)
        return acs, estimate_acs(acs, frame.N, seed=seed.seed)

    spec = block_cluster_partition(frame.width, frame.height, block[0], block[1], n_cl=size)
    clusters = draw_cluster_sample(frame, spec, seed)
    data = clusters.to_cluster_data()
    report = estimate_cluster(data, clusters.M_0, clusters.N_cl, seed=seed.seed)
    return clusters, report
