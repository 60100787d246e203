"""Population-level efficiency of ACS against SRS.

Given a frame and its network partition, the population sum of squares splits
into a within-network and a between-network part:

    total_ss = sum_i (y_i - mu)^2
    within_ss = sum_k sum_{i in B_k} (y_i - w_k)^2
    between_ss = sum_i (w_k(i) - mu)^2

The ACS estimator's variance depends only on between_ss, so ACS beats SRS
exactly when the within-network share of the variation is large enough. The
same condition is available here in four equivalent forms; they are
evaluated in exact rational arithmetic so their agreement is exact.
"""

import logging
import math
from collections import Counter
from fractions import Fraction
from typing import NamedTuple, Optional, Union

from .designs import check_partition, neighbors
from .errors import DegeneratePopulationError, InternalConsistencyError, SampleSizeError
from .models import (
    DecompositionReport,
    EfficiencyReport,
    FeasibleRegion,
    GridFrame,
    KappaValues,
    NetworkPartition,
    SuperiorityCheck,
    SuperiorityPredicates,
)

logger = logging.getLogger(__name__)

DECOMPOSITION_RTOL = 1e-9


def _population_size(frame: GridFrame, partition: NetworkPartition, N: Optional[int]) -> int:
    check_partition(frame, partition)
    if N is not None and N != frame.N:
        raise SampleSizeError(f"Population size {N} does not match the frame's {frame.N} units")
    return frame.N


def _check_sizes(N: int, n1: int, m: Optional[int] = None) -> None:
    if not 1 <= n1 <= N:
        raise SampleSizeError(f"Initial sample size {n1} must be between 1 and N = {N}")
    if m is None:
        return
    if m < 1:
        raise SampleSizeError(f"SRS sample size must be at least 1, got {m}")
    if m > N:
        raise SampleSizeError(f"SRS sample size {m} exceeds population size {N}")
    if m == N:
        raise SampleSizeError(f"SRS sample size {m} equals N: SRS variance is zero (census)")


# ============================================================================
# Sums of squares
# ============================================================================


def decompose_sum_of_squares(frame: GridFrame, partition: NetworkPartition) -> DecompositionReport:
    """Split the population sum of squares into within and between networks."""
    check_partition(frame, partition)
    N = frame.N
    counts = frame.counts
    mu = math.fsum(counts) / N

    total_ss = math.fsum((y - mu) ** 2 for y in counts)
    within_ss = math.fsum(
        (counts[i] - network.w_k) ** 2
        for network in partition.networks
        for i in network.unit_indices
    )
    between_ss = math.fsum(
        network.m_k * (network.w_k - mu) ** 2 for network in partition.networks
    )

    gap = abs(total_ss - within_ss - between_ss)
    if gap > DECOMPOSITION_RTOL * total_ss and gap > 1e-12:
        raise InternalConsistencyError(
            f"Sum of squares identity violated: total {total_ss!r} != "
            f"within {within_ss!r} + between {between_ss!r}"
        )

    return DecompositionReport(
        N=N,
        K=partition.K,
        mu=mu,
        sigma2=total_ss / (N - 1) if N > 1 else 0.0,
        total_ss=total_ss,
        within_ss=within_ss,
        between_ss=between_ss,
    )


def exact_sums_of_squares(
    frame: GridFrame, partition: NetworkPartition
) -> tuple[Fraction, Fraction]:
    """(total_ss, within_ss) as exact rationals."""
    check_partition(frame, partition)
    counts = frame.counts
    y_sum = sum(counts)
    total_ss = Fraction(sum(y * y for y in counts)) - Fraction(y_sum * y_sum, frame.N)
    within_ss = Fraction(0)
    for network in partition.networks:
        values = [counts[i] for i in network.unit_indices]
        within_ss += sum(v * v for v in values) - Fraction(network.y_total**2, network.m_k)
    return total_ss, within_ss


class ExactTerms(NamedTuple):
    """Exact quantities behind the efficiency figures for one (n1, m)."""

    total_ss: Fraction
    within_ss: Fraction
    sigma2: Fraction
    var_acs: Fraction
    ratio: Fraction
    kappa1: Fraction


def exact_terms(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int, what: str = "Efficiency"
) -> ExactTerms:
    N = _population_size(frame, partition, None)
    _check_sizes(N, n1, m)
    total_ss, within_ss = exact_sums_of_squares(frame, partition)
    if total_ss == 0:
        raise DegeneratePopulationError(f"{what} is undefined: total_ss = 0")

    sigma2 = total_ss / (N - 1)
    var_acs = Fraction(N - n1, n1 * N * (N - 1)) * (total_ss - within_ss)
    return ExactTerms(
        total_ss=total_ss,
        within_ss=within_ss,
        sigma2=sigma2,
        var_acs=var_acs,
        ratio=Fraction(m, n1) * Fraction(N - n1, N - m) * (1 - within_ss / total_ss),
        kappa1=m * var_acs / sigma2,
    )


def ratio_as_float(ratio: Fraction) -> float:
    """float(ratio), kept on the same side of 1 as the exact value."""
    value = float(ratio)
    if ratio < 1 <= value:
        return math.nextafter(1.0, 0.0)
    if ratio > 1 >= value:
        return math.nextafter(1.0, 2.0)
    return value


# ============================================================================
# Variances and ratios
# ============================================================================


def var_mu_tilde(
    frame: GridFrame, partition: NetworkPartition, n1: int, N: Optional[int] = None
) -> float:
    """Variance of the ACS mean estimator with an initial SRS of n1 units.

    Var = (N - n1) / (n1 N (N - 1)) * (total_ss - within_ss)
    """
    N = _population_size(frame, partition, N)
    _check_sizes(N, n1)
    if N < 2:
        raise SampleSizeError(f"Variance of the ACS mean needs N >= 2, got {N}")
    d = decompose_sum_of_squares(frame, partition)
    return max((N - n1) / (n1 * N * (N - 1)) * (d.total_ss - d.within_ss), 0.0)


def variance_ratio(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int, N: Optional[int] = None
) -> float:
    """Var(ACS, n1) / Var(SRS, m) = (m/n1) ((N - n1)/(N - m)) (1 - within_ss/total_ss).

    Evaluated exactly; the float never lands on the wrong side of 1.
    """
    _population_size(frame, partition, N)
    return ratio_as_float(exact_terms(frame, partition, n1, m, "Variance ratio").ratio)


def check_superiority(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int, N: Optional[int] = None
) -> SuperiorityCheck:
    """Compare (1/n1 - 1/m) sigma^2 against (N - n1)/(n1 N) * within_ss/(N - 1).

    ACS is superior when the left side is smaller. The verdict is decided in
    exact arithmetic; the returned sides are floats.
    """
    N = _population_size(frame, partition, N)
    _check_sizes(N, n1, m)
    total_ss, within_ss = exact_sums_of_squares(frame, partition)
    if total_ss == 0:
        raise DegeneratePopulationError("Superiority check is undefined: total_ss = 0")

    sigma2 = total_ss / (N - 1)
    lhs = (Fraction(1, n1) - Fraction(1, m)) * sigma2
    rhs = Fraction(N - n1, n1 * N) * within_ss / (N - 1)
    return SuperiorityCheck(lhs=float(lhs), rhs=float(rhs), holds=lhs < rhs)


def kappa_values(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int, N: Optional[int] = None
) -> KappaValues:
    """kappa = Var(mu~)/sigma^2 and kappa1 = Var(mu~)/(sigma^2/m) = m kappa.

    Var(ybar_m) is taken without the finite population correction.
    """
    N = _population_size(frame, partition, N)
    _check_sizes(N, n1)
    if m < 1:
        raise SampleSizeError(f"SRS sample size must be at least 1, got {m}")
    d = decompose_sum_of_squares(frame, partition)
    if d.sigma2 == 0.0:
        raise DegeneratePopulationError("kappa is undefined: population variance is 0")
    kappa = var_mu_tilde(frame, partition, n1, N) / d.sigma2
    return KappaValues(kappa=kappa, kappa1=m * kappa)


def feasible_region(N: int, kappa1: Union[Fraction, float]) -> FeasibleRegion:
    """SRS sizes m with m < N (1 - kappa1), the ones ACS outperforms.

    The boundary m_bound = N (1 - kappa1) is total enumeration at kappa1 = 0;
    the set is empty once kappa1 >= 1. m_max is the largest integer strictly
    below the exact boundary, so pass kappa1 as a Fraction when it is known
    exactly.
    """
    if N < 1:
        raise SampleSizeError(f"Population size must be at least 1, got {N}")
    exact = Fraction(kappa1)
    if exact < 0:
        raise ValueError(f"kappa1 must be nonnegative, got {kappa1}")
    m_bound = N * (1 - exact)
    upper = min(math.ceil(m_bound) - 1, N - 1)
    return FeasibleRegion(
        N=N,
        kappa1=float(exact),
        m_bound=float(m_bound),
        m_max=upper if upper >= 1 else None,
    )


def population_feasible_region(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int
) -> FeasibleRegion:
    """Feasible region for the kappa1 of ACS (n1) against SRS (m) on this frame."""
    return feasible_region(frame.N, exact_terms(frame, partition, n1, m, "kappa1").kappa1)


def superiority_predicates(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int
) -> SuperiorityPredicates:
    """Evaluate the four equivalent forms of "ACS beats SRS" exactly.

    - ratio_below_one: Var(ACS)/Var(SRS) < 1
    - network_inequality: (1/n1 - 1/m) sigma^2 < (N - n1)/(n1 N) * within_ss/(N - 1)
    - variance_inequality: (1/m - 1/N) sigma^2 > Var(mu~)
    - linear_inequality: m < N (1 - kappa1)
    """
    N = frame.N
    terms = exact_terms(frame, partition, n1, m, "Superiority")

    return SuperiorityPredicates(
        ratio_below_one=terms.ratio < 1,
        network_inequality=(Fraction(1, n1) - Fraction(1, m)) * terms.sigma2
        < Fraction(N - n1, n1 * N) * terms.within_ss / (N - 1),
        variance_inequality=(Fraction(1, m) - Fraction(1, N)) * terms.sigma2 > terms.var_acs,
        linear_inequality=m < N * (1 - terms.kappa1),
    )


# ============================================================================
# Effort
# ============================================================================


def expected_final_effort(frame: GridFrame, partition: NetworkPartition, n1: int) -> float:
    """Expected number of distinct units visited by ACS with an SRS initial draw.

    Unit j is visited when the initial draw hits any of a_j units: its own
    network if j qualifies, otherwise j itself plus every qualifying network
    it borders. Summing P(hit) = 1 - C(N - a_j, n1) / C(N, n1) over j gives
    the expectation.
    """
    check_partition(frame, partition)
    N = frame.N
    _check_sizes(N, n1)
    counts = frame.counts
    condition = partition.condition

    reach: Counter[int] = Counter()
    for j in range(N):
        if counts[j] > condition:
            reach[partition.network_of(j).m_k] += 1
            continue
        bordering = {
            partition.unit_to_network[nb]
            for nb in neighbors(frame, j, partition.neighborhood)
            if counts[nb] > condition
        }
        reach[1 + sum(partition.networks[k].m_k for k in bordering)] += 1

    draws = math.comb(N, n1)
    expected = sum(
        (times * Fraction(draws - math.comb(N - a, n1), draws) for a, times in reach.items()),
        Fraction(0),
    )
    return float(expected)


# ============================================================================
# Report
# ============================================================================


def analyze_efficiency(
    frame: GridFrame, partition: NetworkPartition, n1: int, m: int
) -> EfficiencyReport:
    """Bundle every population-level efficiency quantity for (n1, m)."""
    N = _population_size(frame, partition, None)
    _check_sizes(N, n1, m)
    decomposition = decompose_sum_of_squares(frame, partition)
    if decomposition.total_ss == 0.0:
        raise DegeneratePopulationError(
            f"Population has no variation ({frame.width}x{frame.height}, total {frame.total})"
        )

    terms = exact_terms(frame, partition, n1, m)
    ratio = ratio_as_float(terms.ratio)
    check = check_superiority(frame, partition, n1, m)
    predicates = superiority_predicates(frame, partition, n1, m)
    if not predicates.agree or predicates.ratio_below_one != (ratio < 1.0):
        raise InternalConsistencyError(
            f"Superiority forms disagree for n1={n1}, m={m}: {predicates.model_dump()}"
        )

    sigma2 = decomposition.sigma2
    report = EfficiencyReport(
        N=N,
        n1=n1,
        m=m,
        condition=partition.condition,
        neighborhood=partition.neighborhood,
        decomposition=decomposition,
        variance_ratio=ratio,
        var_mu_tilde=var_mu_tilde(frame, partition, n1),
        var_ybar_m=sigma2 / m,
        var_ybar_m_fpc=(1.0 / m - 1.0 / N) * sigma2,
        kappa=float(terms.kappa1 / m),
        kappa1=float(terms.kappa1),
        feasible_m_bound=feasible_region(N, terms.kappa1).m_bound,
        superiority_lhs=check.lhs,
        superiority_rhs=check.rhs,
        acs_superior=predicates.ratio_below_one,
        predicates=predicates,
        expected_final_effort=expected_final_effort(frame, partition, n1),
    )
    logger.info(
        f"Efficiency N={N} n1={n1} m={m} C={partition.condition}: "
        f"ratio {ratio:.4f}, kappa1 {float(terms.kappa1):.4f}"
    )
    return report
