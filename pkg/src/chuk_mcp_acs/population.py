"""Synthetic spatial populations.

Two families of populations are generated here:

- cluster fields: bivariate-normal clusters of points around uniformly placed
  centres, binned to unit cells of the frame
- count fields: cell counts drawn to hit a target mean and variance-to-mean
  ratio (VMR), either independently per cell or as a binned Neyman-Scott
  (Thomas) process that is spatially aggregated with the same mean and VMR

All generators are pure functions of (spec, seed).
"""

import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
from scipy import stats

from .errors import SpecificationError, UndefinedVMRError
from .models import (
    ClusterPoints,
    ClusterSpec,
    CountFieldSpec,
    DispersionSpec,
    DistributionFamily,
    FieldLayout,
    GridFrame,
    RngSeed,
)

logger = logging.getLogger(__name__)

SeedLike = Union[RngSeed, np.random.Generator]
PointsLike = Union[ClusterPoints, Sequence[tuple[float, float]], np.ndarray]

# Spreads of the clustering gradient, tight to diffuse
DEFAULT_SPREADS: tuple[float, ...] = (2 / 3, 1.0, 1.5, 2.0, 3.0)

# Parents are placed this many offspring SDs beyond the frame
THOMAS_PADDING_SDS = 4.0


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return seed.generator()


def _recorded_seed(seed: SeedLike) -> Optional[RngSeed]:
    return seed if isinstance(seed, RngSeed) else None


# ============================================================================
# Cluster fields
# ============================================================================


def draw_centers(spec: ClusterSpec, seed: SeedLike) -> np.ndarray:
    """Draw cluster centres uniformly on [1, width - 1] x [1, height - 1].

    Returns:
        (n_centers, 2) array of (x, y) centres
    """
    rng = _generator(seed)
    xs = rng.uniform(1.0, spec.width - 1.0, size=spec.n_centers)
    ys = rng.uniform(1.0, spec.height - 1.0, size=spec.n_centers)
    return np.column_stack([xs, ys])


def generate_cluster_points(
    spec: ClusterSpec,
    seed: SeedLike,
    centers: Optional[Sequence[tuple[float, float]]] = None,
) -> ClusterPoints:
    """Generate points_per_center isotropic normal points around every centre.

    Points that fall outside the frame are kept and flagged; binning drops them.

    Args:
        spec: Cluster specification
        seed: RngSeed (or an already positioned numpy Generator)
        centers: Optional explicit centres; drawn from the seed when omitted

    Returns:
        ClusterPoints with one label and one in-frame flag per point
    """
    rng = _generator(seed)
    if centers is None:
        center_array = draw_centers(spec, rng)
    else:
        center_array = np.asarray(centers, dtype=float).reshape(-1, 2)
        if len(center_array) != spec.n_centers:
            raise SpecificationError(
                f"Expected {spec.n_centers} centers, got {len(center_array)}"
            )

    labels = np.repeat(np.arange(spec.n_centers), spec.points_per_center)
    offsets = rng.standard_normal((len(labels), 2)) * spec.spread_sd
    points = center_array[labels] + offsets
    x, y = points[:, 0], points[:, 1]
    in_frame = (x >= 0.0) & (x < spec.width) & (y >= 0.0) & (y < spec.height)

    return ClusterPoints(
        width=spec.width,
        height=spec.height,
        centers=tuple((float(cx), float(cy)) for cx, cy in center_array),
        points=tuple((float(px), float(py)) for px, py in points),
        labels=tuple(int(label) for label in labels),
        in_frame=tuple(bool(flag) for flag in in_frame),
    )


def bin_points_to_frame(points: PointsLike, width: int, height: int) -> GridFrame:
    """Count points per unit cell; cell (i, j) holds i <= x < i + 1, j <= y < j + 1.

    Points outside [0, width) x [0, height) are not counted.
    """
    if width < 1 or height < 1:
        raise SpecificationError(f"Frame dimensions must be positive, got {width}x{height}")

    coords = points.points if isinstance(points, ClusterPoints) else points
    xy = np.asarray(coords, dtype=float).reshape(-1, 2)
    cells = np.floor(xy).astype(np.int64)
    inside = (
        (cells[:, 0] >= 0) & (cells[:, 0] < width) & (cells[:, 1] >= 0) & (cells[:, 1] < height)
    )
    cells = cells[inside]
    flat = cells[:, 1] * width + cells[:, 0]
    counts = np.bincount(flat, minlength=width * height)
    return GridFrame(width=width, height=height, counts=tuple(counts.tolist()))


def generate_cluster_population(
    spec: ClusterSpec,
    seed: SeedLike,
    centers: Optional[Sequence[tuple[float, float]]] = None,
) -> tuple[GridFrame, ClusterPoints]:
    """Generate cluster points and bin them, recording spec and seed on the frame."""
    points = generate_cluster_points(spec, seed, centers=centers)
    binned = bin_points_to_frame(points, spec.width, spec.height)
    frame = binned.model_copy(update={"seed": _recorded_seed(seed), "spec": spec})
    logger.info(
        f"Generated cluster population sd={spec.spread_sd:.4g}: "
        f"{points.in_frame_count}/{len(points.points)} points in frame"
    )
    return frame, points


# ============================================================================
# Count fields
# ============================================================================


def dispersion_family_for(vmr: float) -> DistributionFamily:
    """Distribution family whose VMR range contains vmr."""
    if vmr < 0:
        raise SpecificationError(f"VMR must be nonnegative, got {vmr}")
    if vmr == 0:
        return DistributionFamily.UNIFORM_CONSTANT
    if vmr < 1:
        return DistributionFamily.BINOMIAL
    if vmr == 1:
        return DistributionFamily.POISSON
    return DistributionFamily.NEGATIVE_BINOMIAL


def thomas_cell_overlap(sigma: float) -> float:
    """Probability-mass overlap of two offspring displacements within one cell edge.

    For offspring displaced by N(0, sigma^2) per axis, the difference of two
    offspring of the same parent has SD s = sqrt(2) * sigma, and the integral
    of its density over [0, 1]^2 x [0, 1]^2 factors into this value squared.
    """
    s = math.sqrt(2.0) * sigma
    inside = 2.0 * stats.norm.cdf(1.0 / s) - 1.0
    return float(inside - 2.0 * s * stats.norm.pdf(0.0) * (1.0 - math.exp(-1.0 / (2.0 * s * s))))


def _thomas_field(
    mean: float, vmr: float, sigma: float, width: int, height: int, rng: np.random.Generator
) -> np.ndarray:
    if mean == 0.0:
        return np.zeros((height, width), dtype=np.int64)
    if vmr == 1.0:
        return rng.poisson(mean, size=(height, width))

    overlap = thomas_cell_overlap(sigma)
    offspring_mean = (vmr - 1.0) / (overlap * overlap)
    parent_intensity = mean / offspring_mean

    pad = THOMAS_PADDING_SDS * sigma
    span_x, span_y = width + 2 * pad, height + 2 * pad
    n_parents = rng.poisson(parent_intensity * span_x * span_y)
    parents = np.column_stack(
        [rng.uniform(-pad, width + pad, n_parents), rng.uniform(-pad, height + pad, n_parents)]
    )
    offspring = rng.poisson(offspring_mean, size=n_parents)
    origins = np.repeat(parents, offspring, axis=0)
    points = origins + rng.normal(0.0, sigma, size=origins.shape)
    logger.debug(
        f"Thomas field: {n_parents} parents, offspring mean {offspring_mean:.3f}, "
        f"{len(points)} points"
    )
    return bin_points_to_frame(points, width, height).to_array()


def generate_count_field(
    spec: DispersionSpec, width: int, height: int, seed: SeedLike
) -> GridFrame:
    """Generate a count field with the spec's mean and VMR.

    Independent layout draws every cell from the family:

    - uniform-constant: every cell equals target_mean
    - binomial: p = 1 - VMR, trials = mean / p
    - poisson: rate = mean
    - negative-binomial: p = 1 / VMR, shape r = mean * p / (1 - p)

    Clustered layout draws Poisson and negative-binomial fields as a binned
    Thomas process with the same stationary mean and VMR.
    """
    if width < 1 or height < 1:
        raise SpecificationError(f"Frame dimensions must be positive, got {width}x{height}")

    rng = _generator(seed)
    shape = (height, width)
    mean, vmr = spec.target_mean, spec.target_vmr
    family = spec.family

    if family == DistributionFamily.UNIFORM_CONSTANT:
        grid = np.full(shape, int(mean), dtype=np.int64)
    elif family == DistributionFamily.BINOMIAL:
        p = 1.0 - vmr
        trials = int(round(mean / p))
        grid = rng.binomial(trials, p, size=shape)
    elif spec.layout == FieldLayout.CLUSTERED:
        grid = _thomas_field(mean, vmr, spec.cluster_sd, width, height, rng)
    elif family == DistributionFamily.POISSON:
        grid = rng.poisson(mean, size=shape)
    else:
        p = 1.0 / vmr
        shape_r = mean * p / (1.0 - p)
        if shape_r <= 0.0:
            grid = np.zeros(shape, dtype=np.int64)
        else:
            grid = rng.negative_binomial(shape_r, p, size=shape)

    recorded = CountFieldSpec(
        **spec.model_dump(exclude={"kind", "width", "height"}), width=width, height=height
    )
    frame = GridFrame.from_array(grid, seed=_recorded_seed(seed), spec=recorded)
    logger.info(
        f"Generated {family.value} count field ({spec.layout.value}) {width}x{height}: "
        f"total {frame.total}"
    )
    return frame


def generate_population(
    spec: Union[ClusterSpec, CountFieldSpec],
    seed: SeedLike,
    centers: Optional[Sequence[tuple[float, float]]] = None,
) -> GridFrame:
    """Generate the frame described by either population spec."""
    if isinstance(spec, ClusterSpec):
        frame, _ = generate_cluster_population(spec, seed, centers=centers)
        return frame
    return generate_count_field(spec, spec.width, spec.height, seed)


# ============================================================================
# Dispersion
# ============================================================================


def variance_to_mean_ratio(frame: GridFrame) -> float:
    """Population variance of the cell counts (divisor N) over their mean."""
    if frame.total == 0:
        raise UndefinedVMRError(
            f"VMR is undefined for an all-zero {frame.width}x{frame.height} frame"
        )
    counts = frame.to_array().astype(float)
    return float(counts.var() / counts.mean())
