"""Sampling designs: SRS, adaptive cluster sampling and cluster sampling.

Networks are grown over rook (4) or queen (8) adjacency with the strict
condition count > C. Frame edges truncate neighbourhoods; there is no
wraparound.
"""

import logging
from collections import deque
from typing import Iterable, Optional, Union

import numpy as np
from scipy import ndimage

from .errors import PartitionMismatchError, SampleSizeError
from .models import (
    AcsSample,
    ClusterPartitionSpec,
    ClusterSample,
    GridFrame,
    Network,
    NetworkExpansion,
    NetworkPartition,
    RngSeed,
    SrsSample,
)

logger = logging.getLogger(__name__)

SeedLike = Union[RngSeed, np.random.Generator]

ROOK_OFFSETS = ((1, 0), (-1, 0), (0, 1), (0, -1))
QUEEN_OFFSETS = ROOK_OFFSETS + ((1, 1), (1, -1), (-1, 1), (-1, -1))


def _generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return seed.generator()


def _offsets(neighborhood: int) -> tuple[tuple[int, int], ...]:
    if neighborhood == 4:
        return ROOK_OFFSETS
    if neighborhood == 8:
        return QUEEN_OFFSETS
    raise ValueError(f"Neighborhood must be 4 or 8, got {neighborhood}")


def neighbors(frame: GridFrame, index: int, neighborhood: int = 4) -> list[int]:
    """In-frame neighbour indices of a cell."""
    x, y = frame.cell(index)
    result = []
    for dx, dy in _offsets(neighborhood):
        nx, ny = x + dx, y + dy
        if 0 <= nx < frame.width and 0 <= ny < frame.height:
            result.append(ny * frame.width + nx)
    return result


def _check_index(frame: GridFrame, index: int) -> None:
    if not 0 <= index < frame.N:
        raise IndexError(f"Unit index {index} outside frame of {frame.N} units")


# ============================================================================
# Simple random sampling
# ============================================================================


def draw_srs(frame: GridFrame, m: int, seed: SeedLike) -> SrsSample:
    """Draw m distinct units uniformly without replacement, in draw order."""
    if m < 1:
        raise SampleSizeError(f"Sample size must be at least 1, got {m}")
    if m > frame.N:
        raise SampleSizeError(f"Sample size {m} exceeds population size {frame.N}")

    rng = _generator(seed)
    indices = [int(i) for i in rng.choice(frame.N, size=m, replace=False)]
    return SrsSample(
        unit_indices=tuple(indices),
        y_values=tuple(frame.counts[i] for i in indices),
    )


# ============================================================================
# Networks
# ============================================================================


def _edge_units(
    frame: GridFrame, members: Iterable[int], condition: float, neighborhood: int
) -> set[int]:
    counts = frame.counts
    return {
        nb
        for unit in members
        for nb in neighbors(frame, unit, neighborhood)
        if counts[nb] <= condition
    }


def expand_network(
    frame: GridFrame, start_index: int, condition: float = 0.0, neighborhood: int = 4
) -> NetworkExpansion:
    """Flood-fill the network of start_index and collect its edge units.

    A start unit with count <= condition is a singleton network with no edge
    units. Otherwise every unit reachable through units with count > condition
    joins the network, and non-qualifying neighbours become edge units.
    """
    _check_index(frame, start_index)
    counts = frame.counts
    if counts[start_index] <= condition:
        return NetworkExpansion(
            network=Network(unit_indices=(start_index,), y_total=counts[start_index])
        )

    members = {start_index}
    edges: set[int] = set()
    queue = deque([start_index])
    while queue:
        unit = queue.popleft()
        for nb in neighbors(frame, unit, neighborhood):
            if counts[nb] > condition:
                if nb not in members:
                    members.add(nb)
                    queue.append(nb)
            else:
                edges.add(nb)

    ordered = tuple(sorted(members))
    return NetworkExpansion(
        network=Network(unit_indices=ordered, y_total=sum(counts[i] for i in ordered)),
        edge_units=tuple(sorted(edges)),
    )


def partition_into_networks(
    frame: GridFrame, condition: float = 0.0, neighborhood: int = 4
) -> NetworkPartition:
    """Partition every unit into networks.

    Qualifying units (count > condition) form connected components; all other
    units are singletons. Networks are numbered by their smallest unit index.
    """
    connectivity = 1 if _offsets(neighborhood) is ROOK_OFFSETS else 2
    structure = ndimage.generate_binary_structure(2, connectivity)
    labels, _ = ndimage.label(frame.to_array() > condition, structure=structure)

    component_ids: dict[int, int] = {}
    groups: list[list[int]] = []
    unit_to_network: list[int] = []
    for index, label in enumerate(labels.ravel().tolist()):
        if label == 0:
            k = len(groups)
            groups.append([index])
        else:
            k = component_ids.setdefault(label, len(groups))
            if k == len(groups):
                groups.append([])
            groups[k].append(index)
        unit_to_network.append(k)

    counts = frame.counts
    networks = tuple(
        Network(unit_indices=tuple(group), y_total=sum(counts[i] for i in group))
        for group in groups
    )
    logger.debug(f"Partitioned {frame.N} units into {len(networks)} networks (C={condition})")
    return NetworkPartition(
        condition=condition,
        neighborhood=neighborhood,
        networks=networks,
        unit_to_network=tuple(unit_to_network),
    )


def check_partition(frame: GridFrame, partition: NetworkPartition) -> None:
    """Raise PartitionMismatchError unless the partition describes this frame."""
    if partition.N != frame.N:
        raise PartitionMismatchError(
            f"Partition covers {partition.N} units but the frame has {frame.N}"
        )
    counts = frame.counts
    for k, network in enumerate(partition.networks):
        if network.y_total != sum(counts[i] for i in network.unit_indices):
            raise PartitionMismatchError(
                f"Network {k} total {network.y_total} does not match the frame counts"
            )


# ============================================================================
# Adaptive cluster sampling
# ============================================================================


def build_acs_sample(
    frame: GridFrame,
    initial_indices: Iterable[int],
    condition: float = 0.0,
    neighborhood: int = 4,
    partition: Optional[NetworkPartition] = None,
) -> AcsSample:
    """Expand every initial unit into its network.

    With a partition for the same (frame, condition, neighborhood) the networks
    are looked up instead of flood-filled; both give identical samples.
    """
    initial = tuple(int(i) for i in initial_indices)
    if partition is not None:
        if partition.N != frame.N:
            raise PartitionMismatchError(
                f"Partition covers {partition.N} units but the frame has {frame.N}"
            )
        if partition.condition != condition or partition.neighborhood != neighborhood:
            raise PartitionMismatchError(
                f"Partition built for C={partition.condition}, "
                f"neighborhood={partition.neighborhood}; "
                f"sample requested C={condition}, neighborhood={neighborhood}"
            )

    counts = frame.counts
    expansions: dict[int, NetworkExpansion] = {}
    networks: list[Network] = []
    edge_units: list[tuple[int, ...]] = []
    for unit in initial:
        _check_index(frame, unit)
        if partition is None:
            expansion = expand_network(frame, unit, condition, neighborhood)
        else:
            label = partition.unit_to_network[unit]
            expansion = expansions.get(label)
            if expansion is None:
                network = partition.networks[label]
                edges: set[int] = set()
                if counts[unit] > condition:
                    edges = _edge_units(frame, network.unit_indices, condition, neighborhood)
                expansion = NetworkExpansion(network=network, edge_units=tuple(sorted(edges)))
                expansions[label] = expansion
        networks.append(expansion.network)
        edge_units.append(expansion.edge_units)

    return AcsSample(
        initial_indices=initial,
        networks=tuple(networks),
        edge_units=tuple(edge_units),
        edge_values=tuple(tuple(counts[i] for i in edges) for edges in edge_units),
        condition=condition,
        neighborhood=neighborhood,
    )


def draw_acs(
    frame: GridFrame,
    n1: int,
    condition: float,
    seed: SeedLike,
    neighborhood: int = 4,
    partition: Optional[NetworkPartition] = None,
) -> AcsSample:
    """Draw an initial SRS of n1 units and expand each into its network."""
    initial = draw_srs(frame, n1, seed)
    sample = build_acs_sample(
        frame, initial.unit_indices, condition, neighborhood=neighborhood, partition=partition
    )
    logger.debug(f"ACS draw n1={n1}, C={condition}: final effort {sample.final_effort}")
    return sample


# ============================================================================
# Traditional cluster sampling
# ============================================================================


def block_cluster_partition(
    width: int, height: int, block_width: int, block_height: int, n_cl: int
) -> ClusterPartitionSpec:
    """Rectangular block clusters, numbered row-major; edge blocks may be smaller."""
    if min(width, height, block_width, block_height) < 1:
        raise ValueError(
            f"Frame {width}x{height} and block {block_width}x{block_height} must be positive"
        )
    blocks_per_row = -(-width // block_width)
    assignment = tuple(
        (y // block_height) * blocks_per_row + x // block_width
        for y in range(height)
        for x in range(width)
    )
    return ClusterPartitionSpec(cluster_assignment=assignment, n_cl=n_cl)


def draw_cluster_sample(
    frame: GridFrame, spec: ClusterPartitionSpec, seed: SeedLike
) -> ClusterSample:
    """Select n_cl whole clusters by SRS without replacement over cluster ids."""
    if spec.M_0 != frame.N:
        raise PartitionMismatchError(
            f"Cluster assignment covers {spec.M_0} units but the frame has {frame.N}"
        )
    members = spec.members()
    ids = list(members)
    if spec.n_cl > len(ids):
        raise SampleSizeError(f"Cannot sample {spec.n_cl} clusters from {len(ids)}")

    rng = _generator(seed)
    chosen = [ids[int(i)] for i in rng.choice(len(ids), size=spec.n_cl, replace=False)]
    counts = frame.counts
    return ClusterSample(
        cluster_ids=tuple(chosen),
        unit_indices=tuple(members[cid] for cid in chosen),
        y_values=tuple(tuple(counts[i] for i in members[cid]) for cid in chosen),
        M_0=spec.M_0,
        N_cl=len(ids),
    )
