"""Population manager for chuk-mcp-acs.

Keeps generated populations in chuk-artifacts. Each population is a workspace
namespace holding /population.json (and /points.json for cluster populations).
"""

import logging
from collections import OrderedDict
from typing import Optional, TypeVar

from chuk_artifacts import ArtifactStore, NamespaceType, StorageScope

from .config import Config
from .models import ClusterPoints, GridFrame

logger = logging.getLogger(__name__)

POPULATION_PATH = "/population.json"
POINTS_PATH = "/points.json"

T = TypeVar("T")


class PopulationManager:
    """Stores populations with chuk-artifacts and an in-memory cache."""

    def __init__(self, store: Optional[ArtifactStore] = None, cache_size: Optional[int] = None):
        """Initialize population manager.

        Args:
            store: ArtifactStore instance. If None, creates one with configured providers.
            cache_size: Populations kept in memory (default from ACS_POPULATION_CACHE_SIZE).
                The least recently used ones are dropped and reload from storage.
        """
        if store is None:
            storage_provider = Config.get_storage_provider()
            session_provider = Config.get_session_provider()
            logger.info(
                f"Initializing ArtifactStore with storage_provider={storage_provider}, "
                f"session_provider={session_provider}"
            )
            self._store = ArtifactStore(
                storage_provider=storage_provider,
                session_provider=session_provider,
            )
        else:
            self._store = store

        self._cache_size = cache_size or Config.get_population_cache_size()
        self._populations: OrderedDict[str, GridFrame] = OrderedDict()
        self._points: OrderedDict[str, ClusterPoints] = OrderedDict()
        self._population_to_namespace: dict[str, str] = {}

    async def save_population(
        self,
        population_id: str,
        frame: GridFrame,
        points: Optional[ClusterPoints] = None,
        scope: StorageScope = StorageScope.SESSION,
        user_id: Optional[str] = None,
    ) -> GridFrame:
        """Store a new population in its own workspace namespace.

        Args:
            population_id: Unique population identifier
            frame: The population
            points: Simulated points behind a cluster population
            scope: Storage scope (SESSION, USER, or SANDBOX)
            user_id: User ID (required for USER scope)

        Returns:
            The stored GridFrame
        """
        namespace = await self._store.create_namespace(
            type=NamespaceType.WORKSPACE,
            name=population_id,
            scope=scope,
            user_id=user_id,
        )
        namespace_id = namespace.namespace_id

        payload = frame.model_dump_json(indent=2).encode("utf-8")
        await self._store.write_namespace(namespace_id, path=POPULATION_PATH, data=payload)
        if points is not None:
            await self._store.write_namespace(
                namespace_id, path=POINTS_PATH, data=points.model_dump_json().encode("utf-8")
            )
            self._remember(self._points, population_id, points)

        self._remember(self._populations, population_id, frame)
        self._population_to_namespace[population_id] = namespace_id
        logger.info(f"Population stored: {population_id} -> namespace {namespace_id}")
        return frame

    def _remember(self, cache: "OrderedDict[str, T]", population_id: str, value: T) -> None:
        cache[population_id] = value
        cache.move_to_end(population_id)
        while len(cache) > self._cache_size:
            dropped, _ = cache.popitem(last=False)
            logger.debug(f"Dropped population {dropped} from the in-memory cache")

    def evict(self, population_id: str) -> None:
        """Drop a population from memory. It stays in storage and reloads on demand."""
        self._namespace_of(population_id)
        self._populations.pop(population_id, None)
        self._points.pop(population_id, None)

    def _namespace_of(self, population_id: str) -> str:
        if population_id not in self._population_to_namespace:
            raise ValueError(f"Population not found: {population_id}")
        return self._population_to_namespace[population_id]

    async def get_population(self, population_id: str) -> GridFrame:
        """Get a population by ID.

        Raises:
            ValueError: If the population is not found
        """
        if population_id in self._populations:
            self._populations.move_to_end(population_id)
            return self._populations[population_id]

        namespace_id = self._namespace_of(population_id)
        data = await self._store.read_namespace(namespace_id, path=POPULATION_PATH)
        frame = GridFrame.model_validate_json(data.decode("utf-8"))
        self._remember(self._populations, population_id, frame)
        logger.debug(f"Loaded population {population_id} from namespace {namespace_id}")
        return frame

    async def get_points(self, population_id: str) -> Optional[ClusterPoints]:
        """Simulated points of a cluster population, or None for count fields."""
        namespace_id = self._namespace_of(population_id)
        if population_id in self._points:
            self._points.move_to_end(population_id)
            return self._points[population_id]
        frame = await self.get_population(population_id)
        if frame.spec is None or frame.spec.kind != "cluster":
            return None
        data = await self._store.read_namespace(namespace_id, path=POINTS_PATH)
        points = ClusterPoints.model_validate_json(data.decode("utf-8"))
        self._remember(self._points, population_id, points)
        return points

    async def get_population_vfs(self, population_id: str):
        """Get VFS access for the population's workspace."""
        return self._store.get_namespace_vfs(self._namespace_of(population_id))

    async def close(self) -> None:
        """Close the manager and underlying store."""
        if self._store:
            await self._store.close()
