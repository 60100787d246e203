"""Configuration for chuk-mcp-acs.

Handles environment variables and default settings.
"""

import os
from pathlib import Path


class Config:
    """Configuration for the ACS simulation toolkit and MCP server."""

    DEFAULT_OUTPUT_DIR = "acs-output"
    DEFAULT_MAX_THREADS = 4
    DEFAULT_POPULATION_CACHE_SIZE = 64

    @staticmethod
    def get_output_dir() -> Path:
        """Get the directory result files are written to.

        Environment variables checked:
        1. ACS_OUTPUT_DIR - Output directory

        Returns:
            Output directory path (defaults to ./acs-output)
        """
        return Path(os.getenv("ACS_OUTPUT_DIR") or Config.DEFAULT_OUTPUT_DIR)

    @staticmethod
    def get_thread_count() -> int:
        """Get the number of worker threads used for Monte Carlo replicates.

        Returns:
            Thread count from ACS_THREADS, or min(4, cpu count). Invalid or
            non-positive values fall back to the default.
        """
        default = min(Config.DEFAULT_MAX_THREADS, os.cpu_count() or 1)
        try:
            threads = int(os.getenv("ACS_THREADS", str(default)))
        except ValueError:
            return default
        return threads if threads > 0 else default

    @staticmethod
    def get_population_cache_size() -> int:
        """Get how many populations the manager keeps in memory.

        Returns:
            Cache size from ACS_POPULATION_CACHE_SIZE (default 64). Invalid or
            non-positive values fall back to the default. Populations dropped
            from the cache are reloaded from storage on the next access.
        """
        default = Config.DEFAULT_POPULATION_CACHE_SIZE
        try:
            size = int(os.getenv("ACS_POPULATION_CACHE_SIZE", str(default)))
        except ValueError:
            return default
        return size if size > 0 else default

    @staticmethod
    def get_log_level() -> str:
        """Get the default log level for the command line tool.

        Returns:
            Upper-case level name (default 'WARNING')
        """
        return os.getenv("ACS_LOG_LEVEL", "WARNING").upper()

    @staticmethod
    def get_storage_provider() -> str:
        """Get storage provider for chuk-artifacts.

        Returns:
            Storage provider type (default: 'vfs-filesystem')

        Provider types:
        - 'vfs-filesystem': VFS-based local filesystem storage (default)
        - 'vfs-memory': VFS-based in-memory storage (testing only)
        - 'vfs-s3': VFS-based S3 storage (requires AWS credentials)
        - 'vfs-sqlite': VFS-based SQLite storage

        Environment variable:
        - STORAGE_PROVIDER: Storage provider type
        """
        return os.getenv("STORAGE_PROVIDER", "vfs-filesystem")

    @staticmethod
    def get_session_provider() -> str:
        """Get session provider for chuk-sessions.

        Returns:
            Session provider type (default: 'memory')

        Environment variables:
        - SESSION_PROVIDER: Session provider type ('memory' or 'redis')
        - REDIS_URL: Redis connection URL (for redis provider)
        """
        return os.getenv("SESSION_PROVIDER", "memory")
