"""Pytest configuration."""

import pytest

from chuk_mcp_acs.models import GridFrame

pytest_plugins = ("pytest_asyncio",)


def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line(
        "markers", "integration: long Monte Carlo acceptance runs (pytest -m integration)"
    )


@pytest.fixture(autouse=True)
def memory_storage(monkeypatch):
    """Keep chuk-artifacts storage in memory during tests."""
    monkeypatch.setenv("STORAGE_PROVIDER", "vfs-memory")
    monkeypatch.setenv("SESSION_PROVIDER", "memory")


@pytest.fixture
def patch_frame() -> GridFrame:
    """5x5 frame with a plus-shaped patch of counts in the middle."""
    counts = [0] * 25
    for x, y, value in [(2, 2, 5), (1, 2, 2), (3, 2, 1), (2, 1, 3), (2, 3, 4)]:
        counts[y * 5 + x] = value
    return GridFrame(width=5, height=5, counts=tuple(counts))
