"""Tests for chuk-mcp-acs."""
