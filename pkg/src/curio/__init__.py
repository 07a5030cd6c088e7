"""Curious-player detection simulator."""

from __future__ import annotations

import importlib.metadata


def tool_version() -> str:
    """Installed package version, or 0.0.0 when running from a checkout."""

    try:
        return importlib.metadata.version("curio")
    except importlib.metadata.PackageNotFoundError:  # pragma: no cover - local dev fallback
        return "0.0.0"
