"""
Disk cache for fitted models so later commands can reuse them.
"""
from pathlib import Path
from typing import Any, Optional

import diskcache as dc
from loguru import logger
from pydantic import BaseModel, Field


class CacheConfig(BaseModel):
    """Cache location and limits."""

    enabled: bool = True
    directory: str = "./data/cache"
    max_size_mb: int = Field(default=2000, ge=1)
    ttl_hours: Optional[float] = Field(default=24 * 30, gt=0)


class FitCache:
    """Stores FitResult objects keyed by data, model and sampler digests."""

    def __init__(self, cache_dir: str = "./data/cache", max_size_mb: int = 2000, ttl_hours: Optional[float] = 720):
        """
        Initialize the fit cache.

        Args:
            cache_dir: Directory to store cache data
            max_size_mb: Maximum cache size in megabytes
            ttl_hours: Time-to-live for entries in hours (None keeps them)
        """
        self.cache_dir = Path(cache_dir)
        self.cache_dir.mkdir(parents=True, exist_ok=True)

        self.cache = dc.Cache(
            str(self.cache_dir),
            size_limit=max_size_mb * 1024 * 1024,
            eviction_policy='least-recently-used'
        )

        self.ttl_seconds = None if ttl_hours is None else ttl_hours * 3600
        logger.info(f"Fit cache at {cache_dir} (max {max_size_mb}MB)")

    @classmethod
    def from_config(cls, cfg: CacheConfig) -> Optional["FitCache"]:
        if not cfg.enabled:
            return None
        return cls(cfg.directory, cfg.max_size_mb, cfg.ttl_hours)

    def set(self, key: str, value: Any, ttl: Optional[float] = None) -> None:
        """
        Store a value; backend failures are logged, not raised.

        Args:
            key: Cache key
            value: Picklable value
            ttl: Time-to-live in seconds (uses default if None)
        """
        expire_time = ttl if ttl is not None else self.ttl_seconds
        try:
            self.cache.set(key, value, expire=expire_time)
            logger.debug(f"Cached key: {key}")
        except Exception as e:
            logger.error(f"Failed to cache key {key}: {e}")

    def get(self, key: str, default: Any = None) -> Any:
        """Cached value, or ``default`` on a miss or backend failure."""
        try:
            value = self.cache.get(key, default=default)
            logger.debug(f"Cache {'hit' if value is not None else 'miss'}: {key}")
            return value
        except Exception as e:
            logger.error(f"Failed to retrieve key {key}: {e}")
            return default

    def get_fit(self, key: str):
        """FitResult stored under ``key`` or None."""
        return self.get(key)

    def set_fit(self, key: str, result) -> None:
        self.set(key, result)

    def close(self) -> None:
        self.cache.close()

    def __enter__(self) -> "FitCache":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
