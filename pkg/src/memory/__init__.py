"""Fit caching."""
from .cache_manager import CacheConfig, FitCache

__all__ = ['CacheConfig', 'FitCache']
