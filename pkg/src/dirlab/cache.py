"""Disk cache for expensive scan results.

One JSON file per entry, filename = canonical key. Keys round every
numeric parameter to 12 significant digits, so a perturbation in the 13th
digit hits the same entry. Values must be JSON-typed (numbers, strings,
lists, dicts); json round-trips Python floats exactly, which is what makes
warm reruns byte-identical downstream.
"""

import hashlib
import json
import os
import tempfile
import time
import warnings
from typing import Any, Optional

from .errors import ConfigurationError

__all__ = ["canonical_key", "ScanCache"]


def _canon_number(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return "%d" % x
    return "%.12g" % float(x)


def _canon_value(v) -> str:
    if v is None:
        return "none"
    if isinstance(v, str):
        return v
    if isinstance(v, (list, tuple)):
        return "[" + ",".join(_canon_value(x) for x in v) + "]"
    if isinstance(v, (int, float)):
        return _canon_number(v)
    raise ConfigurationError(f"unsupported cache key element {v!r}")


def canonical_key(series_label: str, operation: str, params: dict) -> str:
    """Stable hash of (series, operation, rounded numeric parameters)."""
    parts = [series_label, operation]
    for name in sorted(params):
        parts.append(f"{name}={_canon_value(params[name])}")
    raw = "|".join(parts)
    return hashlib.sha256(raw.encode("utf-8")).hexdigest()


class ScanCache:
    """File-per-entry JSON cache rooted at cache_dir.

    DIRLAB_CACHE overrides the constructor argument. A directory of None
    (and no env var) disables caching entirely.
    """

    def __init__(self, cache_dir: Optional[str] = None):
        env = os.environ.get("DIRLAB_CACHE")
        self.cache_dir = env if env else cache_dir
        if self.cache_dir:
            os.makedirs(self.cache_dir, exist_ok=True)

    @property
    def enabled(self) -> bool:
        return bool(self.cache_dir)

    def _path(self, key: str) -> str:
        return os.path.join(self.cache_dir, key + ".json")

    def lookup(self, key: str) -> Optional[Any]:
        if not self.enabled:
            return None
        path = self._path(key)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                entry = json.load(fh)
        except FileNotFoundError:
            return None
        except (OSError, ValueError) as exc:
            warnings.warn(f"cache entry {path} unreadable ({exc}); bypassing")
            return None
        if not isinstance(entry, dict) or entry.get("key") != key:
            warnings.warn(f"cache entry {path} corrupt; bypassing")
            return None
        return entry.get("value")

    def store(self, key: str, value: Any) -> None:
        if not self.enabled:
            return
        entry = {"key": key, "created_at": time.time(), "value": value}
        payload = json.dumps(entry)
        fd, tmp = tempfile.mkstemp(dir=self.cache_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp, self._path(key))
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    def get_or_compute(self, key: Optional[str], compute):
        """lookup, else compute() and store. key=None bypasses the cache."""
        if key is None or not self.enabled:
            return compute()
        hit = self.lookup(key)
        if hit is not None:
            return hit
        value = compute()
        self.store(key, value)
        return value
