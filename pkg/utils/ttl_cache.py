import time
from threading import Lock
from typing import Any, Callable, Dict, Optional, Tuple


class TTLCache:
    """
    In-memory cache of oracle results keyed by instance digest, for
    single-process deployments. Entries expire after their TTL; the oldest
    entry is evicted when the cache is full.
    """

    def __init__(self, default_ttl_seconds: int = 3600, max_items: int = 128):
        self.default_ttl_seconds = default_ttl_seconds
        self.max_items = max_items
        self._store: Dict[str, Tuple[float, Any]] = {}
        self._lock = Lock()
        self.hits = 0
        self.misses = 0

    def get(self, key: str) -> Optional[Any]:
        now = time.time()
        with self._lock:
            payload = self._store.get(key)
            if payload is None or payload[0] <= now:
                self._store.pop(key, None)
                self.misses += 1
                return None
            self.hits += 1
            return payload[1]

    def set(self, key: str, value: Any, ttl_seconds: Optional[int] = None) -> None:
        ttl = ttl_seconds if ttl_seconds is not None else self.default_ttl_seconds
        with self._lock:
            if key not in self._store and len(self._store) >= self.max_items:
                oldest = min(self._store, key=lambda k: self._store[k][0])
                self._store.pop(oldest, None)
            self._store[key] = (time.time() + max(1, ttl), value)

    def get_or_compute(self, key: str, compute: Callable[[], Any]) -> Any:
        # Computation runs outside the lock; concurrent misses may compute twice.
        value = self.get(key)
        if value is None:
            value = compute()
            self.set(key, value)
        return value

    def clear(self) -> None:
        with self._lock:
            self._store.clear()
