"""
Benchmark output cleanup.
Removes suite output directories that have not been touched for a while.
"""
import logging
import os
import shutil
import time


def _tree_size(path: str) -> int:
    total = 0
    for root, _, files in os.walk(path):
        for name in files:
            try:
                total += os.path.getsize(os.path.join(root, name))
            except OSError:
                pass
    return total


def cleanup_old_outputs(output_dir: str, max_age_days: int = 14) -> dict:
    """
    Deletes suite directories under output_dir whose modification time is
    older than max_age_days.
    """
    if not os.path.isdir(output_dir):
        return {"status": "skip", "reason": f"Output directory does not exist: {output_dir}"}

    now = time.time()
    max_age_seconds = max_age_days * 86400
    deleted_count = 0
    deleted_bytes = 0

    for name in sorted(os.listdir(output_dir)):
        path = os.path.join(output_dir, name)
        if not os.path.isdir(path):
            continue

        age = now - os.stat(path).st_mtime
        if age > max_age_seconds:
            size = _tree_size(path)
            try:
                shutil.rmtree(path)
                deleted_count += 1
                deleted_bytes += size
                logging.info(f"Output cleanup: deleted {name} (age: {age / 86400:.1f} days)")
            except OSError as e:
                logging.warning(f"Output cleanup: failed to delete {name}: {e}")

    return {
        "status": "done",
        "deleted_count": deleted_count,
        "deleted_bytes": deleted_bytes,
    }
