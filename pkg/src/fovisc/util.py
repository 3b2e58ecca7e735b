"""Small shared helpers."""

from __future__ import annotations

import os

__all__ = ["worker_count"]


def worker_count(n_tasks: int) -> int:
    """Worker cap for embarrassingly parallel scans.

    FOVISC_THREADS limits the pool size; otherwise the CPU count does.
    """
    env = os.environ.get("FOVISC_THREADS", "").strip()
    if env:
        try:
            limit = int(env)
        except ValueError as exc:
            raise ValueError(f"FOVISC_THREADS must be an integer, got {env!r}") from exc
        if limit < 1:
            raise ValueError(f"FOVISC_THREADS must be >= 1, got {limit}")
    else:
        limit = os.cpu_count() or 1
    return max(1, min(int(n_tasks), limit))
