"""Visibility-gated archival store.

Each post is a key-value record carrying its owner token and a precomputed
toggle schedule.  Reads are gated on the schedule: the owner always gets a
non-deleted post back, everyone else only during up phases.  Hidden, deleted
and nonexistent posts are indistinguishable to non-owners (a uniform null);
a distinguishable "gone" answer would hand the adversary exactly the signal
the mechanism exists to remove.

Persistence is an append-only JSON-lines log of {put, delete, extend}
events plus an optional snapshot; replaying the log rebuilds the identical
state because schedules are regenerated from per-post seeded streams and
extensions replay their recorded horizons.  Time comes from a single
monotonic internal clock; tests inject a manual clock.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ._rng import substream
from .distributions import DurationDistribution
from .schedule import (
    DEFAULT_HORIZON,
    PostRecord,
    Schedule,
    extend_schedule,
    generate_schedule,
    observable,
)


class UnauthorizedError(Exception):
    """Token mismatch (or any delete on an unknown/gone post)."""


class Clock:
    """Seconds since the store's epoch, monotone non-decreasing."""

    def now(self) -> int:
        raise NotImplementedError


class MonotonicClock(Clock):
    def __init__(self, start: int = 0):
        self._origin = time.monotonic()
        self._start = start

    def now(self) -> int:
        return self._start + int(time.monotonic() - self._origin)


class ManualClock(Clock):
    """Test clock advanced explicitly."""

    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def advance(self, seconds: int) -> None:
        self._now += seconds

    def set(self, t: int) -> None:
        if t < self._now:
            raise ValueError("clock cannot go backwards")
        self._now = t


@dataclass
class _Entry:
    record: PostRecord
    lock: threading.Lock
    horizons: list[int]  # requested horizons, replayed on recovery


class PostStore:
    """Authenticated put/get/delete over schedule-gated records."""

    def __init__(
        self,
        up: DurationDistribution,
        down: DurationDistribution,
        seed: int = 0,
        data_dir: str | Path | None = None,
        clock: Clock | None = None,
        horizon: int = DEFAULT_HORIZON,
    ):
        self._up = up
        self._down = down
        self._seed = seed
        self._horizon = horizon
        self._clock = clock if clock is not None else MonotonicClock()
        self._posts: dict[str, _Entry] = {}
        self._index_lock = threading.Lock()
        self._id_rng = substream(seed, "post-ids")
        self._id_lock = threading.Lock()
        self._log_path: Optional[Path] = None
        self._log_lock = threading.Lock()
        self._log_fh = None
        if data_dir is not None:
            data_dir = Path(data_dir)
            data_dir.mkdir(parents=True, exist_ok=True)
            self._log_path = data_dir / "store.log"
            self._replay()
            self._log_fh = open(self._log_path, "a", encoding="utf-8")

    # -- identifiers --------------------------------------------------------
    def _new_post_id(self) -> str:
        with self._id_lock:
            while True:
                post_id = self._id_rng.bytes(16).hex()
                with self._index_lock:
                    if post_id not in self._posts:
                        return post_id

    # -- persistence --------------------------------------------------------
    def _append_log(self, event: dict) -> None:
        if self._log_fh is None:
            return
        with self._log_lock:
            self._log_fh.write(json.dumps(event, separators=(",", ":")) + "\n")
            self._log_fh.flush()

    def _replay(self) -> None:
        if self._log_path is None or not self._log_path.exists():
            return
        max_t = 0
        with open(self._log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                max_t = max(max_t, int(event["t"]))
                if event["op"] == "put":
                    self._install(
                        event["post_id"],
                        event["token"],
                        event["content"],
                        int(event["t"]),
                        int(event["horizon"]),
                    )
                elif event["op"] == "delete":
                    entry = self._posts[event["post_id"]]
                    entry.record.mark_deleted(int(event["t"]))
                    entry.record.content = None
                elif event["op"] == "extend":
                    entry = self._posts[event["post_id"]]
                    horizon = int(event["horizon"])
                    entry.record.schedule = extend_schedule(
                        entry.record.schedule, self._up, self._down, horizon
                    )
                    entry.horizons.append(horizon)
                elif event["op"] == "tombstone":
                    self._install_tombstone(event["post_id"], int(event["t"]))
                # "clock" events only advance max_t
        # restarted clocks resume past every logged event
        if isinstance(self._clock, MonotonicClock):
            self._clock = MonotonicClock(start=max_t + 1)

    def _install(
        self, post_id: str, token: str, content: str, t: int, horizon: int
    ) -> PostRecord:
        schedule = generate_schedule(
            self._up,
            self._down,
            t0=t,
            horizon=horizon,
            rng=substream(self._seed, "schedule", post_id),
        )
        record = PostRecord(
            post_id=post_id, owner_token=token, content=content, schedule=schedule
        )
        with self._index_lock:
            self._posts[post_id] = _Entry(
                record=record, lock=threading.Lock(), horizons=[horizon]
            )
        return record

    def _install_tombstone(self, post_id: str, deleted_at: int) -> None:
        """Recreate a deleted post from a compacted log: id + time, no content."""
        placeholder = Schedule(
            created_at=max(deleted_at - 1, 0),
            toggles=np.empty(0, dtype=np.int64),
            covered_until=max(deleted_at - 1, 0),
            stream_state=substream(self._seed, "schedule", post_id).bit_generator.state,
        )
        record = PostRecord(
            post_id=post_id,
            owner_token="",
            content=None,
            schedule=placeholder,
            deleted_at=deleted_at,
        )
        with self._index_lock:
            self._posts[post_id] = _Entry(
                record=record, lock=threading.Lock(), horizons=[]
            )

    # -- public API ---------------------------------------------------------
    def put(self, content: str, owner_token: str) -> str:
        """Store a post; it is immediately visible (initial up phase)."""
        if not content or not owner_token:
            raise ValueError("content and owner token must be non-empty")
        post_id = self._new_post_id()
        now = self._clock.now()
        self._install(post_id, owner_token, content, now, self._horizon)
        self._append_log(
            {
                "op": "put",
                "post_id": post_id,
                "token": owner_token,
                "content": content,
                "t": now,
                "horizon": self._horizon,
            }
        )
        return post_id

    def get(self, post_id: str, requester_token: str = "") -> Optional[str]:
        """Content, or None - uniformly for hidden, deleted and unknown posts."""
        with self._index_lock:
            entry = self._posts.get(post_id)
        if entry is None:
            return None
        with entry.lock:
            record = entry.record
            if record.deleted_at is not None:
                return None
            if requester_token == record.owner_token:
                return record.content
            now = self._clock.now()
            self._ensure_coverage_locked(entry, now)
            return record.content if observable(record, now) else None

    def delete(self, post_id: str, owner_token: str) -> None:
        """Erase content and force the post down forever; owner only."""
        with self._index_lock:
            entry = self._posts.get(post_id)
        now = self._clock.now()
        if entry is None:
            raise UnauthorizedError(post_id)
        with entry.lock:
            record = entry.record
            if record.deleted_at is not None or owner_token != record.owner_token:
                # deleted-again and wrong-token deletes are indistinguishable
                raise UnauthorizedError(post_id)
            effective = max(now, record.created_at + 1)
            record.mark_deleted(effective)
            record.content = None
        self._append_log({"op": "delete", "post_id": post_id, "t": effective})

    def update_ts(self, post_ids) -> int:
        """Extend coverage of live posts to now + horizon; returns count extended."""
        extended = 0
        now = self._clock.now()
        for post_id in post_ids:
            with self._index_lock:
                entry = self._posts.get(post_id)
            if entry is None:
                continue
            with entry.lock:
                if entry.record.deleted_at is not None:
                    continue
                if self._ensure_coverage_locked(entry, now):
                    extended += 1
        return extended

    def run_updater_pass(self) -> int:
        """One lazy-update sweep, soonest coverage expiry first."""
        with self._index_lock:
            expiries = [
                (entry.record.schedule.covered_until, post_id)
                for post_id, entry in self._posts.items()
                if entry.record.deleted_at is None
            ]
        return self.update_ts([post_id for _, post_id in sorted(expiries)])

    def _ensure_coverage_locked(self, entry: _Entry, now: int) -> bool:
        """Extend the schedule if coverage ends within one horizon of now."""
        record = entry.record
        target = now + self._horizon
        if record.schedule.covered_until >= target:
            return False
        new_horizon = target - record.created_at
        record.schedule = extend_schedule(
            record.schedule, self._up, self._down, new_horizon
        )
        entry.horizons.append(new_horizon)
        self._append_log(
            {"op": "extend", "post_id": record.post_id, "t": now, "horizon": new_horizon}
        )
        return True

    def compact(self) -> None:
        """Snapshot the log: live posts in full, deleted posts as bare
        tombstones, so erased content leaves the disk as well."""
        if self._log_path is None:
            return
        with self._index_lock:
            entries = list(self._posts.items())
        events: list[dict] = []
        for post_id, entry in entries:
            with entry.lock:
                record = entry.record
                if record.deleted_at is not None:
                    events.append(
                        {"op": "tombstone", "post_id": post_id, "t": record.deleted_at}
                    )
                    continue
                events.append(
                    {
                        "op": "put",
                        "post_id": post_id,
                        "token": record.owner_token,
                        "content": record.content,
                        "t": record.created_at,
                        "horizon": entry.horizons[0],
                    }
                )
                for horizon in entry.horizons[1:]:
                    events.append(
                        {
                            "op": "extend",
                            "post_id": post_id,
                            "t": record.created_at,
                            "horizon": horizon,
                        }
                    )
        events.append({"op": "clock", "t": self._clock.now()})
        with self._log_lock:
            tmp = self._log_path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as fh:
                for event in events:
                    fh.write(json.dumps(event, separators=(",", ":")) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            if self._log_fh is not None:
                self._log_fh.close()
            tmp.replace(self._log_path)
            self._log_fh = open(self._log_path, "a", encoding="utf-8")

    # -- introspection used by tests and the updater -------------------------
    def post_count(self) -> int:
        with self._index_lock:
            return len(self._posts)

    def record(self, post_id: str) -> PostRecord:
        """Internal/test access to the raw record (never exposed on the wire)."""
        with self._index_lock:
            return self._posts[post_id].record

    def close(self) -> None:
        if self._log_fh is not None:
            self._log_fh.close()
            self._log_fh = None
