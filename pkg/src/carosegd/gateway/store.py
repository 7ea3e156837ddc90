"""Directory-backed store of work items and result documents.

Every write goes to a temp file in the destination directory followed by an
atomic rename, so a crash between writes leaves at most the in-flight item
stale.  Items are plain JSON dicts; result documents are kept as the exact
bytes the pipeline serialized, so reads return them unmodified.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

from ..errors import StateError

ENV_STORE = "CAROSEGD_STORE"


def default_store_path() -> Path:
    return Path(os.environ.get(ENV_STORE, "./carosegd-store"))


def _atomic_write(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class SessionStore:
    def __init__(self, root: Path):
        self.root = Path(root)
        self.items_dir = self.root / "items"
        self.results_dir = self.root / "results"
        self.items_dir.mkdir(parents=True, exist_ok=True)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def lock(self, item_id: str) -> threading.Lock:
        """Per-item mutual exclusion for mutating operations."""
        with self._locks_guard:
            return self._locks[item_id]

    # -- items ---------------------------------------------------------------

    def _item_path(self, item_id: str) -> Path:
        if not item_id or "/" in item_id or item_id.startswith("."):
            raise StateError(f"bad item id {item_id!r}")
        return self.items_dir / f"{item_id}.json"

    def save_item(self, item: dict) -> None:
        data = (json.dumps(item, indent=2, sort_keys=True) + "\n").encode()
        _atomic_write(self._item_path(item["id"]), data)

    def get_item(self, item_id: str) -> dict | None:
        path = self._item_path(item_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def list_items(self) -> list[dict]:
        items = []
        for path in sorted(self.items_dir.glob("*.json")):
            items.append(json.loads(path.read_text()))
        return items

    def transition(self, item: dict, status: str) -> dict:
        """Record a status change with its timestamp and persist."""
        item["status"] = status
        item.setdefault("history", []).append({"status": status, "at": utc_now()})
        self.save_item(item)
        return item

    # -- results -------------------------------------------------------------

    def save_result(self, item_id: str, data: bytes) -> Path:
        path = self.results_dir / f"{item_id}.json"
        _atomic_write(path, data)
        return path

    def load_result(self, item_id: str) -> bytes | None:
        path = self.results_dir / f"{item_id}.json"
        if not path.exists():
            return None
        return path.read_bytes()


def new_item(item_id: str, image_path: str, meta_path: str, annotations: dict[str, str]) -> dict:
    return {
        "id": item_id,
        "image_path": image_path,
        "meta_path": meta_path,
        "annotations": annotations,
        "roi": None,
        "status": "ingested",
        "history": [{"status": "ingested", "at": utc_now()}],
        "farwall": None,
        "manual_axis": None,
    }
