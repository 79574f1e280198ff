"""Result cache keyed by operation, canonical word and budgets.

Entries are keyed through a hash that includes the toolkit version, so a
witness-format change can never serve stale certificates.  Hits are
replay-verified before being served; anything that fails verification or
fails to parse is discarded and recomputed.  Writes go through a
temp-file rename so concurrent runs never see partial entries.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Callable


class CertificateCache:
    def __init__(self, directory: str | Path, version: str):
        self.directory = Path(directory)
        self.version = version
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self.discarded = 0

    def key(self, parts: dict) -> str:
        canon = json.dumps(
            {**parts, "version": self.version}, sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, parts: dict, verify: Callable[[dict], bool] | None = None) -> dict | None:
        path = self._path(self.key(parts))
        if not path.exists():
            self.misses += 1
            return None
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            payload = None
        if payload is not None and (verify is None or _safe_verify(verify, payload)):
            self.hits += 1
            return payload
        self.discarded += 1
        try:
            path.unlink()
        except OSError:
            pass
        return None

    def put(self, parts: dict, payload: dict) -> None:
        path = self._path(self.key(parts))
        data = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except OSError:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise


def _safe_verify(verify: Callable[[dict], bool], payload: dict) -> bool:
    try:
        return bool(verify(payload))
    except Exception:
        return False
