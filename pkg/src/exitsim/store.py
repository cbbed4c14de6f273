"""Directory-backed JSON document store for scenarios.

One file per document keyed by UUID, plus an index file listing ids.
Writes are serialized per store; documents survive process restarts.
"""

from __future__ import annotations

import json
import pathlib
import threading
import uuid


class DocumentStore:
    def __init__(self, directory):
        self.directory = pathlib.Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, doc_id: str) -> pathlib.Path:
        return self.directory / f"{doc_id}.json"

    def create(self, doc: dict) -> dict:
        doc = dict(doc)
        doc.setdefault("id", str(uuid.uuid4()))
        with self._lock:
            self._path(doc["id"]).write_text(json.dumps(doc))
        return doc

    def get(self, doc_id: str):
        path = self._path(doc_id)
        if not path.exists():
            return None
        return json.loads(path.read_text())

    def put(self, doc_id: str, doc: dict):
        if not self._path(doc_id).exists():
            return None
        doc = dict(doc)
        doc["id"] = doc_id
        with self._lock:
            self._path(doc_id).write_text(json.dumps(doc))
        return doc

    def delete(self, doc_id: str) -> bool:
        path = self._path(doc_id)
        with self._lock:
            if not path.exists():
                return False
            path.unlink()
            return True

    def list(self, predicate=None, limit=None, offset=0):
        """(documents page, total matching) sorted by creation timestamp."""
        docs = []
        for path in sorted(self.directory.glob("*.json")):
            doc = json.loads(path.read_text())
            if predicate is None or predicate(doc):
                docs.append(doc)
        docs.sort(key=lambda d: d.get("created_at", ""))
        total = len(docs)
        page = docs[offset : None if limit is None else offset + limit]
        return page, total
