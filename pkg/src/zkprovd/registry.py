"""Persistent proof registry: reusable ``(ecs, pk, vk)`` entries addressed by circuit id.

Layout under the registry root::

    <root>/<id>/ecs.ecs.json   canonical ECS encoding
    <root>/<id>/pk.bin         proving key
    <root>/<id>/vk.json        verifying key
    <root>/<id>/meta.json      metadata; written last, marks the entry complete

An entry is assembled in ``<root>/.staging-<id>-<nonce>/`` (each file written
to a temp name, fsynced, renamed) and the directory is renamed into place
only after ``meta.json`` lands, so a crash never leaves a partial ``<id>``
directory. Directories without ``meta.json`` are ignored; leftover staging
directories are removed on open.
"""

from __future__ import annotations

import logging
import os
import shutil
import threading
import uuid
from collections import OrderedDict
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .backend import DEFAULT_BACKEND, ProvingKey, VerifyingKey, setup
from .circuit import CircuitArtifact
from .encoding import canonical_json, circuit_id, decode_circuit, encode_circuit, is_circuit_id, load_json
from .errors import ConflictError, NotFoundError, StorageError, ZkProvdError

log = logging.getLogger(__name__)

ECS_FILE = "ecs.ecs.json"
PK_FILE = "pk.bin"
VK_FILE = "vk.json"
META_FILE = "meta.json"
META_FORMAT = "zkprovd/meta/v1"


@dataclass(frozen=True)
class CircuitMetadata:
    id: str
    name: str
    constraint_count: int
    num_public_inputs: int
    num_public_outputs: int
    created_at: str

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "constraint_count": self.constraint_count,
            "num_public_inputs": self.num_public_inputs,
            "num_public_outputs": self.num_public_outputs,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class RegistryEntry:
    id: str
    ecs: CircuitArtifact
    pk: ProvingKey
    vk: VerifyingKey
    created_at: str
    name: str
    constraint_count: int

    @property
    def metadata(self) -> CircuitMetadata:
        return CircuitMetadata(self.id, self.name, self.constraint_count, self.ecs.num_public_inputs,
                               self.ecs.num_public_outputs, self.created_at)

    def files(self) -> dict[str, bytes]:
        meta = self.metadata.to_doc()
        meta.update(format=META_FORMAT, backend_id=self.vk.backend_id, k=self.vk.k)
        return {
            ECS_FILE: encode_circuit(self.ecs),
            PK_FILE: self.pk.to_bytes(),
            VK_FILE: self.vk.to_bytes(),
            META_FILE: canonical_json(meta),
        }


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="microseconds").replace("+00:00", "Z")


class Registry:
    def __init__(self, root: str | os.PathLike, max_entries: int | None = None, read_only: bool = False,
                 backend_id: str = DEFAULT_BACKEND):
        self.root = Path(root)
        self.max_entries = max_entries
        self.read_only = read_only
        self.backend_id = backend_id
        self._cache: OrderedDict[str, RegistryEntry] = OrderedDict()
        self._cache_lock = threading.Lock()
        self._id_locks: dict[str, threading.Lock] = {}
        self._id_locks_guard = threading.Lock()
        if not read_only:
            try:
                self.root.mkdir(parents=True, exist_ok=True)
            except OSError as exc:
                raise StorageError(f"cannot create registry root {self.root}: {exc}") from exc
            self.rescan()

    # -- internals -----------------------------------------------------------

    def _lock_for(self, cid: str) -> threading.Lock:
        with self._id_locks_guard:
            return self._id_locks.setdefault(cid, threading.Lock())

    def _cache_get(self, cid: str) -> RegistryEntry | None:
        with self._cache_lock:
            entry = self._cache.get(cid)
            if entry is not None:
                self._cache.move_to_end(cid)
            return entry

    def _cache_put(self, entry: RegistryEntry) -> None:
        with self._cache_lock:
            self._cache[entry.id] = entry
            self._cache.move_to_end(entry.id)
            if self.max_entries is not None:
                while len(self._cache) > self.max_entries:
                    self._cache.popitem(last=False)

    def _cache_drop(self, cid: str) -> None:
        with self._cache_lock:
            self._cache.pop(cid, None)

    def _write_file(self, path: Path, data: bytes) -> None:
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)

    def _fsync_dir(self, path: Path) -> None:
        try:
            fd = os.open(path, os.O_RDONLY)
        except OSError:
            return
        try:
            os.fsync(fd)
        except OSError:
            pass
        finally:
            os.close(fd)

    def _entry_dir(self, cid: str) -> Path:
        return self.root / cid

    def _load(self, cid: str) -> RegistryEntry:
        d = self._entry_dir(cid)
        if not (d / META_FILE).is_file():
            raise NotFoundError(f"circuit {cid} not registered")
        try:
            raw = {name: (d / name).read_bytes() for name in (ECS_FILE, PK_FILE, VK_FILE, META_FILE)}
        except FileNotFoundError as exc:
            raise NotFoundError(f"circuit {cid} not registered") from exc
        except OSError as exc:
            raise StorageError(f"cannot read entry {cid}: {exc}") from exc
        try:
            ecs = decode_circuit(raw[ECS_FILE])
            pk = ProvingKey.from_bytes(raw[PK_FILE])
            vk = VerifyingKey.from_bytes(raw[VK_FILE])
            meta = load_json(raw[META_FILE])
        except ZkProvdError as exc:
            raise StorageError(f"corrupt entry {cid}: {exc}") from exc
        if circuit_id(ecs) != cid or pk.circuit_id != cid or vk.circuit_id != cid:
            raise StorageError(f"entry {cid} fails its content-address check")
        return RegistryEntry(cid, ecs, pk, vk, meta["created_at"], meta["name"], meta["constraint_count"])

    # -- public API ----------------------------------------------------------

    def rescan(self) -> int:
        """Drop leftover staging directories and forget cached entries whose files vanished.

        Returns the number of complete entries on disk. Entries dropped into the
        directory out-of-band become visible here (and lazily on fetch).
        """
        if not self.root.is_dir():
            raise StorageError(f"registry root {self.root} is not a directory")
        count = 0
        for child in self.root.iterdir():
            if child.name.startswith(".staging-"):
                if not self.read_only:
                    shutil.rmtree(child, ignore_errors=True)
            elif is_circuit_id(child.name) and (child / META_FILE).is_file():
                count += 1
        with self._cache_lock:
            for cid in [c for c in self._cache if not (self._entry_dir(c) / META_FILE).is_file()]:
                del self._cache[cid]
        return count

    def register_circuit(self, ecs: CircuitArtifact, k: int = 30) -> CircuitMetadata:
        if self.read_only:
            raise StorageError("registry is read-only")
        cid = circuit_id(ecs)
        with self._lock_for(cid):
            try:
                existing = self._cache_get(cid) or self._load(cid)
            except NotFoundError:
                existing = None
            if existing is not None:
                if existing.vk.k != k:
                    raise ConflictError(f"circuit {cid} already registered with k={existing.vk.k}")
                return existing.metadata
            pk, vk = setup(ecs, k, self.backend_id)
            entry = RegistryEntry(cid, ecs, pk, vk, _utcnow(), ecs.name, len(ecs.constraints))
            self._persist(entry)
            self._cache_put(entry)
            log.info("registered circuit %s (%s, %d constraints)", cid, ecs.name, entry.constraint_count)
            return entry.metadata

    def _persist(self, entry: RegistryEntry) -> None:
        staging = self.root / f".staging-{entry.id}-{uuid.uuid4().hex}"
        final = self._entry_dir(entry.id)
        try:
            staging.mkdir()
            for name, data in entry.files().items():  # meta.json is last
                self._write_file(staging / name, data)
            self._fsync_dir(staging)
            os.rename(staging, final)
            self._fsync_dir(self.root)
        except OSError as exc:
            shutil.rmtree(staging, ignore_errors=True)
            raise StorageError(f"cannot persist entry {entry.id}: {exc}") from exc

    def fetch_entry(self, cid: str) -> RegistryEntry:
        if not is_circuit_id(cid):
            raise NotFoundError(f"circuit {cid!r} not registered")
        entry = self._cache_get(cid)
        if entry is not None:
            return entry
        with self._lock_for(cid):
            entry = self._cache_get(cid)
            if entry is None:
                entry = self._load(cid)
                self._cache_put(entry)
        return entry

    def list_circuits(self) -> list[CircuitMetadata]:
        try:
            children = list(self.root.iterdir())
        except OSError as exc:
            raise StorageError(f"cannot list registry root {self.root}: {exc}") from exc
        out = []
        for child in children:
            if not is_circuit_id(child.name):
                continue
            try:
                meta = load_json((child / META_FILE).read_bytes())
            except FileNotFoundError:
                continue
            except (OSError, ZkProvdError) as exc:
                raise StorageError(f"unreadable metadata for {child.name}: {exc}") from exc
            out.append(CircuitMetadata(meta["id"], meta["name"], meta["constraint_count"],
                                       meta["num_public_inputs"], meta["num_public_outputs"], meta["created_at"]))
        out.sort(key=lambda m: (m.created_at, m.id))
        return out

    def remove_circuit(self, cid: str) -> bool:
        if self.read_only:
            raise StorageError("registry is read-only")
        if not is_circuit_id(cid):
            return False
        with self._lock_for(cid):
            self._cache_drop(cid)
            d = self._entry_dir(cid)
            if not d.exists():
                return False
            # Retire the directory with one rename so readers never see a half-deleted entry.
            trash = self.root / f".staging-removed-{cid}-{uuid.uuid4().hex}"
            try:
                os.rename(d, trash)
                shutil.rmtree(trash)
            except OSError as exc:
                raise StorageError(f"cannot remove entry {cid}: {exc}") from exc
            return True

    def __len__(self):
        return len(self.list_circuits())
