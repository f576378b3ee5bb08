"""Durable persistence: append-only observation log and per-student snapshots.

Every log and snapshot line is a framed record:

    <crc32 as 8 lowercase hex digits> <canonical JSON> \\n

where canonical JSON means sorted keys and no whitespace, so a record has
exactly one byte representation and the checksum is reproducible.  The
observation log is the source of truth; snapshots are a replayable cache
(header carries the last applied sequence number).  Appends happen before
state mutation, so a crash between the two is recovered by replaying the
log tail over the last committed snapshot.
"""

from __future__ import annotations

import json
import os
import zlib
from pathlib import Path
from typing import Iterator, Optional

from .errors import CorruptRecordError

SNAPSHOT_VERSION = 1


def frame_record(record: dict) -> bytes:
    payload = json.dumps(record, sort_keys=True, separators=(",", ":"))
    crc = zlib.crc32(payload.encode("utf-8")) & 0xFFFFFFFF
    return f"{crc:08x} {payload}\n".encode("utf-8")


def parse_record(line: bytes, offset: int) -> dict:
    """Decode one framed line; offset is where the line starts in the file."""
    text = line.decode("utf-8", errors="replace").rstrip("\n")
    if len(text) < 10 or text[8] != " ":
        raise CorruptRecordError("record framing broken (expected 'crc payload')", offset)
    crc_text, payload = text[:8], text[9:]
    try:
        expected = int(crc_text, 16)
    except ValueError:
        raise CorruptRecordError("record checksum is not hexadecimal", offset) from None
    actual = zlib.crc32(payload.encode("utf-8")) & 0xFFFFFFFF
    if actual != expected:
        raise CorruptRecordError(
            f"checksum mismatch (stored {crc_text}, computed {actual:08x})", offset
        )
    try:
        return json.loads(payload)
    except json.JSONDecodeError as err:
        raise CorruptRecordError(f"record payload is not valid JSON: {err}", offset) from None


def read_framed(path: Path) -> Iterator[tuple[int, dict]]:
    """Yield (byte offset, record) for every framed line in the file."""
    if not path.exists():
        return
    offset = 0
    with open(path, "rb") as fh:
        for line in fh:
            if line.strip():
                yield offset, parse_record(line, offset)
            offset += len(line)


class Store:
    """File-backed store rooted at one directory.

    Layout: observations.log (append-only), states/<student>.snap,
    students.log (registry), responses.log (idempotent-response cache),
    graph.def (plain JSON text).  Single writer assumed; fsync per commit
    is optional and off by default.
    """

    def __init__(self, root: str | os.PathLike, fsync: bool = False):
        self.root = Path(root)
        self.fsync = fsync
        self.states_dir = self.root / "states"
        self.states_dir.mkdir(parents=True, exist_ok=True)
        self.log_path = self.root / "observations.log"
        self.students_path = self.root / "students.log"
        self.responses_path = self.root / "responses.log"
        self.graph_path = self.root / "graph.def"
        self._last_seq = 0
        for _, record in read_framed(self.log_path):
            self._last_seq = max(self._last_seq, int(record["seq"]))

    # ------------------------------------------------------------- log

    def last_seq(self) -> int:
        return self._last_seq

    def append_observation(self, record: dict) -> int:
        """Assign the next sequence number and append; returns it."""
        seq = self._last_seq + 1
        framed = frame_record({**record, "seq": seq})
        self._append(self.log_path, framed)
        self._last_seq = seq
        return seq

    def replay(self, from_seq: int = 0) -> Iterator[dict]:
        """Stream observation records with seq >= from_seq, in log order."""
        for _, record in read_framed(self.log_path):
            if int(record["seq"]) >= from_seq:
                yield record

    # ------------------------------------------------------- snapshots

    def _snap_path(self, student: str) -> Path:
        return self.states_dir / f"{student}.snap"

    def load_states(self, student: str) -> tuple[dict, int]:
        """Return ({skill: state record}, last applied seq); empty if none."""
        path = self._snap_path(student)
        if not path.exists():
            return {}, 0
        header: Optional[dict] = None
        states: dict = {}
        for offset, record in read_framed(path):
            if header is None:
                if "last_seq" not in record:
                    raise CorruptRecordError("snapshot header missing", offset)
                header = record
            else:
                states[record["skill"]] = record
        if header is None:
            return {}, 0
        return states, int(header["last_seq"])

    def put_states(self, student: str, states: dict, last_seq: int) -> None:
        """Atomically replace the student's snapshot (write temp, rename)."""
        path = self._snap_path(student)
        tmp = path.with_suffix(".snap.tmp")
        header = {"student": student, "last_seq": last_seq, "version": SNAPSHOT_VERSION}
        with open(tmp, "wb") as fh:
            fh.write(frame_record(header))
            for skill in sorted(states):
                fh.write(frame_record(states[skill]))
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())
        os.replace(tmp, path)

    # ------------------------------------------------------- registries

    def append_student(self, student: str) -> None:
        self._append(self.students_path, frame_record({"student": student}))

    def list_students(self) -> list:
        return [record["student"] for _, record in read_framed(self.students_path)]

    def append_response(self, key: str, response: dict) -> None:
        self._append(self.responses_path, frame_record({"key": key, "response": response}))

    def load_responses(self) -> dict:
        return {
            record["key"]: record["response"]
            for _, record in read_framed(self.responses_path)
        }

    # ------------------------------------------------------------ graph

    def save_graph(self, text: str) -> None:
        tmp = self.graph_path.with_suffix(".def.tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, self.graph_path)

    def load_graph(self) -> Optional[str]:
        if not self.graph_path.exists():
            return None
        return self.graph_path.read_text(encoding="utf-8")

    # ---------------------------------------------------------- helpers

    def _append(self, path: Path, data: bytes) -> None:
        with open(path, "ab") as fh:
            fh.write(data)
            fh.flush()
            if self.fsync:
                os.fsync(fh.fileno())
