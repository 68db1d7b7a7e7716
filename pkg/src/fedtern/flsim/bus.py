"""In-process message bus: byte accounting, transcript, privacy audit.

The bus does not carry payloads (phases exchange objects directly under a
synchronous coordinator); it records what crossed the wire.  Messages
flagged ``private`` are sealed client-to-client payloads the coordinator
relays without reading; any server-side unsealing must go through
:meth:`MessageBus.note_server_read` so tests can audit it.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

SERVER = 0  # sender/receiver id of the coordinator


@dataclass(frozen=True)
class BusRecord:
    phase: str
    kind: str
    sender: int
    receiver: int
    nbytes: int
    private: bool


class MessageBus:
    def __init__(self):
        self.records: list[BusRecord] = []
        self.server_reads: list[str] = []

    def record(self, *, phase: str, kind: str, sender: int, receiver: int,
               nbytes: int, private: bool = False):
        self.records.append(BusRecord(phase, kind, sender, receiver, int(nbytes), private))

    def note_server_read(self, kind: str):
        """The coordinator unsealed a private payload (dispute paths only)."""
        self.server_reads.append(kind)

    def nbytes(self, *, phase: str | None = None, kinds=None,
               to_server: bool | None = None) -> int:
        total = 0
        for rec in self.records:
            if phase is not None and rec.phase != phase:
                continue
            if kinds is not None and rec.kind not in kinds:
                continue
            if to_server is True and rec.receiver != SERVER:
                continue
            if to_server is False and rec.receiver == SERVER:
                continue
            total += rec.nbytes
        return total

    def count(self, *, phase: str | None = None, kinds=None) -> int:
        return sum(1 for rec in self.records
                   if (phase is None or rec.phase == phase)
                   and (kinds is None or rec.kind in kinds))

    def transcript_rows(self) -> list[dict]:
        return [asdict(rec) for rec in self.records]
