"""Scripted misbehavior plans for the simulator.

A plan is a list of entries naming a client (0-based dataset id) and one of
four behaviors: ``bad_share`` and ``fake_A0`` corrupt key generation,
``silent`` sends nothing during key generation, ``dropout`` goes quiet in
the decryption phase only.  Plans that leave fewer than T honest clients
are rejected up front.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import PlanViolatesHonestMajority

FKG_BEHAVIORS = ("bad_share", "fake_A0", "silent")
BEHAVIORS = FKG_BEHAVIORS + ("dropout",)

PHASE_FKG = "fkg"
PHASE_DECRYPT = "decrypt"


@dataclass(frozen=True)
class AdversaryEntry:
    client: int
    behavior: str


def parse_plan(raw) -> tuple[AdversaryEntry, ...]:
    entries = []
    for item in raw:
        if isinstance(item, AdversaryEntry):
            entries.append(item)
            continue
        behavior = item["behavior"]
        if behavior not in BEHAVIORS:
            raise ValueError(f"unknown adversary behavior {behavior!r}; "
                             f"choose from {BEHAVIORS}")
        entries.append(AdversaryEntry(client=int(item["client"]), behavior=behavior))
    return tuple(entries)


def validate_plan(plan: tuple[AdversaryEntry, ...], n: int, T: int):
    """Misbehaving clients must leave at least T honest participants."""
    clients = {e.client for e in plan}
    for e in plan:
        if not 0 <= e.client < n:
            raise ValueError(f"adversary client {e.client} outside 0..{n - 1}")
    honest = n - len(clients)
    if honest < T:
        raise PlanViolatesHonestMajority(
            f"{len(clients)} misbehaving clients leave {honest} honest, below T={T}")


def inject_adversary(plan: tuple[AdversaryEntry, ...], phase: str) -> dict[int, str]:
    """Behavior overrides (client -> behavior) active in the given phase."""
    if phase == PHASE_FKG:
        return {e.client: e.behavior for e in plan if e.behavior in FKG_BEHAVIORS}
    if phase == PHASE_DECRYPT:
        return {e.client: e.behavior for e in plan if e.behavior == "dropout"}
    raise ValueError(f"unknown phase {phase!r}")
