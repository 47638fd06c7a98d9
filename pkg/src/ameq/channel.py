"""Two-party execution over a bit-counting channel.

A party is a generator.  It yields ``send(bits, tag)`` to put a message on the
wire and ``recv()`` to wait for the next message from its peer (the received
``BitString`` is the value of the ``yield``).  Its ``return`` value is its
local output.  Sub-protocols are ordinary generators composed with
``yield from``.

The scheduler runs one party until it blocks on an empty inbox or finishes,
then switches.  Message order is therefore a pure function of the parties'
code and inputs, which makes runs replayable.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Generator

from .bits import BitString

ALICE, BOB = "alice", "bob"


class ChannelError(Exception):
    pass


class BudgetExceeded(ChannelError):
    """Total traffic went over ``max_bits``."""


class Deadlock(ChannelError):
    """Both parties are waiting for a message."""


@dataclass(frozen=True)
class _Send:
    bits: BitString
    tag: str


class _Recv:
    __slots__ = ()


_RECV = _Recv()


def send(bits: BitString, tag: str = "") -> _Send:
    if not isinstance(bits, BitString):
        raise TypeError("messages must be BitString instances")
    return _Send(bits, tag)


def recv() -> _Recv:
    return _RECV


@dataclass(frozen=True)
class Message:
    sender: str
    bits: BitString
    tag: str = ""


@dataclass
class Transcript:
    messages: list[Message] = field(default_factory=list)
    bits_alice_to_bob: int = 0
    bits_bob_to_alice: int = 0
    outcome_alice: Any = None
    outcome_bob: Any = None
    completed: bool = False

    @property
    def rounds(self) -> int:
        return len(self.messages)

    @property
    def total_bits(self) -> int:
        return self.bits_alice_to_bob + self.bits_bob_to_alice

    def record(self, msg: Message) -> None:
        self.messages.append(msg)
        if msg.sender == ALICE:
            self.bits_alice_to_bob += len(msg.bits)
        else:
            self.bits_bob_to_alice += len(msg.bits)

    def bits_by_tag(self) -> dict[str, int]:
        out: dict[str, int] = defaultdict(int)
        for msg in self.messages:
            out[msg.tag] += len(msg.bits)
        return dict(out)

    def check_counters(self) -> bool:
        a = sum(len(m.bits) for m in self.messages if m.sender == ALICE)
        b = sum(len(m.bits) for m in self.messages if m.sender == BOB)
        return a == self.bits_alice_to_bob and b == self.bits_bob_to_alice

    def to_dict(self, payloads: bool = False) -> dict:
        msgs = []
        for m in self.messages:
            item = {"sender": m.sender, "tag": m.tag, "bits": len(m.bits)}
            if payloads:
                item["payload"] = m.bits.to_hex()
            msgs.append(item)
        return {
            "bits_alice_to_bob": self.bits_alice_to_bob,
            "bits_bob_to_alice": self.bits_bob_to_alice,
            "total_bits": self.total_bits,
            "rounds": self.rounds,
            "completed": self.completed,
            "messages": msgs,
        }

    def to_json(self, payloads: bool = False, **kwargs) -> str:
        return json.dumps(self.to_dict(payloads), **kwargs)


Party = Generator[Any, Any, Any]


def run(alice: Party, bob: Party, max_bits: int | None = None) -> Transcript:
    """Execute two parties to completion.

    Raises
    ------
    BudgetExceeded
        When total traffic passes ``max_bits``.
    Deadlock
        When both parties wait on empty inboxes, or one finishes while the
        other still waits.
    ChannelError
        When a party terminates with unread messages in its inbox.
    """
    tr = Transcript()
    gens = {ALICE: alice, BOB: bob}
    inbox = {ALICE: deque(), BOB: deque()}
    pending: dict[str, Any] = {ALICE: None, BOB: None}  # value to resume with
    waiting = {ALICE: False, BOB: False}
    done: dict[str, bool] = {ALICE: False, BOB: False}
    outputs: dict[str, Any] = {}
    other = {ALICE: BOB, BOB: ALICE}

    def step(name: str) -> bool:
        """Advance ``name`` until it blocks or ends; True if progress was made."""
        progressed = False
        gen = gens[name]
        while True:
            if waiting[name]:
                if not inbox[name]:
                    return progressed
                pending[name] = inbox[name].popleft()
                waiting[name] = False
            try:
                op = gen.send(pending[name])
            except StopIteration as stop:
                outputs[name] = stop.value
                done[name] = True
                return True
            progressed = True
            pending[name] = None
            if isinstance(op, _Send):
                msg = Message(name, op.bits, op.tag)
                tr.record(msg)
                if max_bits is not None and tr.total_bits > max_bits:
                    raise BudgetExceeded(f"{tr.total_bits} bits > budget {max_bits}")
                inbox[other[name]].append(op.bits)
            elif isinstance(op, _Recv):
                waiting[name] = True
            else:
                raise TypeError(f"party {name} yielded {op!r}; expected send() or recv()")

    current = ALICE
    while not (done[ALICE] and done[BOB]):
        moved = False if done[current] else step(current)
        if done[current] and inbox[current]:
            raise ChannelError(f"{current} finished with unread messages")
        peer = other[current]
        if not moved and (done[peer] or (waiting[peer] and not inbox[peer])):
            raise Deadlock("no party can make progress")
        current = peer
    for name in (ALICE, BOB):
        if inbox[name]:
            raise ChannelError(f"{name} finished with unread messages")
    tr.outcome_alice = outputs[ALICE]
    tr.outcome_bob = outputs[BOB]
    tr.completed = True
    return tr
