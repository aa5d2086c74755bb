"""Topic-based publish/subscribe broker with record/replay and a virtual clock.

The broker core is synchronous and single-threaded-friendly: publishes
enqueue deliveries, and a non-reentrant drain loop dispatches them in
arrival order, so any run driven from one thread is bit-deterministic.
Network front ends (TCP / WebSocket) layer on top in ``bridge``.

Time comes from the broker: in ``wall`` mode stamps are the OS clock, in
``virtual`` mode they advance only when a tick message is published on the
reserved topic ``clock/tick`` (payload ``{"advance_us": n}``).  Ticks are
ordinary logged messages, which is what makes record -> replay reproduce
the stamp sequence exactly.
"""

from __future__ import annotations

import hashlib
import json
import re
import threading
import time
from collections import deque
from dataclasses import dataclass

from .errors import ConfigMismatch, LogCorruption, TopicError, ValidationError

TOPIC_RE = re.compile(r"^[a-z0-9_]+(/[a-z0-9_]+)*$")
TICK_TOPIC = "clock/tick"
DEFAULT_TICK_US = 20_000  # 50 Hz


@dataclass
class BusMessage:
    topic: str
    seq: int
    stamp_us: int
    data: dict

    def to_dict(self):
        return {"topic": self.topic, "seq": self.seq, "stamp_us": self.stamp_us,
                "data": self.data}

    @staticmethod
    def from_dict(obj):
        return BusMessage(topic=obj["topic"], seq=int(obj["seq"]),
                          stamp_us=int(obj["stamp_us"]), data=obj["data"])


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def validate_topic(topic):
    if not isinstance(topic, str) or not TOPIC_RE.match(topic):
        raise TopicError(
            f"topic {topic!r} violates grammar [a-z0-9_]+(/[a-z0-9_]+)*"
        )
    return topic


def validate_pattern(pattern):
    """Subscription pattern: exact topic, trailing '/*' prefix, or bare '*'."""
    if pattern == "*":
        return pattern
    if isinstance(pattern, str) and pattern.endswith("/*"):
        validate_topic(pattern[:-2])
        return pattern
    validate_topic(pattern)
    return pattern


def pattern_matches(pattern: str, topic: str) -> bool:
    if pattern == "*":
        return True
    if pattern.endswith("/*"):
        prefix = pattern[:-2]
        return topic == prefix or topic.startswith(prefix + "/")
    return pattern == topic


# ---------------------------------------------------------------------------
# session logs

@dataclass
class SessionLog:
    header: dict
    messages: list

    def digest(self) -> str:
        """Stable hash over the full (topic, seq, stamp, payload) sequence."""
        h = hashlib.sha256()
        for m in self.messages:
            h.update(canonical_json(m.to_dict()).encode())
            h.update(b"\n")
        return h.hexdigest()

    def payload_digest(self) -> str:
        """Hash ignoring stamps, for wall-clock comparisons."""
        h = hashlib.sha256()
        for m in self.messages:
            h.update(canonical_json({"topic": m.topic, "seq": m.seq, "data": m.data}).encode())
            h.update(b"\n")
        return h.hexdigest()

    def verify(self) -> dict:
        """Per-topic seq continuity check; raises LogCorruption on gaps."""
        expected = {}
        for index, m in enumerate(self.messages):
            want = expected.get(m.topic, 0) + 1
            if m.seq != want:
                raise LogCorruption(
                    f"topic {m.topic!r} jumps to seq {m.seq} at message {index}, expected {want}",
                    topic=m.topic, index=index,
                )
            expected[m.topic] = m.seq
        return {
            "messages": len(self.messages),
            "topics": {t: n for t, n in sorted(expected.items())},
            "digest": self.digest(),
        }

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(canonical_json(self.header) + "\n")
            for m in self.messages:
                fh.write(canonical_json(m.to_dict()) + "\n")

    @staticmethod
    def load(path) -> "SessionLog":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise LogCorruption("empty log file: missing header line", index=0)
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise LogCorruption(f"unparseable header line: {exc}", index=0) from exc
        if "topic" in header or "clock_mode" not in header:
            raise LogCorruption("line 1 is not a session header", index=0)
        messages = []
        for i, line in enumerate(lines[1:], start=1):
            if not line.strip():
                continue
            try:
                messages.append(BusMessage.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise LogCorruption(
                    f"truncated or corrupt log at line {i + 1}: last valid message index {len(messages) - 1}",
                    last_valid_index=len(messages) - 1,
                ) from exc
        return SessionLog(header=header, messages=messages)


# ---------------------------------------------------------------------------
# broker

class LocalClient:
    """In-process endpoint: subscribe with a callback, publish synchronously."""

    def __init__(self, broker, name="client", on_message=None):
        self._broker = broker
        self.name = name
        self.patterns = []
        self.on_message = on_message

    def subscribe(self, pattern):
        validate_pattern(pattern)
        if pattern not in self.patterns:
            self.patterns.append(pattern)

    def matches(self, topic):
        return any(pattern_matches(p, topic) for p in self.patterns)

    def publish(self, topic, data):
        return self._broker.publish(topic, data)

    def close(self):
        self._broker.detach(self)


class Broker:
    """Deterministic fan-out hub; all ordering decisions happen here."""

    def __init__(self, clock_mode="virtual", config_digest="", start_stamp_us=None):
        if clock_mode not in ("wall", "virtual"):
            raise ValidationError(f"clock_mode must be wall/virtual, got {clock_mode!r}")
        self.clock_mode = clock_mode
        self.config_digest = config_digest
        if start_stamp_us is None:
            start_stamp_us = 0 if clock_mode == "virtual" else time.time_ns() // 1000
        self.start_stamp_us = int(start_stamp_us)
        self._virtual_now = self.start_stamp_us
        self._seq = {}
        self._clients = []
        self._queue = deque()
        self._draining = False
        self._lock = threading.RLock()
        self._messages = []

    # -- time ---------------------------------------------------------------
    def now_us(self) -> int:
        if self.clock_mode == "virtual":
            return self._virtual_now
        return time.time_ns() // 1000

    def advance_us(self, amount):
        amount = int(amount)
        if amount < 0:
            raise ValidationError("clock can only advance forward")
        self._virtual_now += amount

    def tick(self, advance_us=DEFAULT_TICK_US):
        """Publish a tick message; in virtual mode this advances broker time."""
        return self.publish(TICK_TOPIC, {"advance_us": int(advance_us)})

    # -- clients ------------------------------------------------------------
    def client(self, name="client", on_message=None) -> LocalClient:
        c = LocalClient(self, name=name, on_message=on_message)
        with self._lock:
            self._clients.append(c)
        return c

    def detach(self, client):
        with self._lock:
            if client in self._clients:
                self._clients.remove(client)

    def subscribe(self, client, pattern):
        client.subscribe(pattern)

    # -- publish / dispatch ---------------------------------------------------
    def publish(self, topic, data) -> BusMessage:
        validate_topic(topic)
        if not isinstance(data, dict):
            raise TopicError(f"payload must be a JSON object, got {type(data).__name__}")
        with self._lock:
            if topic == TICK_TOPIC and self.clock_mode == "virtual":
                self.advance_us(data.get("advance_us", DEFAULT_TICK_US))
            seq = self._seq.get(topic, 0) + 1
            self._seq[topic] = seq
            msg = BusMessage(topic=topic, seq=seq, stamp_us=self.now_us(), data=data)
            self._messages.append(msg)
            for c in self._clients:
                if c.matches(topic):
                    self._queue.append((c, msg))
        self._drain()
        return msg

    def _drain(self):
        with self._lock:
            if self._draining:
                return
            self._draining = True
        try:
            while True:
                with self._lock:
                    if not self._queue:
                        return
                    client, msg = self._queue.popleft()
                if client.on_message is not None:
                    client.on_message(msg)
        finally:
            self._draining = False

    # -- logging ------------------------------------------------------------
    def header(self) -> dict:
        return {
            "clock_mode": self.clock_mode,
            "start_stamp_us": self.start_stamp_us,
            "config_digest": self.config_digest,
        }

    def session_log(self) -> SessionLog:
        with self._lock:
            return SessionLog(header=dict(self.header()), messages=list(self._messages))

    def reset_log(self):
        with self._lock:
            self._messages = []
            self._seq = {}


# ---------------------------------------------------------------------------
# replay

def replay_into(broker: Broker, log: SessionLog, speed="fast", strict=False):
    """Re-publish every logged message, in order, into a broker.

    Under a virtual-clock broker the logged tick messages reproduce the
    original stamp sequence exactly.  ``speed`` matters only for wall-clock
    pacing: a positive real divides the original inter-message gaps,
    "fast" (as fast as possible) skips sleeping entirely.
    """
    if strict and log.header.get("config_digest") != broker.config_digest:
        raise ConfigMismatch(
            f"log was recorded under config {log.header.get('config_digest')!r}, "
            f"broker runs {broker.config_digest!r}"
        )
    if speed != "fast":
        speed = float(speed)
        if speed <= 0:
            raise ValidationError("replay speed must be positive")
    published = []
    prev_stamp = None
    for m in log.messages:
        if speed != "fast" and broker.clock_mode == "wall" and prev_stamp is not None:
            gap_s = max(0, m.stamp_us - prev_stamp) / 1e6 / speed
            if gap_s > 0:
                time.sleep(gap_s)
        prev_stamp = m.stamp_us
        published.append(broker.publish(m.topic, m.data))
    return published
