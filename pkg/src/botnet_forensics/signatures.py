"""Byte-pattern signatures and the substring matcher shared by scanner and classifier."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import Unreadable, Unwritable
from .model import Transport

# Signature families that identify a protocol rather than a bot. Anything
# else (e.g. "botcmd") is treated as evidence of bot activity by the sensor.
PROTOCOL_FAMILIES = ("irc", "http")


@dataclass(frozen=True)
class Signature:
    name: str
    patterns: tuple
    min_matches: int = 1
    case_insensitive: bool = True
    transport_hint: Optional[Transport] = None
    port_hint: Optional[int] = None

    def __post_init__(self):
        patterns = tuple(p.encode() if isinstance(p, str) else bytes(p) for p in self.patterns)
        object.__setattr__(self, "patterns", patterns)
        if self.transport_hint is not None:
            object.__setattr__(self, "transport_hint", Transport(self.transport_hint))
        if not self.name:
            raise ValueError("signature needs a name")
        if not patterns or any(not p for p in patterns):
            raise ValueError(f"signature {self.name!r} needs non-empty patterns")
        if not 1 <= self.min_matches <= len(patterns):
            raise ValueError(f"signature {self.name!r}: min_matches must be in 1..{len(patterns)}")
        if self.port_hint is not None and not 0 <= self.port_hint <= 0xFFFF:
            raise ValueError(f"signature {self.name!r}: bad port_hint")

    @property
    def family(self) -> str:
        return signature_family(self.name)

    def hints_match(self, transport: Transport, ports: Iterable[int]) -> bool:
        if self.transport_hint is not None and transport is not self.transport_hint:
            return False
        if self.port_hint is not None and self.port_hint not in tuple(ports):
            return False
        return True

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "transport_hint": self.transport_hint.value if self.transport_hint else None,
            "port_hint": self.port_hint,
            "patterns": [p.decode("utf-8") for p in self.patterns],
            "min_matches": self.min_matches,
            "case_insensitive": self.case_insensitive,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Signature":
        return cls(
            name=d["name"],
            patterns=tuple(d["patterns"]),
            min_matches=int(d.get("min_matches", 1)),
            case_insensitive=bool(d.get("case_insensitive", True)),
            transport_hint=d.get("transport_hint"),
            port_hint=d.get("port_hint"),
        )


def signature_family(name: str) -> str:
    """``"irc-rbot"`` and ``"irc"`` both belong to family ``"irc"``."""
    return name.lower().split("-", 1)[0]


def matched_patterns(sig: Signature, data: bytes) -> list:
    """Patterns of ``sig`` occurring in ``data``, in declaration order."""
    if sig.case_insensitive:
        data = data.lower()
        return [p for p in sig.patterns if p.lower() in data]
    return [p for p in sig.patterns if p in data]


def default_signatures() -> tuple:
    """Built-in rule set. Replace it with a signature file for real casework."""
    return (
        Signature("botcmd", (".advscan", "!ddos", ".update"), min_matches=1),
        Signature("http", ("GET ", "POST ", "Host:"), min_matches=1),
        Signature("irc", ("NICK", "JOIN", "PRIVMSG", "PING"), min_matches=2),
    )


def sensor_signatures(signatures: Iterable[Signature]) -> tuple:
    """The subset used to mark packets suspicious: everything but protocol families."""
    return tuple(s for s in signatures if s.family not in PROTOCOL_FAMILIES)


def load_signatures(path) -> tuple:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise Unreadable(f"cannot read signatures from {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise ValueError("signature file must hold a JSON array")
    return tuple(Signature.from_dict(d) for d in raw)


def save_signatures(signatures: Iterable[Signature], path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump([s.to_dict() for s in signatures], fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise Unwritable(f"cannot write {path}: {exc}") from exc
