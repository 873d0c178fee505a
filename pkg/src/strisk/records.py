"""Domain records for organizations, observations, tweets, and incidents.

All record types are immutable and carry their own validation. Files are
line-oriented JSON (one record per line); timestamps are ISO-8601 UTC.
"""
from __future__ import annotations

import ipaddress
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

SECTORS = (
    "information_technology",
    "medical_healthcare",
    "finance",
    "retail",
    "education",
    "entertainment",
    "industrial",
    "government",
    "ngo",
    "energy",
)

OBSERVATION_KINDS = (
    "blacklist_ip",
    "darknet_ip",
    "open_port",
    "expired_cert",
    "spam_domain",
)

# Kinds whose subject is an IP address; spam_domain subjects are domains.
IP_KINDS = frozenset(OBSERVATION_KINDS[:4])

INCIDENT_SOURCES = ("PRC", "VCDB")


class RecordError(ValueError):
    """Raised when a record violates its schema or invariants."""


def _parse_timestamp(value: str | datetime) -> datetime:
    if isinstance(value, datetime):
        ts = value
    else:
        ts = datetime.fromisoformat(str(value).replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def _format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).isoformat()


def _is_ip(subject: str) -> bool:
    try:
        ipaddress.ip_address(subject)
    except ValueError:
        return False
    return True


@dataclass(frozen=True, slots=True)
class OrganizationRecord:
    """One organization: identity, sector, size, and network footprint."""

    org_id: str
    name: str
    sector: str
    org_size: int
    ip_ranges: tuple[str, ...] = ()
    domains: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.org_id:
            raise RecordError("organization requires an org_id")
        if self.sector not in SECTORS:
            raise RecordError(f"unknown sector {self.sector!r}")
        if self.org_size < 1:
            raise RecordError("org_size must be a positive integer")
        object.__setattr__(self, "ip_ranges", tuple(self.ip_ranges))
        object.__setattr__(self, "domains", tuple(self.domains))
        for block in self.ip_ranges:
            try:
                ipaddress.ip_network(block, strict=False)
            except ValueError as exc:
                raise RecordError(f"invalid CIDR block {block!r}") from exc

    @property
    def host_count(self) -> int:
        """Total addresses across all allocated ranges."""
        return sum(
            ipaddress.ip_network(block, strict=False).num_addresses
            for block in self.ip_ranges
        )

    def to_dict(self) -> dict:
        return {
            "org_id": self.org_id,
            "name": self.name,
            "sector": self.sector,
            "org_size": self.org_size,
            "ip_ranges": list(self.ip_ranges),
            "domains": list(self.domains),
        }

    @classmethod
    def from_dict(cls, data: dict) -> OrganizationRecord:
        return cls(
            org_id=str(data["org_id"]),
            name=str(data["name"]),
            sector=str(data["sector"]),
            org_size=int(data["org_size"]),
            ip_ranges=tuple(data.get("ip_ranges", ())),
            domains=tuple(data.get("domains", ())),
        )


@dataclass(frozen=True, slots=True)
class ObservationRecord:
    """One externally measured technical event tied to an organization."""

    org_id: str
    kind: str
    subject: str
    timestamp: datetime
    detail: str = ""

    def __post_init__(self) -> None:
        if self.kind not in OBSERVATION_KINDS:
            raise RecordError(f"unknown observation kind {self.kind!r}")
        if not self.subject:
            raise RecordError("observation requires a subject")
        if self.kind in IP_KINDS:
            if not _is_ip(self.subject):
                raise RecordError(
                    f"{self.kind} subject must be an IP address, got {self.subject!r}"
                )
        elif _is_ip(self.subject):
            raise RecordError("spam_domain subject must be a domain, not an IP")
        object.__setattr__(self, "timestamp", _parse_timestamp(self.timestamp))

    def to_dict(self) -> dict:
        return {
            "org_id": self.org_id,
            "kind": self.kind,
            "subject": self.subject,
            "timestamp": _format_timestamp(self.timestamp),
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ObservationRecord:
        return cls(
            org_id=str(data["org_id"]),
            kind=str(data["kind"]),
            subject=str(data["subject"]),
            timestamp=_parse_timestamp(data["timestamp"]),
            detail=str(data.get("detail", "")),
        )


@dataclass(frozen=True, slots=True)
class TweetRecord:
    """One social post with engagement counts and reply linkage."""

    org_id: str
    text: str
    likes: int
    retweets: int
    replies: int
    account: str
    is_reply_to: bool
    is_replied_to: bool
    timestamp: datetime

    def __post_init__(self) -> None:
        if min(self.likes, self.retweets, self.replies) < 0:
            raise RecordError("engagement counts must be non-negative")
        object.__setattr__(self, "timestamp", _parse_timestamp(self.timestamp))

    def to_dict(self) -> dict:
        return {
            "org_id": self.org_id,
            "text": self.text,
            "likes": self.likes,
            "retweets": self.retweets,
            "replies": self.replies,
            "account": self.account,
            "is_reply_to": self.is_reply_to,
            "is_replied_to": self.is_replied_to,
            "timestamp": _format_timestamp(self.timestamp),
        }

    @classmethod
    def from_dict(cls, data: dict) -> TweetRecord:
        return cls(
            org_id=str(data["org_id"]),
            text=str(data["text"]),
            likes=int(data["likes"]),
            retweets=int(data["retweets"]),
            replies=int(data["replies"]),
            account=str(data["account"]),
            is_reply_to=bool(data["is_reply_to"]),
            is_replied_to=bool(data["is_replied_to"]),
            timestamp=_parse_timestamp(data["timestamp"]),
        )


@dataclass(frozen=True, slots=True)
class IncidentRecord:
    """One reported hacking breach tied to an organization."""

    org_id: str
    name: str
    date: str
    source: str
    breach_type: str = "HACK"

    def __post_init__(self) -> None:
        if self.source not in INCIDENT_SOURCES:
            raise RecordError(f"unknown incident source {self.source!r}")

    def to_dict(self) -> dict:
        return {
            "org_id": self.org_id,
            "name": self.name,
            "date": self.date,
            "source": self.source,
            "breach_type": self.breach_type,
        }

    @classmethod
    def from_dict(cls, data: dict) -> IncidentRecord:
        return cls(
            org_id=str(data["org_id"]),
            name=str(data["name"]),
            date=str(data["date"]),
            source=str(data["source"]),
            breach_type=str(data.get("breach_type", "HACK")),
        )


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(f"{path}:{line_no}: invalid JSON record") from exc


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True))
            handle.write("\n")


def load_organizations(path: str | Path) -> list[OrganizationRecord]:
    return [OrganizationRecord.from_dict(d) for d in read_jsonl(path)]


def load_observations(path: str | Path) -> list[ObservationRecord]:
    return [ObservationRecord.from_dict(d) for d in read_jsonl(path)]


def load_tweets(path: str | Path) -> list[TweetRecord]:
    return [TweetRecord.from_dict(d) for d in read_jsonl(path)]


def load_incidents(path: str | Path) -> list[IncidentRecord]:
    return [IncidentRecord.from_dict(d) for d in read_jsonl(path)]
