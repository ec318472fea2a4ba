"""Enumeration caps, overridable through ``REPENT_CAPS="key=value,..."``."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class Caps:
    max_players: int = 5
    mdp_states: int = 10**6
    enum_depth: int = 32
    n0_cap: int = 8
    k0: int = 10


class CapExceeded(RuntimeError):
    """An enumeration would exceed a configured cap."""


def parse_caps(text: str | None) -> Caps:
    if not text:
        return Caps()
    known = {f.name for f in fields(Caps)}
    values = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or key not in known:
            raise ValueError(f"bad REPENT_CAPS entry {item!r}")
        values[key] = int(value)
    return replace(Caps(), **values)


def caps() -> Caps:
    return parse_caps(os.environ.get("REPENT_CAPS"))
