"""Channel and protocol parameters, validation, and admissibility margins."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence


class ParameterError(ValueError):
    """Base class for invalid configurations. ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


class NonPositiveParameter(ParameterError):
    pass


class VarianceOutsideInterval(ParameterError):
    pass


class ActiveExceedsTotal(ParameterError):
    pass


@dataclass(frozen=True)
class ChannelParams:
    """Fading gains and noise powers for Bob and Willie.

    ``willie_variance_interval`` is the open interval of noise variances
    Willie cannot rule out for the silent hypothesis.
    """

    bob_gains: tuple[float, ...]
    willie_gains: tuple[float, ...]
    v_bob: float
    v_willie: float
    willie_variance_interval: tuple[float, float]

    def __post_init__(self):
        object.__setattr__(self, "bob_gains", tuple(float(a) for a in self.bob_gains))
        object.__setattr__(self, "willie_gains", tuple(float(b) for b in self.willie_gains))
        lo, hi = self.willie_variance_interval
        object.__setattr__(self, "willie_variance_interval", (float(lo), float(hi)))

    @property
    def a_max(self) -> float:
        return max(self.bob_gains)

    @property
    def a_min(self) -> float:
        return min(self.bob_gains)

    @property
    def b_max(self) -> float:
        return max(self.willie_gains)

    @property
    def b_min(self) -> float:
        return min(self.willie_gains)

    def for_senders(self, m: int) -> "ChannelParams":
        """Broadcast single-entry gain lists to ``m`` senders."""
        bob = self.bob_gains * m if len(self.bob_gains) == 1 else self.bob_gains
        willie = self.willie_gains * m if len(self.willie_gains) == 1 else self.willie_gains
        return ChannelParams(bob, willie, self.v_bob, self.v_willie, self.willie_variance_interval)


@dataclass(frozen=True)
class ProtocolConfig:
    """Block length ``n``, ``m`` senders of which ``l`` are active, energy scale ``t_n``."""

    n: int
    m: int
    l: int
    t_n: float
    bits_per_sender: int = 1

    @property
    def amplitude(self) -> float:
        """Per-chip transmit amplitude sqrt(t_n / n)."""
        return math.sqrt(self.t_n / self.n)

    @property
    def power_per_use(self) -> float:
        return self.t_n / self.n

    def threshold(self, a_min: float) -> float:
        """Bob's silent/active threshold sqrt(n t_n) a_min / 2."""
        return math.sqrt(self.n * self.t_n) * a_min / 2.0


@dataclass(frozen=True)
class ConditionReport:
    """Signed margins of the admissibility conditions at finite n."""

    cond_bzi2: float
    cond_nca: float
    cond_bzi: float
    cond_ncae: tuple[float, float]


@dataclass(frozen=True)
class Scenario:
    """A validated (protocol, channel) pair plus the seed from the config file."""

    proto: ProtocolConfig
    channel: ChannelParams
    seed: int = 0
    extra: dict = field(default_factory=dict)


def validate(channel: ChannelParams, proto: ProtocolConfig) -> None:
    """Raise a ``ParameterError`` subclass naming the first violated field."""
    for name in ("n", "m", "l", "bits_per_sender"):
        value = getattr(proto, name)
        if int(value) != value or value < 1:
            raise NonPositiveParameter(name, f"must be a positive integer, got {value!r}")
    if not proto.t_n > 0 or not math.isfinite(proto.t_n):
        raise NonPositiveParameter("t_n", f"must be positive, got {proto.t_n!r}")
    if proto.l > proto.m:
        raise ActiveExceedsTotal("l", f"l={proto.l} exceeds m={proto.m}")
    for name in ("bob_gains", "willie_gains"):
        gains = getattr(channel, name)
        if len(gains) < proto.m:
            raise ParameterError(name, f"needs at least m={proto.m} entries, got {len(gains)}")
        if not all(g > 0 and math.isfinite(g) for g in gains):
            raise NonPositiveParameter(name, "all gains must be strictly positive")
    for name in ("v_bob", "v_willie"):
        value = getattr(channel, name)
        if not value > 0 or not math.isfinite(value):
            raise NonPositiveParameter(name, f"must be positive, got {value!r}")
    lo, hi = channel.willie_variance_interval
    if not lo < channel.v_willie < hi:
        raise VarianceOutsideInterval(
            "v_willie", f"{channel.v_willie} not inside the open interval ({lo}, {hi})"
        )


def asymptotic_conditions(channel: ChannelParams, proto: ProtocolConfig) -> ConditionReport:
    validate(channel, proto)
    n, l, m = proto.n, proto.l, proto.m
    bzi = n * channel.a_min**2 / (8.0 * l * (channel.v_bob + channel.a_max**2)) - math.log(m)
    return ConditionReport(
        cond_bzi2=n / l**2,
        cond_nca=l / n,
        cond_bzi=bzi,
        cond_ncae=(n / l**2, l**2 / n**3),
    )


def scaling_family(n: int, c: float, m: int | None = None, mode: str = "inverse_log") -> ProtocolConfig:
    """Protocol config with l = c n / log n active senders and t_n = n / l.

    ``mode="literal"`` uses l = c n log n instead.
    """
    if n < 3:
        raise ValueError(f"n must be at least 3 so that log n > 1, got {n}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c}")
    if mode == "inverse_log":
        l_real = c * n / math.log(n)
    elif mode == "literal":
        l_real = c * n * math.log(n)
    else:
        raise ValueError(f"unknown scaling mode {mode!r}")
    l = max(1, int(round(l_real)))
    return ProtocolConfig(n=n, m=l if m is None else max(m, l), l=l, t_n=n / l)


CONFIG_FIELDS = (
    "n", "m", "l", "t_n", "bits_per_sender", "bob_gains", "willie_gains",
    "v_bob", "v_willie", "v_interval", "seed",
)


def channel_from_dict(doc: dict[str, Any]) -> ChannelParams:
    return ChannelParams(
        bob_gains=_as_list(doc["bob_gains"], "bob_gains"),
        willie_gains=_as_list(doc["willie_gains"], "willie_gains"),
        v_bob=float(doc["v_bob"]),
        v_willie=float(doc["v_willie"]),
        willie_variance_interval=tuple(doc["v_interval"]),
    )


def scenario_from_dict(doc: dict[str, Any]) -> Scenario:
    missing = [k for k in CONFIG_FIELDS if k not in doc and k not in ("bits_per_sender", "seed")]
    if missing:
        raise ParameterError(missing[0], "missing from config")
    proto = ProtocolConfig(
        n=doc["n"], m=doc["m"], l=doc["l"], t_n=float(doc["t_n"]),
        bits_per_sender=doc.get("bits_per_sender", 1),
    )
    channel = channel_from_dict(doc).for_senders(proto.m)
    validate(channel, proto)
    extra = {k: v for k, v in doc.items() if k not in CONFIG_FIELDS}
    return Scenario(proto, channel, int(doc.get("seed", 0)), extra)


def scenario_to_dict(sc: Scenario) -> dict[str, Any]:
    p, ch = sc.proto, sc.channel
    return {
        "n": p.n, "m": p.m, "l": p.l, "t_n": p.t_n, "bits_per_sender": p.bits_per_sender,
        "bob_gains": list(ch.bob_gains), "willie_gains": list(ch.willie_gains),
        "v_bob": ch.v_bob, "v_willie": ch.v_willie,
        "v_interval": list(ch.willie_variance_interval), "seed": sc.seed,
    }


def load_config(path: str | Path) -> dict[str, Any]:
    with open(path) as fh:
        return json.load(fh)


def _as_list(value: Any, name: str) -> Sequence[float]:
    if isinstance(value, (int, float)):
        return [float(value)]
    if not isinstance(value, list) or not value:
        raise ParameterError(name, "must be a non-empty list of gains")
    return value
