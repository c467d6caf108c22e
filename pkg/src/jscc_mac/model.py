"""Domain types for the two-user MAC source-channel problem and the model file format.

A model file is line-oriented text::

    [source.1]
    probs = 0.028 0.972
    [channel]
    inputs1 = 6
    inputs2 = 6
    outputs = 4
    row = ...            # n1*n2 rows, x1 fastest
    [dist.1.1]
    probs = ...
    [thresholds]         # optional, absent means "optimize"
    gamma1 = 0.8
    gamma2 = 0.7

Extended reals are plain floats: ``math.inf`` and ``-math.inf`` stand in for
the degenerate source exponents, and callers never form ``inf - inf``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

PROB_TOL = 1e-12

ExtReal = float


class ModelError(ValueError):
    """Raised when a model file cannot be parsed or fails validation."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _as_tuple(values) -> tuple:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SourceSpec:
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_tuple(self.probs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.probs)

    def support(self) -> np.ndarray:
        p = self.array
        return p[p > 0]

    @cached_property
    def log_support(self) -> np.ndarray:
        logp = np.log(self.support())
        logp.setflags(write=False)
        return logp

    def without_zeros(self) -> "SourceSpec":
        return SourceSpec(tuple(p for p in self.probs if p != 0.0))


@dataclass(frozen=True)
class InputDistribution:
    probs: tuple

    def __post_init__(self):
        object.__setattr__(self, "probs", _as_tuple(self.probs))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.probs)

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class MacChannel:
    """W(y|x1,x2) stored as n1*n2 rows; row index is x1 + n1*x2 (0-based)."""

    n1: int
    n2: int
    ny: int
    w: tuple

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(_as_tuple(r) for r in self.w))

    @classmethod
    def from_array(cls, w, n1: int, n2: int) -> "MacChannel":
        w = np.asarray(w, dtype=float)
        return cls(n1, n2, w.shape[1], tuple(map(tuple, w)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.w).reshape(len(self.w), -1)

    @property
    def tensor(self) -> np.ndarray:
        """W indexed as ``[x2, x1, y]``."""
        return self.array.reshape(self.n2, self.n1, self.ny)

    def row(self, x1: int, x2: int) -> tuple:
        return self.w[x1 + self.n1 * x2]


@dataclass(frozen=True)
class ClassPolicy:
    """Class distributions ``q[nu][i]`` (0-based) and optional thresholds."""

    q: tuple
    gamma: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(tuple(pair) for pair in self.q))
        if self.gamma is not None:
            object.__setattr__(self, "gamma", _as_tuple(self.gamma))


@dataclass(frozen=True)
class SystemModel:
    source1: SourceSpec
    source2: SourceSpec
    channel: MacChannel
    policy: ClassPolicy
    name: str = field(default="", compare=False)

    def source(self, nu: int) -> SourceSpec:
        return self.source1 if nu == 1 else self.source2

    def q(self, nu: int, i: int) -> InputDistribution:
        """Class-``i`` input distribution of user ``nu`` (both 1-based)."""
        return self.policy.q[nu - 1][i - 1]

    def with_gamma(self, gamma) -> "SystemModel":
        policy = ClassPolicy(self.policy.q, None if gamma is None else tuple(gamma))
        return SystemModel(self.source1, self.source2, self.channel, policy, self.name)

    def swapped(self) -> "SystemModel":
        """Same system with the user labels exchanged."""
        ch = self.channel
        w = ch.tensor.transpose(1, 0, 2).reshape(ch.n1 * ch.n2, ch.ny)
        channel = MacChannel.from_array(w, ch.n2, ch.n1)
        gamma = None if self.policy.gamma is None else self.policy.gamma[::-1]
        policy = ClassPolicy(self.policy.q[::-1], gamma)
        return SystemModel(self.source2, self.source1, channel, policy, self.name)


def _check_vector(name: str, probs: Sequence[float], size: Optional[int] = None) -> list[str]:
    out = []
    if size is not None and len(probs) != size:
        out.append(f"{name}: length {len(probs)} does not match alphabet size {size}")
    for k, p in enumerate(probs):
        if not math.isfinite(p) or p < 0:
            out.append(f"{name}[{k}]: negative or non-finite probability {p!r}")
    residual = math.fsum(probs) - 1.0
    if abs(residual) > PROB_TOL:
        out.append(f"{name}: probabilities sum to 1{residual:+.3e}")
    return out


def validate(model: SystemModel) -> list[str]:
    """Return a list of human-readable invariant violations (empty when valid)."""
    violations = []
    for nu in (1, 2):
        src = model.source(nu)
        name = f"source{nu}"
        violations += _check_vector(name, src.probs)
        if sum(1 for p in src.probs if p > 0) < 2:
            violations.append(f"{name}: support has fewer than 2 symbols")

    ch = model.channel
    if ch.n1 < 1 or ch.n2 < 1 or ch.ny < 1:
        violations.append(f"channel: non-positive alphabet size ({ch.n1}, {ch.n2}, {ch.ny})")
    if len(ch.w) != ch.n1 * ch.n2:
        violations.append(f"channel: {len(ch.w)} rows, expected n1*n2 = {ch.n1 * ch.n2}")
    for r, row in enumerate(ch.w):
        x1, x2 = r % max(ch.n1, 1) + 1, r // max(ch.n1, 1) + 1
        violations += _check_vector(f"channel row {r + 1} (x1={x1}, x2={x2})", row, ch.ny)

    sizes = {1: ch.n1, 2: ch.n2}
    for nu in (1, 2):
        for i in (1, 2):
            violations += _check_vector(f"dist.{nu}.{i}", model.q(nu, i).probs, sizes[nu])

    gamma = model.policy.gamma
    if gamma is not None:
        for nu, g in enumerate(gamma, start=1):
            if not (0.0 <= g <= 1.0):
                violations.append(f"gamma{nu}: {g!r} outside [0, 1]")
    return violations


_HEADER = re.compile(r"^\[([A-Za-z0-9_.]+)\]$")
_ASSIGN = re.compile(r"^([A-Za-z0-9_]+)\s*=\s*(.*)$")
_SECTIONS = {"source.1", "source.2", "channel", "thresholds"} | {
    f"dist.{nu}.{i}" for nu in (1, 2) for i in (1, 2)
}


def _floats(text: str, lineno: int) -> list[float]:
    try:
        return [float(tok) for tok in text.split()]
    except ValueError as exc:
        raise ModelError(f"bad number ({exc})", lineno) from None


def _int(text: str, lineno: int) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ModelError(f"expected an integer, got {text.strip()!r}", lineno) from None


def parse_model(text: str, name: str = "") -> SystemModel:
    """Parse and validate a model file. Zero-probability source symbols are dropped."""
    sections: dict[str, list[tuple[int, str, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            current = m.group(1)
            if current not in _SECTIONS:
                raise ModelError(f"unknown section [{current}]", lineno)
            if current in sections:
                raise ModelError(f"duplicate section [{current}]", lineno)
            sections[current] = []
            continue
        m = _ASSIGN.match(line)
        if not m:
            raise ModelError(f"cannot parse {line!r}", lineno)
        if current is None:
            raise ModelError("assignment outside of any section", lineno)
        sections[current].append((lineno, m.group(1), m.group(2)))

    for required in sorted(_SECTIONS - {"thresholds"}):
        if required not in sections:
            raise ModelError(f"missing section [{required}]")

    def single(section: str, key: str) -> tuple[int, str]:
        hits = [(ln, v) for ln, k, v in sections[section] if k == key]
        if len(hits) != 1:
            where = sections[section][0][0] if sections[section] else None
            raise ModelError(f"[{section}] needs exactly one '{key} = ...' line", where)
        return hits[0]

    def check_keys(section: str, allowed: set[str]) -> None:
        for ln, k, _ in sections[section]:
            if k not in allowed:
                raise ModelError(f"unexpected key '{k}' in [{section}]", ln)

    def probs_of(section: str) -> tuple[int, list[float]]:
        check_keys(section, {"probs"})
        ln, v = single(section, "probs")
        return ln, _floats(v, ln)

    sources = []
    for nu in (1, 2):
        ln, probs = probs_of(f"source.{nu}")
        errs = _check_vector(f"source{nu}", probs)
        if errs:
            raise ModelError("; ".join(errs), ln)
        if any(p == 0.0 for p in probs):
            logger.warning("source %d: dropping zero-probability symbols", nu)
        src = SourceSpec(probs).without_zeros()
        if len(src.probs) < 2:
            raise ModelError(f"source{nu}: support has fewer than 2 symbols", ln)
        sources.append(src)

    check_keys("channel", {"inputs1", "inputs2", "outputs", "row"})
    n1 = _int(single("channel", "inputs1")[1], single("channel", "inputs1")[0])
    n2 = _int(single("channel", "inputs2")[1], single("channel", "inputs2")[0])
    ny = _int(single("channel", "outputs")[1], single("channel", "outputs")[0])
    rows = [(ln, _floats(v, ln)) for ln, k, v in sections["channel"] if k == "row"]
    if len(rows) != n1 * n2:
        raise ModelError(f"[channel] has {len(rows)} rows, expected inputs1*inputs2 = {n1 * n2}")
    for r, (ln, row) in enumerate(rows):
        if len(row) != ny:
            raise ModelError(f"channel row {r + 1} has {len(row)} entries, expected {ny}", ln)
        errs = _check_vector(f"channel row {r + 1} (x1={r % n1 + 1}, x2={r // n1 + 1})", row, ny)
        if errs:
            raise ModelError("; ".join(errs), ln)
    channel = MacChannel(n1, n2, ny, tuple(tuple(row) for _, row in rows))

    q = []
    for nu, size in ((1, n1), (2, n2)):
        pair = []
        for i in (1, 2):
            ln, probs = probs_of(f"dist.{nu}.{i}")
            errs = _check_vector(f"dist.{nu}.{i}", probs, size)
            if errs:
                raise ModelError("; ".join(errs), ln)
            pair.append(InputDistribution(probs))
        q.append(tuple(pair))

    gamma = None
    if "thresholds" in sections:
        check_keys("thresholds", {"gamma1", "gamma2"})
        g = []
        for key in ("gamma1", "gamma2"):
            ln, v = single("thresholds", key)
            vals = _floats(v, ln)
            if len(vals) != 1:
                raise ModelError(f"{key} needs one value", ln)
            if not 0.0 <= vals[0] <= 1.0:
                raise ModelError(f"{key} = {vals[0]!r} outside [0, 1]", ln)
            g.append(vals[0])
        gamma = tuple(g)

    model = SystemModel(sources[0], sources[1], channel, ClassPolicy(tuple(q), gamma), name)
    problems = validate(model)
    if problems:
        raise ModelError("; ".join(problems))
    return model


def serialize_model(model: SystemModel) -> str:
    """Render ``model`` in the model-file format; ``parse_model`` inverts it exactly."""

    def fmt(values) -> str:
        return " ".join(repr(float(v)) for v in values)

    ch = model.channel
    lines = []
    if model.name:
        lines.append(f"# {model.name}")
    for nu in (1, 2):
        lines += [f"[source.{nu}]", f"probs = {fmt(model.source(nu).probs)}", ""]
    lines += ["[channel]", f"inputs1 = {ch.n1}", f"inputs2 = {ch.n2}", f"outputs = {ch.ny}"]
    for r, row in enumerate(ch.w):
        lines.append(f"row = {fmt(row)}  # x1={r % ch.n1 + 1} x2={r // ch.n1 + 1}")
    lines.append("")
    for nu in (1, 2):
        for i in (1, 2):
            lines += [f"[dist.{nu}.{i}]", f"probs = {fmt(model.q(nu, i).probs)}", ""]
    if model.policy.gamma is not None:
        g1, g2 = model.policy.gamma
        lines += ["[thresholds]", f"gamma1 = {g1!r}", f"gamma2 = {g2!r}", ""]
    return "\n".join(lines)
