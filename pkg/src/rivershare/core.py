"""Domain types and allocation rules for sharing water along a linear river.

Agents sit on a line and are indexed 0..n-1 from the most upstream agent to
the river mouth.  An inflow profile records how much water enters the river
on each agent's territory.  An allocation assigns water rights subject to
two physical constraints: the whole aggregate inflow is distributed
(non-wastefulness), and no upstream group of agents is assigned more water
than has entered the river up to its last member (feasibility, because
water only flows downstream).

Every rule in this module is a linear map of the inflow profile, and every
rule output satisfies both constraints by construction; construction
re-validates them anyway.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

RELATIVE_TOLERANCE = 1e-9
TOLERANCE_FLOOR = 1e-12


class RiverShareError(ValueError):
    """Base class for domain errors raised by this package."""


class DimensionError(RiverShareError):
    """Vector lengths are unusable: too short, or mutually inconsistent."""


class ParameterError(RiverShareError):
    """A rule or family parameter is outside its legal range."""


class AllocationError(RiverShareError):
    """A candidate allocation violates non-wastefulness or feasibility."""


def tolerance_for(scale: float) -> float:
    """Default comparison tolerance for quantities of the given magnitude."""
    return max(RELATIVE_TOLERANCE * abs(scale), TOLERANCE_FLOOR)


def _as_floats(values: Iterable[float], what: str) -> tuple[float, ...]:
    out = []
    for k, v in enumerate(values):
        f = float(v)
        if not math.isfinite(f):
            raise RiverShareError(f"{what} at position {k} must be finite, got {v!r}")
        out.append(f)
    return tuple(out)


@dataclass(frozen=True)
class InflowProfile:
    """Per-agent inflows, most upstream first.  Needs n >= 2, entries >= 0."""

    inflows: tuple[float, ...]

    def __post_init__(self):
        values = _as_floats(self.inflows, "inflow")
        if len(values) < 2:
            raise DimensionError(
                f"an inflow profile needs at least two agents, got {len(values)}"
            )
        for k, v in enumerate(values):
            if v < 0.0:
                raise RiverShareError(f"inflow at position {k} must be >= 0, got {v}")
        object.__setattr__(self, "inflows", values)

    def __len__(self) -> int:
        return len(self.inflows)

    def __getitem__(self, k: int) -> float:
        return self.inflows[k]

    def __iter__(self):
        return iter(self.inflows)

    @property
    def total(self) -> float:
        return math.fsum(self.inflows)

    def scaled(self, factor: float) -> "InflowProfile":
        if factor < 0:
            raise ParameterError(f"scale factor must be >= 0, got {factor}")
        return InflowProfile(tuple(v * factor for v in self.inflows))

    def bumped(self, position: int, delta: float) -> "InflowProfile":
        """Copy with `delta` added to the inflow at `position`."""
        if not 0 <= position < len(self.inflows):
            raise DimensionError(f"position {position} out of range for n={len(self)}")
        values = list(self.inflows)
        values[position] += delta
        return InflowProfile(tuple(values))


def as_profile(e) -> InflowProfile:
    if isinstance(e, InflowProfile):
        return e
    return InflowProfile(tuple(e))


@dataclass(frozen=True)
class Allocation:
    """Water rights per agent.  Produced by rules; validated against a profile."""

    amounts: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "amounts", _as_floats(self.amounts, "amount"))

    def __len__(self) -> int:
        return len(self.amounts)

    def __getitem__(self, k: int) -> float:
        return self.amounts[k]

    def __iter__(self):
        return iter(self.amounts)

    @property
    def total(self) -> float:
        return math.fsum(self.amounts)


@dataclass(frozen=True)
class ObservedAllocation:
    """An observed division of the water, e.g. measured withdrawals.

    Unlike Allocation it carries no feasibility promise; observed behaviour
    may well violate it.  Entries must be non-negative.
    """

    amounts: tuple[float, ...]

    def __post_init__(self):
        values = _as_floats(self.amounts, "observed amount")
        for k, v in enumerate(values):
            if v < 0.0:
                raise RiverShareError(f"observed amount at position {k} must be >= 0, got {v}")
        object.__setattr__(self, "amounts", values)

    def __len__(self) -> int:
        return len(self.amounts)

    def __getitem__(self, k: int) -> float:
        return self.amounts[k]

    def __iter__(self):
        return iter(self.amounts)

    @property
    def total(self) -> float:
        return math.fsum(self.amounts)


def as_observed(z) -> ObservedAllocation:
    if isinstance(z, ObservedAllocation):
        return z
    if isinstance(z, Allocation):
        return ObservedAllocation(z.amounts)
    return ObservedAllocation(tuple(z))


@dataclass(frozen=True)
class ValidationResult:
    """Boolean verdict plus the first violated constraint, if any."""

    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_allocation(e, x, tol: float | None = None) -> ValidationResult:
    """Check non-negativity, non-wastefulness and cumulative feasibility.

    Returns a truthy ValidationResult when all constraints hold within the
    tolerance; otherwise the result is falsy and names the first violation.
    """
    e = as_profile(e)
    amounts = x.amounts if isinstance(x, (Allocation, ObservedAllocation)) else _as_floats(x, "amount")
    if len(amounts) != len(e):
        raise DimensionError(
            f"allocation has {len(amounts)} entries but the profile has {len(e)}"
        )
    if tol is None:
        tol = tolerance_for(e.total)
    for k, v in enumerate(amounts):
        if v < -tol:
            return ValidationResult(False, f"negative amount {v} at position {k}")
    allocated = math.fsum(amounts)
    inflow = e.total
    if abs(allocated - inflow) > tol:
        return ValidationResult(
            False,
            f"non-wastefulness: allocated total {allocated} differs from inflow total {inflow}",
        )
    # water cannot flow upstream: every prefix is capped by what has entered
    prefix_x = 0.0
    prefix_e = 0.0
    for k in range(len(e) - 1):
        prefix_x += amounts[k]
        prefix_e += e[k]
        if prefix_x > prefix_e + tol:
            return ValidationResult(
                False,
                f"cumulative feasibility at position {k}: "
                f"first {k + 1} agents get {prefix_x} but only {prefix_e} has entered",
            )
    return ValidationResult(True)


def _finalize(e: InflowProfile, raw: list[float]) -> Allocation:
    # clamp float wobble in (-tol, 0) to exactly 0, then re-validate
    tol = tolerance_for(e.total)
    cleaned = [0.0 if -tol < v < 0.0 else v for v in raw]
    verdict = validate_allocation(e, cleaned, tol)
    if not verdict:
        raise AllocationError(f"rule produced an invalid allocation: {verdict.reason}")
    return Allocation(tuple(cleaned))


# ---------------------------------------------------------------------------
# allocation rules


def _nt_raw(e: InflowProfile) -> list[float]:
    return list(e.inflows)


def _eft_raw(e: InflowProfile) -> list[float]:
    # each inflow is handed over in full and split equally among the agents
    # strictly downstream; the terminal agent also keeps its own inflow
    n = len(e)
    x = [0.0] * n
    acc = 0.0
    for i in range(1, n):
        acc += e[i - 1] / (n - i)
        x[i] = acc
    x[n - 1] += e[n - 1]
    return x


def _shapley_raw(e: InflowProfile) -> list[float]:
    # inflow j is split equally among agent j and everyone downstream
    n = len(e)
    x = []
    acc = 0.0
    for j in range(n):
        acc += e[j] / (n - j)
        x.append(acc)
    return x


def _ept_raw(e: InflowProfile) -> list[float]:
    # each agent cuts its inflow into n-1 equal parts, passes one part to
    # every downstream agent and keeps the parts matched to upstream agents
    n = len(e)
    x = [0.0] * n
    upstream = 0.0
    for i in range(n):
        x[i] = (i * e[i] + upstream) / (n - 1)
        upstream += e[i]
    return x


def no_transfer(e) -> Allocation:
    """Every agent keeps exactly its own inflow (absolute sovereignty)."""
    e = as_profile(e)
    return _finalize(e, _nt_raw(e))


def egalitarian_full_transfer(e) -> Allocation:
    """Each inflow is split equally among the agents strictly downstream.

    The most upstream agent receives nothing; the terminal agent keeps its
    own inflow on top of the shares it receives.
    """
    e = as_profile(e)
    return _finalize(e, _eft_raw(e))


def shapley(e) -> Allocation:
    """Each inflow is split equally among its owner and all downstream agents."""
    e = as_profile(e)
    return _finalize(e, _shapley_raw(e))


def egalitarian_partial_transfer(e) -> Allocation:
    """Each agent transfers an equal part of its inflow to every downstream agent.

    Agent i keeps i/(n-1) of its own inflow and receives 1/(n-1) of every
    upstream inflow.
    """
    e = as_profile(e)
    return _finalize(e, _ept_raw(e))


def _check_weight(weight: float, name: str) -> float:
    weight = float(weight)
    if not (0.0 <= weight <= 1.0) or not math.isfinite(weight):
        raise ParameterError(f"{name} must lie in [0, 1], got {weight}")
    return weight


def compromise(e, weight: float) -> Allocation:
    """Convex mix: `weight` on keeping own inflow, the rest on full transfer."""
    e = as_profile(e)
    w = _check_weight(weight, "compromise weight")
    a = _nt_raw(e)
    b = _eft_raw(e)
    return _finalize(e, [w * ai + (1.0 - w) * bi for ai, bi in zip(a, b)])


def partial_compromise(e, weight: float) -> Allocation:
    """Convex mix: `weight` on keeping own inflow, the rest on partial transfer."""
    e = as_profile(e)
    w = _check_weight(weight, "partial compromise weight")
    a = _nt_raw(e)
    b = _ept_raw(e)
    return _finalize(e, [w * ai + (1.0 - w) * bi for ai, bi in zip(a, b)])


@dataclass(frozen=True)
class RetentionShares:
    """Per-agent retained fractions for the general rule family.

    Entry k is the fraction of its own inflow that non-terminal agent k
    keeps; the rest is split equally among the agents downstream of k.  The
    terminal agent always keeps everything, so only n-1 entries are stored.
    """

    shares: tuple[float, ...]

    def __post_init__(self):
        values = _as_floats(self.shares, "retention share")
        if len(values) < 1:
            raise DimensionError("need at least one retention share (n >= 2)")
        for k, v in enumerate(values):
            if not 0.0 <= v <= 1.0:
                raise ParameterError(f"retention share at position {k} must lie in [0, 1], got {v}")
        object.__setattr__(self, "shares", values)

    def __len__(self) -> int:
        return len(self.shares)

    def __getitem__(self, k: int) -> float:
        return self.shares[k]

    def __iter__(self):
        return iter(self.shares)

    @property
    def agent_count(self) -> int:
        return len(self.shares) + 1


def as_retention(shares) -> RetentionShares:
    if isinstance(shares, RetentionShares):
        return shares
    return RetentionShares(tuple(shares))


def _retention_raw(e: InflowProfile, shares: RetentionShares) -> list[float]:
    n = len(e)
    x = [0.0] * n
    incoming = 0.0  # equal split of everything released upstream of position i
    for i in range(n):
        if i == n - 1:
            x[i] = e[i] + incoming
        else:
            a = shares[i]
            x[i] = a * e[i] + incoming
            incoming += (1.0 - a) * e[i] / (n - 1 - i)
    return x


def retention_rule(e, shares) -> Allocation:
    """General family: agent k keeps a fraction of its inflow, splits the rest.

    Agent k keeps shares[k] of its own inflow and releases the remainder in
    equal parts to every agent downstream; the terminal agent keeps all it
    has.  All the named rules in this module are members of this family.
    """
    e = as_profile(e)
    shares = as_retention(shares)
    if shares.agent_count != len(e):
        raise DimensionError(
            f"{len(shares)} retention shares imply {shares.agent_count} agents, "
            f"but the profile has {len(e)}"
        )
    return _finalize(e, _retention_raw(e, shares))


def source(e) -> int | None:
    """Most upstream non-terminal position with positive inflow, if any."""
    e = as_profile(e)
    for k in range(len(e) - 1):
        if e[k] > 0.0:
            return k
    return None


# ---------------------------------------------------------------------------
# retention-share constructions that reproduce the named rules


def shapley_shares(n: int) -> RetentionShares:
    """Retention shares under which the general family equals the Shapley rule."""
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    return RetentionShares(tuple(1.0 / (n - k) for k in range(n - 1)))


def compromise_shares(n: int, weight: float) -> RetentionShares:
    """Constant retention shares, matching the compromise rule of that weight."""
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    w = _check_weight(weight, "compromise weight")
    return RetentionShares((w,) * (n - 1))


def partial_compromise_shares(n: int, weight: float) -> RetentionShares:
    """Retention shares matching the partial compromise rule of that weight.

    Retention rises linearly along the river: position k keeps
    1 - (1-weight) * (n-1-k)/(n-1).
    """
    if n < 2:
        raise DimensionError(f"need n >= 2, got {n}")
    w = _check_weight(weight, "partial compromise weight")
    return RetentionShares(
        tuple(1.0 - (1.0 - w) * (n - 1 - k) / (n - 1) for k in range(n - 1))
    )


# ---------------------------------------------------------------------------
# rule descriptors


class RuleKind(enum.Enum):
    NO_TRANSFER = "nt"
    EGALITARIAN_FULL_TRANSFER = "eft"
    EGALITARIAN_PARTIAL_TRANSFER = "ept"
    SHAPLEY = "shapley"
    COMPROMISE = "compromise"
    PARTIAL_COMPROMISE = "partial"
    RETENTION = "alpha"


_WEIGHTED_KINDS = (RuleKind.COMPROMISE, RuleKind.PARTIAL_COMPROMISE)


@dataclass(frozen=True)
class RuleSpec:
    """A rule plus its parameters, as a value that can be stored and applied."""

    kind: RuleKind
    weight: float | None = None
    retention: RetentionShares | None = None

    def __post_init__(self):
        if self.kind in _WEIGHTED_KINDS:
            if self.weight is None:
                raise ParameterError(f"rule '{self.kind.value}' needs a weight in [0, 1]")
            object.__setattr__(self, "weight", _check_weight(self.weight, "weight"))
            if self.retention is not None:
                raise ParameterError(f"rule '{self.kind.value}' takes no retention shares")
        elif self.kind is RuleKind.RETENTION:
            if self.retention is None:
                raise ParameterError("rule 'alpha' needs retention shares")
            object.__setattr__(self, "retention", as_retention(self.retention))
            if self.weight is not None:
                raise ParameterError("rule 'alpha' takes no scalar weight")
        else:
            if self.weight is not None or self.retention is not None:
                raise ParameterError(f"rule '{self.kind.value}' takes no parameters")

    @classmethod
    def no_transfer(cls) -> "RuleSpec":
        return cls(RuleKind.NO_TRANSFER)

    @classmethod
    def egalitarian_full_transfer(cls) -> "RuleSpec":
        return cls(RuleKind.EGALITARIAN_FULL_TRANSFER)

    @classmethod
    def egalitarian_partial_transfer(cls) -> "RuleSpec":
        return cls(RuleKind.EGALITARIAN_PARTIAL_TRANSFER)

    @classmethod
    def shapley(cls) -> "RuleSpec":
        return cls(RuleKind.SHAPLEY)

    @classmethod
    def compromise(cls, weight: float) -> "RuleSpec":
        return cls(RuleKind.COMPROMISE, weight=weight)

    @classmethod
    def partial_compromise(cls, weight: float) -> "RuleSpec":
        return cls(RuleKind.PARTIAL_COMPROMISE, weight=weight)

    @classmethod
    def retention_rule(cls, shares) -> "RuleSpec":
        return cls(RuleKind.RETENTION, retention=as_retention(shares))

    @property
    def fixed_agent_count(self) -> int | None:
        """Agent count this rule is pinned to, or None when size-generic."""
        if self.retention is not None:
            return self.retention.agent_count
        return None

    def label(self) -> str:
        """Round-trippable text form, e.g. 'nt' or 'compromise:0.5'."""
        if self.kind in _WEIGHTED_KINDS:
            return f"{self.kind.value}:{self.weight!r}"
        if self.kind is RuleKind.RETENTION:
            return "alpha:" + ",".join(repr(v) for v in self.retention)
        return self.kind.value

    def apply(self, e) -> Allocation:
        e = as_profile(e)
        if self.kind is RuleKind.NO_TRANSFER:
            return no_transfer(e)
        if self.kind is RuleKind.EGALITARIAN_FULL_TRANSFER:
            return egalitarian_full_transfer(e)
        if self.kind is RuleKind.EGALITARIAN_PARTIAL_TRANSFER:
            return egalitarian_partial_transfer(e)
        if self.kind is RuleKind.SHAPLEY:
            return shapley(e)
        if self.kind is RuleKind.COMPROMISE:
            return compromise(e, self.weight)
        if self.kind is RuleKind.PARTIAL_COMPROMISE:
            return partial_compromise(e, self.weight)
        return retention_rule(e, self.retention)
