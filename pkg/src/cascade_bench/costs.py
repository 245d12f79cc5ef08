"""Expected per-frame cost (latency, energy, cycles) and memory of a cascade.

Two cost forms exist. The OP policy always runs the small model and adds the big
one on a fraction ``f`` of frames::

    C = C_small + f * C_big

Auxiliary-task policies run the aux classifier and then exactly one model::

    C = C_aux + (1 - f) * C_small + f * C_big

Random, static and oracle selection use the second form with ``C_aux = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from cascade_bench.domain import DomainError

DIMENSIONS = ("latency", "energy", "cycles")
MODELS = ("small", "big", "aux")

GAP8_CLOCK_HZ = 170e6


@dataclass(frozen=True)
class ModelCost:
    latency_ms: float = 0.0
    energy_mj: float = 0.0
    cycles: float = 0.0
    weight_bytes: int = 0
    activation_bytes: int = 0

    def __post_init__(self):
        for name in ("latency_ms", "energy_mj", "cycles", "weight_bytes", "activation_bytes"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0, got {getattr(self, name)}")

    def get(self, dimension: str) -> float:
        if dimension == "latency":
            return self.latency_ms
        if dimension == "energy":
            return self.energy_mj
        if dimension == "cycles":
            return self.cycles
        raise DomainError(f"unknown cost dimension {dimension!r}; expected one of {DIMENSIONS}")


def _gap8(latency_ms: float, energy_mj: float, weight_bytes: int, activation_bytes: int) -> ModelCost:
    cycles = round(latency_ms * 1e-3 * GAP8_CLOCK_HZ)
    return ModelCost(latency_ms, energy_mj, cycles, weight_bytes, activation_bytes)


# Deployed latency/energy on GAP8. Weights are the parameter counts at 8 bit;
# activation buffers are whatever makes the static footprints add up.
F1 = _gap8(7.06, 0.57, 14_800, 138_200)
F2 = _gap8(8.82, 0.71, 44_500, 138_500)
M10 = _gap8(21.76, 1.92, 46_800, 188_200)
# Aux head-localization CNN, inverted from the D1 Aux-HLC 8x6 deployment row.
AUX_8X6 = _gap8(0.43, 0.042, 39_200, 20_000)


@dataclass(frozen=True)
class CostTable:
    small: ModelCost = field(default_factory=lambda: F1)
    big: ModelCost = field(default_factory=lambda: M10)
    aux: ModelCost = field(default_factory=ModelCost)

    def model(self, name: str) -> ModelCost:
        if name not in MODELS:
            raise DomainError(f"unknown model {name!r}")
        return getattr(self, name)

    def without_aux(self) -> "CostTable":
        return replace(self, aux=ModelCost())


def d1_costs() -> CostTable:
    """F1 small, M1.0 big, 8x6 aux classifier."""
    return CostTable(small=F1, big=M10, aux=AUX_8X6)


def d2_costs() -> CostTable:
    """F2 small, M1.0 big, 8x6 aux classifier."""
    return CostTable(small=F2, big=M10, aux=AUX_8X6)


PRESETS = {"d1": d1_costs, "d2": d2_costs}


def _check_fraction(f_big: float) -> None:
    if not 0.0 <= f_big <= 1.0:
        raise DomainError(f"big fraction must lie in [0, 1], got {f_big}")


def cost_op(f_big: float, costs: CostTable, dimension: str = "latency") -> float:
    _check_fraction(f_big)
    return costs.small.get(dimension) + f_big * costs.big.get(dimension)


def cost_aux(f_big: float, costs: CostTable, dimension: str = "latency") -> float:
    _check_fraction(f_big)
    return (
        costs.aux.get(dimension)
        + (1.0 - f_big) * costs.small.get(dimension)
        + f_big * costs.big.get(dimension)
    )


def memory_footprint(deployed_models: Iterable[str], costs: CostTable) -> int:
    """All deployed weights plus the single largest activation buffer."""
    models = sorted(set(deployed_models))
    if not models:
        raise DomainError("at least one deployed model is required")
    entries = [costs.model(m) for m in models]
    return sum(e.weight_bytes for e in entries) + max(e.activation_bytes for e in entries)


POLICY_KINDS = ("static_small", "static_big", "random", "op", "aux_sm", "aux_hlc", "oracle")


def deployed_models(policy_kind: str) -> tuple[str, ...]:
    if policy_kind == "static_small":
        return ("small",)
    if policy_kind == "static_big":
        return ("big",)
    if policy_kind in ("random", "op", "oracle"):
        return ("small", "big")
    if policy_kind in ("aux_sm", "aux_hlc"):
        return ("small", "big", "aux")
    raise DomainError(f"unknown policy kind {policy_kind!r}")


@dataclass(frozen=True)
class CostReport:
    big_fraction: float
    latency_ms: float
    energy_mj: float
    cycles: float
    memory_bytes: int

    def get(self, dimension: str) -> float:
        if dimension == "latency":
            return self.latency_ms
        if dimension == "energy":
            return self.energy_mj
        if dimension == "cycles":
            return self.cycles
        if dimension == "memory":
            return float(self.memory_bytes)
        raise DomainError(f"unknown cost dimension {dimension!r}")


def report_from_fraction(
    f_big: float, costs: CostTable, policy_kind: str, small_always: bool = False
) -> CostReport:
    """Cost report for a policy kind given its realized big-model fraction.

    ``small_always`` marks an oracle that averages, and so pays like OP.
    """
    if policy_kind == "op" or (policy_kind == "oracle" and small_always):
        fn, table = cost_op, costs
    elif policy_kind in ("aux_sm", "aux_hlc"):
        fn, table = cost_aux, costs
    else:
        fn, table = cost_aux, costs.without_aux()
    return CostReport(
        big_fraction=f_big,
        latency_ms=fn(f_big, table, "latency"),
        energy_mj=fn(f_big, table, "energy"),
        cycles=fn(f_big, table, "cycles"),
        memory_bytes=memory_footprint(deployed_models(policy_kind), costs),
    )


def report(decisions: Sequence, costs: CostTable, policy_kind: str) -> CostReport:
    """Bind a decision stream to the cost form of its policy kind.

    Raises DomainError when the invocation flags do not fit the policy's structure.
    """
    if not decisions:
        raise DomainError("cannot cost an empty decision stream")
    n_big = 0
    small_always = policy_kind == "op" or (
        policy_kind == "oracle" and all(d.invoked_small for d in decisions)
        and any(d.invoked_big for d in decisions)
    )
    for d in decisions:
        if not (d.invoked_small or d.invoked_big):
            raise DomainError(f"frame {d.frame_t}: neither model invoked")
        if small_always:
            if not d.invoked_small or d.invoked_aux:
                raise DomainError(f"frame {d.frame_t}: {policy_kind} must run the small model and no aux model")
        else:
            if d.invoked_small and d.invoked_big:
                raise DomainError(f"frame {d.frame_t}: {policy_kind} runs exactly one model per frame")
            if d.invoked_aux != (policy_kind in ("aux_sm", "aux_hlc")):
                raise DomainError(f"frame {d.frame_t}: unexpected aux invocation for {policy_kind}")
        n_big += bool(d.invoked_big)
    return report_from_fraction(n_big / len(decisions), costs, policy_kind, small_always)
