"""Which control types apply to a (service, resource) pair.

Capability heuristics decide first: a control type with required capabilities
fully present is applicable, fully absent is not, partially overlapping is
undecided. Undecided types are batched into one agent prompt; the agent never
overrides a heuristic decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .catalog import ControlType, ControlTypeId, list_control_types
from .errors import DomainError
from .prompts import build_identifier_prompt
from .providers import (
    EnvelopeError,
    LlmProvider,
    make_request,
    strict_json_value,
)
from .resources import ResourceSchema


class AgentResponseInvalid(DomainError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"agent response invalid: {reason}")
        self.reason = reason


class Source(str, Enum):
    HEURISTIC = "Heuristic"
    AGENT = "Agent"


@dataclass(frozen=True)
class Applicability:
    control_type: ControlTypeId
    applicable: bool
    rationale: str
    source: Source


def heuristic_applicability(
    schema: ResourceSchema, control_types: Sequence[ControlType] | None = None
) -> dict[ControlTypeId, bool]:
    """Decide applicability by capability subset/disjointness; undecided ids absent."""
    decided: dict[ControlTypeId, bool] = {}
    for ct in control_types if control_types is not None else list_control_types():
        required = ct.required_capabilities
        if not required:
            continue
        if required <= schema.capabilities:
            decided[ct.id] = True
        elif required.isdisjoint(schema.capabilities):
            decided[ct.id] = False
    return decided


def _heuristic_rationale(ct: ControlType, schema: ResourceSchema, applicable: bool) -> str:
    tags = ", ".join(sorted(ct.required_capabilities))
    if applicable:
        return f"required capabilities ({tags}) present in schema capabilities"
    return f"required capabilities ({tags}) absent from schema capabilities"


def _parse_agent_answers(
    raw: str, undecided_ids: set[ControlTypeId]
) -> dict[ControlTypeId, tuple[bool, str]]:
    try:
        value = strict_json_value(raw, "[")
    except EnvelopeError as exc:
        raise AgentResponseInvalid(str(exc)) from exc
    assert isinstance(value, list)
    answers: dict[ControlTypeId, tuple[bool, str]] = {}
    for item in value:
        if not isinstance(item, dict) or set(item) != {"control_type", "applicable", "rationale"}:
            raise AgentResponseInvalid(
                "entries must have exactly control_type, applicable, rationale"
            )
        try:
            type_id = ControlTypeId(item["control_type"])
        except ValueError:
            raise AgentResponseInvalid(
                f"unknown control_type {item['control_type']!r}"
            ) from None
        if not isinstance(item["applicable"], bool):
            raise AgentResponseInvalid("applicable must be a boolean")
        rationale = item["rationale"]
        if not isinstance(rationale, str) or not rationale.strip():
            raise AgentResponseInvalid("rationale must be a non-empty string")
        if type_id in undecided_ids:
            answers[type_id] = (item["applicable"], rationale.strip())
    return answers


def resolve_applicability(
    schema: ResourceSchema,
    provider: LlmProvider,
    control_types: Sequence[ControlType] | None = None,
) -> list[Applicability]:
    """One Applicability per control type, in catalog order.

    Heuristically decided types never reach the agent; the remainder go out in
    a single identifier prompt. Types the agent omits default to inapplicable.
    """
    types = list(control_types) if control_types is not None else list_control_types()
    decided = heuristic_applicability(schema, types)
    undecided = [ct for ct in types if ct.id not in decided]
    agent_answers: dict[ControlTypeId, tuple[bool, str]] = {}
    if undecided:
        bundle = build_identifier_prompt(schema, undecided)
        response = provider.complete(make_request(bundle.rendered))
        agent_answers = _parse_agent_answers(response.raw, {ct.id for ct in undecided})
    results: list[Applicability] = []
    for ct in types:
        if ct.id in decided:
            applicable = decided[ct.id]
            results.append(
                Applicability(
                    control_type=ct.id,
                    applicable=applicable,
                    rationale=_heuristic_rationale(ct, schema, applicable),
                    source=Source.HEURISTIC,
                )
            )
        elif ct.id in agent_answers:
            applicable, rationale = agent_answers[ct.id]
            results.append(
                Applicability(
                    control_type=ct.id,
                    applicable=applicable,
                    rationale=rationale,
                    source=Source.AGENT,
                )
            )
        else:
            results.append(
                Applicability(
                    control_type=ct.id,
                    applicable=False,
                    rationale="agent omitted",
                    source=Source.AGENT,
                )
            )
    return results
