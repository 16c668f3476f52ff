import json
from dataclasses import replace

import pytest

from controlgen.applicability import (
    AgentResponseInvalid,
    Source,
    heuristic_applicability,
    resolve_applicability,
)
from controlgen.catalog import ControlTypeId, list_control_types
from controlgen.prompts import build_identifier_prompt
from controlgen.providers import ReplayProvider
from controlgen.resources import ResourceSchema
from oracles import brute_subset_applicability


def schema_with(capabilities: set) -> ResourceSchema:
    return ResourceSchema(
        service="svc",
        resource="Thing",
        describe_api="DescribeThing",
        fields=(),
        capabilities=frozenset(capabilities),
    )


def undecidable_types(count: int) -> list:
    """Nine types, the first `count` stripped of required capabilities so the
    heuristic cannot decide them."""
    types = list_control_types()
    return [
        replace(ct, required_capabilities=frozenset()) if i < count else ct
        for i, ct in enumerate(types)
    ]


def test_subset_and_disjoint_rule():
    decided = heuristic_applicability(schema_with({"encryption_at_rest", "tagging"}))
    assert decided[ControlTypeId.ENCRYPTION_AT_REST] is True
    assert decided[ControlTypeId.MULTI_AZ] is False


def test_empty_capabilities_decides_all_false():
    decided = heuristic_applicability(schema_with(set()))
    assert len(decided) == 9
    assert not any(decided.values())


def test_heuristics_match_subset_oracle_on_catalog(catalog):
    for schema in catalog.schemas:
        decided = heuristic_applicability(schema)
        for ct in list_control_types():
            expected = brute_subset_applicability(ct.required_capabilities, schema.capabilities)
            assert decided.get(ct.id) == expected


def test_partial_overlap_is_undecided():
    types = list_control_types()
    two_tag = replace(
        types[0], required_capabilities=frozenset({"encryption_at_rest", "multi_az"})
    )
    decided = heuristic_applicability(schema_with({"encryption_at_rest"}), [two_tag])
    assert types[0].id not in decided


class CountingReplay(ReplayProvider):
    pass


def test_all_decided_makes_zero_provider_calls(catalog, tmp_path):
    provider = CountingReplay(tmp_path)
    results = resolve_applicability(catalog.get("rds", "DBInstance"), provider)
    assert provider.calls == 0
    assert len(results) == 9
    assert all(r.source is Source.HEURISTIC for r in results)
    assert all(r.rationale for r in results)


def test_results_in_catalog_order(catalog, tmp_path):
    results = resolve_applicability(catalog.get("sqs", "Queue"), CountingReplay(tmp_path))
    assert [r.control_type for r in results] == [ct.id for ct in list_control_types()]
    assert results[0].applicable is True
    assert sum(r.applicable for r in results) == 1


def _write_agent_fixture(tmp_path, schema, candidates, answer) -> None:
    bundle = build_identifier_prompt(schema, candidates)
    (tmp_path / f"{bundle.prompt_hash}.txt").write_text(json.dumps(answer), encoding="utf-8")


def test_agent_answers_undecided_types(tmp_path):
    # Hand-checked agent answer: at-rest encryption applies (the schema holds
    # persistent data), in-transit does not (no network listener).
    schema = schema_with({"tagging"})
    types = undecidable_types(2)
    undecided = types[:2]
    answer = [
        {
            "control_type": "encryption_at_rest",
            "applicable": True,
            "rationale": "the resource stores data persistently",
        },
        {
            "control_type": "encryption_in_transit",
            "applicable": False,
            "rationale": "the resource accepts no network connections",
        },
    ]
    _write_agent_fixture(tmp_path, schema, undecided, answer)
    provider = CountingReplay(tmp_path)
    results = resolve_applicability(schema, provider, types)
    assert provider.calls == 1
    assert len(results) == 9
    agent_results = [r for r in results if r.source is Source.AGENT]
    assert len(agent_results) == 2
    assert agent_results[0].applicable is True
    assert agent_results[1].applicable is False


def test_agent_omission_defaults_to_not_applicable(tmp_path):
    schema = schema_with({"tagging"})
    types = undecidable_types(2)
    answer = [
        {
            "control_type": "encryption_at_rest",
            "applicable": True,
            "rationale": "stores data",
        }
    ]
    _write_agent_fixture(tmp_path, schema, types[:2], answer)
    results = resolve_applicability(schema, CountingReplay(tmp_path), types)
    omitted = next(r for r in results if r.control_type is ControlTypeId.ENCRYPTION_IN_TRANSIT)
    assert omitted.applicable is False
    assert omitted.rationale == "agent omitted"
    assert omitted.source is Source.AGENT


def test_agent_never_overrides_heuristics(tmp_path):
    schema = schema_with({"tagging"})
    types = undecidable_types(1)
    answer = [
        {"control_type": "encryption_at_rest", "applicable": True, "rationale": "ok"},
        {"control_type": "tagging", "applicable": False, "rationale": "should be ignored"},
    ]
    _write_agent_fixture(tmp_path, schema, types[:1], answer)
    results = resolve_applicability(schema, CountingReplay(tmp_path), types)
    tagging = next(r for r in results if r.control_type is ControlTypeId.TAGGING)
    assert tagging.applicable is True
    assert tagging.source is Source.HEURISTIC


def test_malformed_agent_json_rejected(tmp_path):
    schema = schema_with({"tagging"})
    types = undecidable_types(1)
    bundle = build_identifier_prompt(schema, types[:1])
    (tmp_path / f"{bundle.prompt_hash}.txt").write_text("not json", encoding="utf-8")
    with pytest.raises(AgentResponseInvalid):
        resolve_applicability(schema, CountingReplay(tmp_path), types)


def test_agent_entry_with_extra_keys_rejected(tmp_path):
    schema = schema_with({"tagging"})
    types = undecidable_types(1)
    answer = [
        {
            "control_type": "encryption_at_rest",
            "applicable": True,
            "rationale": "ok",
            "confidence": 1.0,
        }
    ]
    _write_agent_fixture(tmp_path, schema, types[:1], answer)
    with pytest.raises(AgentResponseInvalid):
        resolve_applicability(schema, CountingReplay(tmp_path), types)
