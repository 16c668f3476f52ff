import hashlib
from pathlib import Path

import pytest

from controlgen.catalog import ControlTypeId, get_control_type, list_control_types
from controlgen.prompts import (
    SECTION_DELIMITER,
    ExemplarTypeMismatch,
    NoCandidates,
    PromptTooLong,
    UnknownPlaceholder,
    build_identifier_prompt,
    build_prompt,
    render_template,
)
from controlgen.retrieval import retrieve_exemplars, retrieve_snippets, tokenize

GOLDEN = Path(__file__).resolve().parent / "golden" / "prompt_dynamodb_encryption.txt"


def dynamodb_bundle(catalog, index, k=3, m=2):
    schema = catalog.get("dynamodb", "Table")
    type_id = ControlTypeId.ENCRYPTION_AT_REST
    query = tokenize("dynamodb Table")
    exemplar_hits = retrieve_exemplars(index, type_id, query, k)
    snippet_hits = retrieve_snippets(index, "dynamodb", "Table", m)
    return build_prompt(
        get_control_type(type_id),
        schema,
        [index.get_exemplar(h.id) for h in exemplar_hits],
        [index.get_snippet(h.id) for h in snippet_hits],
    )


def test_prompt_matches_frozen_golden_file(catalog, index):
    bundle = dynamodb_bundle(catalog, index)
    assert bundle.rendered == GOLDEN.read_text(encoding="utf-8")


def test_prompt_contains_required_substrings(catalog, index):
    rendered = dynamodb_bundle(catalog, index).rendered
    for needle in (
        "expert security engineer",
        "DescribeTable",
        "Periodic",
        "Configuration Changes",
        "JSON",
    ):
        assert needle in rendered


def test_prompt_hash_is_sha256_of_rendered(catalog, index):
    bundle = dynamodb_bundle(catalog, index)
    assert bundle.prompt_hash == hashlib.sha256(bundle.rendered.encode()).hexdigest()
    assert len(bundle.prompt_hash) == 64


def test_rendered_is_delimited_concatenation(catalog, index):
    bundle = dynamodb_bundle(catalog, index)
    assert bundle.rendered == SECTION_DELIMITER.join(bundle.sections())


def test_same_inputs_same_hash(catalog, index):
    assert dynamodb_bundle(catalog, index).prompt_hash == dynamodb_bundle(catalog, index).prompt_hash


def test_single_input_changes_change_hash(catalog, index):
    base = dynamodb_bundle(catalog, index).prompt_hash
    assert dynamodb_bundle(catalog, index, m=1).prompt_hash != base
    other_schema = catalog.get("sqs", "Queue")
    other = build_prompt(
        get_control_type(ControlTypeId.ENCRYPTION_AT_REST), other_schema, [], []
    )
    assert other.prompt_hash != base


def test_exemplar_type_mismatch(catalog, index):
    schema = catalog.get("dynamodb", "Table")
    tagging_exemplar = next(
        ex for ex in index.exemplars() if ex.control_type is ControlTypeId.TAGGING
    )
    with pytest.raises(ExemplarTypeMismatch):
        build_prompt(
            get_control_type(ControlTypeId.ENCRYPTION_AT_REST),
            schema,
            [tagging_exemplar],
            [],
        )


def test_exemplar_blocks_keep_rank_order(catalog, index):
    bundle = dynamodb_bundle(catalog, index)
    positions = [bundle.rendered.find(block) for block in bundle.exemplar_blocks]
    assert positions == sorted(positions)
    assert all(p >= 0 for p in positions)


def test_identifier_prompt_contains_all_candidate_descriptions(catalog):
    schema = catalog.get("rds", "DBInstance")
    bundle = build_identifier_prompt(schema, list_control_types())
    assert len(bundle.exemplar_blocks) == 9
    for ct in list_control_types():
        assert f"`{ct.id.value}`" in bundle.rendered


def test_identifier_prompt_single_candidate(catalog):
    schema = catalog.get("rds", "DBInstance")
    bundle = build_identifier_prompt(schema, [get_control_type(ControlTypeId.TAGGING)])
    assert len(bundle.exemplar_blocks) == 1


def test_identifier_prompt_deterministic(catalog):
    schema = catalog.get("rds", "DBInstance")
    first = build_identifier_prompt(schema, list_control_types())
    second = build_identifier_prompt(schema, list_control_types())
    assert first.prompt_hash == second.prompt_hash


def test_identifier_prompt_no_candidates(catalog):
    with pytest.raises(NoCandidates):
        build_identifier_prompt(catalog.get("rds", "DBInstance"), [])


def test_unknown_placeholder_is_an_error(tmp_path):
    (tmp_path / "task.txt").write_text("hello {{nonsense}}", encoding="utf-8")
    with pytest.raises(UnknownPlaceholder):
        render_template("task.txt", {"service": "x"}, template_dir=tmp_path)


def test_prompt_length_cap(catalog, index):
    schema = catalog.get("dynamodb", "Table")
    with pytest.raises(PromptTooLong):
        build_prompt(
            get_control_type(ControlTypeId.ENCRYPTION_AT_REST),
            schema,
            [],
            [],
            max_chars=100,
        )
