import pytest

from controlgen import gherkin
from controlgen.catalog import ControlTypeId
from controlgen.retrieval import (
    DocSnippet,
    DuplicateId,
    Exemplar,
    UnparseableExemplar,
    build_index,
    retrieve_exemplars,
    retrieve_snippets,
    tokenize,
)
from oracles import brute_bm25_rank


def make_gherkin(name: str, description: str) -> str:
    control = gherkin.build_control(
        rule_identifier="FIXTURE_RULE",
        rule_name=name,
        description=description,
        trigger=gherkin.Trigger.PERIODIC,
        rule_parameters={},
        scenarios=[
            gherkin.scenario_from_steps(
                "case",
                [("Given", "a resource"), ("Then", "the control returns COMPLIANT")],
            )
        ],
    )
    return gherkin.serialize(control)


def make_exemplar(item_id, control_type, service, resource, name, description) -> Exemplar:
    return Exemplar(
        id=item_id,
        control_type=control_type,
        service=service,
        resource=resource,
        gherkin_text=make_gherkin(name, description),
    )


ENCRYPTION_CORPUS = [
    make_exemplar(
        "ex_a", ControlTypeId.ENCRYPTION_AT_REST, "dynamodb", "Table",
        "dynamodb table encryption", "checks the dynamodb table encryption state",
    ),
    make_exemplar(
        "ex_b", ControlTypeId.ENCRYPTION_AT_REST, "dynamodb", "Table",
        "table sse", "dynamodb table server side encryption",
    ),
    make_exemplar(
        "ex_c", ControlTypeId.ENCRYPTION_AT_REST, "rds", "DBInstance",
        "rds storage encryption", "checks rds storage encryption",
    ),
    make_exemplar(
        "ex_d", ControlTypeId.ENCRYPTION_AT_REST, "redshift", "Cluster",
        "redshift cluster encryption", "checks redshift cluster encryption",
    ),
    make_exemplar(
        "ex_e", ControlTypeId.ENCRYPTION_AT_REST, "s3", "Bucket",
        "bucket encryption", "checks bucket default encryption",
    ),
]


def token_bags(index):
    return {ex.id: list(ex.tokens) for ex in index.exemplars()}


def test_index_counts():
    snippets = [
        DocSnippet("sn1", "dynamodb", "Table", "DescribeTable", "body one"),
        DocSnippet("sn2", "dynamodb", "Table", "DescribeTable", "body two longer"),
    ]
    index = build_index(ENCRYPTION_CORPUS[:3], snippets)
    assert (index.exemplar_count, index.snippet_count) == (3, 2)


def test_duplicate_exemplar_id():
    with pytest.raises(DuplicateId):
        build_index([ENCRYPTION_CORPUS[0], ENCRYPTION_CORPUS[0]], [])


def test_unparseable_exemplar():
    bad = Exemplar(
        id="bad",
        control_type=ControlTypeId.TAGGING,
        service="s",
        resource="R",
        gherkin_text="not a control",
    )
    with pytest.raises(UnparseableExemplar):
        build_index([bad], [])


def test_retrieve_exemplars_matches_brute_force_oracle():
    index = build_index(ENCRYPTION_CORPUS, [])
    query = ["dynamodb", "table"]
    results = retrieve_exemplars(index, ControlTypeId.ENCRYPTION_AT_REST, query, 2)
    expected = brute_bm25_rank(token_bags(index), [ex.id for ex in ENCRYPTION_CORPUS], query, 2)
    assert [(r.id, r.rank) for r in results] == [
        (doc_id, i + 1) for i, (doc_id, _) in enumerate(expected)
    ]
    # both dynamodb/Table exemplars contain both query tokens and rank first
    assert {results[0].id, results[1].id} == {"ex_a", "ex_b"}
    for result, (_, score) in zip(results, expected):
        assert result.score == pytest.approx(score, rel=1e-9)


def test_zero_score_exemplars_excluded():
    index = build_index(ENCRYPTION_CORPUS, [])
    results = retrieve_exemplars(
        index, ControlTypeId.ENCRYPTION_AT_REST, ["nonexistentterm"], 5
    )
    assert results == []


def test_k_larger_than_corpus_saturates():
    index = build_index(ENCRYPTION_CORPUS, [])
    results = retrieve_exemplars(index, ControlTypeId.ENCRYPTION_AT_REST, ["encryption"], 50)
    assert 0 < len(results) <= 5
    assert all(r.score > 0 for r in results)


def test_control_type_hard_filter():
    mixed = ENCRYPTION_CORPUS + [
        make_exemplar(
            "ex_tag", ControlTypeId.TAGGING, "dynamodb", "Table",
            "dynamodb table tags", "checks dynamodb table tagging",
        )
    ]
    index = build_index(mixed, [])
    results = retrieve_exemplars(
        index, ControlTypeId.ENCRYPTION_AT_REST, ["dynamodb", "table"], 10
    )
    assert "ex_tag" not in [r.id for r in results]


def test_retrieval_deterministic():
    index = build_index(ENCRYPTION_CORPUS, [])
    first = retrieve_exemplars(index, ControlTypeId.ENCRYPTION_AT_REST, ["encryption"], 3)
    second = retrieve_exemplars(index, ControlTypeId.ENCRYPTION_AT_REST, ["encryption"], 3)
    assert first == second


def test_snippets_shortest_first():
    snippets = [
        DocSnippet("sn_long", "dynamodb", "Table", "DescribeTable", "x" * 400),
        DocSnippet("sn_short", "dynamodb", "Table", "DescribeTable", "x" * 50),
        DocSnippet("sn_mid", "dynamodb", "Table", "DescribeTable", "x" * 100),
        DocSnippet("sn_other", "rds", "DBInstance", "DescribeDBInstances", "y" * 10),
    ]
    index = build_index([], snippets)
    results = retrieve_snippets(index, "dynamodb", "Table", 2)
    assert [r.id for r in results] == ["sn_short", "sn_mid"]
    assert [r.rank for r in results] == [1, 2]


def test_snippets_no_match_is_empty():
    index = build_index([], [])
    assert retrieve_snippets(index, "nope", "Nothing", 3) == []


def test_snippets_equal_length_tie_breaks_by_id():
    snippets = [
        DocSnippet("sn_b", "s", "R", "Api", "same"),
        DocSnippet("sn_a", "s", "R", "Api", "same"),
    ]
    index = build_index([], snippets)
    assert [r.id for r in retrieve_snippets(index, "s", "R", 2)] == ["sn_a", "sn_b"]


def test_tokenize_rules():
    assert tokenize("DynamoDB Table, SSE-enabled!") == ["dynamodb", "table", "sse", "enabled"]
    assert tokenize("") == []


def test_shipped_corpus_oracle_equivalence(index):
    bags = token_bags(index)
    for type_id in ControlTypeId:
        for query_text in ("dynamodb table", "rds instance backup", "cluster logging"):
            query = tokenize(query_text)
            candidates = [ex.id for ex in index.exemplars() if ex.control_type is type_id]
            expected = brute_bm25_rank(bags, candidates, query, 3)
            got = retrieve_exemplars(index, type_id, query, 3)
            assert [r.id for r in got] == [doc_id for doc_id, _ in expected]
            for result, (_, score) in zip(got, expected):
                assert result.score == pytest.approx(score, rel=1e-9)
