import hypothesis.strategies as st
import pytest
from hypothesis import given

from controlgen.catalog import (
    RESOURCE_PLACEHOLDER,
    ControlTypeId,
    EmptyResourceName,
    UnknownControlType,
    catalog_as_dicts,
    get_control_type,
    list_control_types,
    render_description,
)

CANONICAL_IDS = [
    "encryption_at_rest",
    "encryption_in_transit",
    "tagging",
    "supported_version",
    "backup_enabled",
    "multi_az",
    "inbound_ip_control",
    "resource_accessibility",
    "audit_logging",
]


def test_exactly_nine_types_in_order():
    types = list_control_types()
    assert len(types) == 9
    assert types[0].id is ControlTypeId.ENCRYPTION_AT_REST
    assert types[-1].id is ControlTypeId.AUDIT_LOGGING
    assert [ct.id.value for ct in types] == CANONICAL_IDS


def test_listing_is_stable():
    assert list_control_types() == list_control_types()


def test_catalog_completeness():
    for ct in list_control_types():
        assert ct.display_name
        assert ct.description_template
        assert ct.compliant_condition
        assert ct.noncompliant_condition


def test_seven_templates_are_resource_parameterized():
    parameterized = [ct.id for ct in list_control_types() if ct.resource_parameterized]
    assert len(parameterized) == 7
    free = {ct.id for ct in list_control_types()} - set(parameterized)
    assert free == {ControlTypeId.TAGGING, ControlTypeId.SUPPORTED_VERSION}


def test_render_description_quoted_template():
    ct = get_control_type(ControlTypeId.ENCRYPTION_AT_REST)
    text = render_description(ct, "DynamoDB Table")
    assert "checks if the DynamoDB Table is encrypted at rest" in text


def test_render_description_removes_every_placeholder():
    for ct in list_control_types():
        assert RESOURCE_PLACEHOLDER not in render_description(ct, "X")


def test_render_description_empty_name():
    ct = get_control_type(ControlTypeId.ENCRYPTION_AT_REST)
    with pytest.raises(EmptyResourceName):
        render_description(ct, "")


@given(st.text(min_size=1, max_size=40))
def test_render_length_bound(name):
    for ct in list_control_types():
        template = ct.description_template
        holes = template.count(RESOURCE_PLACEHOLDER)
        rendered = render_description(ct, name)
        assert len(rendered) >= len(template) - holes * len(RESOURCE_PLACEHOLDER)


def test_id_round_trip():
    for text in CANONICAL_IDS:
        assert ControlTypeId.from_text(text).to_text() == text


def test_unknown_id_rejected():
    with pytest.raises(UnknownControlType):
        ControlTypeId.from_text("firewall")


def test_export_dicts_shape():
    docs = catalog_as_dicts()
    assert len(docs) == 9
    assert all(doc["required_capabilities"] for doc in docs)
