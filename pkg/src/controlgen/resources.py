"""Desk-scale catalog of service/resource schemas used to ground validity checks.

A schema inventories the fields returned by a resource's describe API plus a
set of capability tags; field existence (S2) and configurability (S4) checks
resolve against it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any

from .errors import DomainError

VALUE_TYPES = frozenset({"string", "boolean", "integer", "enum", "list", "object"})

CAPABILITIES = frozenset(
    {
        "encryption_at_rest",
        "encryption_in_transit",
        "tagging",
        "versioned_engine",
        "backup",
        "multi_az",
        "network_ingress",
        "public_access",
        "audit_logging",
    }
)


class MalformedDocument(DomainError):
    """The catalog document is not valid JSON or misses required structure."""


class DuplicateResource(DomainError):
    def __init__(self, service: str, resource: str) -> None:
        super().__init__(f"duplicate schema for ({service}, {resource})")
        self.service = service
        self.resource = resource


class InvalidFieldSpec(DomainError):
    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"invalid field spec {path!r}: {reason}")
        self.path = path
        self.reason = reason


class UnknownCapability(DomainError):
    def __init__(self, tag: str) -> None:
        super().__init__(f"unknown capability tag: {tag!r}")
        self.tag = tag


class UnknownField(DomainError):
    def __init__(self, path: str) -> None:
        super().__init__(f"field not present in schema: {path!r}")
        self.path = path


@dataclass(frozen=True)
class FieldSpec:
    path: str
    value_type: str
    allowed_values: tuple[str, ...] | None = None


@dataclass(frozen=True)
class ResourceSchema:
    service: str
    resource: str
    describe_api: str
    fields: tuple[FieldSpec, ...]
    capabilities: frozenset[str]

    def field_map(self) -> dict[str, FieldSpec]:
        return {f.path: f for f in self.fields}


@dataclass(frozen=True)
class Catalog:
    version: str
    schemas: tuple[ResourceSchema, ...]

    def get(self, service: str, resource: str) -> ResourceSchema | None:
        for schema in self.schemas:
            if schema.service == service and schema.resource == resource:
                return schema
        return None


def _validate_field(raw: Any) -> FieldSpec:
    if not isinstance(raw, dict):
        raise MalformedDocument(f"field entry must be an object, got {type(raw).__name__}")
    path = raw.get("path")
    if not isinstance(path, str) or not path:
        raise InvalidFieldSpec(str(path), "path must be a non-empty string")
    segments = path.split(".")
    for seg in segments:
        if not seg or any(ch.isspace() for ch in seg):
            raise InvalidFieldSpec(path, "path segments must be non-empty and whitespace-free")
    value_type = raw.get("value_type")
    if value_type not in VALUE_TYPES:
        raise InvalidFieldSpec(path, f"value_type must be one of {sorted(VALUE_TYPES)}")
    allowed = raw.get("allowed_values")
    if value_type == "enum":
        if not isinstance(allowed, list) or not allowed or not all(
            isinstance(v, str) for v in allowed
        ):
            raise InvalidFieldSpec(path, "enum fields require a non-empty allowed_values list")
        allowed_tuple: tuple[str, ...] | None = tuple(allowed)
    else:
        if allowed is not None:
            raise InvalidFieldSpec(path, "allowed_values only permitted on enum fields")
        allowed_tuple = None
    extra = set(raw) - {"path", "value_type", "allowed_values"}
    if extra:
        raise InvalidFieldSpec(path, f"unexpected keys: {sorted(extra)}")
    return FieldSpec(path=path, value_type=value_type, allowed_values=allowed_tuple)


def _validate_schema(raw: Any) -> ResourceSchema:
    if not isinstance(raw, dict):
        raise MalformedDocument("schema entry must be an object")
    service = raw.get("service")
    resource = raw.get("resource")
    describe_api = raw.get("describe_api")
    for name, value in (("service", service), ("resource", resource), ("describe_api", describe_api)):
        if not isinstance(value, str) or not value:
            raise MalformedDocument(f"schema {name} must be a non-empty string")
    caps_raw = raw.get("capabilities", [])
    if not isinstance(caps_raw, list):
        raise MalformedDocument("capabilities must be a list")
    for tag in caps_raw:
        if tag not in CAPABILITIES:
            raise UnknownCapability(str(tag))
    fields_raw = raw.get("fields", [])
    if not isinstance(fields_raw, list):
        raise MalformedDocument("fields must be a list")
    fields = tuple(_validate_field(f) for f in fields_raw)
    seen: set[str] = set()
    for f in fields:
        if f.path in seen:
            raise InvalidFieldSpec(f.path, "duplicate field path within schema")
        seen.add(f.path)
    return ResourceSchema(
        service=service,
        resource=resource,
        describe_api=describe_api,
        fields=fields,
        capabilities=frozenset(caps_raw),
    )


def load_catalog(source: str | Path | IO[str]) -> Catalog:
    """Load and validate a catalog JSON document from a path or open file."""
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise MalformedDocument(f"cannot read catalog: {exc}") from exc
    else:
        text = source.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"catalog is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise MalformedDocument("catalog document must be a JSON object")
    version = doc.get("version")
    if not isinstance(version, str) or not version:
        raise MalformedDocument("catalog version must be a non-empty string")
    schemas_raw = doc.get("schemas")
    if not isinstance(schemas_raw, list):
        raise MalformedDocument("catalog schemas must be a list")
    schemas = tuple(_validate_schema(s) for s in schemas_raw)
    seen: set[tuple[str, str]] = set()
    for schema in schemas:
        key = (schema.service, schema.resource)
        if key in seen:
            raise DuplicateResource(schema.service, schema.resource)
        seen.add(key)
    return Catalog(version=version, schemas=schemas)


def field_exists(schema: ResourceSchema, path: str) -> bool:
    """True when ``path`` is a declared field or a segment-wise prefix of one."""
    if not path:
        return False
    query = path.split(".")
    for spec in schema.fields:
        declared = spec.path.split(".")
        if len(query) <= len(declared) and declared[: len(query)] == query:
            return True
    return False


def value_allowed(schema: ResourceSchema, path: str, value: str) -> bool:
    """True when ``value`` is assignable to the field at ``path``.

    Non-enum fields (including object prefixes of declared paths) accept any
    value; enum fields accept only their declared values.
    """
    spec = schema.field_map().get(path)
    if spec is None:
        if field_exists(schema, path):
            return True
        raise UnknownField(path)
    if spec.value_type == "enum":
        assert spec.allowed_values is not None
        return value in spec.allowed_values
    return True
