"""The nine security control types: ids, description templates, compliance semantics.

Seven types parameterize their description with the literal ``{Resource}``
placeholder; tagging and supported-version checks read naturally without a
named resource and ship placeholder-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import DomainError

RESOURCE_PLACEHOLDER = "{Resource}"


class EmptyResourceName(DomainError):
    """render_description was given an empty resource name."""


class UnknownControlType(DomainError):
    def __init__(self, text: str) -> None:
        super().__init__(f"unknown control type: {text!r}")
        self.text = text


class ControlTypeId(str, Enum):
    """Canonical textual ids, stable for files and CLI arguments."""

    ENCRYPTION_AT_REST = "encryption_at_rest"
    ENCRYPTION_IN_TRANSIT = "encryption_in_transit"
    TAGGING = "tagging"
    SUPPORTED_VERSION = "supported_version"
    BACKUP_ENABLED = "backup_enabled"
    MULTI_AZ = "multi_az"
    INBOUND_IP_CONTROL = "inbound_ip_control"
    RESOURCE_ACCESSIBILITY = "resource_accessibility"
    AUDIT_LOGGING = "audit_logging"

    @classmethod
    def from_text(cls, text: str) -> "ControlTypeId":
        try:
            return cls(text)
        except ValueError:
            raise UnknownControlType(text) from None

    def to_text(self) -> str:
        return self.value


@dataclass(frozen=True)
class ControlType:
    id: ControlTypeId
    display_name: str
    description_template: str
    compliant_condition: str
    noncompliant_condition: str
    required_capabilities: frozenset[str]

    @property
    def resource_parameterized(self) -> bool:
        return RESOURCE_PLACEHOLDER in self.description_template


_CONTROL_TYPES: tuple[ControlType, ...] = (
    ControlType(
        id=ControlTypeId.ENCRYPTION_AT_REST,
        display_name="Encryption of Data at Rest",
        description_template=(
            "Data at rest refers to data stored in persistent, non-volatile storage "
            "for any duration. Encrypting data at rest helps protect its "
            "confidentiality, reducing the risk of unauthorized access. This control "
            "checks if the {Resource} is encrypted at rest. If the {Resource} is not "
            "encrypted at rest, the control will return NON_COMPLIANT. If the "
            "{Resource} is encrypted, it will return COMPLIANT."
        ),
        compliant_condition="data stored by the resource is encrypted at rest",
        noncompliant_condition="data stored by the resource is not encrypted at rest",
        required_capabilities=frozenset({"encryption_at_rest"}),
    ),
    ControlType(
        id=ControlTypeId.ENCRYPTION_IN_TRANSIT,
        display_name="Encryption of Data in Transit",
        description_template=(
            "Data in transit refers to data that moves from one location to another, "
            "such as between nodes in your cluster or between your cluster and your "
            "application. Data may move across the internet or within a private "
            "network. Encrypting data in transit reduces the risk that an "
            "unauthorized user can eavesdrop on network traffic. This control checks "
            "if the {Resource} enforces encryption of data in transit. If the "
            "{Resource} accepts unencrypted connections, the control will return "
            "NON_COMPLIANT. If the {Resource} only accepts encrypted connections, it "
            "will return COMPLIANT."
        ),
        compliant_condition="the resource only accepts encrypted connections",
        noncompliant_condition="the resource accepts unencrypted connections",
        required_capabilities=frozenset({"encryption_in_transit"}),
    ),
    ControlType(
        id=ControlTypeId.TAGGING,
        display_name="Tagging",
        description_template=(
            "A tag is a label that you assign to an AWS resource, and it consists of "
            "a key and an optional value. You can create tags to categorize "
            "resources by purpose, owner, environment, or other criteria. Tags can "
            "help you identify, organize, search for, and filter resources. Tagging "
            "also helps you track accountable resource owners for actions and "
            "notifications. When you use tagging, you can implement attribute-based "
            "access control (ABAC) as an authorization strategy, which defines "
            "permissions based on tags. This control checks if the required tags are "
            "present. If any required tag is missing, the control will return "
            "NON_COMPLIANT. If all required tags are present, it will return "
            "COMPLIANT."
        ),
        compliant_condition="all required tags are present on the resource",
        noncompliant_condition="one or more required tags are missing",
        required_capabilities=frozenset({"tagging"}),
    ),
    ControlType(
        id=ControlTypeId.SUPPORTED_VERSION,
        display_name="Resources Running on a Supported Version",
        description_template=(
            "Running resources on supported software versions ensures optimal "
            "performance, security, and access to the latest features. Regular "
            "updates safeguard against vulnerabilities, guaranteeing a stable and "
            "efficient user experience. This control checks if the running software "
            "version is supported. If the version is no longer supported, the "
            "control will return NON_COMPLIANT. If the version is supported, it will "
            "return COMPLIANT."
        ),
        compliant_condition="the resource runs a supported software version",
        noncompliant_condition="the resource runs an unsupported software version",
        required_capabilities=frozenset({"versioned_engine"}),
    ),
    ControlType(
        id=ControlTypeId.BACKUP_ENABLED,
        display_name="Backup Enabled",
        description_template=(
            "A data backup is a copy of your system, configuration, or application "
            "data that's stored separately from the original. Enabling regular "
            "backups helps you safeguard valuable data against unforeseen events "
            "like system failures, cyberattacks, or accidental deletions. Having a "
            "robust backup strategy also facilitates quicker recovery, business "
            "continuity, and peace of mind in the face of potential data loss. This "
            "control checks if the {Resource} has backups enabled. If the {Resource} "
            "does not have backups enabled, the control will return NON_COMPLIANT. "
            "If the {Resource} has backups enabled, it will return COMPLIANT."
        ),
        compliant_condition="backups are enabled for the resource",
        noncompliant_condition="backups are not enabled for the resource",
        required_capabilities=frozenset({"backup"}),
    ),
    ControlType(
        id=ControlTypeId.MULTI_AZ,
        display_name="Multi-AZ Deployment",
        description_template=(
            "An AZ is a distinct location within an AWS Region that is insulated "
            "from failures in other AZs. Enabling multiple AZs is recommended for "
            "enhanced resilience and fault tolerance in the event of infrastructure "
            "issues. Multi-AZ architectures aim to minimize the impact of "
            "infrastructure failures by dispersing resources across multiple AZs. "
            "This control checks if the {Resource} is deployed across multiple "
            "Availability Zones. If the {Resource} is deployed in a single "
            "Availability Zone, the control will return NON_COMPLIANT. If the "
            "{Resource} spans multiple Availability Zones, it will return COMPLIANT."
        ),
        compliant_condition="the resource is deployed across multiple Availability Zones",
        noncompliant_condition="the resource is confined to a single Availability Zone",
        required_capabilities=frozenset({"multi_az"}),
    ),
    ControlType(
        id=ControlTypeId.INBOUND_IP_CONTROL,
        display_name="Inbound IP Connection Control",
        description_template=(
            "Inbound connections can pose security risks by allowing unauthorized "
            "access to a system, leading to data breaches, system compromise, or "
            "exploitation of vulnerabilities. Robust security measures such as "
            "firewalls, access controls, and encryption are required to mitigate "
            "these risks. This control checks if inbound IP connections to the "
            "{Resource} are restricted. If the {Resource} accepts unrestricted "
            "inbound IP connections, the control will return NON_COMPLIANT. If "
            "inbound IP connections to the {Resource} are restricted, it will "
            "return COMPLIANT."
        ),
        compliant_condition="inbound IP connections to the resource are restricted",
        noncompliant_condition="the resource accepts unrestricted inbound IP connections",
        required_capabilities=frozenset({"network_ingress"}),
    ),
    ControlType(
        id=ControlTypeId.RESOURCE_ACCESSIBILITY,
        display_name="Resource Accessibility",
        description_template=(
            "Publicly accessible resources can lead to unauthorized access, data "
            "breaches, or exploitation of vulnerabilities. Restricting access "
            "through authentication and authorization measures helps to safeguard "
            "sensitive information and maintain the integrity of your resources. "
            "This control checks if the {Resource} can be accessed without proper "
            "authorization. If the {Resource} is publicly accessible, the control "
            "will return NON_COMPLIANT. If access to the {Resource} is restricted, "
            "it will return COMPLIANT."
        ),
        compliant_condition="access to the resource requires proper authorization",
        noncompliant_condition="the resource is publicly accessible",
        required_capabilities=frozenset({"public_access"}),
    ),
    ControlType(
        id=ControlTypeId.AUDIT_LOGGING,
        display_name="Audit Logging Enabled",
        description_template=(
            "Audit logs track and monitor system activities. They provide a record "
            "of events that can help you detect security breaches, investigate "
            "incidents, and comply with regulations. Audit logs also enhance the "
            "overall accountability and transparency of your organization. This "
            "control checks if the {Resource} has audit logging enabled with a "
            "destination configured for the logs. If the {Resource} does not have "
            "audit logging enabled, the control will return NON_COMPLIANT. If the "
            "{Resource} has audit logging enabled with a log destination, it will "
            "return COMPLIANT."
        ),
        compliant_condition="audit logging is enabled with a configured log destination",
        noncompliant_condition="audit logging is disabled or has no log destination",
        required_capabilities=frozenset({"audit_logging"}),
    ),
)

_BY_ID = {ct.id: ct for ct in _CONTROL_TYPES}


def list_control_types() -> list[ControlType]:
    """Return the nine control types in their canonical order."""
    return list(_CONTROL_TYPES)


def get_control_type(type_id: ControlTypeId | str) -> ControlType:
    if isinstance(type_id, str) and not isinstance(type_id, ControlTypeId):
        type_id = ControlTypeId.from_text(type_id)
    return _BY_ID[type_id]


def render_description(control: ControlType, resource_name: str) -> str:
    """Substitute the resource name into the control's description template."""
    if not resource_name:
        raise EmptyResourceName("resource name must be non-empty")
    return control.description_template.replace(RESOURCE_PLACEHOLDER, resource_name)


def catalog_as_dicts() -> list[dict]:
    """JSON-exportable view of the catalog (``controls export-types``)."""
    return [
        {
            "id": ct.id.value,
            "display_name": ct.display_name,
            "description_template": ct.description_template,
            "compliant_condition": ct.compliant_condition,
            "noncompliant_condition": ct.noncompliant_condition,
            "required_capabilities": sorted(ct.required_capabilities),
            "resource_parameterized": ct.resource_parameterized,
        }
        for ct in _CONTROL_TYPES
    ]
