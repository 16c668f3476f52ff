#!/usr/bin/env python3
"""Regenerate every derived fixture: corpus files, feature files, envelope
fixtures, replay fixtures (keyed by real prompt hashes), the golden prompt
snapshot, and the seeded review store.

Run from the repo root after changing templates, the catalog, or the corpus:

    python3 scripts/make_fixtures.py
"""

from __future__ import annotations

import json
import shutil
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from controlgen import gherkin, rubric  # noqa: E402
from controlgen.catalog import ControlTypeId, get_control_type  # noqa: E402
from controlgen.prompts import build_prompt  # noqa: E402
from controlgen.resources import load_catalog  # noqa: E402
from controlgen.retrieval import (  # noqa: E402
    build_index,
    load_exemplars,
    load_snippets,
    retrieve_exemplars,
    retrieve_snippets,
    tokenize,
)
from controlgen.store import (  # noqa: E402
    GenerationRecord,
    RecordStatus,
    RecordStore,
    new_record_id,
)

FIXTURES = ROOT / "fixtures"
CORPUS = ROOT / "corpus"


# ---------------------------------------------------------------------------
# Exemplar corpus: hand-written controls that double as round-trip fixtures.
# ---------------------------------------------------------------------------

EXEMPLARS = [
    {
        "id": "ex_ddb_at_rest_001",
        "control_type": "encryption_at_rest",
        "service": "dynamodb",
        "resource": "Table",
        "gherkin_text": """Rule Identifier: DYNAMODB_TABLE_SSE_ENABLED
Rule Name: DynamoDB table server-side encryption enabled
Description: Checks that the DynamoDB table encrypts data at rest with server-side encryption.
Trigger: Configuration Changes

Scenario: Table with server-side encryption enabled is compliant
  Given a DynamoDB table
  And the `Table.SSEDescription.Status` field is `ENABLED`
  When the control evaluates the table configuration
  Then the control returns COMPLIANT

Scenario: Table with server-side encryption disabled is non-compliant
  Given a DynamoDB table
  And the `Table.SSEDescription.Status` field is `DISABLED`
  When the control evaluates the table configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_at_rest_002",
        "control_type": "encryption_at_rest",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_STORAGE_ENCRYPTED
Rule Name: RDS instance storage encrypted
Description: Checks that the RDS database instance has encrypted storage.
Trigger: Configuration Changes

Scenario: Instance with encrypted storage is compliant
  Given an RDS database instance
  And the `DBInstance.StorageEncrypted` field is `true`
  When the control evaluates the instance configuration
  Then the control returns COMPLIANT

Scenario: Instance with unencrypted storage is non-compliant
  Given an RDS database instance
  And the `DBInstance.StorageEncrypted` field is `false`
  When the control evaluates the instance configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_redshift_at_rest_003",
        "control_type": "encryption_at_rest",
        "service": "redshift",
        "resource": "Cluster",
        "gherkin_text": """Rule Identifier: REDSHIFT_CLUSTER_ENCRYPTED
Rule Name: Redshift cluster encrypted at rest
Description: Checks that the Redshift cluster encrypts data at rest.
Trigger: Periodic

Scenario: Encrypted cluster is compliant
  Given a Redshift cluster
  And the `Cluster.Encrypted` field is `true`
  When the control evaluates the cluster configuration
  Then the control returns COMPLIANT

Scenario: Unencrypted cluster is non-compliant
  Given a Redshift cluster
  And the `Cluster.Encrypted` field is `false`
  When the control evaluates the cluster configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_in_transit_004",
        "control_type": "encryption_in_transit",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_TLS_REQUIRED
Rule Name: RDS instance requires TLS connections
Description: Checks that the RDS database instance presents a valid CA certificate so clients can require TLS.
Trigger: Configuration Changes

Scenario: Instance with a current CA certificate is compliant
  Given an RDS database instance
  And the `DBInstance.CACertificateIdentifier` field is `rds-ca-rsa2048-g1`
  When the control evaluates the instance configuration
  Then the control returns COMPLIANT

Scenario: Instance without a CA certificate is non-compliant
  Given an RDS database instance
  And the `DBInstance.CACertificateIdentifier` field is empty
  When the control evaluates the instance configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_elasticache_in_transit_005",
        "control_type": "encryption_in_transit",
        "service": "elasticache",
        "resource": "ReplicationGroup",
        "gherkin_text": """Rule Identifier: ELASTICACHE_GROUP_TLS_ENABLED
Rule Name: ElastiCache replication group encrypts traffic
Description: Checks that the replication group enables encryption of data in transit.
Trigger: Configuration Changes

Scenario: Group with transit encryption required is compliant
  Given an ElastiCache replication group
  And the `ReplicationGroup.TransitEncryptionEnabled` field is `true`
  And the `ReplicationGroup.TransitEncryptionMode` field is `required`
  When the control evaluates the group configuration
  Then the control returns COMPLIANT

Scenario: Group without transit encryption is non-compliant
  Given an ElastiCache replication group
  And the `ReplicationGroup.TransitEncryptionEnabled` field is `false`
  When the control evaluates the group configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_tagging_006",
        "control_type": "tagging",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_REQUIRED_TAGS
Rule Name: RDS instance carries required tags
Description: Checks that the RDS database instance carries every tag key named in the rule parameters.
Trigger: Periodic
Parameters:
  RequiredTagKeys: list

Scenario: Instance with all required tags is compliant
  Given an RDS database instance
  And the `DBInstance.TagList` list contains every required tag key
  When the control evaluates the instance tags
  Then the control returns COMPLIANT

Scenario: Instance missing a required tag is non-compliant
  Given an RDS database instance
  And the `DBInstance.TagList` list is missing a required tag key
  When the control evaluates the instance tags
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_eks_version_007",
        "control_type": "supported_version",
        "service": "eks",
        "resource": "Cluster",
        "gherkin_text": """Rule Identifier: EKS_CLUSTER_SUPPORTED_VERSION
Rule Name: EKS cluster runs a supported Kubernetes version
Description: Checks that the EKS cluster runs a Kubernetes version that is still supported.
Trigger: Periodic
Parameters:
  OldestSupportedVersion: string

Scenario: Cluster on a supported version is compliant
  Given an EKS cluster
  And the `Cluster.Version` field is `1.29`
  When the control compares the version against the support policy
  Then the control returns COMPLIANT

Scenario: Cluster on an unsupported version is non-compliant
  Given an EKS cluster
  And the `Cluster.Version` field is `1.19`
  When the control compares the version against the support policy
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_backup_008",
        "control_type": "backup_enabled",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_BACKUPS_ENABLED
Rule Name: RDS instance automated backups enabled
Description: Checks that the RDS database instance retains automated backups for at least one day.
Trigger: Configuration Changes
Parameters:
  MinRetentionDays: integer

Scenario: Instance with retention of seven days is compliant
  Given an RDS database instance
  And the `DBInstance.BackupRetentionPeriod` field is `7`
  When the control evaluates the backup configuration
  Then the control returns COMPLIANT

Scenario: Instance with retention of zero days is non-compliant
  Given an RDS database instance
  And the `DBInstance.BackupRetentionPeriod` field is `0`
  When the control evaluates the backup configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_ddb_backup_009",
        "control_type": "backup_enabled",
        "service": "dynamodb",
        "resource": "Table",
        "gherkin_text": """Rule Identifier: DYNAMODB_TABLE_PITR_ENABLED
Rule Name: DynamoDB table point-in-time recovery enabled
Description: Checks that point-in-time recovery is enabled for the DynamoDB table.
Trigger: Configuration Changes

Scenario: Table with point-in-time recovery enabled is compliant
  Given a DynamoDB table
  And the `Table.ContinuousBackups.PointInTimeRecoveryStatus` field is `ENABLED`
  When the control evaluates the backup configuration
  Then the control returns COMPLIANT

Scenario: Table with point-in-time recovery disabled is non-compliant
  Given a DynamoDB table
  And the `Table.ContinuousBackups.PointInTimeRecoveryStatus` field is `DISABLED`
  When the control evaluates the backup configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_multi_az_010",
        "control_type": "multi_az",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_MULTI_AZ
Rule Name: RDS instance deployed across multiple Availability Zones
Description: Checks that the RDS database instance runs in a Multi-AZ deployment.
Trigger: Configuration Changes

Scenario: Multi-AZ instance is compliant
  Given an RDS database instance
  And the `DBInstance.MultiAZ` field is `true`
  When the control evaluates the instance configuration
  Then the control returns COMPLIANT

Scenario: Single-AZ instance is non-compliant
  Given an RDS database instance
  And the `DBInstance.MultiAZ` field is `false`
  When the control evaluates the instance configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_redshift_inbound_011",
        "control_type": "inbound_ip_control",
        "service": "redshift",
        "resource": "Cluster",
        "gherkin_text": """Rule Identifier: REDSHIFT_CLUSTER_RESTRICTED_INGRESS
Rule Name: Redshift cluster restricts inbound connections
Description: Checks that the Redshift cluster only allows inbound connections through VPC security groups.
Trigger: Periodic

Scenario: Cluster attached to security groups is compliant
  Given a Redshift cluster
  And the `Cluster.VpcSecurityGroups` list is non-empty
  When the control evaluates the network configuration
  Then the control returns COMPLIANT

Scenario: Cluster without security groups is non-compliant
  Given a Redshift cluster
  And the `Cluster.VpcSecurityGroups` list is empty
  When the control evaluates the network configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_s3_public_012",
        "control_type": "resource_accessibility",
        "service": "s3",
        "resource": "Bucket",
        "gherkin_text": """Rule Identifier: S3_BUCKET_NOT_PUBLIC
Rule Name: S3 bucket is not publicly accessible
Description: Checks that the S3 bucket blocks public access and its policy does not grant public reads.
Trigger: Configuration Changes

Scenario: Bucket blocking public access is compliant
  Given an S3 bucket
  And the `Bucket.PublicAccessBlockConfiguration.BlockPublicAcls` field is `true`
  And the `Bucket.PolicyStatus.IsPublic` field is `false`
  When the control evaluates the bucket configuration
  Then the control returns COMPLIANT

Scenario: Publicly readable bucket is non-compliant
  Given an S3 bucket
  And the `Bucket.PolicyStatus.IsPublic` field is `true`
  When the control evaluates the bucket configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_rds_logging_013",
        "control_type": "audit_logging",
        "service": "rds",
        "resource": "DBInstance",
        "gherkin_text": """Rule Identifier: RDS_INSTANCE_LOG_EXPORTS_ENABLED
Rule Name: RDS instance exports audit logs
Description: Checks that the RDS database instance exports its audit logs to CloudWatch Logs.
Trigger: Configuration Changes

Scenario: Instance exporting audit logs is compliant
  Given an RDS database instance
  And the `DBInstance.EnabledCloudwatchLogsExports` list contains `audit`
  When the control evaluates the logging configuration
  Then the control returns COMPLIANT

Scenario: Instance exporting no logs is non-compliant
  Given an RDS database instance
  And the `DBInstance.EnabledCloudwatchLogsExports` list is empty
  When the control evaluates the logging configuration
  Then the control returns NON_COMPLIANT
""",
    },
    {
        "id": "ex_redshift_logging_014",
        "control_type": "audit_logging",
        "service": "redshift",
        "resource": "Cluster",
        "gherkin_text": """Rule Identifier: REDSHIFT_CLUSTER_AUDIT_LOGGING
Rule Name: Redshift cluster audit logging enabled
Description: Checks that the Redshift cluster writes audit logs to a destination bucket.
Trigger: Periodic

Scenario: Cluster with logging to a bucket is compliant
  Given a Redshift cluster
  And the `Cluster.LoggingStatus.LoggingEnabled` field is `true`
  And the `Cluster.LoggingStatus.BucketName` field is `audit-logs-bucket`
  When the control evaluates the logging configuration
  Then the control returns COMPLIANT

Scenario: Cluster without logging is non-compliant
  Given a Redshift cluster
  And the `Cluster.LoggingStatus.LoggingEnabled` field is `false`
  When the control evaluates the logging configuration
  Then the control returns NON_COMPLIANT
""",
    },
]

SNIPPETS = [
    {
        "id": "doc_ddb_describe_table_01",
        "service": "dynamodb",
        "resource": "Table",
        "api_name": "DescribeTable",
        "body": (
            "DescribeTable returns information about the table, including the "
            "current status, creation time, key schema, and any indexes. The "
            "SSEDescription member describes server-side encryption: Status is "
            "ENABLED when encryption is active and SSEType names the algorithm."
        ),
    },
    {
        "id": "doc_ddb_describe_table_02",
        "service": "dynamodb",
        "resource": "Table",
        "api_name": "DescribeContinuousBackups",
        "body": (
            "DescribeContinuousBackups reports the continuous backup and "
            "point-in-time recovery status of a table. "
            "PointInTimeRecoveryStatus is ENABLED or DISABLED."
        ),
    },
    {
        "id": "doc_ddb_describe_table_03",
        "service": "dynamodb",
        "resource": "Table",
        "api_name": "ListTagsOfResource",
        "body": (
            "ListTagsOfResource lists all tags on a DynamoDB resource. Tags are "
            "key-value pairs; up to 50 tags can be attached to a single table. "
            "Use tags to categorize tables by owner, environment, or cost center, "
            "and to drive attribute-based access control policies."
        ),
    },
    {
        "id": "doc_rds_describe_instances_01",
        "service": "rds",
        "resource": "DBInstance",
        "api_name": "DescribeDBInstances",
        "body": (
            "DescribeDBInstances returns information about provisioned RDS "
            "instances, including StorageEncrypted, MultiAZ, EngineVersion, "
            "PubliclyAccessible, BackupRetentionPeriod, and the list of enabled "
            "CloudWatch Logs exports."
        ),
    },
    {
        "id": "doc_rds_describe_instances_02",
        "service": "rds",
        "resource": "DBInstance",
        "api_name": "DescribeDBInstances",
        "body": (
            "BackupRetentionPeriod is the number of days automated backups are "
            "retained; 0 disables automated backups."
        ),
    },
    {
        "id": "doc_redshift_describe_clusters_01",
        "service": "redshift",
        "resource": "Cluster",
        "api_name": "DescribeClusters",
        "body": (
            "DescribeClusters returns cluster properties including Encrypted, "
            "PubliclyAccessible, ClusterVersion, AutomatedSnapshotRetentionPeriod, "
            "MultiAZ, and the attached VPC security groups."
        ),
    },
    {
        "id": "doc_s3_bucket_01",
        "service": "s3",
        "resource": "Bucket",
        "api_name": "GetPublicAccessBlock",
        "body": (
            "GetPublicAccessBlock retrieves the public access block configuration "
            "of a bucket: BlockPublicAcls, IgnorePublicAcls, BlockPublicPolicy, "
            "and RestrictPublicBuckets."
        ),
    },
    {
        "id": "doc_eks_describe_cluster_01",
        "service": "eks",
        "resource": "Cluster",
        "api_name": "DescribeCluster",
        "body": (
            "DescribeCluster returns the cluster control plane configuration: the "
            "Kubernetes Version, the VPC configuration including "
            "EndpointPublicAccess and PublicAccessCidrs, the EncryptionConfig, "
            "and the enabled control plane log types."
        ),
    },
    {
        "id": "doc_sqs_queue_01",
        "service": "sqs",
        "resource": "Queue",
        "api_name": "GetQueueAttributes",
        "body": (
            "GetQueueAttributes returns queue attributes including KmsMasterKeyId "
            "and SqsManagedSseEnabled, which report how messages are encrypted at "
            "rest."
        ),
    },
]


# ---------------------------------------------------------------------------
# Replay envelopes per (service, resource, control_type).
# ---------------------------------------------------------------------------

REPLAY_ENVELOPES = {
    ("dynamodb", "Table", "encryption_at_rest"): {
        "rule_identifier": "DYNAMODB_TABLE_ENCRYPTED_AT_REST",
        "rule_name": "DynamoDB table encrypted at rest",
        "description": "Checks that server-side encryption is enabled for the DynamoDB table.",
        "trigger": "Configuration Changes",
        "rule_parameters": {},
        "gherkin": (
            "Scenario: Table with server-side encryption enabled is compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.SSEDescription.Status` field is `ENABLED`\n"
            "  When the control evaluates the table configuration\n"
            "  Then the control returns COMPLIANT\n"
            "\n"
            "Scenario: Table with server-side encryption disabled is non-compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.SSEDescription.Status` field is `DISABLED`\n"
            "  When the control evaluates the table configuration\n"
            "  Then the control returns NON_COMPLIANT\n"
        ),
    },
    ("dynamodb", "Table", "tagging"): {
        "rule_identifier": "DYNAMODB_TABLE_REQUIRED_TAGS",
        "rule_name": "DynamoDB table carries required tags",
        "description": "Checks that the DynamoDB table carries every required tag key.",
        "trigger": "Periodic",
        "rule_parameters": {"RequiredTagKeys": "list"},
        "gherkin": (
            "Scenario: Table with all required tags is compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.Tags` list contains every required tag key\n"
            "  When the control evaluates the table tags\n"
            "  Then the control returns COMPLIANT\n"
            "\n"
            "Scenario: Table missing a required tag is non-compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.Tags` list is missing a required tag key\n"
            "  When the control evaluates the table tags\n"
            "  Then the control returns NON_COMPLIANT\n"
        ),
    },
    ("dynamodb", "Table", "backup_enabled"): {
        "rule_identifier": "DYNAMODB_TABLE_PITR_ON",
        "rule_name": "DynamoDB table point-in-time recovery enabled",
        "description": "Checks that point-in-time recovery is enabled for the DynamoDB table.",
        "trigger": "Configuration Changes",
        "rule_parameters": {},
        "gherkin": (
            "Scenario: Table with point-in-time recovery enabled is compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.ContinuousBackups.PointInTimeRecoveryStatus` field is `ENABLED`\n"
            "  When the control evaluates the backup configuration\n"
            "  Then the control returns COMPLIANT\n"
            "\n"
            "Scenario: Table with point-in-time recovery disabled is non-compliant\n"
            "  Given a DynamoDB table\n"
            "  And the `Table.ContinuousBackups.PointInTimeRecoveryStatus` field is `DISABLED`\n"
            "  When the control evaluates the backup configuration\n"
            "  Then the control returns NON_COMPLIANT\n"
        ),
    },
    ("sqs", "Queue", "encryption_at_rest"): {
        "rule_identifier": "SQS_QUEUE_ENCRYPTED_AT_REST",
        "rule_name": "SQS queue encrypted at rest",
        "description": "Checks that the SQS queue encrypts messages at rest.",
        "trigger": "Configuration Changes",
        "rule_parameters": {},
        "gherkin": (
            "Scenario: Queue with SSE enabled is compliant\n"
            "  Given an SQS queue\n"
            "  And the `Queue.SqsManagedSseEnabled` field is `true`\n"
            "  When the control evaluates the queue attributes\n"
            "  Then the control returns COMPLIANT\n"
            "\n"
            "Scenario: Queue without any encryption is non-compliant\n"
            "  Given an SQS queue\n"
            "  And the `Queue.SqsManagedSseEnabled` field is `false`\n"
            "  And the `Queue.KmsMasterKeyId` field is empty\n"
            "  When the control evaluates the queue attributes\n"
            "  Then the control returns NON_COMPLIANT\n"
        ),
    },
}


MIN_ENCRYPTION_FEATURE = """Rule Identifier: MINIMAL_ENCRYPTION_CONTROL
Rule Name: Minimal encryption at rest control
Description: Minimal two-scenario control used by the parser test suite.
Trigger: Configuration Changes

Scenario: Encrypted resource is compliant
  Given a resource with encryption configured
  And the `Table.SSEDescription.Status` field is `ENABLED`
  When the control runs
  Then the control returns COMPLIANT

Scenario: Unencrypted resource is non-compliant
  Given a resource without encryption
  And the `Table.SSEDescription.Status` field is `DISABLED`
  When the control runs
  Then the control returns NON_COMPLIANT
"""

INVALID_FEATURES = {
    "bad_trigger.feature": """Rule Identifier: BAD_TRIGGER_CONTROL
Rule Name: Control with an unsupported trigger
Description: The trigger value is outside the closed set.
Trigger: Hourly

Scenario: Placeholder
  Given a resource
  Then the control returns COMPLIANT
""",
    "no_conclusion.feature": """Rule Identifier: NO_CONCLUSION_CONTROL
Rule Name: Control whose scenario never concludes
Description: The scenario has no Then step.
Trigger: Periodic

Scenario: Never concludes
  Given a resource
  When the control runs
""",
    "duplicate_title.feature": """Rule Identifier: DUPLICATE_TITLE_CONTROL
Rule Name: Control with duplicate scenario titles
Description: Two scenarios share a title.
Trigger: Periodic

Scenario: Same name
  Given a resource
  Then the control returns COMPLIANT

Scenario: Same name
  Given a resource
  Then the control returns NON_COMPLIANT
""",
    "missing_header.feature": """Rule Name: Control without an identifier
Description: The Rule Identifier line is missing.
Trigger: Periodic

Scenario: Placeholder
  Given a resource
  Then the control returns COMPLIANT
""",
    "and_first.feature": """Rule Identifier: AND_FIRST_CONTROL
Rule Name: Control whose scenario starts with And
Description: And may not open a scenario.
Trigger: Periodic

Scenario: Starts wrong
  And a resource
  Then the control returns COMPLIANT
""",
    "no_scenarios.feature": """Rule Identifier: NO_SCENARIOS_CONTROL
Rule Name: Control without scenarios
Description: Header only.
Trigger: Periodic
""",
}


def write_corpus() -> None:
    CORPUS.mkdir(exist_ok=True)
    with (CORPUS / "exemplars.jsonl").open("w", encoding="utf-8") as fh:
        for ex in EXEMPLARS:
            gherkin.parse(ex["gherkin_text"])  # refuse to ship unparseable corpus
            fh.write(json.dumps(ex, ensure_ascii=False) + "\n")
    with (CORPUS / "snippets.jsonl").open("w", encoding="utf-8") as fh:
        for sn in SNIPPETS:
            fh.write(json.dumps(sn, ensure_ascii=False) + "\n")


def write_features() -> None:
    features = FIXTURES / "features"
    invalid = features / "invalid"
    features.mkdir(parents=True, exist_ok=True)
    invalid.mkdir(parents=True, exist_ok=True)
    (features / "min_encryption.feature").write_text(MIN_ENCRYPTION_FEATURE, encoding="utf-8")
    for ex in EXEMPLARS:
        (features / f"{ex['id']}.feature").write_text(ex["gherkin_text"], encoding="utf-8")
    for name, text in INVALID_FEATURES.items():
        (invalid / name).write_text(text, encoding="utf-8")


def write_envelope_fixtures() -> None:
    env_dir = FIXTURES / "envelopes"
    env_dir.mkdir(parents=True, exist_ok=True)
    clean = REPLAY_ENVELOPES[("dynamodb", "Table", "encryption_at_rest")]
    (env_dir / "clean.json").write_text(json.dumps(clean, indent=2), encoding="utf-8")

    structured = dict(clean)
    structured["gherkin"] = [
        {
            "title": "Table with server-side encryption enabled is compliant",
            "steps": [
                {"keyword": "Given", "text": "a DynamoDB table"},
                {"keyword": "And", "text": "the `Table.SSEDescription.Status` field is `ENABLED`"},
                {"keyword": "When", "text": "the control evaluates the table configuration"},
                {"keyword": "Then", "text": "the control returns COMPLIANT"},
            ],
        },
        {
            "title": "Table with server-side encryption disabled is non-compliant",
            "steps": [
                {"keyword": "Given", "text": "a DynamoDB table"},
                {"keyword": "And", "text": "the `Table.SSEDescription.Status` field is `DISABLED`"},
                {"keyword": "When", "text": "the control evaluates the table configuration"},
                {"keyword": "Then", "text": "the control returns NON_COMPLIANT"},
            ],
        },
    ]
    (env_dir / "clean_structured.json").write_text(
        json.dumps(structured, indent=2), encoding="utf-8"
    )

    (env_dir / "leading_prose.txt").write_text(
        "Here is the security control you asked for:\n" + json.dumps(clean, indent=2),
        encoding="utf-8",
    )
    extra = dict(clean)
    extra["confidence"] = 0.9
    (env_dir / "extra_key.json").write_text(json.dumps(extra, indent=2), encoding="utf-8")
    bad_trigger = dict(clean)
    bad_trigger["trigger"] = "Hourly"
    (env_dir / "invalid_trigger.json").write_text(
        json.dumps(bad_trigger, indent=2), encoding="utf-8"
    )


def write_reviews() -> None:
    reviews = FIXTURES / "reviews"
    reviews.mkdir(parents=True, exist_ok=True)
    (reviews / "all_ones.json").write_text(
        json.dumps({c: 1 for c in rubric.CRITERIA}, indent=2), encoding="utf-8"
    )
    (reviews / "boundary.json").write_text(
        json.dumps({"s1": 1, "s2": 1, "s3": 1, "s4": 1, "s5": 1, "r1": 1, "r2": 0}, indent=2),
        encoding="utf-8",
    )


def write_replay_fixtures() -> None:
    """Key each canned envelope by the real prompt hash of its pipeline run."""
    replay_dir = FIXTURES / "replay"
    if replay_dir.exists():
        shutil.rmtree(replay_dir)
    replay_dir.mkdir(parents=True)
    catalog = load_catalog(ROOT / "catalog" / "aws_desk_catalog.json")
    index = build_index(
        load_exemplars(CORPUS / "exemplars.jsonl"), load_snippets(CORPUS / "snippets.jsonl")
    )
    manifest = {}
    for (service, resource, type_text), envelope in REPLAY_ENVELOPES.items():
        schema = catalog.get(service, resource)
        assert schema is not None, (service, resource)
        type_id = ControlTypeId(type_text)
        query = tokenize(f"{service} {resource}")
        exemplar_hits = retrieve_exemplars(index, type_id, query, 3)
        snippet_hits = retrieve_snippets(index, service, resource, 2)
        bundle = build_prompt(
            get_control_type(type_id),
            schema,
            [index.get_exemplar(h.id) for h in exemplar_hits],
            [index.get_snippet(h.id) for h in snippet_hits],
        )
        (replay_dir / f"{bundle.prompt_hash}.txt").write_text(
            json.dumps(envelope, indent=2), encoding="utf-8"
        )
        manifest[f"{service}/{resource}/{type_text}"] = bundle.prompt_hash
    (replay_dir / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def write_golden_prompt() -> None:
    golden_dir = ROOT / "tests" / "golden"
    golden_dir.mkdir(parents=True, exist_ok=True)
    catalog = load_catalog(ROOT / "catalog" / "aws_desk_catalog.json")
    index = build_index(
        load_exemplars(CORPUS / "exemplars.jsonl"), load_snippets(CORPUS / "snippets.jsonl")
    )
    schema = catalog.get("dynamodb", "Table")
    type_id = ControlTypeId.ENCRYPTION_AT_REST
    query = tokenize("dynamodb Table")
    exemplar_hits = retrieve_exemplars(index, type_id, query, 3)
    snippet_hits = retrieve_snippets(index, "dynamodb", "Table", 2)
    bundle = build_prompt(
        get_control_type(type_id),
        schema,
        [index.get_exemplar(h.id) for h in exemplar_hits],
        [index.get_snippet(h.id) for h in snippet_hits],
    )
    (golden_dir / "prompt_dynamodb_encryption.txt").write_text(
        bundle.rendered, encoding="utf-8"
    )


def seed_category(
    store: RecordStore,
    control_type: ControlTypeId,
    service: str,
    resource: str,
    gherkin_text: str,
    scenario_fives: int,
    rule_full: int,
    total: int,
    base_time: datetime,
) -> None:
    """Seed `total` completed reviews: `scenario_fives` records score all five
    scenario criteria, the rest score four; `rule_full` records score both rule
    criteria, the rest score one."""
    control = gherkin.parse(gherkin_text)
    for i in range(total):
        scenario_values = [1, 1, 1, 1, 1] if i < scenario_fives else [1, 1, 1, 1, 0]
        rule_values = [1, 1] if i < rule_full else [1, 0]
        values = dict(zip(rubric.CRITERIA, scenario_values + rule_values))
        score = rubric.final_score(
            rubric.apply_human_review(rubric.RubricScore.all_unset(), values)
        )
        created = base_time + timedelta(seconds=i)
        record = GenerationRecord(
            id=new_record_id(),
            created_at=created,
            updated_at=created + timedelta(seconds=30),
            service=service,
            resource=resource,
            control_type=control_type,
            prompt_hash="seeded",
            provider_name="seed",
            raw_output="",
            control=control,
            findings=[],
            rubric=rubric.apply_human_review(rubric.RubricScore.all_unset(), values),
            status=RecordStatus.ACCEPTED if score.accepted else RecordStatus.REJECTED,
            score=score.value,
        )
        store.append(record)


def write_seeded_store() -> None:
    seeded = FIXTURES / "seeded_store"
    if seeded.exists():
        shutil.rmtree(seeded)
    store = RecordStore(seeded)
    base = datetime(2025, 6, 2, 9, 0, 0, tzinfo=timezone.utc)
    # encryption category: mean scenario sum 4.19, mean rule avg 0.72
    seed_category(
        store,
        ControlTypeId.ENCRYPTION_AT_REST,
        "dynamodb",
        "Table",
        EXEMPLARS[0]["gherkin_text"],
        scenario_fives=19,
        rule_full=44,
        total=100,
        base_time=base,
    )
    # logging category: mean scenario sum 4.07, mean rule avg 0.75
    seed_category(
        store,
        ControlTypeId.AUDIT_LOGGING,
        "rds",
        "DBInstance",
        EXEMPLARS[12]["gherkin_text"],
        scenario_fives=7,
        rule_full=50,
        total=100,
        base_time=base + timedelta(hours=1),
    )


def main() -> None:
    write_corpus()
    write_features()
    write_envelope_fixtures()
    write_reviews()
    write_replay_fixtures()
    write_golden_prompt()
    write_seeded_store()
    print("fixtures regenerated")


if __name__ == "__main__":
    main()
