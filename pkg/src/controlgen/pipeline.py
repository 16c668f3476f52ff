"""End-to-end generation flow: applicability, retrieval, prompt, completion,
envelope validation, machine prescreen, persistence.

Every provider invocation leaves exactly one persisted record: validation
failures become Draft records carrying Error findings rather than discarded
output, and provider/transport failures persist a Draft before propagating.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

from . import gherkin, providers, rubric
from .applicability import resolve_applicability
from .catalog import ControlTypeId, get_control_type
from .errors import DomainError
from .prompts import build_prompt
from .resources import Catalog, ResourceSchema
from .retrieval import Index, retrieve_exemplars, retrieve_snippets, tokenize
from .store import (
    Finding,
    GenerationRecord,
    RecordStatus,
    RecordStore,
    Severity,
    new_record_id,
    utcnow,
)

logger = logging.getLogger(__name__)

DEFAULT_EXEMPLAR_K = 3
DEFAULT_SNIPPET_M = 2
DEFAULT_BATCH_JOBS = 4

ALL_APPLICABLE = object()


class UnknownResource(DomainError):
    def __init__(self, service: str, resource: str) -> None:
        super().__init__(f"({service}, {resource}) is not in the catalog")
        self.service = service
        self.resource = resource


class NotApplicable(DomainError):
    def __init__(self, control_type: ControlTypeId) -> None:
        super().__init__(
            f"control type {control_type.value} is not applicable to this resource "
            "(pass --force to generate anyway)"
        )
        self.control_type = control_type


def _schema_for(catalog: Catalog, service: str, resource: str) -> ResourceSchema:
    schema = catalog.get(service, resource)
    if schema is None:
        raise UnknownResource(service, resource)
    return schema


def _generate_one(
    catalog: Catalog,
    index: Index,
    provider: providers.LlmProvider,
    store: RecordStore,
    service: str,
    resource: str,
    control_type: ControlTypeId,
    *,
    force: bool = False,
    skip_applicability: bool = False,
    k_exemplars: int = DEFAULT_EXEMPLAR_K,
    m_snippets: int = DEFAULT_SNIPPET_M,
    scenario_bounds: tuple[int, int] = rubric.DEFAULT_SCENARIO_BOUNDS,
) -> tuple[GenerationRecord, DomainError | None]:
    started = time.perf_counter()
    schema = _schema_for(catalog, service, resource)
    if not force and not skip_applicability:
        applicabilities = resolve_applicability(schema, provider)
        decided = {a.control_type: a.applicable for a in applicabilities}
        if not decided.get(control_type, False):
            raise NotApplicable(control_type)

    control_def = get_control_type(control_type)
    query_tokens = tokenize(f"{service} {resource}")
    exemplar_hits = retrieve_exemplars(index, control_type, query_tokens, k_exemplars)
    snippet_hits = retrieve_snippets(index, service, resource, m_snippets)
    bundle = build_prompt(
        control_def,
        schema,
        [index.get_exemplar(hit.id) for hit in exemplar_hits],
        [index.get_snippet(hit.id) for hit in snippet_hits],
    )

    now = utcnow()
    record = GenerationRecord(
        id=new_record_id(),
        created_at=now,
        updated_at=now,
        service=service,
        resource=resource,
        control_type=control_type,
        prompt_hash=bundle.prompt_hash,
        provider_name="",
        raw_output="",
        control=None,
        findings=[],
        rubric=rubric.RubricScore.all_unset(),
        status=RecordStatus.DRAFT,
    )

    request = providers.make_request(bundle.rendered)
    try:
        response = provider.complete(request)
    except providers.ProviderError as exc:
        record.findings.append(Finding(Severity.ERROR, f"{type(exc).__name__}: {exc}"))
        record.elapsed_ms = int((time.perf_counter() - started) * 1000)
        store.append(record)
        return record, exc

    record.provider_name = response.provider_name
    record.raw_output = response.raw
    record.provider_latency_ms = response.latency_ms

    try:
        envelope = providers.parse_envelope(response.raw)
        control, warnings = providers.envelope_to_control(envelope)
    except (providers.EnvelopeError, gherkin.GherkinError) as exc:
        record.findings.append(Finding(Severity.ERROR, f"{type(exc).__name__}: {exc}"))
        record.elapsed_ms = int((time.perf_counter() - started) * 1000)
        store.append(record)
        return record, None

    record.control = control
    record.findings.extend(Finding(Severity.WARNING, message) for message in warnings)
    record.rubric = rubric.machine_prescreen(control, schema, scenario_bounds)
    record.status = RecordStatus.PENDING_REVIEW
    record.elapsed_ms = int((time.perf_counter() - started) * 1000)
    store.append(record)
    return record, None


def generate(
    catalog: Catalog,
    index: Index,
    provider: providers.LlmProvider,
    store: RecordStore,
    service: str,
    resource: str,
    control_type: ControlTypeId,
    **kwargs,
) -> GenerationRecord:
    """Generate one control; raises provider errors after persisting a Draft."""
    record, error = _generate_one(
        catalog, index, provider, store, service, resource, control_type, **kwargs
    )
    if error is not None:
        raise error
    return record


def generate_batch(
    catalog: Catalog,
    index: Index,
    provider: providers.LlmProvider,
    store: RecordStore,
    pairs: Sequence[tuple[str, str]],
    control_types: Sequence[ControlTypeId] | object = ALL_APPLICABLE,
    *,
    jobs: int = DEFAULT_BATCH_JOBS,
    force: bool = False,
    **kwargs,
) -> list[GenerationRecord]:
    """Generate for each pair x control type; per-item failures never abort
    the batch. Results follow (pair order, catalog type order)."""
    work: list[tuple[str, str, ControlTypeId]] = []
    for service, resource in pairs:
        schema = _schema_for(catalog, service, resource)
        if control_types is ALL_APPLICABLE:
            wanted = [
                a.control_type
                for a in resolve_applicability(schema, provider)
                if a.applicable
            ]
        else:
            wanted = list(control_types)  # type: ignore[arg-type]
        work.extend((service, resource, ct) for ct in wanted)
    if not work:
        return []

    def run(item: tuple[str, str, ControlTypeId]) -> GenerationRecord | None:
        service, resource, ct = item
        try:
            record, _ = _generate_one(
                catalog,
                index,
                provider,
                store,
                service,
                resource,
                ct,
                force=force,
                skip_applicability=control_types is ALL_APPLICABLE,
                **kwargs,
            )
        except DomainError as exc:
            # Pre-provider failure (no output to preserve); skip the item.
            logger.warning("skipping %s/%s %s: %s", service, resource, ct.value, exc)
            return None
        return record

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return [record for record in pool.map(run, work) if record is not None]
