"""Deterministic prompt assembly: task description, step instructions, exemplars.

Sections are joined with a fixed delimiter line and hashed with SHA-256, so
equal inputs always produce byte-identical prompts. Section templates live in
text files with ``{{placeholder}}`` slots.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

from .catalog import ControlType, render_description
from .errors import DomainError
from .resources import FieldSpec, ResourceSchema
from .retrieval import DocSnippet, Exemplar

SECTION_DELIMITER = "\n---\n"
DEFAULT_MAX_PROMPT_CHARS = 32_000

_PLACEHOLDER_RE = re.compile(r"\{\{([a-z_0-9]+)\}\}")


class ExemplarTypeMismatch(DomainError):
    def __init__(self, item_id: str) -> None:
        super().__init__(f"exemplar {item_id!r} is not of the requested control type")
        self.item_id = item_id


class NoCandidates(DomainError):
    def __init__(self) -> None:
        super().__init__("candidate control type list must be non-empty")


class UnknownPlaceholder(DomainError):
    def __init__(self, template: str, name: str) -> None:
        super().__init__(f"template {template} references unknown placeholder {{{{{name}}}}}")
        self.template = template
        self.name = name


class PromptTooLong(DomainError):
    def __init__(self, length: int, limit: int) -> None:
        super().__init__(f"rendered prompt is {length} characters; limit is {limit}")
        self.length = length
        self.limit = limit


@dataclass(frozen=True)
class PromptBundle:
    task_description: str
    step1_instructions: str
    step2_instructions: str
    exemplar_blocks: tuple[str, ...]
    snippet_blocks: tuple[str, ...]
    final_query: str
    rendered: str
    prompt_hash: str

    def sections(self) -> list[str]:
        return [
            self.task_description,
            self.step1_instructions,
            self.step2_instructions,
            *self.exemplar_blocks,
            *self.snippet_blocks,
            self.final_query,
        ]


def prompt_hash_of(rendered: str) -> str:
    return hashlib.sha256(rendered.encode("utf-8")).hexdigest()


def _read_template(name: str, template_dir: str | Path | None) -> str:
    if template_dir is not None:
        return (Path(template_dir) / name).read_text(encoding="utf-8")
    return (resources.files("controlgen") / "templates" / name).read_text(encoding="utf-8")


def render_template(name: str, values: dict[str, str], template_dir: str | Path | None = None) -> str:
    text = _read_template(name, template_dir)
    for key, value in values.items():
        text = text.replace("{{" + key + "}}", value)
    leftover = _PLACEHOLDER_RE.search(text)
    if leftover:
        raise UnknownPlaceholder(name, leftover.group(1))
    return text.rstrip("\n")


def _field_list(fields: Sequence[FieldSpec]) -> str:
    if not fields:
        return "- (no fields declared)"
    lines = []
    for f in fields:
        if f.value_type == "enum" and f.allowed_values:
            lines.append(f"- {f.path} (enum: {', '.join(f.allowed_values)})")
        else:
            lines.append(f"- {f.path} ({f.value_type})")
    return "\n".join(lines)


def _assemble(
    task: str,
    step1: str,
    step2: str,
    exemplar_blocks: Sequence[str],
    snippet_blocks: Sequence[str],
    final_query: str,
    max_chars: int,
) -> PromptBundle:
    sections = [task, step1, step2, *exemplar_blocks, *snippet_blocks, final_query]
    rendered = SECTION_DELIMITER.join(sections)
    if len(rendered) > max_chars:
        raise PromptTooLong(len(rendered), max_chars)
    return PromptBundle(
        task_description=task,
        step1_instructions=step1,
        step2_instructions=step2,
        exemplar_blocks=tuple(exemplar_blocks),
        snippet_blocks=tuple(snippet_blocks),
        final_query=final_query,
        rendered=rendered,
        prompt_hash=prompt_hash_of(rendered),
    )


def build_prompt(
    control: ControlType,
    schema: ResourceSchema,
    exemplars: Sequence[Exemplar],
    snippets: Sequence[DocSnippet],
    *,
    template_dir: str | Path | None = None,
    max_chars: int = DEFAULT_MAX_PROMPT_CHARS,
) -> PromptBundle:
    """Assemble the generation prompt for one (control type, schema) pair.

    Exemplar blocks keep their given order (retrieval rank order), followed by
    snippet blocks, then the final query.
    """
    for ex in exemplars:
        if ex.control_type != control.id:
            raise ExemplarTypeMismatch(ex.id)
    task = render_template(
        "task.txt",
        {
            "service": schema.service,
            "resource": schema.resource,
            "control_name": control.display_name,
            "control_description": render_description(control, schema.resource),
            "compliant_condition": control.compliant_condition,
            "noncompliant_condition": control.noncompliant_condition,
        },
        template_dir,
    )
    step1 = render_template(
        "step1.txt",
        {
            "service": schema.service,
            "resource": schema.resource,
            "control_name": control.display_name,
            "describe_api": schema.describe_api,
            "field_list": _field_list(schema.fields),
        },
        template_dir,
    )
    step2 = render_template("step2.txt", {}, template_dir)
    exemplar_blocks = [
        (
            f"Example security control ({ex.control_type.value} for "
            f"{ex.service}/{ex.resource}):\n{ex.gherkin_text.strip()}"
        )
        for ex in exemplars
    ]
    snippet_blocks = [
        f"API documentation for {sn.service}/{sn.resource} ({sn.api_name}):\n{sn.body.strip()}"
        for sn in snippets
    ]
    final_query = render_template(
        "query.txt",
        {
            "service": schema.service,
            "resource": schema.resource,
            "control_name": control.display_name,
        },
        template_dir,
    )
    return _assemble(task, step1, step2, exemplar_blocks, snippet_blocks, final_query, max_chars)


def build_identifier_prompt(
    schema: ResourceSchema,
    candidates: Sequence[ControlType],
    *,
    template_dir: str | Path | None = None,
    max_chars: int = DEFAULT_MAX_PROMPT_CHARS,
) -> PromptBundle:
    """Assemble the applicability-agent prompt over candidate control types."""
    if not candidates:
        raise NoCandidates()
    task = render_template(
        "identifier.txt",
        {"service": schema.service, "resource": schema.resource},
        template_dir,
    )
    step1 = (
        f"The resource state returned by {schema.describe_api} exposes these fields:\n"
        f"{_field_list(schema.fields)}"
    )
    step2 = (
        "For each candidate control type below, decide whether it is applicable "
        "and give a one-line rationale. Include every candidate exactly once."
    )
    candidate_blocks = [
        (
            f"Candidate control type `{ct.id.value}` ({ct.display_name}):\n"
            f"{render_description(ct, schema.resource)}\n"
            f"Compliant when {ct.compliant_condition}; "
            f"non-compliant when {ct.noncompliant_condition}."
        )
        for ct in candidates
    ]
    final_query = (
        f"Which of the candidate control types apply to {schema.service}/"
        f"{schema.resource}? Answer with the JSON list only."
    )
    return _assemble(task, step1, step2, candidate_blocks, [], final_query, max_chars)
