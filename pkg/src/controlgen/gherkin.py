"""Data model, parser, and serializer for the security-control Gherkin dialect.

The dialect is line-oriented: a header block (``Rule Identifier:``,
``Rule Name:``, ``Description:``, ``Trigger:``, optional ``Parameters:`` with
indented ``name: type`` lines) followed by ``Scenario:`` blocks of
Given/When/Then/And steps. Field references are backtick-quoted dot paths;
each scenario concludes with a step asserting COMPLIANT or NON_COMPLIANT.
The full grammar lives in docs/dialect.md.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

from .errors import DomainError


class Trigger(str, Enum):
    PERIODIC = "Periodic"
    CONFIGURATION_CHANGES = "Configuration Changes"


class ComplianceStatus(str, Enum):
    COMPLIANT = "COMPLIANT"
    NON_COMPLIANT = "NON_COMPLIANT"


STEP_KEYWORDS = ("Given", "When", "Then", "And")

IDENTIFIER_RE = re.compile(r"[A-Z0-9_.]+\Z")
_STEP_RE = re.compile(r"(Given|When|Then|And)[ \t]+(\S.*?)\s*\Z")
_HEADER_RE = re.compile(r"(Rule Identifier|Rule Name|Description|Trigger):(.*)\Z")
_PARAM_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)[ \t]*:[ \t]*(\S.*?)\s*\Z")
_BACKTICK_SPAN_RE = re.compile(r"`([^`]+)`")
_FIELD_PATH_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)+\Z")
_NON_COMPLIANT_RE = re.compile(r"\bNON_COMPLIANT\b")
_COMPLIANT_RE = re.compile(r"\bCOMPLIANT\b")


class GherkinError(DomainError):
    """Base for every parse/validation failure of the dialect."""


class GherkinSyntaxError(GherkinError):
    def __init__(self, line: int, col: int, expected: str) -> None:
        super().__init__(f"line {line}, col {col}: expected {expected}")
        self.line = line
        self.col = col
        self.expected = expected


class MissingHeaderField(GherkinError):
    def __init__(self, name: str) -> None:
        super().__init__(f"missing header field: {name}")
        self.name = name


class InvalidTrigger(GherkinError):
    def __init__(self, text: str) -> None:
        super().__init__(
            f"invalid trigger {text!r}: must be 'Periodic' or 'Configuration Changes'"
        )
        self.text = text


class NoScenarios(GherkinError):
    def __init__(self) -> None:
        super().__init__("control has no scenarios")


class ScenarioWithoutConclusion(GherkinError):
    def __init__(self, title: str) -> None:
        super().__init__(f"scenario {title!r} asserts no compliance status")
        self.title = title


class MultipleConclusions(GherkinError):
    def __init__(self, title: str) -> None:
        super().__init__(f"scenario {title!r} asserts a compliance status more than once")
        self.title = title


class DuplicateScenarioTitle(GherkinError):
    def __init__(self, title: str) -> None:
        super().__init__(f"duplicate scenario title: {title!r}")
        self.title = title


@dataclass
class Step:
    keyword: str
    text: str
    field_refs: tuple[str, ...] = ()
    asserted_status: ComplianceStatus | None = None
    line: int = field(default=0, compare=False)


@dataclass
class Scenario:
    title: str
    steps: tuple[Step, ...]
    line: int = field(default=0, compare=False)


@dataclass
class GherkinControl:
    rule_identifier: str
    rule_name: str
    description: str
    trigger: Trigger
    rule_parameters: dict[str, str]
    scenarios: tuple[Scenario, ...]


def backtick_spans(text: str) -> list[str]:
    return _BACKTICK_SPAN_RE.findall(text)


def is_field_path(span: str) -> bool:
    return _FIELD_PATH_RE.match(span) is not None


def field_refs_in(text: str) -> tuple[str, ...]:
    return tuple(span for span in backtick_spans(text) if is_field_path(span))


def status_in(text: str) -> ComplianceStatus | None:
    if _NON_COMPLIANT_RE.search(text):
        return ComplianceStatus.NON_COMPLIANT
    if _COMPLIANT_RE.search(text):
        return ComplianceStatus.COMPLIANT
    return None


def effective_keywords(steps: Sequence[Step]) -> list[str]:
    """Resolve each And to the keyword of the step it continues."""
    resolved: list[str] = []
    current = ""
    for step in steps:
        if step.keyword != "And":
            current = step.keyword
        resolved.append(current)
    return resolved


def scenario_from_steps(
    title: str,
    raw_steps: Sequence[tuple[str, str]],
    *,
    line: int = 0,
    step_lines: Sequence[int] | None = None,
) -> Scenario:
    """Build a validated Scenario from (keyword, text) pairs.

    Derives field references and the asserted compliance status, and enforces
    the scenario invariants (And never first, at least one Given, exactly one
    concluding status on a Then-chain step).
    """
    title = title.strip()
    if not title:
        raise GherkinSyntaxError(line, 1, "a non-empty scenario title")
    lines = list(step_lines) if step_lines is not None else [line] * len(raw_steps)
    if not raw_steps:
        raise GherkinSyntaxError(line, 1, "at least one Given step in the scenario")
    steps: list[Step] = []
    effective = ""
    for i, (keyword, text) in enumerate(raw_steps):
        if keyword not in STEP_KEYWORDS:
            raise GherkinSyntaxError(lines[i], 1, "a Given/When/Then/And step")
        text = text.strip()
        if not text:
            raise GherkinSyntaxError(lines[i], 1, "step text after the keyword")
        if keyword == "And" and not steps:
            raise GherkinSyntaxError(lines[i], 1, "Given, When, or Then before the first And")
        if keyword != "And":
            effective = keyword
        status = status_in(text) if effective == "Then" else None
        steps.append(
            Step(
                keyword=keyword,
                text=text,
                field_refs=field_refs_in(text),
                asserted_status=status,
                line=lines[i],
            )
        )
    if "Given" not in (s.keyword for s in steps):
        raise GherkinSyntaxError(line, 1, "at least one Given step in the scenario")
    conclusions = [s for s in steps if s.asserted_status is not None]
    if not conclusions:
        raise ScenarioWithoutConclusion(title)
    if len(conclusions) > 1:
        raise MultipleConclusions(title)
    return Scenario(title=title, steps=tuple(steps), line=line)


def scenario_conclusion(scenario: Scenario) -> ComplianceStatus:
    for step in scenario.steps:
        if step.asserted_status is not None:
            return step.asserted_status
    raise ScenarioWithoutConclusion(scenario.title)


def extract_field_refs(scenario: Scenario) -> list[str]:
    """All field paths referenced by the scenario, in order, duplicates kept."""
    return [ref for step in scenario.steps for ref in step.field_refs]


def given_field_value_pairs(scenario: Scenario) -> list[tuple[str, str]]:
    """(field path, value) pairs from the Given steps, for configurability checks.

    Within a Given-chain step, a backtick span that is a field path pairs with
    the next non-path span; unpaired spans are ignored.
    """
    pairs: list[tuple[str, str]] = []
    for step, effective in zip(scenario.steps, effective_keywords(scenario.steps)):
        if effective != "Given":
            continue
        spans = backtick_spans(step.text)
        i = 0
        while i < len(spans):
            if is_field_path(spans[i]) and i + 1 < len(spans) and not is_field_path(spans[i + 1]):
                pairs.append((spans[i], spans[i + 1]))
                i += 2
            else:
                i += 1
    return pairs


_HEADER_ATTRS = {
    "Rule Identifier": "rule_identifier",
    "Rule Name": "rule_name",
    "Description": "description",
    "Trigger": "trigger",
}
_HEADER_ORDER = ("Rule Identifier", "Rule Name", "Description", "Trigger")


def _validate_header(
    rule_identifier: str,
    rule_name: str,
    description: str,
    trigger_text: str,
    *,
    identifier_line: int = 1,
) -> Trigger:
    if not IDENTIFIER_RE.match(rule_identifier):
        raise GherkinSyntaxError(
            identifier_line, 1, "a rule identifier matching [A-Z0-9_.]+"
        )
    if not rule_name:
        raise MissingHeaderField("Rule Name")
    if not description:
        raise MissingHeaderField("Description")
    try:
        return Trigger(trigger_text)
    except ValueError:
        raise InvalidTrigger(trigger_text) from None


def _assemble_control(
    header: dict[str, str],
    header_lines: dict[str, int],
    parameters: dict[str, str],
    scenarios: Sequence[Scenario],
) -> GherkinControl:
    for name in _HEADER_ORDER:
        if name not in header:
            raise MissingHeaderField(name)
    trigger = _validate_header(
        header["Rule Identifier"],
        header["Rule Name"],
        header["Description"],
        header["Trigger"],
        identifier_line=header_lines.get("Rule Identifier", 1),
    )
    if "Scenario" in parameters:
        raise GherkinSyntaxError(1, 1, "a parameter name other than 'Scenario'")
    if not scenarios:
        raise NoScenarios()
    seen: set[str] = set()
    for sc in scenarios:
        if sc.title in seen:
            raise DuplicateScenarioTitle(sc.title)
        seen.add(sc.title)
    return GherkinControl(
        rule_identifier=header["Rule Identifier"],
        rule_name=header["Rule Name"],
        description=header["Description"],
        trigger=trigger,
        rule_parameters=parameters,
        scenarios=tuple(scenarios),
    )


class _Parser:
    def __init__(self, text: str) -> None:
        self.lines = text.split("\n")
        self.header: dict[str, str] = {}
        self.header_lines: dict[str, int] = {}
        self.parameters: dict[str, str] = {}
        self.scenarios: list[Scenario] = []
        self.in_params = False
        self.current_title: str | None = None
        self.current_title_line = 0
        self.current_steps: list[tuple[str, str]] = []
        self.current_step_lines: list[int] = []

    def _flush_scenario(self) -> None:
        if self.current_title is None:
            return
        self.scenarios.append(
            scenario_from_steps(
                self.current_title,
                self.current_steps,
                line=self.current_title_line,
                step_lines=self.current_step_lines,
            )
        )
        self.current_title = None
        self.current_steps = []
        self.current_step_lines = []

    def _handle_header_region(self, raw: str, stripped: str, lineno: int) -> None:
        indented = raw[:1] in (" ", "\t")
        if stripped == "Parameters:":
            if self.in_params or self.parameters:
                raise GherkinSyntaxError(lineno, 1, "a single Parameters block")
            self.in_params = True
            return
        header_match = _HEADER_RE.match(stripped)
        if header_match and not indented:
            self.in_params = False
            name, value = header_match.group(1), header_match.group(2).strip()
            if name in self.header:
                raise GherkinSyntaxError(lineno, 1, f"{name} to appear only once")
            if not value:
                raise GherkinSyntaxError(lineno, len(name) + 2, f"a value for {name}")
            self.header[name] = value
            self.header_lines[name] = lineno
            return
        if self.in_params and indented:
            param_match = _PARAM_RE.match(stripped)
            if param_match:
                name, value_type = param_match.group(1), param_match.group(2)
                if name in self.parameters:
                    raise GherkinSyntaxError(lineno, 1, f"parameter {name} to appear only once")
                self.parameters[name] = value_type
                return
        raise GherkinSyntaxError(
            lineno, 1, "a header field, Parameters entry, or Scenario heading"
        )

    def parse(self, *, header_required: bool = True) -> GherkinControl | list[Scenario]:
        for lineno, raw in enumerate(self.lines, start=1):
            raw = raw.rstrip("\r")
            stripped = raw.strip()
            if not stripped:
                continue
            if stripped.startswith("Scenario:"):
                self._flush_scenario()
                title = stripped[len("Scenario:") :].strip()
                if not title:
                    raise GherkinSyntaxError(lineno, len("Scenario:") + 1, "a scenario title")
                self.current_title = title
                self.current_title_line = lineno
                self.in_params = False
                continue
            step_match = _STEP_RE.match(stripped)
            if step_match:
                if self.current_title is None:
                    raise GherkinSyntaxError(lineno, 1, "a Scenario heading before steps")
                self.current_steps.append((step_match.group(1), step_match.group(2)))
                self.current_step_lines.append(lineno)
                continue
            if self.current_title is not None or self.scenarios:
                raise GherkinSyntaxError(lineno, 1, "a step or Scenario heading")
            if not header_required:
                raise GherkinSyntaxError(lineno, 1, "a Scenario heading")
            self._handle_header_region(raw, stripped, lineno)
        self._flush_scenario()
        if header_required:
            return _assemble_control(
                self.header, self.header_lines, self.parameters, self.scenarios
            )
        return self.scenarios


def parse(text: str) -> GherkinControl:
    """Parse dialect source into a validated, position-annotated control."""
    result = _Parser(text).parse(header_required=True)
    assert isinstance(result, GherkinControl)
    return result


def parse_scenario_blocks(text: str) -> list[Scenario]:
    """Parse headerless source consisting only of Scenario blocks."""
    result = _Parser(text).parse(header_required=False)
    assert isinstance(result, list)
    if not result:
        raise NoScenarios()
    return result


def has_header(text: str) -> bool:
    """True when the first non-blank line is a header field line."""
    for raw in text.split("\n"):
        stripped = raw.strip()
        if stripped:
            return _HEADER_RE.match(stripped) is not None and raw[:1] not in (" ", "\t")
    return False


def build_control(
    rule_identifier: str,
    rule_name: str,
    description: str,
    trigger: Trigger | str,
    rule_parameters: dict[str, str],
    scenarios: Iterable[Scenario],
) -> GherkinControl:
    """Assemble and validate a control from already-built scenarios."""
    trigger_text = trigger.value if isinstance(trigger, Trigger) else trigger
    return _assemble_control(
        {
            "Rule Identifier": rule_identifier.strip(),
            "Rule Name": " ".join(rule_name.split()),
            "Description": " ".join(description.split()),
            "Trigger": trigger_text,
        },
        {},
        dict(rule_parameters),
        list(scenarios),
    )


def serialize(control: GherkinControl) -> str:
    """Render a control in canonical dialect text; inverse of parse."""
    out = [
        f"Rule Identifier: {control.rule_identifier}",
        f"Rule Name: {control.rule_name}",
        f"Description: {control.description}",
        f"Trigger: {control.trigger.value}",
    ]
    if control.rule_parameters:
        out.append("Parameters:")
        for name, value_type in control.rule_parameters.items():
            out.append(f"  {name}: {value_type}")
    for scenario in control.scenarios:
        out.append("")
        out.append(f"Scenario: {scenario.title}")
        for step in scenario.steps:
            out.append(f"  {step.keyword} {step.text}")
    return "\n".join(out) + "\n"
