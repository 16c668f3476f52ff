"""Seven-criterion review rubric, final scoring, and report aggregation.

Scenario criteria S1-S5 judge the scenarios (count, field existence, status
possibility, configurability, conclusion correctness); rule criteria R1-R2
judge the rule name and description. All criteria are binary. The final score
is (S1+S2+S3+S4+S5) * (R1+R2)/2, in [0, 5]; scores >= 2.5 are accepted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Sequence

from . import gherkin
from .errors import DomainError
from .resources import ResourceSchema, UnknownField, field_exists, value_allowed

CRITERIA = ("s1", "s2", "s3", "s4", "s5", "r1", "r2")
SCENARIO_CRITERIA = ("s1", "s2", "s3", "s4", "s5")
RULE_CRITERIA = ("r1", "r2")

ACCEPTANCE_THRESHOLD = 2.5
DEFAULT_SCENARIO_BOUNDS = (2, 8)

CRITERION_TEXT = {
    "s1": "The number of scenarios recorded is correct.",
    "s2": "The field specified in the scenario exists.",
    "s3": "The resulting compliance status is possible.",
    "s4": "The configuration of the resource specified by the scenario is possible.",
    "s5": "The conclusion of the scenario is correct.",
    "r1": "The rule name correctly describes the control specified by the collection of scenarios.",
    "r2": "The description correctly describes the control specified by the collection of scenarios.",
}


class UnknownCriterion(DomainError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown rubric criterion: {name!r}")
        self.name = name


class NonBinaryValue(DomainError):
    def __init__(self, name: str, value: object) -> None:
        super().__init__(f"criterion {name} must be 0 or 1, got {value!r}")
        self.name = name


class IncompleteRubric(DomainError):
    def __init__(self, unset: Sequence[str]) -> None:
        super().__init__(f"rubric criteria unset: {', '.join(unset)}")
        self.unset = tuple(unset)


class EmptyInput(DomainError):
    def __init__(self) -> None:
        super().__init__("cannot aggregate an empty record list")


class InvalidBinWidth(DomainError):
    def __init__(self, value: object) -> None:
        super().__init__(f"bin width must be a positive number, got {value!r}")


class Provenance(str, Enum):
    MACHINE = "Machine"
    HUMAN = "Human"
    UNSET = "Unset"


@dataclass(frozen=True)
class CriterionValue:
    value: int | None
    provenance: Provenance

    @classmethod
    def unset(cls) -> "CriterionValue":
        return cls(value=None, provenance=Provenance.UNSET)

    @classmethod
    def machine(cls, value: int) -> "CriterionValue":
        return cls(value=_check_binary("machine", value), provenance=Provenance.MACHINE)

    @classmethod
    def human(cls, value: int) -> "CriterionValue":
        return cls(value=_check_binary("human", value), provenance=Provenance.HUMAN)

    @property
    def is_set(self) -> bool:
        return self.provenance is not Provenance.UNSET


def check_binary(name: str, value: object) -> int:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int) and value in (0, 1):
        return value
    raise NonBinaryValue(name, value)


_check_binary = check_binary


@dataclass(frozen=True)
class RubricScore:
    s1: CriterionValue
    s2: CriterionValue
    s3: CriterionValue
    s4: CriterionValue
    s5: CriterionValue
    r1: CriterionValue
    r2: CriterionValue

    @classmethod
    def all_unset(cls) -> "RubricScore":
        return cls(*(CriterionValue.unset() for _ in CRITERIA))

    def get(self, name: str) -> CriterionValue:
        if name not in CRITERIA:
            raise UnknownCriterion(name)
        return getattr(self, name)

    def unset_criteria(self) -> list[str]:
        return [name for name in CRITERIA if not self.get(name).is_set]

    @property
    def complete(self) -> bool:
        return not self.unset_criteria()

    def values(self) -> dict[str, int | None]:
        return {name: self.get(name).value for name in CRITERIA}


@dataclass(frozen=True)
class FinalScore:
    value: float
    accepted: bool


def machine_prescreen(
    control: gherkin.GherkinControl,
    schema: ResourceSchema,
    scenario_bounds: tuple[int, int] = DEFAULT_SCENARIO_BOUNDS,
) -> RubricScore:
    """Machine-checkable subset: S1 count bounds, S2 field existence, S3
    status possibility (always passes: the status enum is closed), S4
    configurability of Given field/value pairs. S5, R1, R2 stay for humans.
    """
    lo, hi = scenario_bounds
    s1 = 1 if lo <= len(control.scenarios) <= hi else 0
    s2 = 1
    for scenario in control.scenarios:
        for ref in gherkin.extract_field_refs(scenario):
            if not field_exists(schema, ref):
                s2 = 0
    s4 = 1
    for scenario in control.scenarios:
        for path, value in gherkin.given_field_value_pairs(scenario):
            try:
                if not value_allowed(schema, path, value):
                    s4 = 0
            except UnknownField:
                s4 = 0
    return RubricScore(
        s1=CriterionValue.machine(s1),
        s2=CriterionValue.machine(s2),
        s3=CriterionValue.machine(1),
        s4=CriterionValue.machine(s4),
        s5=CriterionValue.unset(),
        r1=CriterionValue.unset(),
        r2=CriterionValue.unset(),
    )


def apply_human_review(base: RubricScore, review: Mapping[str, object]) -> RubricScore:
    """Overlay human judgments; humans override machine values."""
    updates: dict[str, CriterionValue] = {}
    for name, value in review.items():
        if name not in CRITERIA:
            raise UnknownCriterion(name)
        updates[name] = CriterionValue(
            value=check_binary(name, value), provenance=Provenance.HUMAN
        )
    return replace(base, **updates)


def final_score(rubric: RubricScore) -> FinalScore:
    unset = rubric.unset_criteria()
    if unset:
        raise IncompleteRubric(unset)
    scenario_sum = sum(rubric.get(name).value for name in SCENARIO_CRITERIA)  # type: ignore[misc]
    rule_avg = (rubric.r1.value + rubric.r2.value) / 2  # type: ignore[operator]
    value = scenario_sum * rule_avg
    return FinalScore(value=value, accepted=value >= ACCEPTANCE_THRESHOLD)


@dataclass(frozen=True)
class CategoryReport:
    count: int
    mean_scenario_sum: float
    mean_rule_avg: float
    table_final: float
    mean_item_final: float


def aggregate(records: Sequence[RubricScore]) -> CategoryReport:
    """Category statistics over completed rubrics.

    table_final multiplies the category means (the aggregation that summary
    tables report); mean_item_final averages per-item final scores. The two
    generally differ, so both are emitted.
    """
    if not records:
        raise EmptyInput()
    scenario_sums = []
    rule_avgs = []
    finals = []
    for rubric in records:
        fs = final_score(rubric)
        scenario_sums.append(sum(rubric.get(n).value for n in SCENARIO_CRITERIA))
        rule_avgs.append((rubric.r1.value + rubric.r2.value) / 2)
        finals.append(fs.value)
    n = len(records)
    mean_scenario = sum(scenario_sums) / n
    mean_rule = sum(rule_avgs) / n
    return CategoryReport(
        count=n,
        mean_scenario_sum=mean_scenario,
        mean_rule_avg=mean_rule,
        table_final=mean_scenario * mean_rule,
        mean_item_final=sum(finals) / n,
    )


def histogram(scores: Sequence[float], bin_width: float) -> list[tuple[float, int]]:
    """Half-open bins [k*w, (k+1)*w) covering [0, 5]; 5.0 lands in the last bin."""
    if not isinstance(bin_width, (int, float)) or bin_width <= 0 or math.isnan(bin_width):
        raise InvalidBinWidth(bin_width)
    nbins = max(1, math.ceil(5.0 / bin_width))
    counts = [0] * nbins
    for score in scores:
        idx = min(int(math.floor(score / bin_width)), nbins - 1)
        idx = max(idx, 0)
        counts[idx] += 1
    return [(k * bin_width, counts[k]) for k in range(nbins)]
