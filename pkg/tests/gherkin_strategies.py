"""Hypothesis strategies generating valid dialect controls for round-trip tests."""

import hypothesis.strategies as st

from controlgen import gherkin

_SEGMENT = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,6}", fullmatch=True)

identifiers = st.text(alphabet="ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.", min_size=1, max_size=24)

# Lowercase words can never collide with the COMPLIANT/NON_COMPLIANT tokens.
words = st.text(alphabet="abcdefghijklmnopqrstuvwxyz", min_size=1, max_size=8)
plain_text = st.lists(words, min_size=1, max_size=6).map(" ".join)

field_paths = st.lists(_SEGMENT, min_size=2, max_size=3).map(".".join)
field_values = st.sampled_from(["ENABLED", "DISABLED", "ON", "OFF", "true", "false", "7"])

param_names = st.from_regex(r"[A-Za-z_][A-Za-z0-9_]{0,10}", fullmatch=True).filter(
    lambda name: name != "Scenario"
)
param_types = st.sampled_from(["string", "integer", "boolean", "list"])


@st.composite
def step_texts(draw, allow_refs: bool = True) -> str:
    base = draw(plain_text)
    if allow_refs and draw(st.booleans()):
        path = draw(field_paths)
        value = draw(field_values)
        return f"{base} `{path}` is `{value}`"
    return base


@st.composite
def scenario_steps(draw) -> list:
    steps = [("Given", draw(step_texts()))]
    for _ in range(draw(st.integers(0, 2))):
        steps.append(("And", draw(step_texts())))
    if draw(st.booleans()):
        steps.append(("When", draw(step_texts(allow_refs=False))))
    conclusion = draw(st.sampled_from(["COMPLIANT", "NON_COMPLIANT"]))
    steps.append(("Then", f"the control returns {conclusion}"))
    if draw(st.booleans()):
        steps.append(("And", draw(plain_text)))
    return steps


@st.composite
def controls(draw) -> gherkin.GherkinControl:
    count = draw(st.integers(1, 4))
    scenarios = []
    for i in range(count):
        title = f"{draw(plain_text)} case {i}"
        scenarios.append(gherkin.scenario_from_steps(title, draw(scenario_steps())))
    params = draw(st.dictionaries(param_names, param_types, max_size=3))
    return gherkin.build_control(
        rule_identifier=draw(identifiers),
        rule_name=draw(plain_text),
        description=draw(plain_text),
        trigger=draw(st.sampled_from(list(gherkin.Trigger))),
        rule_parameters=params,
        scenarios=scenarios,
    )
