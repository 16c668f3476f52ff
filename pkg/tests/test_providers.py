import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from controlgen import gherkin
from controlgen.providers import (
    BudgetExceeded,
    EnvelopeError,
    EnvelopeFieldInvalid,
    ExtraKey,
    GherkinInvalid,
    HttpProvider,
    MissingKey,
    NotJson,
    ProseContamination,
    ReplayMiss,
    ReplayProvider,
    Timeout,
    envelope_to_control,
    make_request,
    parse_envelope,
)

ENVELOPES = Path(__file__).resolve().parent.parent / "fixtures" / "envelopes"


def read_envelope(name: str) -> str:
    return (ENVELOPES / name).read_text(encoding="utf-8")


# --- providers ---------------------------------------------------------------


def test_replay_returns_fixture_verbatim(tmp_path):
    request = make_request("a prompt")
    (tmp_path / f"{request.prompt_hash}.txt").write_text("canned", encoding="utf-8")
    response = ReplayProvider(tmp_path).complete(request)
    assert response.raw == "canned"
    assert response.provider_name == "replay"


def test_replay_miss(tmp_path):
    with pytest.raises(ReplayMiss):
        ReplayProvider(tmp_path).complete(make_request("nothing here"))


def test_replay_is_idempotent(tmp_path):
    request = make_request("a prompt")
    (tmp_path / f"{request.prompt_hash}.txt").write_text("canned", encoding="utf-8")
    provider = ReplayProvider(tmp_path)
    assert provider.complete(request).raw == provider.complete(request).raw


def test_replay_budget(tmp_path):
    request = make_request("a prompt", max_output_chars=3)
    (tmp_path / f"{request.prompt_hash}.txt").write_text("too long", encoding="utf-8")
    with pytest.raises(BudgetExceeded):
        ReplayProvider(tmp_path).complete(request)


def test_request_validates_hash():
    with pytest.raises(ValueError):
        from controlgen.providers import ProviderRequest

        ProviderRequest(prompt="abc", prompt_hash="deadbeef")


class _StubHandler(BaseHTTPRequestHandler):
    body = b"stub response"
    status = 200
    received = []
    request_headers = []

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        type(self).received.append(json.loads(self.rfile.read(length)))
        type(self).request_headers.append(dict(self.headers))
        self.send_response(type(self).status)
        self.send_header("Content-Type", "text/plain")
        self.end_headers()
        self.wfile.write(type(self).body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _StubHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    _StubHandler.received = []
    _StubHandler.request_headers = []
    _StubHandler.status = 200
    _StubHandler.body = b"stub response"
    yield f"http://127.0.0.1:{server.server_port}/complete"
    server.shutdown()


def test_http_provider_passthrough(stub_server):
    provider = HttpProvider(stub_server)
    response = provider.complete(make_request("hello", temperature=0.5))
    assert response.raw == "stub response"
    assert _StubHandler.received[0]["prompt"] == "hello"
    assert _StubHandler.received[0]["temperature"] == 0.5


def test_http_provider_timeout():
    provider = HttpProvider("http://127.0.0.1:1/never", timeout_ms=200)
    with pytest.raises((Timeout, Exception)):
        provider.complete(make_request("hello"))


def test_http_provider_sends_auth_header(stub_server):
    provider = HttpProvider(stub_server, auth_header="X-Api-Key", auth_value="sekrit")
    provider.complete(make_request("hello"))
    assert _StubHandler.request_headers[-1].get("X-Api-Key") == "sekrit"


def test_http_provider_non_200_is_transport(stub_server):
    from controlgen.providers import Transport

    _StubHandler.status = 500
    provider = HttpProvider(stub_server)
    with pytest.raises(Transport):
        provider.complete(make_request("hello"))


def test_http_provider_retry_recovers(stub_server):
    from controlgen.providers import Transport

    _StubHandler.status = 500
    no_retry = HttpProvider(stub_server)
    with pytest.raises(Transport):
        no_retry.complete(make_request("hello"))

    calls = {"n": 0}
    original_attempt = HttpProvider._attempt

    def flaky(self, request):
        calls["n"] += 1
        if calls["n"] == 1:
            raise Transport("transient")
        _StubHandler.status = 200
        return original_attempt(self, request)

    retrying = HttpProvider(stub_server, retry=True)
    try:
        HttpProvider._attempt = flaky
        response = retrying.complete(make_request("hello"))
    finally:
        HttpProvider._attempt = original_attempt
    assert response.raw == "stub response"
    assert calls["n"] == 2


def test_http_provider_budget(stub_server):
    _StubHandler.body = b"x" * 50
    provider = HttpProvider(stub_server)
    with pytest.raises(BudgetExceeded):
        provider.complete(make_request("hello", max_output_chars=10))


# --- envelope parsing ---------------------------------------------------------


def test_clean_envelope_parses():
    env = parse_envelope(read_envelope("clean.json"))
    assert env.trigger == "Configuration Changes"
    control, warnings = envelope_to_control(env)
    assert len(control.scenarios) == 2
    assert warnings == []
    assert control.rule_name == "DynamoDB table encrypted at rest"


def test_structured_scenarios_accepted():
    env = parse_envelope(read_envelope("clean_structured.json"))
    control, _ = envelope_to_control(env)
    assert len(control.scenarios) == 2
    assert gherkin.parse(gherkin.serialize(control)) == control


def test_prose_contamination():
    with pytest.raises(ProseContamination):
        parse_envelope(read_envelope("leading_prose.txt"))


def test_extra_key():
    with pytest.raises(ExtraKey) as err:
        parse_envelope(read_envelope("extra_key.json"))
    assert err.value.name == "confidence"


def test_invalid_trigger():
    with pytest.raises(gherkin.InvalidTrigger) as err:
        parse_envelope(read_envelope("invalid_trigger.json"))
    assert err.value.text == "Hourly"


def test_missing_key():
    doc = json.loads(read_envelope("clean.json"))
    del doc["rule_name"]
    with pytest.raises(MissingKey) as err:
        parse_envelope(json.dumps(doc))
    assert err.value.name == "rule_name"


def test_two_top_level_objects_rejected():
    doc = read_envelope("clean.json")
    with pytest.raises(ProseContamination):
        parse_envelope(doc + "\n" + doc)


def test_top_level_array_rejected():
    with pytest.raises(NotJson):
        parse_envelope('["not", "an", "object"]')


def test_invalid_identifier_rejected():
    doc = json.loads(read_envelope("clean.json"))
    doc["rule_identifier"] = "lower case!"
    with pytest.raises(EnvelopeFieldInvalid):
        parse_envelope(json.dumps(doc))


def test_bad_inner_gherkin():
    doc = json.loads(read_envelope("clean.json"))
    doc["gherkin"] = "Scenario: broken\n  Given nothing\n"
    with pytest.raises(GherkinInvalid):
        parse_envelope(json.dumps(doc))


def test_envelope_overrides_gherkin_header_with_warning():
    doc = json.loads(read_envelope("clean.json"))
    doc["gherkin"] = (
        "Rule Identifier: OTHER_ID\n"
        "Rule Name: other name\n"
        "Description: other description\n"
        "Trigger: Periodic\n"
        "\n" + doc["gherkin"]
    )
    env = parse_envelope(json.dumps(doc))
    control, warnings = envelope_to_control(env)
    assert control.rule_identifier == doc["rule_identifier"]
    assert control.rule_name == "DynamoDB table encrypted at rest"
    assert control.trigger is gherkin.Trigger.CONFIGURATION_CHANGES
    assert len(warnings) == 4


def test_envelope_round_trip():
    env = parse_envelope(read_envelope("clean.json"))
    control, _ = envelope_to_control(env)
    assert gherkin.parse(gherkin.serialize(control)) == control


def test_fuzz_parse_envelope_never_crashes():
    import random

    rng = random.Random(99)
    clean = read_envelope("clean.json")
    for _ in range(2000):
        mode = rng.randrange(3)
        if mode == 0:
            text = "".join(chr(rng.randrange(32, 300)) for _ in range(rng.randrange(0, 120)))
        elif mode == 1:
            chars = list(clean)
            for _ in range(rng.randrange(1, 6)):
                pos = rng.randrange(len(chars))
                chars[pos] = chr(rng.randrange(32, 127))
            text = "".join(chars)
        else:
            text = clean[: rng.randrange(len(clean))]
        try:
            parse_envelope(text)
        except EnvelopeError:
            pass
        except gherkin.GherkinError:
            pass
