"""Exemplar and documentation-snippet store with BM25 retrieval.

Exemplars are ranked lexically (BM25, k1=1.2, b=0.75, idf = ln(1 + (N-df+0.5)/(df+0.5)))
after a hard filter on control type; document statistics are computed over the
whole exemplar collection. Snippets are keyed by (service, resource) and
ranked shortest-first (score = 1/len), since brevity is the only relevance
signal available.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from . import gherkin
from .catalog import ControlTypeId
from .errors import DomainError

BM25_K1 = 1.2
BM25_B = 0.75
MAX_SNIPPET_CHARS = 2000

_TOKEN_SPLIT_RE = re.compile(r"[^a-z0-9]+")


class DuplicateId(DomainError):
    def __init__(self, item_id: str) -> None:
        super().__init__(f"duplicate id: {item_id!r}")
        self.item_id = item_id


class UnparseableExemplar(DomainError):
    def __init__(self, item_id: str, reason: str) -> None:
        super().__init__(f"exemplar {item_id!r} has unparseable gherkin: {reason}")
        self.item_id = item_id


class MalformedCorpus(DomainError):
    def __init__(self, path: str, lineno: int, reason: str) -> None:
        super().__init__(f"{path}:{lineno}: {reason}")


class InvalidSnippet(DomainError):
    def __init__(self, item_id: str, reason: str) -> None:
        super().__init__(f"snippet {item_id!r}: {reason}")
        self.item_id = item_id


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumerics, drop empties."""
    return [t for t in _TOKEN_SPLIT_RE.split(text.lower()) if t]


@dataclass(frozen=True)
class Exemplar:
    id: str
    control_type: ControlTypeId
    service: str
    resource: str
    gherkin_text: str
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class DocSnippet:
    id: str
    service: str
    resource: str
    api_name: str
    body: str
    tokens: tuple[str, ...] = ()


@dataclass(frozen=True)
class RetrievalResult:
    id: str
    score: float
    rank: int


def exemplar_tokens(exemplar: Exemplar, control: gherkin.GherkinControl) -> tuple[str, ...]:
    joined = " ".join(
        [exemplar.service, exemplar.resource, control.rule_name, control.description]
    )
    return tuple(tokenize(joined))


def load_exemplars(path: str | Path) -> list[Exemplar]:
    """Read exemplars.jsonl; tokens are always derived, never read."""
    out: list[Exemplar] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedCorpus(str(path), lineno, f"invalid JSON: {exc}") from exc
        try:
            exemplar = Exemplar(
                id=str(doc["id"]),
                control_type=ControlTypeId.from_text(str(doc["control_type"])),
                service=str(doc["service"]),
                resource=str(doc["resource"]),
                gherkin_text=str(doc["gherkin_text"]),
            )
        except KeyError as exc:
            raise MalformedCorpus(str(path), lineno, f"missing key {exc}") from exc
        out.append(exemplar)
    return out


def load_snippets(path: str | Path) -> list[DocSnippet]:
    out: list[DocSnippet] = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not raw.strip():
            continue
        try:
            doc = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedCorpus(str(path), lineno, f"invalid JSON: {exc}") from exc
        try:
            snippet = DocSnippet(
                id=str(doc["id"]),
                service=str(doc["service"]),
                resource=str(doc["resource"]),
                api_name=str(doc["api_name"]),
                body=str(doc["body"]),
            )
        except KeyError as exc:
            raise MalformedCorpus(str(path), lineno, f"missing key {exc}") from exc
        out.append(snippet)
    return out


class Index:
    """Immutable lexical index over exemplars and snippets."""

    def __init__(self, exemplars: Sequence[Exemplar], snippets: Sequence[DocSnippet]) -> None:
        self._exemplars: dict[str, Exemplar] = {}
        self._snippets: dict[str, DocSnippet] = {}
        self._tf: dict[str, Counter[str]] = {}
        self._doc_len: dict[str, int] = {}
        self._df: Counter[str] = Counter()
        for ex in exemplars:
            if ex.id in self._exemplars:
                raise DuplicateId(ex.id)
            try:
                control = gherkin.parse(ex.gherkin_text)
            except gherkin.GherkinError as exc:
                raise UnparseableExemplar(ex.id, str(exc)) from exc
            tokens = exemplar_tokens(ex, control)
            self._exemplars[ex.id] = replace(ex, tokens=tokens)
            counts = Counter(tokens)
            self._tf[ex.id] = counts
            self._doc_len[ex.id] = len(tokens)
            for term in counts:
                self._df[term] += 1
        for sn in snippets:
            if sn.id in self._snippets:
                raise DuplicateId(sn.id)
            if not sn.body:
                raise InvalidSnippet(sn.id, "body must be non-empty")
            if len(sn.body) > MAX_SNIPPET_CHARS:
                raise InvalidSnippet(sn.id, f"body exceeds {MAX_SNIPPET_CHARS} characters")
            tokens = tuple(tokenize(" ".join([sn.service, sn.resource, sn.api_name, sn.body])))
            self._snippets[sn.id] = replace(sn, tokens=tokens)
        total = sum(self._doc_len.values())
        self._avgdl = total / len(self._doc_len) if self._doc_len else 0.0

    @property
    def exemplar_count(self) -> int:
        return len(self._exemplars)

    @property
    def snippet_count(self) -> int:
        return len(self._snippets)

    def get_exemplar(self, item_id: str) -> Exemplar:
        return self._exemplars[item_id]

    def get_snippet(self, item_id: str) -> DocSnippet:
        return self._snippets[item_id]

    def exemplars(self) -> list[Exemplar]:
        return list(self._exemplars.values())

    def snippets(self) -> list[DocSnippet]:
        return list(self._snippets.values())

    def _bm25(self, doc_id: str, query_tokens: Sequence[str]) -> float:
        tf = self._tf[doc_id]
        dl = self._doc_len[doc_id]
        n = len(self._tf)
        score = 0.0
        for term in query_tokens:
            f = tf.get(term, 0)
            if f == 0:
                continue
            df = self._df[term]
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            norm = BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self._avgdl)
            score += idf * f * (BM25_K1 + 1.0) / (f + norm)
        return score


def build_index(exemplars: Sequence[Exemplar], snippets: Sequence[DocSnippet]) -> Index:
    return Index(exemplars, snippets)


def _ranked(scored: Iterable[tuple[str, float]], limit: int) -> list[RetrievalResult]:
    ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))[:limit]
    return [RetrievalResult(id=i, score=s, rank=r) for r, (i, s) in enumerate(ordered, 1)]


def retrieve_exemplars(
    index: Index,
    control_type: ControlTypeId,
    query_tokens: Sequence[str],
    k: int = 3,
) -> list[RetrievalResult]:
    """Top-k exemplars of the given control type by BM25; zero scores excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    scored = []
    for ex in index.exemplars():
        if ex.control_type != control_type:
            continue
        score = index._bm25(ex.id, query_tokens)
        if score > 0.0:
            scored.append((ex.id, score))
    return _ranked(scored, k)


def retrieve_snippets(
    index: Index, service: str, resource: str, m: int = 2
) -> list[RetrievalResult]:
    """Up to m snippets for the exact (service, resource), shortest body first."""
    if m < 1:
        raise ValueError("m must be >= 1")
    scored = [
        (sn.id, 1.0 / len(sn.body))
        for sn in index.snippets()
        if sn.service == service and sn.resource == resource
    ]
    return _ranked(scored, m)
