"""Fixture file formats and the file-backed stand-ins for the annotation and
neighborhood services.

All files are UTF-8, LF-terminated, tab separated (``judgments.csv`` is
comma separated with a header). Blank lines and lines starting with ``#``
are skipped in the TSV formats.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Protocol, Sequence

from .errors import InputError, ParseError
from .model import check_iri

GRADES = (0, 1, 2, 3)


def _rows(path, ncols: int | None, comments: bool = True) -> Iterator[tuple[int, list[str]]]:
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or (comments and line.startswith("#")):
                continue
            fields = line.split("\t")
            if ncols is not None and len(fields) != ncols:
                raise ParseError(f"expected {ncols} tab-separated columns, got {len(fields)}", path, lineno)
            yield lineno, fields


def _iri(value, path, lineno):
    try:
        return check_iri(value)
    except ParseError as exc:
        raise ParseError(str(exc), path, lineno) from None


def parse_graph_file(path) -> list[tuple[str, str, str]]:
    """Read ``subject TAB predicate TAB object`` lines."""
    out = []
    for lineno, (s, p, o) in _rows(path, 3):
        out.append((_iri(s, path, lineno), _iri(p, path, lineno), _iri(o, path, lineno)))
    return out


def escape_text(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_text(text: str) -> str:
    out = []
    it = iter(text)
    for ch in it:
        if ch != "\\":
            out.append(ch)
            continue
        nxt = next(it, "")
        out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, "\\" + nxt))
    return "".join(out)


def parse_texts(path) -> dict[str, str]:
    """``entity-IRI TAB text`` with ``\\t``, ``\\n`` and ``\\\\`` escapes."""
    texts: dict[str, str] = {}
    for lineno, (uri, text) in _rows(path, 2):
        _iri(uri, path, lineno)
        if uri in texts:
            raise ParseError(f"duplicate entity {uri}", path, lineno)
        texts[uri] = unescape_text(text)
    return texts


@dataclass(frozen=True)
class Serp:
    """Documents returned for a query, best first (rank 1 is index 0)."""

    ranked_docs: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.ranked_docs)) != len(self.ranked_docs):
            raise InputError("duplicate document id in SERP")

    def __len__(self):
        return len(self.ranked_docs)

    def rank(self, doc_id: str) -> int:
        return self.ranked_docs.index(doc_id) + 1


def parse_serp(path) -> Serp:
    docs = []
    seen = set()
    for lineno, (doc,) in _rows(path, 1):
        doc = doc.strip()
        if doc in seen:
            raise ParseError(f"duplicate document id {doc}", path, lineno)
        seen.add(doc)
        docs.append(doc)
    return Serp(tuple(docs))


# doc_id -> entity IRIs, in file order
DocEntities = dict[str, tuple[str, ...]]


def check_doc_entities(de: Mapping[str, Iterable[str]], serp: Serp) -> None:
    known = set(serp.ranked_docs)
    for doc in de:
        if doc not in known:
            raise InputError(f"document {doc} has entities but is not in the SERP")


def parse_doc_entities(path) -> DocEntities:
    out: dict[str, list[str]] = {}
    for lineno, (doc, uri) in _rows(path, 2):
        _iri(uri, path, lineno)
        ents = out.setdefault(doc, [])
        if uri not in ents:
            ents.append(uri)
    return {d: tuple(e) for d, e in out.items()}


def parse_qrels(path) -> dict[str, int]:
    qrels: dict[str, int] = {}
    for lineno, (uri, grade) in _rows(path, 2):
        _iri(uri, path, lineno)
        qrels_grade = _grade(grade, path, lineno)
        if uri in qrels:
            raise ParseError(f"duplicate entity {uri}", path, lineno)
        qrels[uri] = qrels_grade
    return qrels


def _grade(text, path, lineno) -> int:
    try:
        value = int(text.strip())
    except ValueError:
        raise ParseError(f"grade {text!r} is not an integer", path, lineno) from None
    if value not in GRADES:
        raise ParseError(f"grade {value} out of scale 0-3", path, lineno)
    return value


def parse_judgments(path):
    """``unit_id,worker_id,value`` CSV with a header row."""
    from .evaluate import Judgment, JudgmentSet

    records = []
    seen = set()
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["unit_id", "worker_id", "value"]:
            raise ParseError("header must be unit_id,worker_id,value", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise ParseError(f"expected 3 columns, got {len(row)}", path, lineno)
            unit, worker, value = (c.strip() for c in row)
            key = (unit, worker)
            if key in seen:
                raise ParseError(f"duplicate judgment for unit {unit!r} by worker {worker!r}", path, lineno)
            seen.add(key)
            records.append(Judgment(unit, worker, _grade(value, path, lineno)))
    return JudgmentSet(tuple(records))


def write_judgments(path, judgments) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["unit_id", "worker_id", "value"])
        for r in judgments.records:
            w.writerow([r.unit, r.worker, r.value])


def write_graph_file(path, triples: Iterable[tuple[str, str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in triples:
            fh.write("\t".join(t) + "\n")


def write_texts(path, texts: Mapping[str, str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for uri, text in texts.items():
            fh.write(f"{uri}\t{escape_text(text)}\n")


def write_serp(path, serp: Serp) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for d in serp.ranked_docs:
            fh.write(d + "\n")


def write_doc_entities(path, de: Mapping[str, Iterable[str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc, uris in de.items():
            for uri in uris:
                fh.write(f"{doc}\t{uri}\n")


def write_qrels(path, qrels: Mapping[str, int]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for uri, grade in qrels.items():
            fh.write(f"{uri}\t{grade}\n")


def window_text(page_text: str, offsets: Sequence[int], width: int = 300) -> str:
    """Concatenate a window of ``width`` characters centered on each offset.

    A window spans ``ceil((width-1)/2)`` characters left of the offset and
    ``floor((width-1)/2)`` to its right, clipped to the text. Overlapping
    windows are repeated, not merged.
    """
    if width <= 0:
        raise ValueError("width must be positive")
    left = math.ceil((width - 1) / 2)
    right = (width - 1) // 2
    parts = []
    for off in offsets:
        if not 0 <= off < len(page_text):
            raise InputError(f"offset {off} outside text of length {len(page_text)}")
        parts.append(page_text[max(0, off - left) : off + right + 1])
    return "".join(parts)


class AnnotationClient(Protocol):
    def annotate(self, text: str, doc_id: str | None = None) -> list[tuple[str, int]]:
        """Entities detected in ``text`` as ``(IRI, character offset)``."""
        ...


class NeighborhoodClient(Protocol):
    def expand(self, entity: str) -> list[tuple[str, str, str]]:
        """Triples having ``entity`` as subject or object."""
        ...


class FileAnnotationClient:
    """Annotations replayed from ``annotations.tsv``
    (``doc_id TAB entity-IRI TAB offset``); lookups are by document id."""

    def __init__(self, path):
        self.path = path
        self._by_doc: dict[str, list[tuple[str, int]]] = defaultdict(list)
        for lineno, (doc, uri, offset) in _rows(path, 3):
            _iri(uri, path, lineno)
            try:
                off = int(offset)
            except ValueError:
                raise ParseError(f"offset {offset!r} is not an integer", path, lineno) from None
            if off < 0:
                raise ParseError(f"negative offset {off}", path, lineno)
            self._by_doc[doc].append((uri, off))

    @property
    def documents(self) -> list[str]:
        return list(self._by_doc)

    def annotate(self, text: str, doc_id: str | None = None) -> list[tuple[str, int]]:
        if doc_id is None:
            raise InputError("the fixture annotation client needs a document id")
        found = list(self._by_doc.get(doc_id, []))
        for uri, off in found:
            if off >= len(text):
                raise InputError(f"annotation of {uri} in {doc_id} at offset {off} is past the end of the text")
        return found


class FileNeighborhoodClient:
    """1-hop neighborhoods replayed from a ``graph.tsv``-format file."""

    def __init__(self, path):
        self.path = path
        self._triples = parse_graph_file(path)

    def expand(self, entity: str) -> list[tuple[str, str, str]]:
        return [t for t in self._triples if t[0] == entity or t[2] == entity]


def doc_entities_from_annotations(serp: Serp, pages: Mapping[str, str], client: AnnotationClient) -> DocEntities:
    out = {}
    for doc in serp.ranked_docs:
        if doc not in pages:
            continue
        uris = []
        for uri, _ in client.annotate(pages[doc], doc_id=doc):
            if uri not in uris:
                uris.append(uri)
        if uris:
            out[doc] = tuple(uris)
    return out


def assemble_texts(
    abstracts: Mapping[str, str],
    serp: Serp,
    pages: Mapping[str, str],
    client: AnnotationClient,
    width: int = 300,
) -> dict[str, str]:
    """Entity text = abstract, then the windows around each of the entity's
    mentions, documents in SERP order and offsets ascending."""
    windows: dict[str, list[str]] = defaultdict(list)
    for doc in serp.ranked_docs:
        if doc not in pages:
            continue
        offsets: dict[str, list[int]] = defaultdict(list)
        for uri, off in client.annotate(pages[doc], doc_id=doc):
            offsets[uri].append(off)
        for uri, offs in offsets.items():
            windows[uri].append(window_text(pages[doc], sorted(offs), width))
    out = {}
    for uri in list(abstracts) + [u for u in windows if u not in abstracts]:
        parts = [abstracts.get(uri, "")] + windows.get(uri, [])
        out[uri] = " ".join(p for p in parts if p)
    return out


def read_pages(directory) -> dict[str, str]:
    """``<doc_id>.txt`` files of a directory, keyed by doc id."""
    directory = Path(directory)
    if not directory.is_dir():
        raise InputError(f"{directory} is not a directory")
    return {p.stem: p.read_text(encoding="utf-8") for p in sorted(directory.glob("*.txt"))}
