"""Line-delimited JSON documents for spaces, families, witnesses, transcripts, triples and reports.

Every document is one compact, key-sorted JSON object per line. The first line is a header with
``format`` and ``kind``; sets are sorted point-index lists and opens are in canonical order, so
equal values always serialize to identical bytes.
"""

import hashlib
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Any

from .errors import DocumentError, FnLabError
from .game import GameTranscript, Round, is_dense
from .topo import (
    CoverSequence,
    FiniteSpace,
    PointSet,
    Role,
    SetFamily,
    SpaceMap,
    canonical,
    find_closure_violation,
    format_set,
    mask_of,
    members,
)
from .transfer import AbsoluteTriple
from .witness import FnsWitness, FnWitness

FORMAT = "fn-lab/1"

HEADER_FIELDS: dict[str, frozenset[str]] = {
    "space": frozenset({"points", "name", "auto_closed"}),
    "family": frozenset({"role", "space_hash"}),
    "covers": frozenset({"space_hash"}),
    "fns": frozenset({"role", "space_hash"}),
    "fn": frozenset({"role", "space_hash"}),
    "transcript": frozenset({"space_hash", "dense"}),
    "triple": frozenset(),
    "report": frozenset({"suite", "max_points", "ok"}),
}

_EMBEDDED = frozenset({"points", "opens"})
RECORD_FIELDS: dict[str, frozenset[str]] = {
    "space": frozenset({"open"}),
    "family": _EMBEDDED | {"member"},
    "covers": _EMBEDDED | {"cover"},
    "fns": _EMBEDDED | {"member", "s"},
    "fn": _EMBEDDED | {"member", "u", "l"},
    "transcript": frozenset({"round", "c", "d"}),
    "triple": _EMBEDDED | {"space", "map", "image"},
    "report": frozenset({"check", "instances", "failures", "counterexample", "value"}),
}

type Unknown = dict[int, dict[str, Any]]


@dataclass(frozen=True, slots=True)
class Record:
    line: int
    fields: dict[str, Any]


@dataclass(frozen=True, slots=True)
class Document:
    """A parsed document. `unknown` maps a record index (0 = header) to fields kept in lax mode."""

    kind: str
    header: dict[str, Any]
    records: tuple[Record, ...]
    unknown: Unknown = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class Loaded[T]:
    value: T
    unknown: Unknown = field(default_factory=dict)


def _encode(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _split_known(
    obj: dict[str, Any], allowed: frozenset[str], line: int, strict: bool
) -> tuple[dict[str, Any], dict[str, Any]]:
    known = {k: v for k, v in obj.items() if k in allowed}
    extra = {k: v for k, v in obj.items() if k not in allowed}
    if extra and strict:
        raise DocumentError(f"unknown field(s): {', '.join(sorted(extra))}", line)
    return known, extra


def parse_document(text: str, strict: bool = True) -> Document:
    """Split into header and records, rejecting (strict) or keeping (lax) unknown fields."""
    rows: list[tuple[int, dict[str, Any]]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as e:
            raise DocumentError(f"invalid JSON: {e.msg}", number) from None
        if not isinstance(obj, dict):
            raise DocumentError("each line must be a JSON object", number)
        rows.append((number, obj))
    if not rows:
        raise DocumentError("empty document")

    header_line, header = rows[0]
    found = header.get("format")
    if found != FORMAT:
        raise DocumentError(f"expected format {FORMAT!r}, got {found!r}", header_line)
    kind = header.get("kind")
    if kind not in HEADER_FIELDS:
        raise DocumentError(f"unknown document kind {kind!r}", header_line)

    unknown: Unknown = {}
    known, extra = _split_known(
        header, HEADER_FIELDS[kind] | {"format", "kind"}, header_line, strict
    )
    if extra:
        unknown[0] = extra
    records = []
    for index, (number, obj) in enumerate(rows[1:], start=1):
        fields, extra = _split_known(obj, RECORD_FIELDS[kind], number, strict)
        if extra:
            unknown[index] = extra
        records.append(Record(number, fields))
    return Document(kind, known, tuple(records), unknown)


def render_document(
    kind: str,
    header: Mapping[str, Any],
    records: Iterable[Mapping[str, Any]],
    unknown: Unknown | None = None,
) -> str:
    """Serialize a header and records as canonical JSON Lines."""
    unknown = unknown or {}
    lines = [_encode({**unknown.get(0, {}), **header, "format": FORMAT, "kind": kind})]
    for index, record in enumerate(records, start=1):
        lines.append(_encode({**unknown.get(index, {}), **record}))
    return "\n".join(lines) + "\n"


def _require(record: Record, key: str) -> Any:
    if key not in record.fields:
        raise DocumentError(f"missing field {key!r}", record.line)
    return record.fields[key]


def _int(value: Any, line: int, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise DocumentError(f"{what} must be a non-negative integer", line)
    return value


def _index_list(value: Any, line: int, what: str) -> tuple[int, ...]:
    if not isinstance(value, list):
        raise DocumentError(f"{what} must be a list of indices", line)
    indices = tuple(_int(v, line, what) for v in value)
    if list(indices) != sorted(set(indices)):
        raise DocumentError(f"{what} must be strictly increasing", line)
    return indices


def _set(value: Any, line: int, what: str) -> PointSet:
    return mask_of(_index_list(value, line, what))


def _set_list(value: Any, line: int, what: str) -> list[PointSet]:
    if not isinstance(value, list):
        raise DocumentError(f"{what} must be a list of sets", line)
    return [_set(v, line, what) for v in value]


def _as_list(s: PointSet) -> list[int]:
    return list(members(s))


def _rebuild(line: int, build: Any, *args: Any) -> Any:
    try:
        return build(*args)
    except DocumentError:
        raise
    except FnLabError as e:
        raise DocumentError(str(e), line) from None


def _space_fields(space: FiniteSpace) -> dict[str, Any]:
    return {"points": space.point_count, "opens": [_as_list(o) for o in space.opens]}


def space_hash(space: FiniteSpace) -> str:
    """sha256 over the canonical serialization of the space alone."""
    digest = hashlib.sha256(dump_space(space).encode("utf-8")).hexdigest()
    return f"sha256:{digest}"


def dump_space(
    space: FiniteSpace,
    name: str | None = None,
    auto_closed: int = 0,
    unknown: Unknown | None = None,
) -> str:
    """Space document: the point count in the header, then one record per open."""
    header: dict[str, Any] = {"points": space.point_count}
    if name is not None:
        header["name"] = name
    if auto_closed:
        header["auto_closed"] = auto_closed
    return render_document("space", header, ({"open": _as_list(o)} for o in space.opens), unknown)


@dataclass(frozen=True, slots=True)
class SpaceDocument:
    space: FiniteSpace
    name: str | None = None
    auto_closed: int = 0
    unknown: Unknown = field(default_factory=dict)


def load_space(text: str, auto_close: bool = False, strict: bool = True) -> SpaceDocument:
    """Parse a space; with auto_close the opens are a generating family to be closed."""
    doc = _expect(parse_document(text, strict), "space")
    points = _int(doc.header.get("points"), 1, "points")
    opens: list[PointSet] = []
    where: dict[PointSet, int] = {}
    for record in doc.records:
        s = _set(_require(record, "open"), record.line, "open")
        if s >> points:
            raise DocumentError(f"open set {format_set(s)} has points >= {points}", record.line)
        if s in where:
            raise DocumentError(f"open set {format_set(s)} repeats line {where[s]}", record.line)
        where[s] = record.line
        opens.append(s)

    name = doc.header.get("name")
    if auto_close:
        space, added = _rebuild(1, FiniteSpace.generated_by, points, opens)
        return SpaceDocument(space, name, added or doc.header.get("auto_closed", 0), doc.unknown)

    violation = find_closure_violation(opens)
    if violation is not None:
        a, b, op = violation
        raise DocumentError(
            f"opens not closed under {op}: {format_set(a)}, {format_set(b)}", where[a]
        )
    if opens != list(canonical(opens)):
        raise DocumentError("opens are not in canonical order")
    space = _rebuild(1, FiniteSpace, points, tuple(opens))
    return SpaceDocument(space, name, doc.header.get("auto_closed", 0), doc.unknown)


def _expect(doc: Document, kind: str) -> Document:
    if doc.kind != kind:
        raise DocumentError(f"expected a {kind} document, got {doc.kind}", 1)
    return doc


def _space_from_fields(fields: Mapping[str, Any], line: int) -> FiniteSpace:
    points = _int(fields.get("points"), line, "points")
    opens = _set_list(fields.get("opens"), line, "opens")
    return _rebuild(line, FiniteSpace, points, tuple(opens))


def _resolve_space(
    doc: Document, space: FiniteSpace | None
) -> tuple[FiniteSpace, tuple[Record, ...]]:
    """The embedded space (first record) or the one supplied, checked against space_hash."""
    records = doc.records
    if records and "points" in records[0].fields:
        embedded = _space_from_fields(records[0].fields, records[0].line)
        if space is not None and space != embedded:
            raise DocumentError("embedded space differs from the supplied space", records[0].line)
        space, records = embedded, records[1:]
    if space is None:
        raise DocumentError("document references a space that was not supplied")
    expected = doc.header.get("space_hash")
    if expected is not None and expected != space_hash(space):
        raise DocumentError(f"content hash mismatch: document names {expected}", 1)
    return space, records


def _embedding(space: FiniteSpace, embed: bool) -> list[dict[str, Any]]:
    return [_space_fields(space)] if embed else []


def _role(doc: Document) -> Role:
    try:
        return Role(doc.header.get("role", Role.PLAIN))
    except ValueError:
        raise DocumentError(f"unknown role {doc.header.get('role')!r}", 1) from None


def dump_family(family: SetFamily, embed: bool = True, unknown: Unknown | None = None) -> str:
    """Family document, embedding its space unless `embed` is false."""
    header = {"role": str(family.role), "space_hash": space_hash(family.space)}
    records = _embedding(family.space, embed) + [{"member": _as_list(s)} for s in family]
    return render_document("family", header, records, unknown)


def load_family(
    text: str, space: FiniteSpace | None = None, strict: bool = True
) -> Loaded[SetFamily]:
    """Parse a family document against `space` or its embedded space."""
    doc = _expect(parse_document(text, strict), "family")
    space, records = _resolve_space(doc, space)
    sets = [_set(_require(r, "member"), r.line, "member") for r in records]
    family = _rebuild(1, SetFamily, space, tuple(sets), _role(doc))
    return Loaded(family, doc.unknown)


def dump_covers(seq: CoverSequence, embed: bool = True) -> str:
    """Cover sequence document, one record per cover."""
    header = {"space_hash": space_hash(seq.space)}
    records = _embedding(seq.space, embed) + [
        {"cover": [_as_list(s) for s in cover]} for cover in seq.covers
    ]
    return render_document("covers", header, records)


def load_covers(text: str, space: FiniteSpace | None = None, strict: bool = True) -> CoverSequence:
    """Parse a cover sequence document."""
    doc = _expect(parse_document(text, strict), "covers")
    space, records = _resolve_space(doc, space)
    covers = []
    for r in records:
        sets = _set_list(_require(r, "cover"), r.line, "cover")
        covers.append(_rebuild(r.line, SetFamily, space, tuple(sets), Role.COVER))
    return _rebuild(1, CoverSequence, space, tuple(covers))


def dump_fns(w: FnsWitness, embed: bool = True) -> str:
    """FNS witness document: the family, then one record per member with its s-image."""
    family = w.family
    header = {"role": str(family.role), "space_hash": space_hash(family.space)}
    records = _embedding(family.space, embed) + [
        {"member": _as_list(s), "s": list(image)}
        for s, image in zip(family, w.images, strict=True)
    ]
    return render_document("fns", header, records)


def load_fns(text: str, space: FiniteSpace | None = None, strict: bool = True) -> FnsWitness:
    """Parse an FNS witness document."""
    doc = _expect(parse_document(text, strict), "fns")
    space, records = _resolve_space(doc, space)
    sets = [_set(_require(r, "member"), r.line, "member") for r in records]
    images = [_index_list(_require(r, "s"), r.line, "s") for r in records]
    family = _rebuild(1, SetFamily, space, tuple(sets), _role(doc))
    for r, image in zip(records, images, strict=True):
        if any(k >= len(sets) for k in image):
            raise DocumentError(f"s refers to a member beyond the {len(sets)} listed", r.line)
    return _rebuild(1, FnsWitness, family, tuple(images))


def dump_fn(w: FnWitness, embed: bool = True) -> str:
    """FN witness document with u and l index lists per base member."""
    base = w.base
    header = {"role": str(base.role), "space_hash": space_hash(base.space)}
    records = _embedding(base.space, embed) + [
        {"member": _as_list(s), "u": list(up), "l": list(low)}
        for s, up, low in zip(base, w.up, w.low, strict=True)
    ]
    return render_document("fn", header, records)


def load_fn(text: str, space: FiniteSpace | None = None, strict: bool = True) -> FnWitness:
    """Parse an FN witness document."""
    doc = _expect(parse_document(text, strict), "fn")
    space, records = _resolve_space(doc, space)
    sets = [_set(_require(r, "member"), r.line, "member") for r in records]
    up = [_index_list(_require(r, "u"), r.line, "u") for r in records]
    low = [_index_list(_require(r, "l"), r.line, "l") for r in records]
    base = _rebuild(1, SetFamily, space, tuple(sets), _role(doc))
    for r, u, lo in zip(records, up, low, strict=True):
        if any(k >= len(sets) for k in (*u, *lo)):
            raise DocumentError(f"u or l refers to a member beyond the {len(sets)} listed", r.line)
    return _rebuild(1, FnWitness, base, tuple(up), tuple(low))


def dump_transcript(t: GameTranscript) -> str:
    """Transcripts name their space by content hash only."""
    header = {"space_hash": space_hash(t.space), "dense": t.dense}
    records = [
        {"round": n, "c": [_as_list(s) for s in r.c], "d": [_as_list(s) for s in r.d]}
        for n, r in enumerate(t.rounds)
    ]
    return render_document("transcript", header, records)


def load_transcript(text: str, space: FiniteSpace, strict: bool = True) -> GameTranscript:
    """Parse a game transcript recorded over `space`."""
    doc = _expect(parse_document(text, strict), "transcript")
    space, records = _resolve_space(doc, space)
    rounds = []
    for n, r in enumerate(records):
        if _require(r, "round") != n:
            raise DocumentError(f"expected round {n}", r.line)
        c = _set_list(_require(r, "c"), r.line, "c")
        d = _set_list(_require(r, "d"), r.line, "d")
        rounds.append(
            Round(
                _rebuild(r.line, SetFamily, space, tuple(c)),
                _rebuild(r.line, SetFamily, space, tuple(d)),
            )
        )
    dense = doc.header.get("dense")
    if not isinstance(dense, bool):
        raise DocumentError("header field 'dense' must be a boolean", 1)
    covered = 0
    for r in rounds:
        covered |= r.d.union()
    if dense != is_dense(space, covered):
        raise DocumentError("header field 'dense' disagrees with the rounds", 1)
    return GameTranscript(space, tuple(rounds), dense)


_TRIPLE_SPACES = ("z", "x", "y")


def dump_triple(t: AbsoluteTriple) -> str:
    """Co-absolute triple: Z, X, Y and the two maps."""
    records: list[dict[str, Any]] = [
        {"space": name, **_space_fields(space)}
        for name, space in zip(_TRIPLE_SPACES, (t.z, t.x, t.y), strict=True)
    ]
    records += [{"map": "f", "image": list(t.f.image)}, {"map": "g", "image": list(t.g.image)}]
    return render_document("triple", {}, records)


def load_triple(text: str, strict: bool = True) -> AbsoluteTriple:
    """Parse a co-absolute triple; both maps must be irreducible."""
    doc = _expect(parse_document(text, strict), "triple")
    spaces: dict[str, FiniteSpace] = {}
    images: dict[str, tuple[int, ...]] = {}
    for r in doc.records:
        if "space" in r.fields:
            spaces[r.fields["space"]] = _space_from_fields(r.fields, r.line)
        elif "map" in r.fields:
            values = _require(r, "image")
            if not isinstance(values, list):
                raise DocumentError("image must be a list of point indices", r.line)
            images[r.fields["map"]] = tuple(_int(v, r.line, "image") for v in values)
        else:
            raise DocumentError("record is neither a space nor a map", r.line)
    missing = [k for k in _TRIPLE_SPACES if k not in spaces] + [
        k for k in ("f", "g") if k not in images
    ]
    if missing:
        raise DocumentError(f"triple is missing {', '.join(missing)}")
    f = _rebuild(1, SpaceMap, spaces["z"], spaces["y"], images["f"])
    g = _rebuild(1, SpaceMap, spaces["z"], spaces["x"], images["g"])
    return _rebuild(1, AbsoluteTriple, spaces["z"], f, g)


def dump_report(header: Mapping[str, Any], rows: Sequence[Mapping[str, Any]]) -> str:
    """Sweep report: a header, then one row per check."""
    return render_document("report", header, rows)


def load_report(text: str, strict: bool = True) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Parse a sweep report into its header fields and rows."""
    doc = _expect(parse_document(text, strict), "report")
    return doc.header, [r.fields for r in doc.records]
