"""Triple-file ingestion, symbol dictionary, and cross-validation folds.

File format (UTF-8 text, one record per line):

    <lhs>\\t<rel>\\t<rhs>\\t<label>

where the symbols are non-empty strings without tabs and label is 0 or 1.
Lines starting with '#' are ignored. A dataset manifest is a small JSON
file naming the triple file plus the fold count and split seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, IntegrityError, LookupIdError, OutOfDictionaryError, ParseError


@dataclass(frozen=True)
class Triple:
    lhs: int
    rel: int
    rhs: int


class Dictionary:
    """Bijection between symbol strings and integer ids.

    Ids are assigned in order of first appearance in the data file, which
    makes them stable under serialization round-trips. ``relation_ids``
    marks the subset of ids seen in the relation slot; ``entity_ids`` the
    subset seen in an entity slot (the two may overlap).
    """

    def __init__(self):
        self.symbols: list[str] = []
        self._index: dict[str, int] = {}
        self.relation_ids: set[int] = set()
        self.entity_ids: set[int] = set()

    def __len__(self) -> int:
        return len(self.symbols)

    def intern(self, symbol: str) -> int:
        i = self._index.get(symbol)
        if i is None:
            i = len(self.symbols)
            self.symbols.append(symbol)
            self._index[symbol] = i
        return i

    def id_of(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise OutOfDictionaryError(f"unknown symbol: {symbol!r}") from None

    def symbol_of(self, i: int) -> str:
        if not 0 <= i < len(self.symbols):
            raise LookupIdError(f"id {i} outside [0, {len(self.symbols)})")
        return self.symbols[i]

    def is_relation(self, i: int) -> bool:
        return i in self.relation_ids

    @property
    def n_relations(self) -> int:
        return len(self.relation_ids)

    @property
    def n_entities(self) -> int:
        return len(self.entity_ids)

    def entity_id_array(self) -> np.ndarray:
        return np.array(sorted(self.entity_ids), dtype=np.int64)


@dataclass
class TripleSet:
    """Parallel arrays of (lhs, rel, rhs, label) records, optionally folded."""

    lhs: np.ndarray
    rel: np.ndarray
    rhs: np.ndarray
    label: np.ndarray
    fold: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.fold is None:
            self.fold = np.full(len(self.lhs), -1, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.lhs)

    def triple(self, i: int) -> Triple:
        return Triple(int(self.lhs[i]), int(self.rel[i]), int(self.rhs[i]))

    def subset(self, mask: np.ndarray) -> "TripleSet":
        return TripleSet(self.lhs[mask], self.rel[mask], self.rhs[mask],
                         self.label[mask], self.fold[mask])

    @property
    def n_positive(self) -> int:
        return int(self.label.sum())

    @staticmethod
    def from_records(records) -> "TripleSet":
        rec = list(records)
        arr = np.array(rec, dtype=np.int64).reshape(len(rec), 4)
        return TripleSet(arr[:, 0].copy(), arr[:, 1].copy(),
                         arr[:, 2].copy(), arr[:, 3].copy())


def positives_of(ts: TripleSet) -> TripleSet:
    """Records with label 1, in their original order."""
    return ts.subset(ts.label == 1)


def load_triples(path) -> tuple[Dictionary, TripleSet]:
    """Read a triple file, building the dictionary as symbols appear."""
    path = Path(path)
    d = Dictionary()
    seen: set[tuple[int, int, int]] = set()
    records = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ParseError(f"expected 4 tab-separated fields, got {len(parts)}",
                                 path=str(path), line_no=line_no)
            s_lhs, s_rel, s_rhs, s_label = parts
            if not (s_lhs and s_rel and s_rhs):
                raise ParseError("empty symbol", path=str(path), line_no=line_no)
            if s_label not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {s_label!r}",
                                 path=str(path), line_no=line_no)
            lhs = d.intern(s_lhs)
            rel = d.intern(s_rel)
            rhs = d.intern(s_rhs)
            d.entity_ids.add(lhs)
            d.entity_ids.add(rhs)
            d.relation_ids.add(rel)
            key = (lhs, rel, rhs)
            if key in seen:
                raise IntegrityError(
                    f"{path}:{line_no}: duplicate triple ({s_lhs}, {s_rel}, {s_rhs})")
            seen.add(key)
            records.append((lhs, rel, rhs, int(s_label)))
    if not records:
        raise IntegrityError(f"{path}: no records")
    return d, TripleSet.from_records(records)


@dataclass
class FoldSplit:
    """K-way partition of a record set for cross-validation.

    Fold i serves as the test set; fold (i+1) mod K is held out for early
    stopping; the remaining K-2 folds are the training pool. With K=2 there
    is no remainder, so the validation fold doubles as the training pool.
    """

    k: int
    triples: TripleSet
    assignment: np.ndarray

    def fold_sets(self, i: int) -> tuple[TripleSet, TripleSet, TripleSet]:
        if not 0 <= i < self.k:
            raise ConfigError(f"fold index {i} outside [0, {self.k})")
        test = self.assignment == i
        valid = self.assignment == (i + 1) % self.k
        train = ~(test | valid) if self.k > 2 else valid
        return self.triples.subset(train), self.triples.subset(valid), self.triples.subset(test)

    def fold_sizes(self) -> list[int]:
        return [int((self.assignment == i).sum()) for i in range(self.k)]


def make_folds(ts: TripleSet, k: int, seed: int) -> FoldSplit:
    """Seeded uniform permutation sliced into k near-equal folds."""
    n = len(ts)
    if k < 2:
        raise ConfigError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise ConfigError(f"fold count {k} exceeds record count {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    perm = rng.permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    # first (n % k) folds get the extra record
    base, extra = divmod(n, k)
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        assignment[perm[start:start + size]] = i
        start += size
    ts = TripleSet(ts.lhs, ts.rel, ts.rhs, ts.label, assignment.copy())
    return FoldSplit(k, ts, assignment)


@dataclass
class Manifest:
    name: str
    triples_path: Path
    folds: int
    seed: int


def load_manifest(path) -> Manifest:
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid manifest JSON: {exc}", path=str(path)) from exc
    for key in ("name", "triples"):
        if key not in payload:
            raise ParseError(f"manifest missing key {key!r}", path=str(path))
    folds = int(payload.get("folds", 10))
    seed = int(payload.get("seed", 0))
    triples_path = (path.parent / payload["triples"]).resolve()
    return Manifest(str(payload["name"]), triples_path, folds, seed)


def save_dataset(path, d: Dictionary, ts: TripleSet) -> None:
    """Serialize dictionary + records (+ fold assignment) as JSON."""
    payload = {
        "symbols": d.symbols,
        "relation_ids": sorted(d.relation_ids),
        "entity_ids": sorted(d.entity_ids),
        "records": np.stack([ts.lhs, ts.rel, ts.rhs, ts.label], axis=1).tolist(),
        "fold": ts.fold.tolist(),
    }
    Path(path).write_text(json.dumps(payload), encoding="utf-8")


def load_dataset(path) -> tuple[Dictionary, TripleSet]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    d = Dictionary()
    for s in payload["symbols"]:
        d.intern(s)
    d.relation_ids = set(payload["relation_ids"])
    d.entity_ids = set(payload["entity_ids"])
    rec = np.array(payload["records"], dtype=np.int64).reshape(-1, 4)
    fold = np.array(payload["fold"], dtype=np.int64)
    ts = TripleSet(rec[:, 0].copy(), rec[:, 1].copy(), rec[:, 2].copy(),
                   rec[:, 3].copy(), fold)
    return d, ts
