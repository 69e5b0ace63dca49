import numpy as np
import pytest

from sme.dataset import (TripleSet, load_dataset, load_manifest, load_triples,
                         make_folds, positives_of, save_dataset)
from sme.errors import ConfigError, IntegrityError, ParseError

from conftest import load_canonical, write_triples


class TestLoadTriples:
    def test_basic(self, tmp_path):
        path = write_triples(tmp_path / "t.tsv", [
            ("a", "r", "b", 1),
            ("b", "r", "a", 0),
            ("# a comment line is ignored",),
            ("a", "s", "b", 1),
        ])
        d, ts = load_triples(path)
        assert len(ts) == 3
        assert d.n_entities == 2
        assert d.n_relations == 2
        assert ts.n_positive == 2
        assert d.symbols[d.id_of("a")] == "a"
        assert d.is_relation(d.id_of("r"))

    def test_malformed_line_reports_line_number(self, tmp_path):
        path = write_triples(tmp_path / "t.tsv", [("a", "r", "b", 1), ("broken",)])
        with pytest.raises(ParseError, match="2"):
            load_triples(path)

    def test_bad_label(self, tmp_path):
        path = write_triples(tmp_path / "t.tsv", [("a", "r", "b", 2)])
        with pytest.raises(ParseError, match="label"):
            load_triples(path)

    def test_duplicate_triple(self, tmp_path):
        path = write_triples(tmp_path / "t.tsv", [("a", "r", "b", 1), ("a", "r", "b", 0)])
        with pytest.raises(IntegrityError, match="duplicate"):
            load_triples(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "t.tsv"
        path.write_text("# only a comment\n")
        with pytest.raises(IntegrityError):
            load_triples(path)


class TestPositivesOf:
    def test_all_zero(self):
        ts = TripleSet(np.array([0, 1]), np.array([2, 2]), np.array([1, 0]),
                       np.array([0, 0]))
        assert len(positives_of(ts)) == 0

    def test_filter_preserves_order(self):
        label = np.array([0, 1, 0, 0, 1, 0, 1, 0, 0, 0])
        ts = TripleSet(np.arange(10), np.full(10, 90), np.arange(10)[::-1].copy(), label)
        pos = positives_of(ts)
        assert len(pos) == 3
        assert list(pos.lhs) == [1, 4, 6]


class TestMakeFolds:
    def test_forced_sizes(self):
        ts = TripleSet(np.arange(4), np.zeros(4, dtype=np.int64),
                       np.arange(4), np.ones(4, dtype=np.int64))
        split = make_folds(ts, 2, seed=0)
        assert split.fold_sizes() == [2, 2]

    def test_determinism(self):
        ts = TripleSet(np.arange(50), np.zeros(50, dtype=np.int64),
                       np.arange(50), np.ones(50, dtype=np.int64))
        a = make_folds(ts, 5, seed=9).assignment
        b = make_folds(ts, 5, seed=9).assignment
        assert np.array_equal(a, b)

    def test_partition_and_near_equal_sizes(self):
        n = 103
        ts = TripleSet(np.arange(n), np.zeros(n, dtype=np.int64),
                       np.arange(n), np.ones(n, dtype=np.int64))
        split = make_folds(ts, 10, seed=1)
        sizes = split.fold_sizes()
        assert sum(sizes) == n
        assert max(sizes) - min(sizes) <= 1
        # every record lands in exactly one test fold
        seen = np.zeros(n, dtype=int)
        for i in range(10):
            _, _, test = split.fold_sets(i)
            seen[test.lhs] += 1
        assert np.array_equal(seen, np.ones(n, dtype=int))

    def test_train_valid_test_disjoint(self):
        n = 40
        ts = TripleSet(np.arange(n), np.zeros(n, dtype=np.int64),
                       np.arange(n), np.ones(n, dtype=np.int64))
        split = make_folds(ts, 4, seed=2)
        train, valid, test = split.fold_sets(1)
        groups = [set(train.lhs), set(valid.lhs), set(test.lhs)]
        assert sum(len(g) for g in groups) == n
        assert groups[0] | groups[1] | groups[2] == set(range(n))

    def test_k_too_large(self):
        ts = TripleSet(np.arange(3), np.zeros(3, dtype=np.int64),
                       np.arange(3), np.ones(3, dtype=np.int64))
        with pytest.raises(ConfigError):
            make_folds(ts, 4, seed=0)

    def test_fold_arithmetic_large(self):
        # 893,025 = 10 * 89,302 + 5
        sizes = [89302 + (1 if i < 5 else 0) for i in range(10)]
        assert sum(sizes) == 893025
        assert set(sizes) == {89302, 89303}


class TestRoundTrip:
    def test_dataset_json_round_trip(self, tmp_path, toy_dataset):
        d, ts = toy_dataset
        split = make_folds(ts, 5, seed=3)
        save_dataset(tmp_path / "ds.json", d, split.triples)
        d2, ts2 = load_dataset(tmp_path / "ds.json")
        assert d2.symbols == d.symbols
        assert d2.relation_ids == d.relation_ids
        assert d2.entity_ids == d.entity_ids
        for a, b in [(ts2.lhs, split.triples.lhs), (ts2.rel, split.triples.rel),
                     (ts2.rhs, split.triples.rhs), (ts2.label, split.triples.label),
                     (ts2.fold, split.triples.fold)]:
            assert np.array_equal(a, b)

    def test_tsv_reload_preserves_ids(self, tmp_path):
        recs = [("a", "r", "b", 1), ("c", "r", "a", 0), ("b", "s", "c", 1)]
        p1 = write_triples(tmp_path / "a.tsv", recs)
        d1, ts1 = load_triples(p1)
        p2 = write_triples(tmp_path / "b.tsv", recs)
        d2, ts2 = load_triples(p2)
        assert d1.symbols == d2.symbols
        assert np.array_equal(ts1.lhs, ts2.lhs)
        assert np.array_equal(ts1.label, ts2.label)


class TestManifest:
    def test_load(self, tmp_path):
        write_triples(tmp_path / "toy.tsv", [("a", "r", "b", 1), ("b", "r", "a", 0)])
        (tmp_path / "toy.json").write_text(
            '{"name": "toy", "triples": "toy.tsv", "folds": 2, "seed": 7}')
        m = load_manifest(tmp_path / "toy.json")
        assert m.name == "toy"
        assert m.folds == 2
        assert m.seed == 7
        assert m.triples_path.name == "toy.tsv"

    def test_missing_key(self, tmp_path):
        (tmp_path / "bad.json").write_text('{"name": "x"}')
        with pytest.raises(ParseError):
            load_manifest(tmp_path / "bad.json")


@pytest.mark.parametrize("name,entities,relations,records,pct", [
    ("umls", 135, 49, 893025, 0.76),
    ("kinships", 104, 26, 281216, 3.84),
    ("nations", 14, 56, 11191, 22.9),
])
def test_canonical_ingestion_counts(name, entities, relations, records, pct):
    d, ts = load_canonical(name)
    assert d.n_entities == entities
    assert d.n_relations == relations
    assert len(ts) == records
    got_pct = 100.0 * ts.n_positive / len(ts)
    assert got_pct == pytest.approx(pct, abs=0.05)


def test_umls_positive_count_consistent_with_percentage():
    _, ts = load_canonical("umls")
    assert abs(ts.n_positive - 0.0076 * 893025) < 0.00005 * 893025
