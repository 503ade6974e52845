import json
import random

import pytest

from claimcheck.corpus import Document
from claimcheck.datagen import (GenConfig, UnbalanceableError,
                                ValidationError, balance, build_manifest,
                                dedupe, extract_claims, generate,
                                read_dataset, write_dataset)
from claimcheck.transforms import Label, TransformKind
from conftest import synthetic_corpus


def simple_config(**overrides):
    defaults = dict(claims_per_doc=3, min_claim_tokens=5, noise_p=0.0, seed=11)
    defaults.update(overrides)
    return GenConfig(**defaults)


class TestExtractClaims:
    def test_distinct_with_correct_spans(self):
        doc = Document.from_text(
            "d", "Alice visited Paris yesterday morning. Bob stayed home all "
                 "day long. Carol wrote letters to friends abroad.")
        claims = extract_claims(doc, simple_config(claims_per_doc=2),
                                random.Random(0))
        assert len(claims) == 2
        assert len({i for i, _ in claims}) == 2
        for idx, claim in claims:
            assert claim.origin_span == doc.sentences[idx].span
            assert claim.text == doc.sentences[idx].text_in(doc.text)

    def test_short_sentences_filtered(self):
        doc = Document.from_text("d", "Hi. Yes. No.")
        assert extract_claims(doc, simple_config(), random.Random(0)) == []

    def test_empty_document(self):
        doc = Document.from_text("d", "")
        assert extract_claims(doc, simple_config(), random.Random(0)) == []


class TestGenerate:
    def test_forced_mix(self):
        doc = Document.from_text("d", "She was late for the meeting.")
        config = simple_config(
            claims_per_doc=1,
            transform_mix={TransformKind.IDENTITY: 1.0,
                           TransformKind.NEGATION: 1.0})
        examples, skips = generate([doc], config)
        assert len(examples) == 2
        assert {e.label for e in examples} == {Label.CONSISTENT, Label.INCONSISTENT}

    def test_rerun_byte_identical(self, tmp_path):
        docs = synthetic_corpus(10, seed=4)
        config = simple_config(noise_p=0.05, seed=1337)
        paths = []
        for run in range(2):
            examples, skips = generate(docs, config)
            manifest = build_manifest(examples, config, skips)
            path = tmp_path / f"run{run}.jsonl"
            write_dataset(examples, str(path), manifest)
            paths.append(path)
        assert paths[0].read_bytes() == paths[1].read_bytes()
        assert (tmp_path / "run0.jsonl.manifest.json").read_bytes() == \
            (tmp_path / "run1.jsonl.manifest.json").read_bytes()

    def test_worker_count_invariance(self):
        docs = synthetic_corpus(12, seed=8)
        config = simple_config(noise_p=0.05, seed=5)
        serial, _ = generate(docs, config, max_workers=1)
        parallel, _ = generate(docs, config, max_workers=8)
        assert serial == parallel

    def test_ids_deterministic_and_unique(self):
        docs = synthetic_corpus(5, seed=2)
        examples, _ = generate(docs, simple_config())
        ids = [e.id for e in examples]
        assert len(ids) == len(set(ids))


class TestBalance:
    def _mk(self, n_neg, n_pos):
        docs = synthetic_corpus(30, seed=6)
        examples, _ = generate(docs, simple_config())
        neg = [e for e in examples if e.label == Label.INCONSISTENT][:n_neg]
        pos = [e for e in examples if e.label == Label.CONSISTENT][:n_pos]
        assert len(neg) == n_neg and len(pos) == n_pos
        return neg + pos

    def test_downsample_to_half(self):
        examples = self._mk(60, 40)
        balanced = balance(examples, 0.5, random.Random(0))
        neg = sum(1 for e in balanced if e.label == Label.INCONSISTENT)
        pos = len(balanced) - neg
        assert (neg, pos) == (40, 40)

    def test_already_balanced(self):
        examples = self._mk(30, 30)
        assert balance(examples, 0.5, random.Random(0)) == examples

    def test_single_class_errors(self):
        examples = self._mk(20, 1)
        only_neg = [e for e in examples if e.label == Label.INCONSISTENT]
        with pytest.raises(UnbalanceableError):
            balance(only_neg, 0.5, random.Random(0))

    def test_order_preserved(self):
        examples = self._mk(50, 20)
        balanced = balance(examples, 0.5, random.Random(1))
        positions = [examples.index(e) for e in balanced]
        assert positions == sorted(positions)


class TestDedupe:
    def test_duplicate_removed(self):
        docs = synthetic_corpus(2, seed=1)
        examples, _ = generate(docs, simple_config())
        doubled = examples + examples
        assert dedupe(doubled) == examples

    def test_distinct_unchanged(self):
        docs = synthetic_corpus(2, seed=1)
        examples, _ = generate(docs, simple_config())
        assert dedupe(examples) == examples

    def test_count_matches_distinct_keys(self):
        docs = synthetic_corpus(4, seed=13)
        examples, _ = generate(docs, simple_config())
        rng = random.Random(3)
        multiset = [rng.choice(examples) for _ in range(200)]
        distinct = {(e.doc_id, e.claim, e.label) for e in multiset}
        assert len(dedupe(multiset)) == len(distinct)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        docs = synthetic_corpus(20, seed=10)
        examples, _ = generate(docs, simple_config(noise_p=0.05))
        assert len(examples) >= 100
        path = tmp_path / "data.jsonl"
        write_dataset(examples, str(path))
        assert read_dataset(str(path)) == examples

    def test_bad_span_bounds(self, tmp_path):
        docs = synthetic_corpus(1, seed=1)
        examples, _ = generate(docs, simple_config())
        path = tmp_path / "data.jsonl"
        obj = json.loads(examples[0].to_json())
        obj["augmentation_span"] = [0, len(obj["claim"]) + 50]
        path.write_text(examples[0].to_json() + "\n" + json.dumps(obj) + "\n")
        with pytest.raises(ValidationError) as err:
            read_dataset(str(path))
        assert err.value.line == 2

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        assert read_dataset(str(path)) == []

    def test_malformed_json_line(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text("{nope\n")
        with pytest.raises(ValidationError) as err:
            read_dataset(str(path))
        assert err.value.line == 1


class TestManifest:
    def test_arithmetic(self):
        docs = synthetic_corpus(15, seed=3)
        config = simple_config()
        examples, skips = generate(docs, config)
        manifest = build_manifest(examples, config, skips)
        assert sum(manifest.transform_counts.values()) == manifest.example_count
        negatives = sum(1 for e in examples if e.label == Label.INCONSISTENT)
        assert manifest.negative_fraction == negatives / len(examples)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GenConfig(transform_mix={TransformKind.IDENTITY: 1.0})
        with pytest.raises(ValueError):
            GenConfig(transform_mix={TransformKind.NEGATION: 1.0})
        with pytest.raises(ValueError):
            GenConfig(noise_p=1.5)
        with pytest.raises(ValueError):
            GenConfig(target_negative_ratio=0.0)
