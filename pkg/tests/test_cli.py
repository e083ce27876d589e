from __future__ import annotations

import json

import pytest

from ichforge.cli import main
from ichforge.instruct import ReviewState, build_knowledge_qa, export_dataset

from fixtures import MIAO_ANSWER, MIAO_QUESTION


def run(capsys, *argv: str) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


class TestCorpusCommands:
    def test_ingest_stats_dedup_pipeline(self, tmp_path, capsys):
        raw = tmp_path / "raw"
        raw.mkdir()
        (raw / "a.txt").write_text("苗族古歌 流传", encoding="utf-8")
        (raw / "b.txt").write_text("苗族古歌 流传", encoding="utf-8")
        (raw / "c.txt").write_text("缂丝技艺", encoding="utf-8")
        corpus_path = tmp_path / "corpus.jsonl"

        code, out = run(
            capsys, "corpus", "ingest", "--root", str(raw),
            "--category", "ProjectInventory", "--format", "plain",
            "--out", str(corpus_path),
        )
        assert code == 0
        assert "3 documents" in out

        code, out = run(capsys, "corpus", "stats", str(corpus_path), "--format", "json")
        assert code == 0
        rows = json.loads(out)
        assert rows[0]["category"] == "ProjectInventory"
        assert rows[0]["num_texts"] == 3

        deduped = tmp_path / "deduped.jsonl"
        report = tmp_path / "removals.jsonl"
        code, out = run(
            capsys, "corpus", "dedup", str(corpus_path),
            "--out", str(deduped), "--report", str(report),
        )
        assert code == 0
        assert "kept 2 of 3" in out
        assert len(report.read_text(encoding="utf-8").splitlines()) == 1

    def test_unknown_category_fails(self, tmp_path, capsys):
        code = main(
            ["corpus", "ingest", "--root", str(tmp_path), "--category", "Nope",
             "--format", "plain", "--out", str(tmp_path / "x.jsonl")]
        )
        assert code == 1


class TestAnnotateCommands:
    def test_parse_validate_entities(self, tmp_path, capsys):
        markup = tmp_path / "markup.txt"
        markup.write_text(
            "<ICH-TITLE>苗族古歌</ICH-TITLE>流传于<ICH-PLACE>贵州省</ICH-PLACE>\n"
            "<ICH-TERM>古歌</ICH-TERM>源远流长\n",
            encoding="utf-8",
        )
        annotated = tmp_path / "annotated.jsonl"
        code, out = run(capsys, "annotate", "parse", "--in", str(markup), "--out", str(annotated))
        assert code == 0 and "2 documents" in out

        code, out = run(capsys, "annotate", "validate", str(annotated))
        assert code == 0 and "ok" in out

        code, out = run(capsys, "annotate", "entities", str(annotated), "--label", "ICH-TERM")
        assert code == 0
        assert out.strip().endswith("古歌")

    def test_validate_exit_code_on_violation(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text(
            json.dumps(
                {
                    "doc_id": "d",
                    "text": "甲乙",
                    "entities": [{"start": 0, "end": 9, "label": "ICH-TERM"}],
                    "pos": None,
                }
            )
            + "\n",
            encoding="utf-8",
        )
        code, out = run(capsys, "annotate", "validate", str(bad))
        assert code == 1
        assert "out-of-bounds" in out

    def test_parse_error_reported(self, tmp_path, capsys):
        markup = tmp_path / "markup.txt"
        markup.write_text("<ICH-SONG>x</ICH-SONG>\n", encoding="utf-8")
        code = main(["annotate", "parse", "--in", str(markup), "--out", str(tmp_path / "o.jsonl")])
        assert code == 1


class TestEvalCommands:
    def test_pair(self, tmp_path, capsys):
        (tmp_path / "cand.txt").write_text("苗族古歌", encoding="utf-8")
        (tmp_path / "ref.txt").write_text("苗族歌曲", encoding="utf-8")
        code, out = run(
            capsys, "eval", "pair",
            "--cand", str(tmp_path / "cand.txt"), "--ref", str(tmp_path / "ref.txt"),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["rouge1_f"] == pytest.approx(0.75)
        assert payload["sample_count"] == 1

    def test_corpus(self, tmp_path, capsys):
        pairs = tmp_path / "pairs.jsonl"
        pairs.write_text(
            json.dumps({"candidate": "甲乙", "reference": "甲乙"}) + "\n"
            + json.dumps({"candidate": "丙", "reference": "丁"}) + "\n",
            encoding="utf-8",
        )
        code, out = run(capsys, "eval", "corpus", "--pairs", str(pairs))
        assert code == 0
        payload = json.loads(out)
        assert payload["sample_count"] == 2
        assert payload["rouge1_f"] == pytest.approx(0.5)


class TestInstructCommands:
    def test_synth_against_live_endpoint(self, tmp_path, capsys, monkeypatch):
        from ichforge.annotation import parse_annotated_text, write_annotated
        from fixtures import MANG_ANSWER as FIX_A, MANG_QUESTION as FIX_Q
        from live_server import chat_completion_server

        corpus = tmp_path / "annotated.jsonl"
        write_annotated([parse_annotated_text("蟒是一种传统戏服。", doc_id="d1")], corpus)
        template = tmp_path / "qa.txt"
        template.write_text("根据文本生成问答：{source_text}", encoding="utf-8")
        out = tmp_path / "pending.jsonl"

        reply = json.dumps([{"question": FIX_Q, "answer": FIX_A}], ensure_ascii=False)
        with chat_completion_server(lambda _body: reply) as base_url:
            monkeypatch.setenv("FORGE_API_BASE", base_url)
            monkeypatch.setenv("FORGE_MODEL", "mock-model")
            monkeypatch.delenv("FORGE_API_KEY", raising=False)
            code, stdout = run(
                capsys, "instruct", "synth", "--corpus", str(corpus),
                "--template", str(template), "--max-pairs", "5", "--out", str(out),
            )
        assert code == 0 and "1 pending samples" in stdout
        record = json.loads(out.read_text(encoding="utf-8"))
        assert record["instruction"] == FIX_Q
        assert record["output"] == FIX_A
        assert record["review_state"] == "Pending"

    def test_export_and_split(self, tmp_path, capsys):
        samples = [build_knowledge_qa(f"问{i}", f"答{i}") for i in range(12)]
        samples.append(build_knowledge_qa(MIAO_QUESTION, MIAO_ANSWER))
        store = tmp_path / "samples.jsonl"
        export_dataset(samples, {ReviewState.ACCEPTED}, store)

        out_path = tmp_path / "train.jsonl"
        code, out = run(
            capsys, "instruct", "export", "--in", str(store),
            "--states", "accepted,edited", "--out", str(out_path),
        )
        assert code == 0 and "exported 13" in out

        split_path = tmp_path / "split.jsonl"
        code, out = run(
            capsys, "instruct", "split", "--in", str(store), "--task", "KnowledgeQA",
            "--size", "5", "--seed", "7", "--out", str(split_path),
        )
        assert code == 0
        first = split_path.read_text(encoding="utf-8")

        code, _ = run(
            capsys, "instruct", "split", "--in", str(store), "--task", "KnowledgeQA",
            "--size", "5", "--seed", "7", "--out", str(split_path),
        )
        assert split_path.read_text(encoding="utf-8") == first

    def test_export_with_decision_log(self, tmp_path, capsys):
        from ichforge.instruct import Provenance
        from ichforge.review.store import DecisionAction, ReviewDecision, ReviewStore

        samples = [
            build_knowledge_qa(f"问{i}", f"答{i}", provenance=Provenance.SYNTHETIC)
            for i in range(3)
        ]
        store_path = tmp_path / "pending.jsonl"
        export_dataset(samples, {ReviewState.PENDING}, store_path)

        log_path = tmp_path / "decisions.jsonl"
        store = ReviewStore(load := list(samples), log_path)
        ids = [s.id for s in store.all_samples()]
        store.submit_decision(ReviewDecision(ids[0], DecisionAction.ACCEPT, "r"))
        store.submit_decision(ReviewDecision(ids[1], DecisionAction.EDIT, "r", edited_output="改"))

        out = tmp_path / "train.jsonl"
        code, stdout = run(
            capsys, "instruct", "export", "--in", str(store_path),
            "--decisions", str(log_path), "--states", "accepted,edited",
            "--out", str(out),
        )
        assert code == 0 and "exported 2" in stdout
        records = [json.loads(l) for l in out.read_text(encoding="utf-8").splitlines()]
        assert {r["id"] for r in records} == {ids[0], ids[1]}
        assert next(r for r in records if r["id"] == ids[1])["output"] == "改"

    def test_split_shortfall(self, tmp_path, capsys):
        store = tmp_path / "samples.jsonl"
        export_dataset(
            [build_knowledge_qa("问", "答")], {ReviewState.ACCEPTED}, store
        )
        code = main(
            ["instruct", "split", "--in", str(store), "--task", "KnowledgeQA",
             "--size", "100", "--seed", "1", "--out", str(tmp_path / "s.jsonl")]
        )
        assert code == 1


class TestBenchCommands:
    def test_train_config(self, tmp_path, capsys):
        code, out = run(capsys, "bench", "train-config", "--out", str(tmp_path))
        assert code == 0
        cfg = (tmp_path / "train.cfg").read_text(encoding="utf-8")
        assert "learning_rate=2e-4" in cfg

    def test_train_config_override(self, tmp_path, capsys):
        code, _ = run(
            capsys, "bench", "train-config", "--out", str(tmp_path),
            "--set", "batch_size=8",
        )
        assert code == 0
        assert "batch_size=8" in (tmp_path / "train.cfg").read_text(encoding="utf-8")

    def test_render_saved_run(self, tmp_path, capsys):
        import test_bench

        result = test_bench.TestRenderReport().make_result(tmp_path)
        run_path = tmp_path / "run.json"
        run_path.write_text(result.to_json(), encoding="utf-8")
        code, out = run(capsys, "bench", "render", str(run_path), "--format", "markdown")
        assert code == 0
        assert "| perfect |" in out


class TestTopLevel:
    def test_no_command_prints_help(self, capsys):
        assert main([]) == 2
        assert "forge" in capsys.readouterr().out
