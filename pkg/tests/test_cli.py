import pytest

from conftest import DBR
from ldrank.cli import main


def small_args(d, *extra):
    return [
        "--graph", str(d / "graph.tsv"),
        "--texts", str(d / "texts.tsv"),
        "--serp", str(d / "serp.tsv"),
        "--doc-entities", str(d / "doc-entities.tsv"),
        *extra,
    ]


@pytest.mark.parametrize("strategy", ["equi", "hit", "svd", "ldrank"])
def test_rank_writes_all_entities(tmp_path, small_dir, strategy):
    out = tmp_path / "r.tsv"
    assert main(["rank", "--strategy", strategy, "--out", str(out), *small_args(small_dir)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 6
    assert abs(sum(float(l.split("\t")[1]) for l in lines) - 1) < 1e-12


def test_rank_from_annotations(tmp_path, small_dir, capsys):
    args = ["rank", "--graph", str(small_dir / "graph.tsv"), "--serp", str(small_dir / "serp.tsv"),
            "--annotations", str(small_dir / "annotations.tsv"), "--pages", str(small_dir / "pages"), "--window", "41"]
    assert main(args) == 0
    assert DBR + "Lyon" in capsys.readouterr().out


def test_config_file_and_flag_precedence(tmp_path, small_dir):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# settings\nalpha = 0.5\nstrategy = equi\n")
    a, b, c = (tmp_path / f"{x}.tsv" for x in "abc")
    main(["rank", "--config", str(cfg), "--out", str(a), *small_args(small_dir)])
    main(["rank", "--strategy", "equi", "--alpha", "0.5", "--out", str(b), *small_args(small_dir)])
    main(["rank", "--config", str(cfg), "--alpha", "0.9", "--out", str(c), *small_args(small_dir)])
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_missing_required_flag_exit_2(small_dir, capsys):
    assert main(["rank", "--strategy", "hit", "--graph", str(small_dir / "graph.tsv")]) == 2
    assert "--serp" in capsys.readouterr().err


def test_bad_input_exit_2(tmp_path, capsys):
    bad = tmp_path / "g.tsv"
    bad.write_text("only\ttwo\n")
    assert main(["rank", "--strategy", "equi", "--graph", str(bad)]) == 2
    assert "g.tsv:1:" in capsys.readouterr().err


def test_nonconvergence_exit_3(small_dir):
    assert main(["rank", "--strategy", "equi", "--max-iter", "1", *small_args(small_dir)]) == 3


def test_eval_commands(tmp_path, small_dir, capsys):
    ranking = tmp_path / "r.tsv"
    main(["rank", "--strategy", "ldrank", "--out", str(ranking), *small_args(small_dir)])
    capsys.readouterr()
    assert main(["eval", "ndcg", "--ranking", str(ranking), "--qrels", str(small_dir / "qrels.tsv"), "--rank", "3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "metric,value" and out[1].startswith("ndcg,")
    assert 0 < float(out[1].split(",")[1]) <= 1
    assert main(["eval", "alpha", "--judgments", str(small_dir / "judgments.csv")]) == 0
    assert capsys.readouterr().out.startswith("metric,value\nalpha,")
    assert main(["eval", "vote", "--judgments", str(small_dir / "judgments.csv")]) == 0
    assert capsys.readouterr().out == "unit_id,value\nu1,3\nu2,0\nu3,2\nu4,1\n"
    kept = tmp_path / "kept.csv"
    assert main(["eval", "filter", "--judgments", str(small_dir / "judgments.csv"), "--out", str(kept)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "w3,1.000000,0"
    assert "w3" not in kept.read_text()


def test_triples_command(tmp_path, small_dir):
    out = tmp_path / "t.tsv"
    args = ["triples", "--graph", str(small_dir / "graph.tsv"), "--neighborhood", str(small_dir / "neighborhood.tsv"),
            "--top-entities", f"{DBR}Bocuse,{DBR}Lyon", "--rank", "3", "--out", str(out)]
    assert main(args) == 0
    text = out.read_text()
    assert text.startswith(f"# entity {DBR}Bocuse\n")
    assert f"# entity {DBR}Lyon\n" in text


def test_bench_and_report_write_csv_and_png(tmp_path, small_dir):
    csv_out, png = tmp_path / "bench.csv", tmp_path / "bench.png"
    assert main(["bench", "--reps", "2", "--out", str(csv_out), "--figure", str(png), *small_args(small_dir)]) == 0
    lines = csv_out.read_text().splitlines()
    assert lines[0] == "strategy,n_entities,nnz,median_ms" and len(lines) == 5
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rep, fig = tmp_path / "ndcg.csv", tmp_path / "ndcg.png"
    args = ["report", "--qrels", str(small_dir / "qrels.tsv"), "--ranks", "4", "--out", str(rep), "--figure", str(fig)]
    assert main(args + small_args(small_dir)) == 0
    lines = rep.read_text().splitlines()
    assert lines[0] == "strategy,rank,ndcg" and len(lines) == 1 + 4 * 4
    assert fig.exists()


def test_module_entry_point(small_dir):
    import subprocess
    import sys

    proc = subprocess.run([sys.executable, "-m", "ldrank", "eval", "alpha", "--judgments",
                           str(small_dir / "judgments.csv")], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("metric,value")


def test_missing_graph_named(capsys):
    assert main(["rank", "--strategy", "equi"]) == 2
    assert "--graph" in capsys.readouterr().err


def test_eval_ideal_and_perfect(tmp_path, small_dir, capsys):
    ranking = tmp_path / "r.tsv"
    ranking.write_text(f"{DBR}Lyon\t0.4\n{DBR}Bocuse\t0.3\n{DBR}Rhone\t0.2\n{DBR}France\t0.1\n")
    assert main(["eval", "ndcg", "--ranking", str(ranking), "--qrels", str(small_dir / "qrels.tsv"), "--rank", "4"]) == 0
    assert capsys.readouterr().out == "metric,value\nndcg,1.000000\n"
    j = tmp_path / "j.csv"
    j.write_text("unit_id,worker_id,value\nu1,a,3\nu1,b,3\nu2,a,0\nu2,b,0\n")
    assert main(["eval", "alpha", "--judgments", str(j), "--distance", "binary"]) == 0
    assert capsys.readouterr().out == "metric,value\nalpha,1.000000\n"


def test_bad_grade_in_qrels(tmp_path, small_dir):
    q = tmp_path / "q.tsv"
    q.write_text(f"{DBR}Lyon\t7\n")
    ranking = tmp_path / "r.tsv"
    ranking.write_text(f"{DBR}Lyon\t1\n")
    assert main(["eval", "ndcg", "--ranking", str(ranking), "--qrels", str(q), "--rank", "1"]) == 2


def test_vote_accuracy_tiebreak(tmp_path, capsys):
    j = tmp_path / "j.csv"
    j.write_text("unit_id,worker_id,value\nu1,w2,2\nu1,w3,3\n")
    acc = tmp_path / "acc.csv"
    acc.write_text("worker_id,accuracy\nw2,0.9\nw3,0.5\n")
    assert main(["eval", "vote", "--judgments", str(j), "--tiebreak", "accuracy", "--accuracies", str(acc)]) == 0
    assert capsys.readouterr().out == "unit_id,value\nu1,2\n"


def test_filter_threshold_one_keeps_everyone(small_dir, capsys):
    assert main(["eval", "filter", "--judgments", str(small_dir / "judgments.csv"), "--threshold", "1.0"]) == 0
    assert all(line.endswith(",1") for line in capsys.readouterr().out.splitlines()[1:])


def test_triples_empty_top_entities(small_dir):
    assert main(["triples", "--graph", str(small_dir / "graph.tsv"), "--top-entities", ""]) == 2


def test_triples_rank_one_single_predicate(tmp_path, capsys):
    g = tmp_path / "g.tsv"
    p = "http://x.org/p"
    g.write_text("".join(f"{DBR}hub\t{p}\t{DBR}n{i}\n" for i in range(3)) + f"{DBR}n0\t{p}\t{DBR}n1\n")
    assert main(["triples", "--graph", str(g), "--top-entities", f"{DBR}hub", "--rank", "1", "--components", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == f"# entity {DBR}hub"
    assert sorted(lines[1:]) == sorted(f"{DBR}hub\t{p}\t{DBR}n{i}" for i in range(3))


def test_bench_csv_rows_and_errors(small_dir, capsys):
    base = ["bench", *small_args(small_dir)]
    assert main(base + ["--strategies", "equi,hit", "--reps", "3"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 3
    assert main(base + ["--reps", "0"]) == 2
    assert main(base + ["--strategies", "equi,pagerank"]) == 2
