import csv
import io

import pytest

from timesched import GeneratorConfig, Model, generate, read_instance, write_instance
from timesched.cli import main
from timesched.harness import COLUMNS, ExperimentConfig, read_report, report_csv, run_algorithm, run_experiment


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_experiment_row_count_and_columns(capsys):
    code, out, _ = _run(["experiment", "--model", "identical", "--n", "4", "--m", "2", "--instances", "5",
                         "--trials", "3", "--seed", "1"], capsys)
    assert code == 0
    rows = read_report(out)
    assert len(rows) == 5
    assert tuple(csv.reader(io.StringIO(out)).__next__()) == COLUMNS
    assert all(r["error"] == "" and r["wall_time"] == "" for r in rows)


def test_zero_instances_gives_header_only():
    rows = run_experiment(ExperimentConfig(Model.UNRELATED, 3, 2, instances=0))
    assert report_csv(rows) == ",".join(COLUMNS) + "\n"


@pytest.mark.parametrize("model, alg", [("identical", None), ("related", "related-cmax"), ("related", None),
                                        ("unrelated", "unrelated-indep"), ("unrelated", None)])
def test_exact_rows_order_lp_opt_alg(model, alg):
    cfg = ExperimentConfig(Model(model), 5, 2, instances=4, trials=3, seed=3, alg=alg, exact=True)
    for row in run_experiment(cfg):
        assert row["error"] == ""
        lp, opt, best = float(row["lp_value"]), float(row["opt_value"]), float(row["alg_cost_best"])
        assert lp <= opt * (1 + 1e-6) + 1e-9
        assert best >= opt - 1e-9
        assert float(row["ratio_vs_lp"]) >= 1 - 1e-6


def test_errors_recorded_per_row():
    cfg = ExperimentConfig(Model.IDENTICAL, 10, 2, instances=2, exact=True, cap=4)
    rows = run_experiment(cfg)
    assert all("CapExceeded" in r["error"] for r in rows)


def test_workers_do_not_change_report():
    cfg = ExperimentConfig(Model.IDENTICAL, 4, 2, instances=4, trials=2, seed=7)
    assert report_csv(run_experiment(cfg, workers=1)) == report_csv(run_experiment(cfg, workers=2))


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(Model.IDENTICAL, 0, 2)
    with pytest.raises(ValueError):
        ExperimentConfig(Model.IDENTICAL, 3, 2, alg="unrelated-dep")
    with pytest.raises(ValueError):
        run_algorithm(generate(GeneratorConfig(Model.IDENTICAL, 2, 1), 0), "nope", 0, 1)


def test_generate_lp_round_validate(tmp_path, capsys):
    inst_path = tmp_path / "inst.txt"
    assert _run(["generate", "--model", "identical", "--n", "5", "--m", "2", "--seed", "4",
                 "--out", str(inst_path)], capsys)[0] == 0
    inst = read_instance(inst_path.read_text())
    assert inst.n == 5

    code, out, _ = _run(["lp", str(inst_path), "--solution"], capsys)
    assert code == 0 and out.startswith("lp_value ") and "\nC 0 " in out

    sched_path = tmp_path / "sched.txt"
    assert _run(["round", str(inst_path), "--trials", "5", "--out", str(sched_path)], capsys)[0] == 0
    text = sched_path.read_text()
    assert text.startswith("algorithm identical-general\n")

    code, out, _ = _run(["validate", str(inst_path), str(sched_path)], capsys)
    assert code == 0 and out.startswith("ok objective ")

    lines = text.splitlines(keepends=True)
    body = next(k for k, ln in enumerate(lines) if ln.startswith("schedule "))
    # put every job at time 0 on machine 0
    broken = lines[:body + 1] + [f"{j} 0 0 {inst.sizes[j]}\n" for j in range(inst.n)]
    bad_path = tmp_path / "bad.txt"
    bad_path.write_text("".join(broken))
    code, out, _ = _run(["validate", str(inst_path), str(bad_path)], capsys)
    assert code == 1 and "overlap" in out


def test_exact_command(tmp_path, capsys):
    path = tmp_path / "i.txt"
    path.write_text("identical 2 1 3\n0 2 1\n1 1 2\n")
    code, out, _ = _run(["exact", str(path)], capsys)
    assert code == 0 and out.startswith("opt_value 5\n")


def test_generate_many(tmp_path, capsys):
    out_dir = tmp_path / "many"
    assert _run(["generate", "--model", "unrelated", "--count", "3", "--seed", "2", "--out", str(out_dir)],
                capsys)[0] == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["instance_0.txt", "instance_1.txt", "instance_2.txt"]
    assert read_instance((out_dir / "instance_1.txt").read_text()) == generate(
        GeneratorConfig(Model.UNRELATED, 5, 2), 3)


def test_round_log(tmp_path, capsys):
    log = tmp_path / "log.csv"
    code, out, _ = _run(["round", "--model", "unrelated", "--alg", "unrelated-dep", "--seed", "1", "--trials", "4",
                         "--log", str(log)], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(log.read_text())))
    assert rows[0] == ["trial", "cost", "num_bad_edges", "num_groups", "seed"]
    assert len(rows) == 5


def test_error_exit_codes(tmp_path, capsys):
    code, _, err = _run(["lp"], capsys)
    assert code == 1 and err.startswith("error: ")
    bad = tmp_path / "bad.txt"
    bad.write_text("identical x 1 1\n")
    code, _, err = _run(["lp", str(bad)], capsys)
    assert code == 1 and "line 1" in err
    with pytest.raises(SystemExit) as exc:
        main(["round", "--alg", "nope"])
    assert exc.value.code == 2
    code, _, err = _run(["round", "--model", "identical", "--alg", "unrelated-dep"], capsys)
    assert code == 1


def test_lp_related_objectives(tmp_path, capsys):
    path = tmp_path / "r.txt"
    path.write_text(write_instance(generate(GeneratorConfig(Model.RELATED, 4, 2), 0)))
    code, out, _ = _run(["lp", str(path), "--solution"], capsys)
    assert code == 0 and "\nD " in out
    code, out, _ = _run(["lp", str(path), "--objective", "wc", "--solution"], capsys)
    assert code == 0 and out.startswith("lp_value ")
