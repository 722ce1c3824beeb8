import csv
import json

import numpy as np
import pytest

from fairib import SYNTHETIC_V1, marginal, spec_to_joint
from fairib.cli import SWEEP_COLUMNS, main


@pytest.fixture
def work(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps(SYNTHETIC_V1.to_dict()))
    return tmp_path, spec


def write_json(path, doc):
    path.write_text(json.dumps(doc))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_generate(work):
    d, spec = work
    assert main(["generate", "--spec", str(spec), "-n", "1000", "--seed", "5", "--out", str(d / "a.csv")]) == 0
    assert main(["generate", "--spec", str(spec), "-n", "1000", "--seed", "5", "--out", str(d / "b.csv")]) == 0
    a = (d / "a.csv").read_bytes()
    assert len(a.decode().splitlines()) == 1001
    assert a == (d / "b.csv").read_bytes()


def test_generate_bad_spec(work):
    d, _ = work
    bad = SYNTHETIC_V1.to_dict()
    bad["p_y_given_x"][0] = [0.9, 0.2]
    path = write_json(d / "bad.json", bad)
    assert main(["generate", "--spec", str(path), "-n", "10", "--out", str(d / "x.csv")]) == 2


def test_io_failure(work):
    d, spec = work
    assert main(["generate", "--spec", str(spec), "-n", "10", "--out", str(d / "no" / "x.csv")]) == 3
    assert main(["generate", "--spec", str(d / "missing.json"), "-n", "10", "--out", str(d / "x.csv")]) == 3


def test_fit_small_beta(work):
    d, spec = work
    params = write_json(d / "p.json", {"alpha": 1.0, "beta": 0.05, "u_size": 4, "epsilon": 1e-8})
    assert main(["fit", "--spec", str(spec), "--params", str(params), "--out", str(d / "fit.json")]) == 0
    res = json.loads((d / "fit.json").read_text())
    assert res["converged"] is True
    assert np.allclose(np.sum(res["encoder"], axis=1), 1.0)


def test_fit_large_beta_writes_trace(work):
    d, spec = work
    params = write_json(d / "p.json", {"alpha": 1.0, "beta": 50.0, "u_size": 4, "restarts": 2, "max_iters": 300})
    code = main(["fit", "--spec", str(spec), "--params", str(params), "--out", str(d / "fit.json")])
    assert code in (0, 10)
    res = json.loads((d / "fit.json").read_text())
    assert len(res["trace"]) >= 1
    assert res["converged"] is (code == 0)


def test_fit_single_cluster(work):
    d, spec = work
    params = write_json(d / "p.json", {"alpha": 1.0, "beta": 0.05, "u_size": 1})
    assert main(["fit", "--spec", str(spec), "--params", str(params), "--out", str(d / "fit.json")]) == 0
    res = json.loads((d / "fit.json").read_text())
    assert res["iterations"] <= 2
    assert all(v == 0.0 for v in res["metrics"].values())


def test_fit_from_data_needs_alphabets(work):
    d, spec = work
    main(["generate", "--spec", str(spec), "-n", "2000", "--out", str(d / "s.csv")])
    params = write_json(d / "p.json", {"alpha": 1.0, "beta": 0.0, "restarts": 2})
    assert main(["fit", "--data", str(d / "s.csv"), "--params", str(params), "--out", str(d / "f.json")]) == 2
    assert main(["fit", "--data", str(d / "s.csv"), "--alphabets", "2,4,2", "--params", str(params),
                 "--out", str(d / "f.json")]) == 0
    assert main(["fit", "--spec", str(spec), "--data", str(d / "s.csv"), "--alphabets", "2,4,2",
                 "--params", str(params), "--out", str(d / "f.json")]) == 2


def test_fit_bad_params(work):
    d, spec = work
    params = write_json(d / "p.json", {"alpha": -1.0, "beta": 0.0})
    assert main(["fit", "--spec", str(spec), "--params", str(params), "--out", str(d / "f.json")]) == 2
    (d / "junk.json").write_text("{not json")
    assert main(["fit", "--spec", str(spec), "--params", str(d / "junk.json"), "--out", str(d / "f.json")]) == 2


def test_sweep_single_point_equals_fit_plus_evaluate(work):
    d, spec = work
    grid = write_json(d / "g.json", {"alphas": [0.5], "betas": [0.05], "u_size": 3, "restarts": 3})
    assert main(["sweep", "--spec", str(spec), "--grid", str(grid), "--seed", "11", "--out", str(d / "s.csv")]) == 0
    (row,) = read_csv(d / "s.csv")
    assert list(row) == list(SWEEP_COLUMNS)

    params = write_json(d / "p.json", {"alpha": 0.5, "beta": 0.05, "u_size": 3, "restarts": 3})
    main(["fit", "--spec", str(spec), "--params", str(params), "--seed", "11", "--out", str(d / "f.json")])
    main(["evaluate", "--spec", str(spec), "--fit", str(d / "f.json"), "--out", str(d / "e.json")])
    fit_doc = json.loads((d / "f.json").read_text())
    ev = json.loads((d / "e.json").read_text())
    for k in ("i_xu", "i_auy", "i_uy", "lagrangian"):
        assert float(row[k]) == fit_doc["metrics"][k]
    for k in ("accuracy", "eo_cmi", "eo_gap"):
        assert float(row[k]) == ev[k]
    assert row["converged"] == ("true" if fit_doc["converged"] else "false")


def test_sweep_i_auy_non_increasing(work):
    d, spec = work
    grid = write_json(d / "g.json", {"alphas": [1.0], "betas": [0.1, 0.0, 0.05, 0.02], "u_size": 4})
    assert main(["sweep", "--spec", str(spec), "--grid", str(grid), "--seed", "0", "--out", str(d / "s.csv")]) == 0
    rows = read_csv(d / "s.csv")
    assert [float(r["beta"]) for r in rows] == [0.0, 0.02, 0.05, 0.1]
    vals = [float(r["i_auy"]) for r in rows]
    assert all(b <= a + 1e-6 for a, b in zip(vals, vals[1:]))


def test_sweep_parallel_matches_serial(work):
    d, spec = work
    grid = write_json(d / "g.json", {"alphas": [0.3, 0.6], "betas": [0.0, 0.05], "u_size": 3, "restarts": 2})
    main(["sweep", "--spec", str(spec), "--grid", str(grid), "--out", str(d / "a.csv")])
    main(["sweep", "--spec", str(spec), "--grid", str(grid), "--jobs", "2", "--out", str(d / "b.csv")])
    assert (d / "a.csv").read_bytes() == (d / "b.csv").read_bytes()


def test_sweep_empty_betas(work):
    d, spec = work
    grid = write_json(d / "g.json", {"alphas": [1.0], "betas": []})
    assert main(["sweep", "--spec", str(spec), "--grid", str(grid), "--out", str(d / "s.csv")]) == 2


def _identity_spec():
    return {"p_a": [0.5, 0.5], "p_x_given_a": [[0.5, 0.5], [0.5, 0.5]], "p_y_given_x": [[1.0, 0.0], [0.0, 1.0]]}


def test_evaluate_identity_chain(work):
    d, _ = work
    spec = write_json(d / "id.json", _identity_spec())
    fit_doc = write_json(d / "f.json", {"encoder": {"q": [[1.0, 0.0], [0.0, 1.0]]}})
    assert main(["evaluate", "--spec", str(spec), "--fit", str(fit_doc), "--out", str(d / "e.json")]) == 0
    ev = json.loads((d / "e.json").read_text())
    assert ev["bayes_risk"] == 0.0 and ev["eo_cmi"] == 0.0 and ev["accuracy"] == 1.0
    assert ev["rule"] == [0, 1]


def test_evaluate_constant_encoder(work):
    d, _ = work
    # skew the prior so the best constant guess is unambiguous
    doc = SYNTHETIC_V1.to_dict()
    doc["p_a"] = [0.8, 0.2]
    spec = write_json(d / "skew.json", doc)
    fit_doc = write_json(d / "f.json", {"encoder": {"q": [[1.0]] * 4}})
    assert main(["evaluate", "--spec", str(spec), "--fit", str(fit_doc), "--out", str(d / "e.json")]) == 0
    ev = json.loads((d / "e.json").read_text())
    from fairib import GeneratorSpec
    py = marginal(spec_to_joint(GeneratorSpec.from_dict(doc)), "Y")
    assert ev["accuracy"] == pytest.approx(py.max(), abs=1e-15)
    assert ev["eo_cmi"] == 0.0


def test_evaluate_custom_loss_has_no_accuracy(work):
    d, spec = work
    fit_doc = write_json(d / "f.json", {"encoder": {"q": np.eye(4).tolist()}})
    loss = write_json(d / "l.json", {"ell": [[0, 5], [1, 0]]})
    assert main(["evaluate", "--spec", str(spec), "--fit", str(fit_doc), "--loss", str(loss),
                 "--out", str(d / "e.json")]) == 0
    ev = json.loads((d / "e.json").read_text())
    assert "accuracy" not in ev
    bad = write_json(d / "l3.json", {"ell": np.ones((3, 3)).tolist()})
    assert main(["evaluate", "--spec", str(spec), "--fit", str(fit_doc), "--loss", str(bad),
                 "--out", str(d / "e.json")]) == 2


def test_evaluate_mismatched_x(work):
    d, spec = work
    fit_doc = write_json(d / "f.json", {"encoder": {"q": np.eye(3).tolist()}})
    assert main(["evaluate", "--spec", str(spec), "--fit", str(fit_doc), "--out", str(d / "e.json")]) == 2


def test_bad_arguments_exit_2(work):
    d, spec = work
    assert main(["fit", "--spec", str(spec)]) == 2
    assert main(["nonsense"]) == 2
