"""Command-line interface: generate, fit, sweep, evaluate.

Exit codes: 0 success, 2 malformed input, 3 I/O failure, 10 fit finished
without converging (the result is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor

from . import data
from .distributions import JointAXY
from .errors import AlphabetMismatch, BadParameter, FairIBError
from .predictor import LossMatrix, bayes_risk, bayes_rule, equalized_odds_gap
from .solver import FitResult, SolverParams, fit

log = logging.getLogger("fairib")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 3
EXIT_NOT_CONVERGED = 10

SWEEP_COLUMNS = (
    "alpha", "beta", "i_xu", "i_auy", "i_uy", "lagrangian",
    "accuracy", "eo_cmi", "eo_gap", "converged",
)


class InputError(Exception):
    pass


def _write_text(path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _parse_alphabets(text: str | None) -> tuple[int, int, int]:
    if text is None:
        raise InputError("--data requires --alphabets A,X,Y (alphabet sizes are never inferred)")
    try:
        sizes = tuple(int(s) for s in text.split(","))
    except ValueError:
        raise InputError(f"--alphabets must be three integers, got {text!r}") from None
    if len(sizes) != 3 or min(sizes) < 1:
        raise InputError(f"--alphabets must be three positive integers, got {text!r}")
    return sizes


def load_joint(args) -> JointAXY:
    if (args.spec is None) == (args.data is None):
        raise InputError("exactly one of --spec or --data is required")
    if args.spec is not None:
        return data.spec_to_joint(data.GeneratorSpec.from_dict(data.load_json(args.spec)))
    table = data.read_samples(args.data)
    return data.empirical_joint(table, _parse_alphabets(args.alphabets))


def load_params(doc: dict, joint: JointAXY, seed: int | None) -> SolverParams:
    if not isinstance(doc, dict):
        raise BadParameter("solver parameters must be a JSON object")
    doc = dict(doc)
    doc.setdefault("u_size", joint.n_x)
    if seed is not None:
        doc["seed"] = seed
    return SolverParams.from_dict(doc)


def load_loss(path, n_y: int) -> LossMatrix:
    if path is None:
        return LossMatrix.hamming(n_y)
    doc = data.load_json(path)
    if not isinstance(doc, dict) or "ell" not in doc:
        raise BadParameter("loss file must be a JSON object with an 'ell' field")
    loss = LossMatrix(doc["ell"])
    if loss.size != n_y:
        raise AlphabetMismatch(f"loss matrix is {loss.size}x{loss.size} but |Y| = {n_y}")
    return loss


def evaluate(joint: JointAXY, result: FitResult, loss: LossMatrix) -> dict:
    enc = result.encoder
    if enc.n_x != joint.n_x:
        raise AlphabetMismatch(f"fit encoder has {enc.n_x} rows but |X| = {joint.n_x}")
    rule = bayes_rule(joint, enc, loss)
    risk = bayes_risk(joint, enc, rule, loss)
    audit = equalized_odds_gap(joint, enc, rule)
    out = {"bayes_risk": risk}
    if loss.is_hamming:
        out["accuracy"] = 1.0 - risk
    out["eo_cmi"] = audit.cmi
    out["eo_gap"] = audit.max_rate_gap
    out["rule"] = list(rule.delta)
    return out


def _nats(value: float, bits: bool) -> str:
    if bits:
        return f"{value / math.log(2):.6g} bits"
    return f"{value:.6g} nats"


# --- subcommands --------------------------------------------------------------

def cmd_generate(args) -> int:
    spec = data.GeneratorSpec.from_dict(data.load_json(args.spec))
    seed = 0 if args.seed is None else args.seed
    table = data.sample(spec, args.n, seed)
    _write_text(args.out, data.samples_to_csv(table))
    log.info("wrote %d samples to %s", table.n, args.out)
    return EXIT_OK


def cmd_fit(args) -> int:
    joint = load_joint(args)
    params = load_params(data.load_json(args.params), joint, args.seed)
    result = fit(joint, params)
    _write_text(args.out, data.dumps(data.fit_result_to_dict(result)))
    m = result.metrics
    log.info(
        "restart %d, %d iterations, converged=%s: I(X;U)=%s I(A;U|Y)=%s I(U;Y)=%s L=%s",
        result.restart_index, result.iterations, result.converged,
        _nats(m["i_xu"], args.bits), _nats(m["i_auy"], args.bits),
        _nats(m["i_uy"], args.bits), _nats(m["lagrangian"], args.bits),
    )
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_evaluate(args) -> int:
    joint = load_joint(args)
    result = data.fit_result_from_dict(data.load_json(args.fit))
    loss = load_loss(args.loss, joint.n_y)
    out = evaluate(joint, result, loss)
    _write_text(args.out, data.dumps(out))
    log.info("bayes risk %.6g, eo_cmi %s, eo_gap %.6g",
             out["bayes_risk"], _nats(out["eo_cmi"], args.bits), out["eo_gap"])
    return EXIT_OK


def _parse_grid(doc, joint: JointAXY, seed: int | None) -> list[SolverParams]:
    if not isinstance(doc, dict):
        raise BadParameter("grid must be a JSON object")
    doc = dict(doc)
    alphas = doc.pop("alphas", None)
    betas = doc.pop("betas", None)
    for name, vals in (("alphas", alphas), ("betas", betas)):
        if not isinstance(vals, list) or not vals:
            raise BadParameter(f"grid field {name!r} must be a non-empty list")
    if "alpha" in doc or "beta" in doc:
        raise BadParameter("use 'alphas'/'betas' in a grid, not 'alpha'/'beta'")
    grid = []
    for a in sorted(float(v) for v in alphas):
        for b in sorted(float(v) for v in betas):
            grid.append(load_params({**doc, "alpha": a, "beta": b}, joint, seed))
    return grid


def sweep_point(joint: JointAXY, params: SolverParams) -> dict:
    result = fit(joint, params)
    ev = evaluate(joint, result, LossMatrix.hamming(joint.n_y))
    return {
        "alpha": params.alpha,
        "beta": params.beta,
        **result.metrics,
        "accuracy": ev["accuracy"],
        "eo_cmi": ev["eo_cmi"],
        "eo_gap": ev["eo_gap"],
        "converged": result.converged,
    }


def _sweep_task(item):
    return sweep_point(*item)


def sweep_rows(joint: JointAXY, grid: list[SolverParams], jobs: int = 1) -> list[dict]:
    items = [(joint, p) for p in grid]
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_sweep_task, items))
    return [_sweep_task(it) for it in items]


def _csv_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(float(v))


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([_csv_value(row[c]) for c in SWEEP_COLUMNS])
    return buf.getvalue()


def cmd_sweep(args) -> int:
    joint = load_joint(args)
    grid = _parse_grid(data.load_json(args.grid), joint, args.seed)
    rows = sweep_rows(joint, grid, args.jobs)
    _write_text(args.out, rows_to_csv(rows))
    for row in rows:
        log.info("alpha=%g beta=%g I(A;U|Y)=%s accuracy=%.6g converged=%s",
                 row["alpha"], row["beta"], _nats(row["i_auy"], args.bits),
                 row["accuracy"], row["converged"])
    if all(row["converged"] for row in rows):
        return EXIT_OK
    return EXIT_NOT_CONVERGED


# --- argument parsing ---------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("must be a 64-bit unsigned integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairib",
        description="Fair information-bottleneck representations under equalized odds.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, source=True):
        if source:
            p.add_argument("--spec", help="generator spec JSON (exact joint)")
            p.add_argument("--data", help="sample CSV with header a,x,y (empirical joint)")
            p.add_argument("--alphabets", help="alphabet sizes A,X,Y for --data, e.g. 2,4,2")
        p.add_argument("--out", required=True, help="output path")
        p.add_argument("--seed", type=_seed, default=None)
        p.add_argument("--bits", action="store_true", help="report information in bits on stderr")

    p = sub.add_parser("generate", help="sample a CSV from a generator spec")
    p.add_argument("--spec", required=True)
    p.add_argument("-n", "--n", type=_positive_int, required=True, help="number of rows")
    common(p, source=False)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit an encoder Q(u|x)")
    common(p)
    p.add_argument("--params", required=True, help="solver parameters JSON")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", help="fit and evaluate over an (alpha, beta) grid")
    common(p)
    p.add_argument("--grid", required=True, help="grid JSON with alphas, betas and shared params")
    p.add_argument("--jobs", type=_positive_int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("evaluate", help="Bayes rule, risk and equalized-odds audit of a fit")
    common(p)
    p.add_argument("--fit", required=True, help="fit result JSON")
    p.add_argument("--loss", help="loss matrix JSON {\"ell\": [[...]]}; Hamming if omitted")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (InputError, FairIBError, KeyError, TypeError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
