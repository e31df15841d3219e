"""Command-line frontend.

    mpcomm simulate entangled-f --k 5 --n 4 --samples 1000
    mpcomm verify kneser --max-order 10
    mpcomm bounds --n 4 --k 4
    mpcomm table --k 2:16 --n 1:8 --format csv

Every report is a JSON object with ``"schema": 1`` and a ``rows`` list of
flat records; ``--format csv`` writes exactly those rows.  Exit codes: 0 all
checks pass, 1 a mathematical check failed, 2 usage or budget error.

Seeds: input ``i`` is drawn with ``split_seed(seed, 2*i)`` and run with
``split_seed(seed, 2*i + 1)``, so a report depends only on its flags, never
on execution order.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional

import numpy as np

from . import bounds, core, protocols, qsim

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
TV_TOL = 1e-9


class UsageError(Exception):
    pass


def split_seed(seed: int, index: int) -> int:
    """Independent per-run seed derived from the top-level seed."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def parse_range(text: str) -> list[int]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


# ---------------------------------------------------------------------------
# simulate


def _build_protocol(args) -> protocols.Protocol:
    name = args.protocol
    try:
        if name.endswith("-gm"):
            return protocols.BUNDLED[name](args.m)
        return protocols.BUNDLED[name](args.k, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _inputs(args, proto):
    if proto.name.endswith("-gm"):
        if args.exhaustive:
            yield from core.enumerate_valid_triple_vectors(args.m, budget=args.enum_budget)
        else:
            for i in range(args.samples):
                yield core.sample_valid_triple_vector(args.m, split_seed(args.seed, 2 * i))
    else:
        if args.exhaustive:
            yield from core.enumerate_valid_inputs(args.k, args.n, budget=args.enum_budget)
        else:
            for i in range(args.samples):
                yield core.sample_valid_input(args.k, args.n, split_seed(args.seed, 2 * i))


def _input_text(inp) -> str:
    if isinstance(inp, core.FInput):
        return str(inp)
    return "xs=[{}] ys=[{}] zs=[{}]".format(*(",".join(map(str, v)) for v in (inp.xs, inp.ys, inp.zs)))


def cmd_simulate(args) -> tuple[dict, int]:
    proto = _build_protocol(args)
    target = proto.target
    rows, samples, costs = [], [], set()
    correct = 0
    for i, inp in enumerate(_inputs(args, proto)):
        seed = split_seed(args.seed, 2 * i + 1)
        result = protocols.run(proto, inp, seed, check=False)
        ok = len(set(result.outputs)) == 1 and result.output == target(inp)
        correct += ok
        costs.add(result.total_bits)
        if len(samples) < 3:
            samples.append(result.to_json())
        rows.append({
            "index": i,
            "input": _input_text(inp),
            "seed": seed,
            "transcript": ";".join(f"{e.party}:{e.bits}" for e in result.transcript.events),
            "output": result.output,
            "total_bits": result.total_bits,
            "correct": bool(ok),
        })
    runs = len(rows)
    rate = correct / runs if runs else 0.0
    report = {
        "schema": SCHEMA,
        "command": "simulate",
        "protocol": proto.name,
        "params": proto.params,
        "seed": args.seed,
        "mode": "exhaustive" if args.exhaustive else "sampled",
        "runs": runs,
        "correctness": rate,
        "costs": sorted(costs),
        "closed_form_cost": proto.cost,
        "transcript_samples": samples,
        "rows": rows,
    }
    passed = runs > 0 and rate == 1.0 and costs == {proto.cost}
    return report, EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# verify


def _suite_kneser(args) -> list[dict]:
    out = []
    for order in range(2, args.max_order + 1):
        sweep = bounds.kneser_sweep(order, budget=args.pair_budget)
        row = {"suite": "kneser", "check": f"Z_{order}", "passed": sweep.ok, "detail": f"{sweep.pairs} pairs"}
        if not sweep.ok:
            a, b = sweep.failures[0]
            row["detail"] = f"counterexample A={bounds.members(a)} B={bounds.members(b)}"
        out.append(row)
    return out


def _suite_rectangles(args) -> list[dict]:
    res = bounds.max_monochromatic_rectangle(args.n, args.k, budget=args.rect_budget)
    r = bounds.cardinality_bound(args.n, args.k)
    out = [{
        "suite": "rectangles",
        "check": f"max size n={args.n} k={args.k}",
        "passed": res.size <= r,
        "detail": f"max={res.size} r={r} witness={res.witness.to_json()['parts'] if res.witness else None}",
    }]
    if res.witness is not None:
        chain = bounds.sumset_chain(res.witness)
        bad = chain.violations(res.witness)
        out.append({"suite": "rectangles", "check": "witness sumset chain", "passed": not bad,
                    "detail": "; ".join(bad) or "trivial stabilizers, size chain holds"})
    return out


def _suite_search(args) -> list[dict]:
    budget = args.budget
    try:
        res = bounds.search_oneround_Gm(budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    expected = budget >= 4
    out = [{
        "suite": "search",
        "check": f"budget {budget}",
        "passed": res.feasible == expected,
        "detail": f"{'feasible' if res.feasible else 'infeasible'} (expected {'feasible' if expected else 'infeasible'}), "
                  f"{res.candidates} candidates, {len(res.witnesses)} witnesses",
    }]
    if res.witnesses:
        bad = [w for w in res.witnesses if not bounds.lemma1_check(w)]
        detail = "all witnesses separate the fooling pairs"
        if bad:
            detail = "counterexample " + json.dumps(bad[0].to_json(), sort_keys=True)
        out.append({"suite": "search", "check": "distinguishability on witnesses", "passed": not bad, "detail": detail})
    return out


def _suite_parity(args) -> list[dict]:
    k, n = args.k, args.n
    failures = []
    worst_tv = 0.0
    if 2 ** (n * k) <= 2**16:
        inputs = list(core.enumerate_valid_inputs(k, n))
    else:
        inputs = [core.sample_valid_input(k, n, split_seed(args.seed, 2 * i)) for i in range(args.samples)]
    vector = k <= 10
    for i, inp in enumerate(inputs):
        seed = split_seed(args.seed, 2 * i + 1)
        reg = qsim.make_cat_state(k, n, vector=vector)
        for j, x in enumerate(inp.values):
            qsim.apply_phase(reg, j, x)
        qsim.apply_hadamard_all(reg)
        if vector:
            tv = qsim.total_variation(qsim.outcome_distribution(reg, "exact"), qsim.outcome_distribution(reg, "vector"))
            worst_tv = max(worst_tv, tv)
        rec = qsim.measure(reg, seed)
        if rec.parity != core.f_big(inp):
            failures.append(str(inp))
    out = [{"suite": "parity", "check": f"parity law k={k} n={n}", "passed": not failures,
            "detail": f"counterexample {failures[0]}" if failures else f"{len(inputs)} inputs"}]
    if vector:
        out.append({"suite": "parity", "check": "exact vs vector TV", "passed": worst_tv <= TV_TOL,
                    "detail": f"max TV {worst_tv:.3e} (tol {TV_TOL:g})"})
    return out


SUITES = {
    "kneser": _suite_kneser,
    "rectangles": _suite_rectangles,
    "search": _suite_search,
    "parity": _suite_parity,
}


def cmd_verify(args) -> tuple[dict, int]:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    rows = []
    for name in names:
        rows.extend(SUITES[name](args))
    passed = all(r["passed"] for r in rows)
    report = {"schema": SCHEMA, "command": "verify", "suite": args.suite, "passed": passed, "rows": rows}
    return report, EXIT_OK if passed else EXIT_FAIL


# ---------------------------------------------------------------------------
# bounds and table


def cmd_bounds(args) -> tuple[dict, int]:
    observed = None
    if args.observe:
        observed = bounds.max_monochromatic_rectangle(args.n, args.k, budget=args.rect_budget).size
    rep = bounds.lower_bound_bits(args.n, args.k, observed_max=observed)
    row = rep.to_json()
    row["upper"], row["upper_method"] = bounds.classical_upper(args.n, args.k)
    ok = rep.holds if args.n >= protocols.ceil_log2(args.k) else True
    if observed is not None:
        ok = ok and observed <= rep.r
    return {"schema": SCHEMA, "command": "bounds", "rows": [row]}, EXIT_OK if ok else EXIT_FAIL


def separation_rows(ks, ns) -> list[dict]:
    rows = []
    for k in ks:
        for n in ns:
            rep = bounds.lower_bound_bits(n, k)
            upper, method = bounds.classical_upper(n, k)
            rows.append({
                "k": k,
                "n": n,
                "Q": k,
                "upper": upper,
                "upper_method": method,
                "lower": rep.lower_bits,
                "rhs": rep.rhs,
                "lower_holds": rep.holds,
                "in_regime": n >= protocols.ceil_log2(k),
                "ratio": upper / k,
            })
    return rows


def cmd_separation_table(args) -> tuple[dict, int]:
    if args.k_range[0] < 2 or args.n_range[0] < 1:
        raise UsageError("table needs k >= 2 and n >= 1")
    rows = separation_rows(args.k_range, args.n_range)
    ok = all(r["lower_holds"] for r in rows if r["in_regime"])
    return {"schema": SCHEMA, "command": "table", "rows": rows}, EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# output


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


def _decode_cell(text: str):
    if text in ("True", "False"):
        return text == "True"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def rows_from_csv(text: str) -> list[dict]:
    return [{k: _decode_cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        return rows_to_csv(report["rows"])
    lines = []
    head = {k: v for k, v in report.items() if k not in ("rows", "transcript_samples")}
    for key, val in head.items():
        lines.append(f"{key}: {val}")
    rows = report["rows"]
    if report.get("command") == "simulate":
        rows = rows[:10]
    if rows:
        cols = list(rows[0])
        cells = [[str(r[c]) for c in cols] for r in rows]
        widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(cols)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
        for row in cells:
            lines.append("  ".join(v.ljust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=1000)
    common.add_argument("--budget", type=int, default=4, help="total bits for the one-round search")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--enum-budget", type=int, default=core.DEFAULT_ENUM_BUDGET)
    common.add_argument("--rect-budget", type=int, default=bounds.RECTANGLE_BUDGET)
    common.add_argument("--pair-budget", type=int, default=bounds.KNESER_PAIR_BUDGET)
    sizes = argparse.ArgumentParser(add_help=False)
    sizes.add_argument("--k", type=int, default=3)
    sizes.add_argument("--n", type=int, default=2)
    sizes.add_argument("--m", type=int, default=1)

    parser = argparse.ArgumentParser(prog="mpcomm", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, sizes], help="run a bundled protocol on valid inputs")
    p.add_argument("protocol", choices=sorted(protocols.BUNDLED))
    p.add_argument("--exhaustive", action="store_true", help="every valid input instead of samples")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", parents=[common, sizes], help="run a verification suite")
    p.add_argument("suite", choices=(*SUITES, "all"))
    p.add_argument("--max-order", type=int, default=10)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", parents=[common, sizes], help="rectangle-size and communication bounds for (n, k)")
    p.add_argument("--observe", action="store_true", help="also compute the exact maximal rectangle")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("table", parents=[common], help="quantum vs classical cost table")
    p.add_argument("--k", dest="k_range", type=parse_range, default=parse_range("2:16"), help="K or LO:HI")
    p.add_argument("--n", dest="n_range", type=parse_range, default=parse_range("1:8"), help="N or LO:HI")
    p.set_defaults(func=cmd_separation_table)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        report, code = args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"mpcomm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except core.BudgetExceeded as exc:
        print(f"mpcomm: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
