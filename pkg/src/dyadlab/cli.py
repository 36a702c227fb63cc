"""Command-line front door: gen | eval | verify | counterexample.

Reports are JSON (structured) or CSV (tabular); under a fixed seed the
emitted bytes are identical across runs.  Exit codes: 0 all checks pass,
1 a verification violation, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import normest
from .chain import growth_study
from .generate import SweepConfig, random_instance
from .instance import Instance
from .operators import (
    apply_adjoint,
    apply_bilinear,
    apply_dyadic_maximal,
    apply_linear,
    apply_maximal_star,
)
from .potentials import (
    abstract_wolff,
    bilinear_abstract_wolff,
    discrete_wolff,
    two_measure_wolff,
)
from .testing import bilinear_sequential, sawyer, sequential
from .verify import TARGETS, run_verify


def _dump_json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _dump_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    fields: list[str] = []
    for row in rows:
        for key in row:
            if key not in fields:
                fields.append(key)
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in fields})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _load_instance(path: str) -> Instance:
    with open(path) as handle:
        return Instance.from_json(json.load(handle))


def _cmd_gen(args, parser) -> int:
    if args.depth < 0:
        parser.error("depth must be >= 0")
    config = SweepConfig(depth=args.depth, branching=args.branching, seed=args.seed)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    inst = random_instance(rng, config, depth=args.depth, bilinear=args.bilinear)
    _emit(_dump_json(inst.to_json()), args.out)
    return 0


def _leaf_function(args, inst: Instance, name: str = "f") -> np.ndarray:
    raw = getattr(args, name)
    if raw is None:
        return np.ones(inst.tree.n_leaves)
    values = _parse_floats(raw)
    if values.shape != (inst.tree.n_leaves,):
        raise ValueError(f"--{name} needs {inst.tree.n_leaves} comma-separated values")
    return values


def _cmd_eval(args, parser) -> int:
    inst = _load_instance(args.instance)
    what, kind = args.what, args.kind
    try:
        if what == "operator":
            payload = _eval_operator(args, inst, kind)
        elif what == "potential":
            payload = _eval_potential(args, inst, kind)
        elif what == "testing":
            payload = _eval_testing(args, inst, kind)
        elif what == "norm":
            payload = _eval_norm(args, inst, kind)
        else:  # pragma: no cover - argparse restricts choices
            parser.error(f"unknown evaluation {what!r}")
    except ValueError as err:
        parser.error(str(err))
    _emit(_dump_json(payload), args.out)
    return 0


def _eval_operator(args, inst: Instance, kind: str) -> dict:
    f = _leaf_function(args, inst)
    within = args.within
    if kind in (None, "linear"):
        out = apply_linear(inst.lam, f, inst.sigma, within)
    elif kind == "adjoint":
        out = apply_adjoint(inst.lam, f, inst.omega, within)
    elif kind == "bilinear":
        s1, s2, _ = inst.measures3
        out = apply_bilinear(inst.lam, f, s1, _leaf_function(args, inst, "f2"), s2, within)
    elif kind == "dyadic-maximal":
        out = apply_dyadic_maximal(f, inst.sigma)
    elif kind == "maximal-star":
        out = apply_maximal_star(inst.lam, f, inst.sigma)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    return {"kind": kind or "linear", "values": out.tolist()}


def _eval_potential(args, inst: Instance, kind: str) -> dict:
    if kind == "discrete":
        rep = discrete_wolff(inst.lam, inst.sigma, inst.omega, _req(args, "q"), p=args.p)
    elif kind == "abstract":
        rep = abstract_wolff(inst.lam, inst.sigma, inst.omega, _req(args, "q"), p=args.p)
    elif kind == "two-measure":
        rep = two_measure_wolff(
            inst.lam, *inst.measures3,
            _req(args, "p1"), _req(args, "p2"), _req(args, "p3"), _perm(args),
        )
    elif kind == "bilinear-abstract":
        rep = bilinear_abstract_wolff(
            inst.lam, *inst.measures3,
            _req(args, "p1"), _req(args, "p2"), _req(args, "p3"), _perm(args),
        )
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return rep.to_json()


def _eval_testing(args, inst: Instance, kind: str) -> dict:
    strategy = args.strategy or "stopping"
    if kind in (None, "sequential"):
        rep = sequential(
            inst.lam, inst.sigma, inst.omega, _req(args, "p"), _req(args, "q"),
            side=args.side, strategy=strategy,
        )
        return rep.to_json()
    if kind == "sawyer":
        direct, adjoint = sawyer(
            inst.lam, inst.sigma, inst.omega, _req(args, "p"), _req(args, "q")
        )
        return {"direct": direct.to_json(), "adjoint": adjoint.to_json()}
    if kind == "bilinear":
        rep = bilinear_sequential(
            inst.lam, *inst.measures3,
            _req(args, "p1"), _req(args, "p2"), _req(args, "p3"),
            _perm(args), args.variant, strategy,
        )
        return rep.to_json()
    raise ValueError(f"unknown testing kind {kind!r}")


def _eval_norm(args, inst: Instance, kind: str) -> dict:
    method = args.method or "alternating"
    if kind in (None, "linear"):
        est = normest.linear_norm(
            inst.lam, inst.sigma, inst.omega, _req(args, "p"), _req(args, "q"),
            method=method,
        )
        extremizer = est.extremizer.tolist()
    elif kind == "bilinear":
        est = normest.bilinear_norm(
            inst.lam, *inst.measures3,
            _req(args, "p1"), _req(args, "p2"), _req(args, "p3"), method=method,
        )
        extremizer = [f.tolist() for f in est.extremizer]
    elif kind == "maximal":
        est = normest.maximal_norm(
            inst.lam, inst.sigma, inst.omega, _req(args, "p"), _req(args, "q"),
            mode="sup-over-E",
        )
        extremizer = est.extremizer.tolist()
    else:
        raise ValueError(f"unknown norm kind {kind!r}")
    return {
        "value": est.value,
        "method": est.method,
        "extremizer": extremizer,
        "runs": est.runs,
        "converged": est.converged,
    }


def _req(args, name: str) -> float:
    value = getattr(args, name)
    if value is None:
        raise ValueError(f"--{name} is required here")
    return value


def _perm(args) -> tuple[int, int, int]:
    text = args.perm or "123"
    if sorted(text) != ["1", "2", "3"]:
        raise ValueError(f"--perm must permute 123, got {text!r}")
    return tuple(int(c) for c in text)  # type: ignore[return-value]


def _cmd_verify(args, parser) -> int:
    config = SweepConfig(
        trials=args.trials, depth=args.depth, branching=args.branching, seed=args.seed
    )
    report = run_verify(args.target, config)
    if args.format == "csv":
        _emit(_dump_csv(report["rows"]), args.out)
    else:
        _emit(_dump_json(report), args.out)
    return 0 if report["pass"] else 1


def _cmd_counterexample(args, parser) -> int:
    n_list = [int(v) for v in args.N.split(",") if v.strip()]
    if not n_list:
        parser.error("--N needs at least one chain length")
    try:
        study = growth_study(args.p, args.q, n_list)
    except ValueError as err:
        parser.error(str(err))
    if args.format == "json":
        payload = {
            "p": study.p,
            "q": study.q,
            "slope": study.slope,
            "rows": study.csv_rows(),
        }
        _emit(_dump_json(payload), args.out)
    else:
        _emit(_dump_csv(study.csv_rows()), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadlab",
        description="Two-weight bounds for positive dyadic operators: "
        "instances, evaluations, verification sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance as JSON")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--depth", type=int, default=2)
    gen.add_argument("--branching", type=int, default=2)
    gen.add_argument("--bilinear", action="store_true")
    gen.add_argument("--out")

    ev = sub.add_parser("eval", help="evaluate one computation on an instance")
    ev.add_argument("instance", help="instance JSON path")
    ev.add_argument("what", choices=["operator", "potential", "testing", "norm"])
    ev.add_argument("--kind")
    ev.add_argument("--f", help="comma-separated leaf values (default: all ones)")
    ev.add_argument("--f2", help="second factor for bilinear operators")
    ev.add_argument("--within", help="localization cube address level/index")
    ev.add_argument("--p", type=float)
    ev.add_argument("--q", type=float)
    ev.add_argument("--p1", type=float)
    ev.add_argument("--p2", type=float)
    ev.add_argument("--p3", type=float)
    ev.add_argument("--perm")
    ev.add_argument("--side", choices=["direct", "adjoint"], default="direct")
    ev.add_argument("--variant", choices=["T", "Ttilde"], default="T")
    ev.add_argument("--strategy", choices=["stopping", "exhaustive"])
    ev.add_argument("--method", choices=["alternating", "exhaustive-grid"])
    ev.add_argument("--out")

    ver = sub.add_parser("verify", help="run a verification sweep")
    ver.add_argument("target", choices=sorted(TARGETS))
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--depth", type=int, default=3)
    ver.add_argument("--branching", type=int, default=2)
    ver.add_argument("--format", choices=["json", "csv"], default="json")
    ver.add_argument("--out")

    ce = sub.add_parser("counterexample", help="chain growth study as CSV")
    ce.add_argument("--p", type=float, required=True)
    ce.add_argument("--q", type=float, required=True)
    ce.add_argument("--N", required=True, help="comma-separated chain lengths")
    ce.add_argument("--format", choices=["json", "csv"], default="csv")
    ce.add_argument("--out")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        return _cmd_gen(args, parser)
    if args.command == "eval":
        return _cmd_eval(args, parser)
    if args.command == "verify":
        return _cmd_verify(args, parser)
    if args.command == "counterexample":
        return _cmd_counterexample(args, parser)
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
