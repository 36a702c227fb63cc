"""Acceptance criteria, one test per criterion, each printing a verdict line.

The exact-constant checks demand zero violations at tolerance 1e-9
(1e-6 where an optimization-based norm enters); the equivalence checks
assert recorded ratio windows and depth-stability of median ratios
(fitted slope within 0.05 of 0).  Seeds are pinned, so the whole gate is
deterministic.
"""

import json
import time

from dyadlab.chain import growth_study
from dyadlab.cli import main
from dyadlab.generate import SweepConfig
from dyadlab.verify import run_verify

RESULTS = []


def _criterion(number: int, description: str, ok: bool, detail: str = ""):
    note = f" [{detail}]" if detail else ""
    line = f"criterion {number:02d} {'PASS' if ok else 'FAIL'} {description}{note}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_01_linear_necessity_constant():
    start = time.monotonic()
    report = run_verify("cor3.2", SweepConfig(trials=200, depth=4, seed=11))
    elapsed = time.monotonic() - start
    ok = report["pass"] and report["violations"] == 0 and elapsed <= 120
    _criterion(
        1,
        "input-cut sequential quotients <= 3p * norm on 200 instances",
        ok,
        f"max lhs/rhs {report['stats']['max']:.3f}, {elapsed:.1f}s",
    )


def test_criterion_02_bilinear_necessity_constant():
    report = run_verify("sec4.1", SweepConfig(trials=200, depth=4, seed=12))
    ok = report["pass"] and report["violations"] == 0
    _criterion(
        2,
        "nested quotients <= 9 p_j p_k * norm, all permutations",
        ok,
        f"{len(report['rows'])} checks, max lhs/rhs {report['stats']['max']:.3f}",
    )


def test_criterion_03_lemma_suite_exact_constants():
    maximal = run_verify("lemma2.1", SweepConfig(trials=500, depth=4, seed=13))
    carleson = run_verify("lemma2.2", SweepConfig(trials=170, depth=4, seed=14))
    adapted = run_verify("lemma2.3", SweepConfig(trials=160, depth=4, seed=15))
    ok = all(r["pass"] and r["violations"] == 0 for r in (maximal, carleson, adapted))
    counts = (len(maximal["rows"]), len(carleson["rows"]), len(adapted["rows"]))
    ok = ok and counts[0] >= 500 and counts[1] >= 500 and counts[2] >= 500
    _criterion(
        3,
        "maximal p', embedding 2p', adapted-sum [1, 3p] bounds, 500+ checks each",
        ok,
        f"checks {counts}",
    )


def test_criterion_04_sequential_two_sidedness():
    report = run_verify("thm1.3", SweepConfig(trials=200, depth=5, seed=16))
    ok = report["pass"] and abs(report["slope"]) <= 0.05
    _criterion(
        4,
        "norm / sequential-sum ratio window stable over depths 2..5",
        ok,
        f"slope {report['slope']:.4f}, window [{report['stats']['min']:.3f}, "
        f"{report['stats']['max']:.3f}]",
    )


def test_criterion_05_potential_norm_equivalence():
    report = run_verify("prop1.5", SweepConfig(trials=400, depth=5, seed=17))
    ok = (
        report["pass"]
        and abs(report["slope"]) <= 0.05
        and report["depth0_exact_failures"] == 0
    )
    _criterion(
        5,
        "abstract vs discrete potential norms: window, stability, exact at depth 0",
        ok,
        f"slope {report['slope']:.4f}, ratio in [{report['stats']['min']:.3f}, "
        f"{report['stats']['max']:.3f}]",
    )


def test_criterion_06_supremum_comparison_window():
    report = run_verify("lemma2.4", SweepConfig(trials=200, depth=2, seed=18))
    shapes = {(row["branching"], row["depth"]) for row in report["rows"]}
    ok = report["pass"] and len(shapes) == 8
    _criterion(
        6,
        "stopping vs exhaustive vs sup-norm within the proof window, all small trees",
        ok,
        f"max pairwise ratio {report['stats']['max']:.3f} over {len(shapes)} shapes",
    )


def test_criterion_07_counterexample_growth():
    start = time.monotonic()
    study = growth_study(4.0, 2.0, [4, 8, 16, 32, 64])
    elapsed = time.monotonic() - start
    sawyers = [row.sawyer for row in study.rows]
    seq_ratios = [row.ratio_sequential for row in study.rows]
    ok = (
        max(sawyers) / min(sawyers) <= 2.0
        and 0.15 <= study.slope <= 0.35
        and max(seq_ratios) / min(seq_ratios) <= 3.0
        and elapsed <= 300
    )
    _criterion(
        7,
        "chain: indicator testing bounded, norm grows at rate 1/r, sequential keeps up",
        ok,
        f"slope {study.slope:.3f}, sawyer spread {max(sawyers)/min(sawyers):.2f}, "
        f"sequential spread {max(seq_ratios)/min(seq_ratios):.2f}, {elapsed:.1f}s",
    )


def test_criterion_08_two_measure_potential_regime():
    report = run_verify("thm1.9", SweepConfig(trials=100, depth=4, seed=19))
    ok = (
        report["pass"]
        and abs(report["slope"]) <= 0.05
        and report["homogeneity_failures"] == 0
    )
    _criterion(
        8,
        "two-measure potential vs norm at (4,4,4); homogeneity degree matches",
        ok,
        f"slope {report['slope']:.4f}, ratio in [{report['stats']['min']:.3f}, "
        f"{report['stats']['max']:.3f}]",
    )


def test_criterion_09_abstract_bilinear_potentials():
    ge1 = run_verify("ge1", SweepConfig(trials=40, depth=3, seed=20))
    ge2 = run_verify("ge2", SweepConfig(trials=40, depth=3, seed=21))
    ok = ge1["pass"] and ge2["pass"]
    _criterion(
        9,
        "case-split potential vs exhaustive testing in both regimes; T <= Ttilde",
        ok,
        f"ge1 ratio [{ge1['stats']['min']:.3f}, {ge1['stats']['max']:.3f}], "
        f"ge2 ratio [{ge2['stats']['min']:.3f}, {ge2['stats']['max']:.3f}]",
    )


def test_criterion_10_linearized_maximal_operators():
    linear = run_verify("thm5.2", SweepConfig(trials=100, depth=4, seed=22))
    bilinear = run_verify("thm5.4", SweepConfig(trials=40, depth=4, seed=23))
    ok = linear["pass"] and bilinear["pass"]
    _criterion(
        10,
        "argmax linearization exact; maximal sequential windows, linear and bilinear",
        ok,
        f"linear ratio [{linear['stats']['min']:.3f}, {linear['stats']['max']:.3f}], "
        f"bilinear [{bilinear['stats']['min']:.3f}, {bilinear['stats']['max']:.3f}]",
    )


def test_criterion_11_deterministic_reports(tmp_path):
    args = ["verify", "lemma2.2", "--trials", "60", "--seed", "24", "--out"]
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    assert main(args + [str(first)]) == 0
    assert main(args + [str(second)]) == 0
    identical = first.read_bytes() == second.read_bytes()
    report = json.loads(first.read_text())
    _criterion(
        11,
        "fixed-seed verification reports are byte-identical",
        identical and report["pass"],
        f"{first.stat().st_size} bytes",
    )
