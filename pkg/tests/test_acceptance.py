"""Acceptance suite under pytest: one test and one printed PASS/FAIL line per criterion.

The budget defaults to ``full`` (the stated sample sizes); set
MOMENTLAB_ACCEPTANCE_BUDGET=quick for a faster smoke run at the same tolerances.
Criterion 15 reruns criteria 1-14 in a fresh interpreter and compares the
JSON reports byte for byte.
"""

from __future__ import annotations

import os
import sys

import pytest

from momentlab.acceptance import delta_sign_mutation, human_table, run_criterion, run_suite

BUDGET = os.environ.get("MOMENTLAB_ACCEPTANCE_BUDGET", "full")
SEED = 0
IDS = list(range(1, 16))


@pytest.fixture(scope="module")
def report(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def echo(line):
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)

    echo(f"acceptance suite, budget {BUDGET}, seed {SEED}")
    rep = run_suite(BUDGET, SEED, workers=os.cpu_count() or 1, determinism=True, echo=echo)
    echo(human_table(rep))
    return {c["id"]: c for c in rep["criteria"]}


def _describe(c: dict) -> str:
    if c["error"]:
        return f"error: {c['error']}"
    parts = []
    for k in c["checks"]:
        if k["relation"] == "±":
            target = f"{k['target']:.4g} ± {k['tolerance']:.3g}"
        else:
            target = f"{k['relation']} {k['target']:.4g}"
        parts.append(f"{k['label']} {k['value']:.4g} vs {target} {k['verdict']}")
    if c["details"].get("differing_criteria"):
        parts.append(f"differing criteria {c['details']['differing_criteria']}")
    return "; ".join(parts)


@pytest.mark.parametrize("cid", IDS)
def test_criterion(report, cid):
    c = report[cid]
    line = f"criterion {cid:2d} {c['name']}: {c['verdict']}"
    print(line)
    assert c["verdict"] == "PASS", f"{line}: {_describe(c)}"


def test_mutation_is_caught():
    """Flipping the sign of one term inside every Delta_i must make criterion 5 fail."""
    assert run_criterion(5, "quick", SEED).passed
    with delta_sign_mutation():
        mutated = run_criterion(5, "quick", SEED)
    assert not mutated.passed


def test_determinism_check_on_fast_subset():
    """The rerun comparison itself: a small subset must reproduce byte for byte."""
    rep = run_suite("quick", SEED, only=[12, 14, 15])
    r15 = rep["criteria"][-1]
    assert r15["id"] == 15 and r15["verdict"] == "PASS", r15["details"]


if __name__ == "__main__":
    rep = run_suite(BUDGET, SEED, workers=os.cpu_count() or 1, determinism=True, echo=print)
    print(human_table(rep))
    sys.exit(0 if rep["verdict"] == "PASS" else 1)
