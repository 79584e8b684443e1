"""Acceptance criteria 1-8, run at their stated tolerances.

Each test records one verdict line; the lines are printed in the pytest
terminal summary (see conftest.py).
"""

import contextlib
import json
import time

import numpy as np
import pytest

from balancelaw.harness.cli import main
from balancelaw.harness.manifest import verify_manifest
from balancelaw.models import CATALOG, TARGETS, build_model, mutate
from balancelaw.solver import Grid1D, InitialCondition, SolverConfig, conserved_totals, simulate
from balancelaw.verifier import SampleSpec, run_full_suite

VERDICTS = {}


@contextlib.contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        VERDICTS[number] = f"criterion {number} FAIL  {title}: {type(exc).__name__}: {exc}".splitlines()[0]
        raise
    VERDICTS[number] = f"criterion {number} PASS  {title} ({time.perf_counter() - t0:.1f} s)"


@pytest.fixture(scope="module")
def reports(tmp_path_factory):
    """CLI ``verify`` for every catalog model: 1000 samples, seed 42."""
    root = tmp_path_factory.mktemp("verify")
    out = {}
    for family in CATALOG:
        t0 = time.perf_counter()
        code = main(["verify", "--family", family, "--samples", "1000", "--seed", "42",
                     "--out", str(root / family)])
        elapsed = time.perf_counter() - t0
        report = json.loads((root / family / "report.json").read_text())
        out[family] = (code, elapsed, {c["name"]: c for c in report["checks"]}, report)
    return out


def test_criterion_1_structural_certification(reports):
    slowest = max(elapsed for _, elapsed, _, _ in reports.values())
    with criterion(1, f"structural certification of the 7 catalog models, slowest verify "
                      f"{slowest:.1f} s"):
        for family, (code, elapsed, checks, _) in reports.items():
            assert code == 0, f"{family}: verify exited {code}"
            assert elapsed <= 60, f"{family}: {elapsed:.1f} s"
            fact = checks["source_factorization"]
            assert fact["worst_residual"] <= 1e-10, family
            assert fact["details"]["max_asymmetry"] <= 1e-12, family
            assert fact["details"]["min_eigenvalue"] >= -1e-10, family
            assert checks["null_space_constancy"]["worst_residual"] <= 1e-8, family
            assert checks["entropy_structure"]["details"]["min_hessian_eigenvalue"] > 0, family


def test_criterion_2_dissipation_suite(reports):
    with criterion(2, "dissipation inequality, equilibrium characterizations, Jacobian, q_v"):
        for family, (_, _, checks, _) in reports.items():
            for name in ("dissipation_inequality", "equilibrium_characterizations",
                         "equilibrium_jacobian", "qv_invertibility"):
                assert checks[name]["passed"], f"{family}: {name}"
            assert checks["dissipation_inequality"]["worst_residual"] <= 1e-10
            assert checks["equilibrium_characterizations"]["worst_residual"] <= 1e-10
            assert checks["equilibrium_characterizations"]["details"]["indicator_mismatches"] == 0
            assert checks["equilibrium_jacobian"]["worst_residual"] <= 1e-5
            assert checks["qv_invertibility"]["worst_residual"] <= 1e8


def test_criterion_3_maxwellian(reports):
    with criterion(3, "Maxwellian uniqueness, |Q(M)| and ratio bounds"):
        for family, (_, _, checks, _) in reports.items():
            uniq = checks["maxwellian_uniqueness"]["details"]
            assert uniq["multistart_total"] == 100 * 10, family
            assert uniq["multistart_spread"] <= 1e-10, family
            assert uniq["max_source_at_maxwellian"] <= 1e-10, family
            bounds = checks["maxwellian_bounds"]["details"]
            assert np.isfinite(bounds["ratio_upper"]), family
            assert bounds["ratio_lower"] >= 1e-3, family
            assert checks["maxwellian_bounds"]["passed"], family


def test_criterion_4_closeness_sweeps(tmp_path):
    with criterion(4, "O(eps) sweeps for broadwell and euler_damping"):
        t0 = time.perf_counter()
        for family in ("broadwell", "euler_damping"):
            cfg = tmp_path / f"{family}.json"
            cfg.write_text(json.dumps({
                "model": {"family": family}, "task": "sweep",
                "solver": {"cells": 400, "t_final": 0.5, "ic": {"kind": "equilibrium_gaussian"}},
                "sweep": {"eps": [0.1, 0.05, 0.025, 0.0125]},
            }))
            code = main(["sweep", "--config", str(cfg), "--out", str(tmp_path / family)])
            summary = json.loads((tmp_path / family / "sweep_summary.json").read_text())
            for key in ("full_vs_simplified", "full_vs_equilibrium"):
                slope = summary["fit"][key]["slope"]
                assert 0.8 <= slope <= 1.2, f"{family} {key}: slope {slope:.3f}"
            assert summary["monotone"], family
            assert code == 0
        assert time.perf_counter() - t0 <= 300


def test_criterion_5_conservation_and_entropy(catalog):
    with criterion(5, "conservation to 1e-12 and entropy decay on periodic runs"):
        grid = Grid1D(200, -8.0, 8.0)
        for family, m in catalog.items():
            for mode in ("full", "simplified", "equilibrium"):
                tr = simulate(m, SolverConfig(mode=mode, eps=0.05, t_final=0.5), grid,
                              InitialCondition(width=3.0))
                k = m.n - m.r
                c0 = conserved_totals(m, tr.states[0], grid.dx)
                c1 = conserved_totals(m, tr.final, grid.dx)
                scale = np.max(np.sum(np.abs((tr.states[0] @ m.P.T)[:, :k]), axis=0) * grid.dx)
                assert np.max(np.abs(c1 - c0)) <= 1e-12 * scale, f"{family}/{mode}"
                e = tr.step_entropy
                assert np.all(np.diff(e) <= 1e-8 * (1 + np.abs(e[:-1]))), f"{family}/{mode}"


def test_criterion_6_transform_invariance(reports):
    with criterion(6, "invariance under a random well-conditioned transform"):
        for family, (_, _, checks, _) in reports.items():
            rec = checks["transform_invariance"]
            assert rec["passed"], family
            assert rec["details"]["condition_number"] <= 1e3
            assert all(rec["details"]["transformed_outcomes"].values()), family
            assert rec["worst_residual"] <= 1e-6, family


def test_criterion_7_mutants():
    with criterion(7, "each mutant fails exactly its targeted checks"):
        for family in CATALOG:
            for mutation, targets in TARGETS.items():
                report = run_full_suite(mutate(build_model(family), mutation),
                                        SampleSpec(1000, 42))
                failed = {c.name for c in report.checks if not c.passed}
                failed.discard("transform_invariance")
                assert failed == set(targets), f"{family}/{mutation}: {sorted(failed)}"
                assert all(c.error is None for c in report.checks), f"{family}/{mutation}"


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "byte-identical reports, trajectories and manifests"):
        runs = [
            ["verify", "--family", "radiation_hydro", "--samples", "300"],
            ["simulate", "--family", "reactive_euler"],
            ["sweep", "--family", "broadwell"],
        ]
        for i, argv in enumerate(runs):
            dirs = []
            for workers in ("1", "4"):
                out = tmp_path / f"{i}-{workers}"
                main(argv + ["--workers", workers, "--out", str(out)])
                assert verify_manifest(out) == []
                dirs.append(out)
            names = json.loads((dirs[0] / "manifest.json").read_text())["files"]
            for name in list(names) + ["manifest.json"]:
                assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes(), \
                    f"{argv[0]}: {name} differs"
