import numpy as np
import pytest

from balancelaw.errors import InsufficientSweepData
from balancelaw.harness.sweep import HEADER, LogFit, run_sweep
from balancelaw.models import broadwell
from balancelaw.solver import Grid1D, InitialCondition, SolverConfig


def test_log_fit_recovers_power_law():
    eps = np.array([0.1, 0.05, 0.025, 0.0125])
    fit = LogFit.of(eps, 3.0 * eps**1.0)
    assert fit.slope == pytest.approx(1.0, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(3.0), abs=1e-12)
    assert fit.residual < 1e-12


def test_small_sweep_structure():
    res = run_sweep(broadwell(), SolverConfig(t_final=0.3), Grid1D(100, -8, 8),
                    InitialCondition(width=3.0), [0.1, 0.05, 0.025])
    lines = res.to_csv().splitlines()
    assert lines[0] == ",".join(HEADER) and len(lines) == 4
    assert np.all(np.isfinite(res.norm_simplified)) and res.monotone
    assert all(m >= f for m, f in zip(res.max_norm_simplified, res.norm_simplified))
    summary = res.summary()
    assert summary["fit"]["full_vs_simplified"]["slope"] == res.fit_simplified.slope


def test_sweep_needs_three_values():
    with pytest.raises(InsufficientSweepData):
        run_sweep(broadwell(), SolverConfig(), Grid1D(20), InitialCondition(), [0.1, 0.05])


def test_sweep_records_failures():
    cfg = SolverConfig(t_final=0.1, newton_max_iter=1)
    ic = InitialCondition(kind="equilibrium_gaussian", width=0.3, amplitude=0.5)
    with pytest.raises(InsufficientSweepData, match="NewtonFailure"):
        run_sweep(broadwell(), cfg, Grid1D(40, -1, 1), ic, [1e-3, 5e-4, 2.5e-4])
