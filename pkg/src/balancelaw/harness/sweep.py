"""eps-sweeps comparing the relaxation system with its simplified and equilibrium forms."""

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import BalanceLawError, InsufficientSweepData
from ..solver import compare_trajectories, simulate

HEADER = ("eps", "norm_full_vs_simplified", "norm_full_vs_equilibrium")


@dataclass(frozen=True)
class LogFit:
    slope: float
    intercept: float
    residual: float

    @classmethod
    def of(cls, eps, norms):
        x, y = np.log(eps), np.log(norms)
        (slope, intercept), res, *_ = np.polyfit(x, y, 1, full=True)
        rms = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
        return cls(float(slope), float(intercept), rms)


@dataclass
class SweepResult:
    eps: list
    norm_simplified: list
    norm_equilibrium: list
    max_norm_simplified: list
    max_norm_equilibrium: list
    failures: dict = field(default_factory=dict)
    fit_simplified: LogFit = None
    fit_equilibrium: LogFit = None
    slope_window: tuple = (0.8, 1.2)

    @property
    def monotone(self):
        """Norms decrease as eps decreases (soft property, reported only)."""
        out = True
        for seq in (self.norm_simplified, self.norm_equilibrium):
            vals = [v for v in seq if np.isfinite(v)]
            out &= all(b < a for a, b in zip(vals, vals[1:]))
        return bool(out)

    @property
    def within_window(self):
        lo, hi = self.slope_window
        fits = (self.fit_simplified, self.fit_equilibrium)
        return all(f is not None and lo <= f.slope <= hi for f in fits)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for row in zip(self.eps, self.norm_simplified, self.norm_equilibrium):
            w.writerow([format(float(x), ".17g") for x in row])
        return buf.getvalue()

    def summary(self):
        def fit(f):
            return None if f is None else {"slope": f.slope, "intercept": f.intercept,
                                           "residual": f.residual}

        def nums(seq):
            return [float(x) if np.isfinite(x) else None for x in seq]

        return {
            "eps": [float(e) for e in self.eps],
            "final": {"full_vs_simplified": nums(self.norm_simplified),
                      "full_vs_equilibrium": nums(self.norm_equilibrium)},
            "max_over_time": {"full_vs_simplified": nums(self.max_norm_simplified),
                              "full_vs_equilibrium": nums(self.max_norm_equilibrium)},
            "fit": {"full_vs_simplified": fit(self.fit_simplified),
                    "full_vs_equilibrium": fit(self.fit_equilibrium)},
            "slope_window": list(self.slope_window),
            "within_window": self.within_window,
            "monotone": self.monotone,
            "failures": {format(float(k), ".17g"): v for k, v in sorted(self.failures.items())},
        }

    def summary_json(self):
        return json.dumps(self.summary(), sort_keys=True, indent=2) + "\n"


def _norms(model, full, other, part):
    final = compare_trajectories(full, other, part=part, model=model)
    try:
        worst = compare_trajectories(full, other, part=part, model=model, over="max")
    except BalanceLawError:
        worst = float("nan")
    return final, worst


def run_sweep(model, config, grid, ic, eps_list, workers=1, slope_window=(0.8, 1.2)):
    """Run full and simplified for each eps and the equilibrium system once.

    ``config`` supplies every solver setting except ``mode`` and ``eps``.
    Results are assembled in the order of ``eps_list`` whatever the worker count.
    """
    eps_list = [float(e) for e in eps_list]
    if len(eps_list) < 3:
        raise InsufficientSweepData("a sweep needs at least 3 eps values")
    eq = simulate(model, replace(config, mode="equilibrium"), grid, ic)

    def one(eps):
        try:
            full = simulate(model, replace(config, mode="full", eps=eps), grid, ic)
            simp = simulate(model, replace(config, mode="simplified", eps=eps), grid, ic)
            return _norms(model, full, simp, "all") + _norms(model, full, eq, "u"), None
        except BalanceLawError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, eps_list))
    else:
        results = [one(e) for e in eps_list]

    nan = float("nan")
    res = SweepResult(eps=eps_list, norm_simplified=[], norm_equilibrium=[],
                      max_norm_simplified=[], max_norm_equilibrium=[],
                      slope_window=tuple(slope_window))
    for eps, (vals, err) in zip(eps_list, results):
        if err is None and not all(np.isfinite(vals[i]) and vals[i] > 0 for i in (0, 2)):
            err = "non-finite or zero norm"
        if err is not None:
            res.failures[eps] = err
            vals = (nan, nan, nan, nan)
        res.norm_simplified.append(vals[0])
        res.max_norm_simplified.append(vals[1])
        res.norm_equilibrium.append(vals[2])
        res.max_norm_equilibrium.append(vals[3])

    ok = [i for i, e in enumerate(eps_list) if e not in res.failures]
    if len(ok) < 3:
        raise InsufficientSweepData(f"only {len(ok)} eps values succeeded; failures: "
                                    f"{res.failures}")
    e = np.array(eps_list)[ok]
    res.fit_simplified = LogFit.of(e, np.array(res.norm_simplified)[ok])
    res.fit_equilibrium = LogFit.of(e, np.array(res.norm_equilibrium)[ok])
    return res
