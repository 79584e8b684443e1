"""``balancelaw`` command line: verify, maxwellian, simulate and sweep runs with manifests."""

import argparse
import json
import sys

import numpy as np

from .. import __version__
from ..errors import BalanceLawError, ConstructionError, ParseError, ValidationError
from ..maxwellian import maxwellian_batch
from ..models import FAMILIES, TARGETS, build_model, mutate
from ..solver import (
    Grid1D,
    InitialCondition,
    SolverConfig,
    conserved_totals,
    simulate,
)
from ..verifier import SampleSpec, Tolerances, run_full_suite, sample_states
from .config import TASKS, config_hash, load_raw, serialize, validate_config
from .manifest import RunManifest, normalized_command, now_iso, write_outputs
from .sweep import run_sweep

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2, 3

CONSERVATION_TOL = 1e-12
ENTROPY_SLACK = 1e-8


def _positive(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument("--seed", type=int, help="sampling seed (overrides the config)")
    common.add_argument("--samples", type=int, help="number of sampled states")
    common.add_argument("--family", choices=sorted(FAMILIES), help="model family")
    common.add_argument("--mutate", choices=sorted(TARGETS), help="wrap the model in a mutation")
    common.add_argument("--workers", type=_positive, default=1,
                        help="worker threads (does not change any output)")
    p = argparse.ArgumentParser(prog="balancelaw", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="task", required=True)
    sub.add_parser("verify", parents=[common], help="certify the structural properties")
    sub.add_parser("maxwellian", parents=[common], help="compute local equilibria")
    sub.add_parser("simulate", parents=[common], help="run the 1-D solver")
    sub.add_parser("sweep", parents=[common], help="eps-sweep with log-log slope fit")
    return p


def resolve_config(args):
    """Config file (or a minimal default) with command-line overrides applied."""
    text = None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
        raw = load_raw(text)
    else:
        raw = {"model": {"family": args.family or "broadwell"}}
    raw.setdefault("task", args.task)
    if raw["task"] != args.task:
        raise ValidationError(f"task: config asks for {raw['task']!r} but the subcommand is "
                              f"{args.task!r}")
    model = raw.setdefault("model", {})
    if not isinstance(model, dict):
        raise ValidationError("model: must be an object")
    if args.family:
        model["family"] = args.family
    if args.mutate:
        model["mutate"] = args.mutate
    sample = raw.setdefault("sample", {})
    if not isinstance(sample, dict):
        raise ValidationError("sample: must be an object")
    if args.seed is not None:
        sample["seed"] = args.seed
    if args.samples is not None:
        sample["count"] = args.samples
    return validate_config(raw, text)


def make_model(cfg):
    try:
        model = build_model(cfg.model.family, cfg.model.params)
    except (ConstructionError, ValueError) as exc:
        raise ValidationError(f"model.params: {exc}") from exc
    if cfg.model.mutate:
        model = mutate(model, cfg.model.mutate)
    return model


def solver_setup(cfg):
    s = cfg.solver
    config = SolverConfig(mode=s.mode, eps=s.eps, cfl=s.cfl, t_final=s.t_final,
                          u_star=None if s.u_star is None else tuple(s.u_star),
                          snapshot_every=s.snapshot_every, time_step=s.time_step)
    grid = Grid1D(s.cells, s.x_min, s.x_max)
    ic = InitialCondition(kind=s.ic.kind, amplitude=s.ic.amplitude, width=s.ic.width,
                          center=s.ic.center, component=s.ic.component,
                          base=None if s.ic.base is None else tuple(s.ic.base))
    return config, grid, ic


def _dump(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _verify(cfg, model, workers=1):
    tol = Tolerances(**cfg.tolerances.model_dump())
    report = run_full_suite(model, SampleSpec(cfg.sample.count, cfg.sample.seed), tol,
                            workers=workers)
    return {"report.json": report.to_json()}, EXIT_OK if report.passed else EXIT_CHECK


def _maxwellian(cfg, model, workers=1):
    if cfg.maxwellian.states is not None:
        U = np.asarray(cfg.maxwellian.states, dtype=float)
        if U.ndim != 2 or U.shape[1] != model.n:
            raise ValidationError(f"maxwellian.states: each state needs {model.n} components")
    else:
        U = sample_states(model, SampleSpec(cfg.maxwellian.count, cfg.sample.seed))
    M, res = maxwellian_batch(model, U)
    rows = []
    for i in range(U.shape[0]):
        ok = bool(res.converged[i])
        q = float(np.max(np.abs(model.source(M[i])))) if ok else None
        rows.append({"state": U[i].tolist(), "maxwellian": M[i].tolist() if ok else None,
                     "iterations": int(res.iterations[i]),
                     "residual": float(res.residual[i]) if np.isfinite(res.residual[i]) else None,
                     "status": str(res.status[i]), "source_norm": q})
    ok = bool(np.all(res.converged))
    out = {"model": model.describe(), "results": rows, "all_converged": ok}
    return {"maxwellian.json": _dump(out)}, EXIT_OK if ok else EXIT_CHECK


def _simulate(cfg, model, workers=1):
    config, grid, ic = solver_setup(cfg)
    traj = simulate(model, config, grid, ic)
    c0 = conserved_totals(model, traj.states[0], grid.dx)
    c1 = conserved_totals(model, traj.final, grid.dx)
    k = model.n - model.r
    scale = np.sum(np.abs((traj.states[0] @ model.P.T)[:, :k]), axis=0) * grid.dx
    drift = float(np.max(np.abs(c1 - c0) / max(float(np.max(scale)), np.finfo(float).tiny)))
    e = traj.step_entropy
    rise = np.diff(e) - ENTROPY_SLACK * (1.0 + np.abs(e[:-1]))
    entropy_ok = bool(np.all(rise <= 0))
    summary = {
        "model": model.describe(), "mode": config.mode, "eps": config.eps,
        "dt": traj.meta["dt"], "steps": traj.meta["steps"],
        "newton_iterations": int(traj.newton_iterations),
        "conservation_drift": drift, "conservation_ok": drift <= CONSERVATION_TOL,
        "entropy_initial": float(e[0]), "entropy_final": float(e[-1]),
        "entropy_nonincreasing": entropy_ok,
    }
    passed = entropy_ok and drift <= CONSERVATION_TOL
    outputs = {"trajectory.csv": traj.states_csv(), "entropy.csv": traj.entropy_csv(),
               "summary.json": _dump(summary)}
    return outputs, EXIT_OK if passed else EXIT_CHECK


def _sweep(cfg, model, workers=1):
    config, grid, ic = solver_setup(cfg)
    res = run_sweep(model, config, grid, ic, cfg.sweep.eps, workers=workers,
                    slope_window=tuple(cfg.sweep.slope_window))
    outputs = {"sweep.csv": res.to_csv(), "sweep_summary.json": res.summary_json()}
    return outputs, EXIT_OK if res.within_window else EXIT_CHECK


RUNNERS = {"verify": _verify, "maxwellian": _maxwellian, "simulate": _simulate,
           "sweep": _sweep}
assert set(RUNNERS) == set(TASKS)


def execute(cfg, out_dir, workers=1, argv=()):
    """Run ``cfg.task``, write outputs plus manifest into ``out_dir``; return the exit code."""
    try:
        model = make_model(cfg)
    except ValidationError as exc:
        print(f"balancelaw: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    started = now_iso()
    try:
        outputs, code = RUNNERS[cfg.task](cfg, model, workers=workers)
    except BalanceLawError as exc:
        print(f"balancelaw: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"balancelaw: invalid run settings: {exc}", file=sys.stderr)
        return EXIT_USAGE
    outputs["config.json"] = serialize(cfg)
    manifest = RunManifest(tool_version=__version__, command=normalized_command(argv),
                           config_hash=config_hash(cfg), seed=cfg.sample.seed, task=cfg.task,
                           exit_code=code)
    try:
        write_outputs(out_dir, outputs, manifest, started, now_iso())
    except OSError as exc:
        print(f"balancelaw: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"{cfg.task}: {'pass' if code == EXIT_OK else 'fail'} -> {out_dir}")
    return code


def _task(name):
    def run(cfg, out_dir, workers=1, argv=()):
        if cfg.task != name:
            raise ValidationError(f"task: expected {name!r}, got {cfg.task!r}")
        return execute(cfg, out_dir, workers=workers, argv=argv)

    run.__name__ = f"cmd_{name}"
    run.__doc__ = f"Run a resolved ``{name}`` config; writes outputs and returns the exit code."
    return run


cmd_verify = _task("verify")
cmd_maxwellian = _task("maxwellian")
cmd_simulate = _task("simulate")
cmd_sweep = _task("sweep")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ParseError, ValidationError) as exc:
        print(f"balancelaw: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"balancelaw: cannot read config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return execute(cfg, args.out, workers=args.workers, argv=argv)


if __name__ == "__main__":
    sys.exit(main())
