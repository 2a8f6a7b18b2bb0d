"""Command-line entry points: demo generation, training, evaluation, experiments, serving."""

from __future__ import annotations

import argparse
import logging
import os
from dataclasses import replace

from . import harness, intent, reporting
from .records import Dataset
from .scenario import METHODS, ScheduleEntry, load_scenario


def _add_common(p):
    p.add_argument("--scenario", required=True, help="scenario YAML file")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", default="out", help="output directory")


def cmd_demo_generate(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    tasks = [args.task] if args.task else list(scenario.tasks)
    ds = Dataset()
    count = args.count or scenario.demos_per_task
    for name in tasks:
        for rec in harness.generate_demos(scenario, name, count):
            ds.append(rec)
    path = os.path.join(args.out, "dataset.jsonl")
    ds.save_jsonl(path)
    print(f"wrote {len(ds)} demonstrations to {path} (fingerprint {ds.fingerprint()[:12]})")


def cmd_train(args):
    scenario = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    dataset = Dataset.load_jsonl(args.data)
    os.makedirs(args.out, exist_ok=True)
    cfg = scenario.train
    if args.dropout:
        cfg = replace(cfg, decoder_dropout=args.dropout)
    bundle, curve = intent.train_bundle(
        dataset, scenario.feat, cfg, harness.derive_seed(seed, "train-cli"), scenario.sim.v_max
    )
    bundle_path = os.path.join(args.out, "bundle.ckpt")
    bundle.save(bundle_path)
    reporting.write_curve_csv(curve, os.path.join(args.out, "curve.csv"))
    print(f"trained on {len(dataset)} records; bundle {bundle.fingerprint()[:12]} -> {bundle_path}")


def cmd_eval(args):
    scenario = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else scenario.seed
    art = harness.MethodArtifacts(bundle=intent.ModelBundle.load(args.bundle))
    if args.method == "dagger":
        raise SystemExit("eval --method dagger needs a cloning policy; use `experiment` instead")
    schedule = [
        replace(e, method=args.method) if args.method else e for e in scenario.schedule
    ]
    calib = harness.calibrate_no_assist(scenario)
    rows = harness.evaluate_schedule(scenario, art, schedule, calib, seed)
    reporting.emit_report(rows, [], args.out, calib, {"scenario": scenario.name, "seed": seed})
    for s in reporting.summarize(rows):
        print(
            f"{s['method']:>9} on {s['task']:<12} effort={s['mean_effort']:.3f} "
            f"error={s['mean_final_error']:.3f} success={s['success_rate']:.2f}"
        )


def cmd_experiment(args):
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    if args.method:
        scenario = replace(
            scenario, schedule=tuple(replace(e, method=args.method) for e in scenario.schedule)
        )
    initial = Dataset.load_jsonl(args.data) if args.data else None
    result = harness.continual_loop(scenario, initial_dataset=initial)
    reporting.emit_report(
        result.rows,
        result.records,
        args.out,
        result.calibration,
        {"scenario": scenario.name, "seed": scenario.seed, "retrains": result.retrain_count},
    )
    result.dataset.save_jsonl(os.path.join(args.out, "dataset.jsonl"))
    result.artifacts.bundle.save(os.path.join(args.out, "bundle.ckpt"))
    print(
        f"{len(result.rows)} trials, {result.retrain_count} retrains, "
        f"{result.bundle_versions} bundle versions -> {args.out}"
    )


def cmd_serve(args):
    import uvicorn

    from .service.app import create_app
    from .service.engine import TeleopEngine

    scenario = load_scenario(args.scenario)
    dataset = Dataset.load_jsonl(args.data) if args.data and os.path.exists(args.data) else Dataset()
    bundle = intent.ModelBundle.load(args.bundle) if args.bundle else None
    engine = TeleopEngine(scenario, dataset, bundle=bundle, data_path=args.data)
    app = create_app(engine, lockstep=args.lockstep)
    uvicorn.run(app, host=args.host, port=args.port)


def build_parser():
    parser = argparse.ArgumentParser(prog="teleassist")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("demo-generate", help="produce demonstrations from simulated operators")
    _add_common(p)
    p.add_argument("--task", help="single task name (default: every task)")
    p.add_argument("--count", type=int, default=None, help="demos per task")
    p.set_defaults(func=cmd_demo_generate)

    p = sub.add_parser("train", help="fit a model bundle from a dataset")
    _add_common(p)
    p.add_argument("--data", required=True, help="dataset.jsonl")
    p.add_argument("--dropout", type=float, default=0.0, help="decoder dropout rate")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a bundle on the scenario schedule")
    _add_common(p)
    p.add_argument("--data", help="dataset.jsonl (unused, kept for symmetry)")
    p.add_argument("--bundle", required=True, help="bundle.ckpt")
    p.add_argument("--method", choices=METHODS, default=None, help="override the schedule's method")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("experiment", help="full continual-learning loop from a scenario")
    _add_common(p)
    p.add_argument("--data", help="initial dataset.jsonl")
    p.add_argument("--method", choices=METHODS, default=None, help="override the schedule's method")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("serve", help="start the live teleop service")
    p.add_argument("--scenario", required=True)
    p.add_argument("--data", default=None, help="dataset.jsonl to load and append to")
    p.add_argument("--bundle", default=None, help="bundle.ckpt to start from")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--lockstep", action="store_true", help="advance one tick per command (replay/testing)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    args.func(args)


if __name__ == "__main__":
    main()
