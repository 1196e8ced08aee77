"""Command-line interface.

Subcommands: generate, sample, structure, distill, train-supervised,
eval-supervised, report.  Each takes a JSON config document plus a few
overriding flags; outputs land in --out as report.json and artifacts.
Validation failures print a machine-readable error document and exit 2.
"""

import argparse
import json
import os
import sys

from .errors import RbmnetError, ValidationError
from .experiments import (ExperimentReport, eval_supervised, run_experiment,
                          train_supervised)
from .generators import GeneratorSpec, generate_model
from .rbm import norm_bounds, save_model
from .supervised import SupervisedRbm


def _load_config(args):
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ValidationError("config document must be an object",
                                  paths=["$"])
    if args.seed is not None:
        config["seed"] = args.seed
    if args.threads is not None:
        config["threads"] = args.threads
    elif "threads" not in config:
        config["threads"] = int(os.environ.get("RBMNET_THREADS", "1"))
    if args.exact:
        config.setdefault("sampler", {})["kind"] = "exact"
        config["exact"] = True
    return config


def _emit(report, out_dir):
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, "report.json")
        report.save(path)
    json.dump(report.to_doc()["metrics"], sys.stdout, sort_keys=True, indent=1)
    sys.stdout.write("\n")


def _cmd_generate(args):
    config = _load_config(args)
    spec_doc = dict(config.get("model", config))
    known = {f.name for f in GeneratorSpec.__dataclass_fields__.values()}
    unknown = [k for k in spec_doc
               if k not in known and "model" in config]
    if unknown:
        raise ValidationError(f"unknown model keys {unknown}",
                              paths=[f"model.{k}" for k in unknown])
    spec_doc.setdefault("seed", config.get("seed", 0))
    spec = GeneratorSpec(**{k: v for k, v in spec_doc.items() if k in known})
    model = generate_model(spec)
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "model.json")
    save_model(model, path)
    base = model.base if isinstance(model, SupervisedRbm) else model
    nb = norm_bounds(base)
    report = ExperimentReport("generate", spec.seed, config)
    report.metrics["lambda1"] = {"value": nb.lambda1, "method": "exact"}
    report.metrics["lambda2"] = {"value": nb.lambda2, "method": "exact"}
    report.artifacts.append(path)
    _emit(report, out)
    return 0


def _experiment_cmd(kind):
    def run(args):
        config = _load_config(args)
        report = run_experiment(kind, config, out_dir=args.out,
                                threads=config.get("threads"))
        _emit(report, args.out)
        return 0
    return run


def _cmd_train(args):
    config = _load_config(args)
    report, _ = train_supervised(config, out_dir=args.out)
    _emit(report, args.out)
    return 0


def _cmd_eval(args):
    config = _load_config(args)
    report = eval_supervised(config, out_dir=args.out)
    _emit(report, args.out)
    return 0


def _cmd_report(args):
    if not args.config:
        raise ValidationError("report needs --config pointing at report.json",
                              paths=["config"])
    with open(args.config) as fh:
        doc = json.load(fh)
    for key in ("kind", "seed", "metrics"):
        if key not in doc:
            raise ValidationError(f"report missing '{key}'", paths=[key])
    print(f"kind: {doc['kind']}   seed: {doc['seed']}")
    for name in sorted(doc["metrics"]):
        entry = doc["metrics"][name]
        se = entry.get("stderr")
        tail = f" +- {se:.3g}" if se is not None else ""
        print(f"  {name:28s} {entry['value']:12.6g}{tail}  [{entry['method']}]")
    for path in doc.get("artifacts", []):
        print(f"  artifact: {path}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="rbmnet",
        description="Learn RBM structure, distribution and label prediction")
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "generate": _cmd_generate,
        "sample": _experiment_cmd("sample"),
        "structure": _experiment_cmd("structure"),
        "distill": _experiment_cmd("distribution"),
        "train-supervised": _cmd_train,
        "eval-supervised": _cmd_eval,
        "report": _cmd_report,
    }
    for name in commands:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config document")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", help="output directory")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--exact", action="store_true",
                       help="force enumeration-backed sampling where capped")
    args = parser.parse_args(argv)
    try:
        return commands[args.command](args)
    except RbmnetError as exc:
        doc = {"error": {"message": str(exc),
                         "paths": getattr(exc, "paths", [])}}
        json.dump(doc, sys.stderr, sort_keys=True)
        sys.stderr.write("\n")
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, "error.json"), "w") as fh:
                json.dump(doc, fh, sort_keys=True)
                fh.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
