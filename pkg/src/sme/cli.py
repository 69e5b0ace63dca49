"""Command-line front end: inspect, train, eval, score.

Exit codes: 0 success, 2 usage/config error, 3 data integrity error,
4 numerical failure. Flag values take precedence over manifest values,
which take precedence over built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import evaluator, modelfile, trainer
from .dataset import Triple, load_manifest, load_triples, make_folds
from .errors import (ConfigError, IntegrityError, MetricError, NumericalError,
                     OutOfDictionaryError, ParseError, SmeError)
from .model import FORMS

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sme",
        description="Multi-relational link prediction with semantic matching energies.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_model_flags(p):
        p.add_argument("--form", choices=FORMS, default="bilinear")
        p.add_argument("--dim-d", type=int, default=10, help="entity embedding dimension")
        p.add_argument("--dim-p", type=int, default=10, help="transformed embedding dimension")
        p.add_argument("--lr", type=float, default=0.01)
        p.add_argument("--margin", type=float, default=1.0)
        p.add_argument("--epochs", type=int, default=500)
        p.add_argument("--patience", type=int, default=10)
        p.add_argument("--batch", type=int, default=32)
        p.add_argument("--corruption", choices=trainer.CORRUPTION_MODES, default="both")
        p.add_argument("--folds", type=int, default=None,
                       help="fold count K (default: manifest value, else 10)")
        p.add_argument("--seed", type=int, default=None,
                       help="split/train seed (default: manifest value, else 0)")

    p_inspect = sub.add_parser("inspect", help="ingestion statistics for a dataset")
    p_inspect.add_argument("--dataset", required=True,
                           help="dataset manifest (JSON) or triple file (TSV)")

    p_train = sub.add_parser("train", help="train one fold and write a model file")
    p_train.add_argument("--dataset", required=True)
    p_train.add_argument("--fold", type=int, default=0)
    p_train.add_argument("--out", default="model.sme")
    add_common_model_flags(p_train)

    p_eval = sub.add_parser("eval", help="cross-validated AUC-PR evaluation")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--out", default="report",
                        help="output prefix; writes <out>.json and <out>.txt")
    p_eval.add_argument("--jobs", type=int, default=1,
                        help="folds trained in parallel (default 1, bitwise deterministic)")
    add_common_model_flags(p_eval)

    p_score = sub.add_parser("score", help="score triples with a trained model")
    p_score.add_argument("--model", required=True)
    p_score.add_argument("triples", nargs="+",
                         help="each argument is one tab-separated 'lhs<TAB>rel<TAB>rhs'")
    return parser


def _load_dataset_arg(path_str: str):
    path = Path(path_str)
    if not path.exists():
        raise ConfigError(f"dataset file not found: {path}")
    if path.suffix == ".json":
        manifest = load_manifest(path)
        d, ts = load_triples(manifest.triples_path)
        return manifest, d, ts
    d, ts = load_triples(path)
    return None, d, ts


def _resolve(flag_value, manifest_value, default):
    if flag_value is not None:
        return flag_value
    if manifest_value is not None:
        return manifest_value
    return default


def _train_config(args) -> trainer.TrainConfig:
    return trainer.TrainConfig(
        learning_rate=args.lr, margin=args.margin, epochs_max=args.epochs,
        batch_size=args.batch, corruption_mode=args.corruption,
        patience=args.patience, seed=0)


def cmd_inspect(args) -> int:
    _, d, ts = _load_dataset_arg(args.dataset)
    pct = 100.0 * ts.n_positive / len(ts)
    print(f"entities={d.n_entities} relations={d.n_relations} "
          f"records={len(ts)} valid={pct:.3g}%")
    return EXIT_OK


def cmd_train(args) -> int:
    manifest, d, ts = _load_dataset_arg(args.dataset)
    folds = _resolve(args.folds, manifest.folds if manifest else None, 10)
    seed = _resolve(args.seed, manifest.seed if manifest else None, 0)
    split = make_folds(ts, folds, seed)
    config = replace(_train_config(args), seed=seed)
    train_ts, valid_ts, _ = split.fold_sets(args.fold)
    model, _ = trainer.train(train_ts, valid_ts, d, args.form,
                             args.dim_d, args.dim_p, config)
    modelfile.save_model(model, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    manifest, d, ts = _load_dataset_arg(args.dataset)
    folds = _resolve(args.folds, manifest.folds if manifest else None, 10)
    seed = _resolve(args.seed, manifest.seed if manifest else None, 0)
    name = manifest.name if manifest else Path(args.dataset).stem
    split = make_folds(ts, folds, seed)
    config = replace(_train_config(args), seed=seed)
    report = evaluator.cross_validate(d, split, args.form, args.dim_d, args.dim_p,
                                      config, dataset_name=name, jobs=args.jobs)
    json_path = f"{args.out}.json"
    text_path = f"{args.out}.txt"
    report.save(json_path, text_path)
    print(f"dataset={name} form={args.form} mean={report.mean:.6f} "
          f"std={report.std:.6f} wrote={json_path},{text_path}")
    return EXIT_OK


def cmd_score(args) -> int:
    model = modelfile.load_model(args.model)
    index = {s: i for i, s in enumerate(model.symbols)}
    for raw in args.triples:
        parts = raw.split("\t")
        if len(parts) != 3:
            raise ConfigError(
                f"triple must be 'lhs<TAB>rel<TAB>rhs', got {raw!r}")
        try:
            ids = [index[s] for s in parts]
        except KeyError as exc:
            raise OutOfDictionaryError(
                f"out-of-dictionary symbol: {exc.args[0]!r}") from None
        score = -model.energy_of(Triple(*ids))
        print(f"{parts[0]}\t{parts[1]}\t{parts[2]}\t{score:.17g}")
    return EXIT_OK


_COMMANDS = {
    "inspect": cmd_inspect,
    "train": cmd_train,
    "eval": cmd_eval,
    "score": cmd_score,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, IntegrityError, OutOfDictionaryError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, MetricError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SmeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    raise SystemExit(main())
