"""Command-line entry point: ``intent-translator <subcommand> [flags]``.

Primary output (vectors, reports, summaries) goes to standard output and logs go
to standard error. Exit codes: 0 success, 1 domain failure, 2 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

from app import __version__
from app.config import get_settings
from app.core.augmentation import FilterParams, augment_corpus
from app.core.constraint_checker import check_against_selections, check_consistency
from app.core.corpus import read_corpus, write_corpus
from app.core.corpus_generator import constraint_histogram, generate_corpus
from app.core.encoders import EncoderId, encode, format_vector
from app.core.evaluation import evaluate_holdout, kfold_evaluate
from app.core.exceptions import IntentTranslatorError
from app.core.extractor import ExtractionModel, ExtractionTrainer, Task, TrainConfig
from app.core.game_engine import GameState, drafted_state
from app.core.rewards import RewardKind
from app.core.simulation import PolicyName, simulate
from app.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1


def _positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {number}")
    return number


def _fold_count(value: str) -> int:
    number = int(value)
    if number < 2:
        raise argparse.ArgumentTypeError(f"need at least 2 folds, got {number}")
    return number


def _map_ids(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated map ids: {e}") from e


def _dump_json(payload: dict, path: Path | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Wrote {path}")


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig.from_settings(
        task=args.task,
        epochs=args.epochs,
        batch_size=args.batch,
        learning_rate=args.lr,
        momentum=args.momentum,
        alpha=args.alpha,
        anneal_k=args.anneal_k,
        anneal_mid=args.anneal_mid,
        seed=args.seed,
        folds=getattr(args, "folds", None),
        feature_dim=args.feature_dim,
    )


# ============== Subcommands ==============


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    examples = generate_corpus(args.n, seed=args.seed, maps=args.maps)
    write_corpus(examples, args.out)
    _dump_json({"n": len(examples), "constraint_histogram": constraint_histogram(examples)}, None)
    return EXIT_OK


def cmd_augment(args: argparse.Namespace) -> int:
    examples = read_corpus(args.corpus)
    params = FilterParams(
        min_edit_distance_ratio=args.min_edit_ratio or get_settings().min_edit_distance_ratio
    )
    augmented = augment_corpus(
        examples,
        params=params,
        seed=args.seed,
        keep_original=args.keep_original,
        n_candidates=args.candidates,
    )
    write_corpus(augmented, args.out)
    changed = sum(1 for a in augmented if a.source == "augmented")
    _dump_json({"n_in": len(examples), "n_out": len(augmented), "n_augmented": changed}, None)
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    config = _train_config(args)
    corpus = read_corpus(args.corpus)
    pretrain = read_corpus(args.pretrain) if args.pretrain else None
    model = ExtractionTrainer(config).train(corpus, pretrain)
    model.save(args.out)
    _dump_json({"model": str(args.out), "history": model.history}, args.log)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    corpus = read_corpus(args.corpus)
    if args.model:
        report = evaluate_holdout(ExtractionModel.load(args.model), corpus)
    else:
        pretrain = read_corpus(args.pretrain) if args.pretrain else None
        report = kfold_evaluate(corpus, _train_config(args), pretrain)
    _dump_json(report.model_dump(mode="json"), args.out)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    model = ExtractionModel.load(args.model)
    text = args.text if args.text is not None else Path(args.text_file).read_text("utf-8")
    selections = json.loads(args.selections)
    intent = model.predict(text, selections, args.map_id)
    print(intent.model_dump_json(indent=2))
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    examples = read_corpus(args.example_file)
    all_clean = True
    for index, example in enumerate(examples, start=1):
        consistency = check_consistency(example.intent)
        state = drafted_state(example.map_id, example.selections)
        selections = check_against_selections(example.intent, state)
        clean = consistency.is_clean and selections.is_clean
        all_clean = all_clean and clean
        print(f"example {index}: {'clean' if clean else 'CONFLICTS'}")
        for conflict in consistency.conflicts + selections.conflicts:
            print(f"  [{conflict.rule_id}] slots {conflict.slots}: {conflict.message}")
    print(f"checked {len(examples)} examples")
    return EXIT_OK if all_clean else EXIT_FAILURE


def cmd_simulate(args: argparse.Namespace) -> int:
    summary = simulate(
        args.init_id,
        args.episodes,
        policy=args.policy,
        reward_kind=args.reward,
        seed=args.seed,
    )
    _dump_json(summary.model_dump(mode="json", exclude={"rewards"}), None)
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    payload = json.loads(Path(args.state_file).read_text("utf-8"))
    states = payload if isinstance(payload, list) else [payload]
    for raw in states:
        encoded = encode(GameState.model_validate(raw), args.encoder)
        print(format_vector(encoded.values))
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    settings = get_settings()
    uvicorn.run(
        "app.main:app",
        host=args.host or settings.api_host,
        port=args.port or settings.api_port,
    )
    return EXIT_OK


# ============== Parser ==============


def _add_training_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--task", choices=[t.value for t in Task], default=Task.BOTH.value)
    parser.add_argument("--pretrain", type=Path, help="Corpus to pretrain on first")
    parser.add_argument("--alpha", type=float, help="Goal loss CE weight in [0, 1]")
    parser.add_argument("--anneal-k", type=float, help="Annealing steepness")
    parser.add_argument("--anneal-mid", type=float, help="Annealing midpoint in (0, 1)")
    parser.add_argument("--epochs", type=_positive_int)
    parser.add_argument("--batch", type=_positive_int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--momentum", type=float)
    parser.add_argument("--feature-dim", type=_positive_int)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intent-translator",
        description="Risk strategy simulator, intent DSL and intent extraction models.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-corpus", help="Generate a synthetic corpus")
    gen.add_argument("--n", type=_positive_int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--maps", type=_map_ids, help="Comma-separated initialization ids")
    gen.add_argument("--out", type=Path, required=True)
    gen.set_defaults(func=cmd_gen_corpus)

    aug = sub.add_parser("augment", help="Paraphrase-augment a corpus")
    aug.add_argument("--corpus", type=Path, required=True)
    aug.add_argument("--out", type=Path, required=True)
    aug.add_argument("--seed", type=int, default=0)
    aug.add_argument("--keep-original", action="store_true")
    aug.add_argument("--candidates", type=_positive_int, default=5)
    aug.add_argument("--min-edit-ratio", type=float)
    aug.set_defaults(func=cmd_augment)

    train = sub.add_parser("train", help="Train an extraction model")
    train.add_argument("--corpus", type=Path, required=True)
    train.add_argument("--out", type=Path, required=True)
    train.add_argument("--log", type=Path, help="Training log (JSON); stdout when omitted")
    _add_training_flags(train)
    train.set_defaults(func=cmd_train)

    ev = sub.add_parser("eval", help="Cross-validate, or score a trained model on a corpus")
    ev.add_argument("--corpus", type=Path, required=True)
    ev.add_argument("--model", type=Path, help="Score this model instead of cross-validating")
    ev.add_argument("--folds", type=_fold_count)
    ev.add_argument("--out", type=Path, help="Report file (JSON); stdout when omitted")
    _add_training_flags(ev)
    ev.set_defaults(func=cmd_eval)

    pred = sub.add_parser("predict", help="Extract an intent from text and selections")
    pred.add_argument("--model", type=Path, required=True)
    text = pred.add_mutually_exclusive_group(required=True)
    text.add_argument("--text")
    text.add_argument("--text-file", type=Path)
    pred.add_argument("--selections", required=True, help='JSON, e.g. {"Purple_E": 7}')
    pred.add_argument("--map-id", type=int)
    pred.set_defaults(func=cmd_predict)

    check = sub.add_parser("check", help="Check examples for conflicts")
    check.add_argument("--example-file", type=Path, required=True)
    check.set_defaults(func=cmd_check)

    sim = sub.add_parser("simulate", help="Run scripted-policy rollouts")
    sim.add_argument("--init-id", type=int, help="Map initialization; empty board when omitted")
    sim.add_argument("--episodes", type=_positive_int, default=100)
    sim.add_argument("--policy", choices=[p.value for p in PolicyName], default="random")
    sim.add_argument("--reward", choices=[r.value for r in RewardKind], default="sparse")
    sim.add_argument("--seed", type=int, default=0)
    sim.set_defaults(func=cmd_simulate)

    enc = sub.add_parser("encode", help="Encode game states as feature vectors")
    enc.add_argument("--state-file", type=Path, required=True)
    enc.add_argument("--encoder", choices=[e.value for e in EncoderId], required=True)
    enc.set_defaults(func=cmd_encode)

    serve = sub.add_parser("serve", help="Run the HTTP API")
    serve.add_argument("--host")
    serve.add_argument("--port", type=int)
    serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level or get_settings().log_level, stream=sys.stderr)

    try:
        return args.func(args)
    except (IntentTranslatorError, ValueError, KeyError, OSError) as e:
        message = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {message}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
