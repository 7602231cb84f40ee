"""Command-line surface: simulate, train, finetune, generate, predict, eval, benchmark.

Exit codes: 0 on success, 2 on usage errors (bad flags or flag values),
1 on runtime errors (missing files, malformed data, incompatible inputs).
Diagnostics go to stderr; data goes to files or stdout. The GDP_SEED
environment variable overrides any configured seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_run_config
from .dataio import atomic_write, format_float, load_csv, save_csv
from .discrete import DiscreteGenerator, train_discrete
from .gaussian import TrainConfig, train
from .metrics import accuracy, kappa, mad, rmse
from .prediction import LossSpec, gdp_point
from .simbench import SimConfig, run_benchmark, simulate
from .transfer import TransferPlan, finetune_target


class UsageError(ValueError):
    """Bad flag value; maps to exit code 2."""


def _env_seed(seed):
    override = os.environ.get("GDP_SEED")
    if override is not None:
        try:
            return int(override)
        except ValueError:
            raise UsageError(f"GDP_SEED must be an integer, got {override!r}") from None
    return seed


def _parse_loss(text: str) -> LossSpec:
    try:
        return LossSpec.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _train_config(args, base: TrainConfig | None = None) -> TrainConfig:
    cfg = base or TrainConfig()
    overrides = {}
    for flag, attr in (
        ("epochs", "max_epochs"), ("patience", "patience"), ("batch_size", "batch_size"),
        ("lr", "learning_rate"), ("width", "width"), ("depth", "depth"),
        ("embed_dim", "embed_dim"), ("time_dim", "time_dim"),
    ):
        v = getattr(args, flag, None)
        if v is not None:
            overrides[attr] = v
    if overrides:
        import dataclasses
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = SimConfig(n=args.n, p=args.p, case=args.case, seed=_env_seed(args.seed))
    ds = simulate(cfg)
    columns = [f"x{j + 1}" for j in range(args.p)] + ["y"]
    save_csv(args.out, columns, np.column_stack([ds.X, ds.y]))
    meta_path = args.meta or args.out + ".meta.json"
    with atomic_write(meta_path) as handle:
        json.dump({
            "case": ds.case, "n": cfg.n, "p": cfg.p, "seed": cfg.seed,
            "beta": [float(b) for b in ds.beta],
        }, handle, indent=1)
        handle.write("\n")
    print(f"wrote {cfg.n} rows to {args.out} (meta: {meta_path})", file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    base = None
    if args.config:
        _, base = load_run_config(args.config)
    cfg = _train_config(args, base)
    data = load_csv(args.data, require_target=args.target_col)
    x, y, _ = data.split_target(args.target_col)
    seed = _env_seed(args.seed)
    if args.kind == "discrete" or (args.kind == "auto" and args.target_col in data.label_maps):
        gen = train_discrete(x, y.astype(np.int64), cfg, seed=seed)
        if args.target_col in data.label_maps:
            gen.meta["label_map"] = data.label_maps[args.target_col]
    else:
        gen = train(x, y, cfg, seed=seed)
    save_checkpoint(gen, args.out)
    print(f"trained {gen.kind} generator: {gen.meta['epochs_run']} epochs, "
          f"val loss {gen.meta['final_val_loss']:.6f} -> {args.out}", file=sys.stderr)
    return 0


def _cmd_finetune(args) -> int:
    source = load_checkpoint(args.source)
    data = load_csv(args.data, require_target=args.target_col)
    x, y, _ = data.split_target(args.target_col)
    plan = TransferPlan(
        source=source,
        freeze_embedder=not args.unfreeze_embedder,
        warm_start_score_net=not args.fresh_network,
        target_epochs=args.epochs,
        target_lr=args.lr,
    )
    base = None
    if args.config:
        _, base = load_run_config(args.config)
    gen = finetune_target(plan, x, y, config=base, seed=_env_seed(args.seed))
    if isinstance(gen, DiscreteGenerator) and "label_map" in source.meta:
        gen.meta["label_map"] = source.meta["label_map"]
    save_checkpoint(gen, args.out)
    print(f"finetuned generator: {gen.meta['epochs_run']} epochs -> {args.out}",
          file=sys.stderr)
    return 0


def _cmd_generate(args) -> int:
    gen = load_checkpoint(args.ckpt)
    data = load_csv(args.conditions)
    if args.target_col in data.columns:
        x, _, _ = data.split_target(args.target_col)
    else:
        x = data.matrix
    if x.shape[1] != gen.n_predictors:
        raise ValueError(
            f"{args.conditions}: {x.shape[1]} predictor columns, "
            f"generator expects {gen.n_predictors}")
    seed = _env_seed(args.seed)
    streams = np.random.SeedSequence(seed).spawn(x.shape[0])
    rows = []
    for i in range(x.shape[0]):
        rng = np.random.default_rng(streams[i])
        if gen.kind == "discrete":
            sset = gen.sample(x[i], args.m, rng=rng)
            for k, lab in enumerate(sset.samples):
                rows.append([float(i), float(k), float(lab)])
        else:
            sset = gen.sample(x[i], args.m, stride=args.stride, rng=rng)
            for k in range(sset.m):
                rows.append([float(i), float(k)] + [float(v) for v in sset.samples[k]])
    d_y = len(rows[0]) - 2
    names = ["y"] if d_y == 1 else [f"y{j + 1}" for j in range(d_y)]
    columns = ["condition_index", "sample_index"] + names
    label_maps = {}
    if gen.kind == "discrete" and "label_map" in gen.meta:
        label_maps["y"] = gen.meta["label_map"]
    save_csv(args.out, columns, np.asarray(rows), label_maps)
    print(f"wrote {len(rows)} samples to {args.out}", file=sys.stderr)
    return 0


def _cmd_predict(args) -> int:
    loss = _parse_loss(args.loss)
    data = load_csv(args.samples)
    for needed in ("condition_index", "sample_index"):
        if needed not in data.columns:
            raise ValueError(f"{args.samples}: missing column {needed!r}")
    value_cols = [c for c in data.columns if c not in ("condition_index", "sample_index")]
    if not value_cols:
        raise ValueError(f"{args.samples}: no sample value columns")
    cond = data.column("condition_index").astype(np.int64)
    values = np.column_stack([data.column(c) for c in value_cols])
    categorical = loss.kind == "zero_one"
    out_rows = []
    for ci in np.unique(cond):
        block = values[cond == ci]
        payload = block[:, 0].astype(np.int64) if categorical else block
        pred = gdp_point(payload, loss)
        val = np.atleast_1d(np.asarray(pred.value, dtype=np.float64))
        out_rows.append([float(ci)] + [float(v) for v in val] + [pred.loss_value])
    columns = ["condition_index"] + value_cols[: len(out_rows[0]) - 2] + ["empirical_loss"]
    if args.out:
        save_csv(args.out, columns, np.asarray(out_rows))
        print(f"wrote {len(out_rows)} predictions to {args.out}", file=sys.stderr)
    else:
        print(",".join(columns))
        for row in out_rows:
            print(",".join(format_float(v) for v in row))
    return 0


def _cmd_eval(args) -> int:
    pred = load_csv(args.pred, require_target=args.pred_col)
    truth = load_csv(args.truth, require_target=args.truth_col)
    p = pred.column(args.pred_col)
    t = truth.column(args.truth_col)
    if p.shape[0] != t.shape[0]:
        raise ValueError(f"prediction rows ({p.shape[0]}) != truth rows ({t.shape[0]})")
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    known = {"rmse": rmse, "mad": mad, "accuracy": accuracy, "kappa": kappa}
    lines = []
    for name in wanted:
        if name not in known:
            raise UsageError(f"unknown metric {name!r}, expected one of {sorted(known)}")
        lines.append((name, known[name](p, t)))
    report = "\n".join(f"{name},{format_float(v)}" for name, v in lines) + "\n"
    if args.out:
        with atomic_write(args.out) as handle:
            handle.write("metric,value\n")
            handle.write(report)
    else:
        sys.stdout.write("metric,value\n" + report)
    return 0


def _cmd_benchmark(args) -> int:
    if args.config:
        sim, train_cfg = load_run_config(args.config)
    else:
        sim, train_cfg = SimConfig(), TrainConfig()
    import dataclasses
    overrides = {}
    for name in ("n", "p", "case", "seed", "m", "test_subset", "stride"):
        v = getattr(args, name)
        if v is not None:
            overrides[name] = v
    overrides["seed"] = _env_seed(overrides.get("seed", sim.seed))
    sim = dataclasses.replace(sim, **overrides)
    train_cfg = _train_config(args, train_cfg)
    result = run_benchmark(sim, train_cfg)
    sys.stdout.write(result.table())
    if args.out:
        with atomic_write(args.out) as handle:
            for row in result.csv_rows():
                handle.write(",".join(str(c) for c in row) + "\n")
        print(f"wrote report to {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gdp",
        description="Train conditional diffusion generators and predict by "
                    "minimizing losses over synthetic samples.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a benchmark dataset as CSV")
    p.add_argument("--case", choices=["I", "II"], default="I")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--meta", default=None, help="metadata JSON path (default <out>.meta.json)")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("train", help="fit a generator on a CSV dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--kind", choices=["auto", "gaussian", "discrete"], default="auto")
    p.add_argument("--target-col", default="y")
    p.add_argument("--config", default=None, help="run-config JSON")
    p.add_argument("--seed", type=int, default=0)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("finetune", help="adapt a source checkpoint to target data")
    p.add_argument("--source", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--unfreeze-embedder", action="store_true",
                   help="also update the condition embedder")
    p.add_argument("--fresh-network", action="store_true",
                   help="reinitialize the main network instead of warm starting")
    p.add_argument("--config", default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_finetune)

    p = sub.add_parser("generate", help="draw m synthetic responses per condition row")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--conditions", required=True, help="CSV of predictor rows")
    p.add_argument("--target-col", default="y", help="dropped from conditions if present")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("predict", help="point predictions from generated samples")
    p.add_argument("--samples", required=True, help="CSV produced by generate")
    p.add_argument("--loss", required=True,
                   help="squared | absolute | pinball:<a> | zero_one | medoid:<dissim>")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("eval", help="score predictions against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--pred-col", default="y")
    p.add_argument("--truth-col", default="y")
    p.add_argument("--metrics", default="rmse,mad")
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("benchmark", help="run the simulation benchmark end to end")
    p.add_argument("--case", choices=["I", "II"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--test-subset", dest="test_subset", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)
    _add_train_flags(p)
    p.set_defaults(func=_cmd_benchmark)
    return parser


def _add_train_flags(p):
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--patience", type=int, default=None)
    p.add_argument("--batch-size", dest="batch_size", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--embed-dim", dest="embed_dim", type=int, default=None)
    p.add_argument("--time-dim", dest="time_dim", type=int, default=None)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
