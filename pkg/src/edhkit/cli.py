"""Command-line entry point: generate, build-edh, train, eval, rollout-trace,
report."""

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
import torch

from .agent import (
    ModelConfig,
    TrainConfig,
    load_agent,
    rollout,
    save_agent,
    train_agent,
)
from .corpus import (
    SCENARIOS,
    TASKS,
    build_edh_instances,
    build_vocab,
    extract_plan,
    generate_session,
    get_scenario,
    get_task,
    ingest_instance,
    load_instance,
    load_session,
    navigation_share,
    plan_to_text,
    save_instance,
    save_session,
    task_scenario_pairs,
)
from .corpus.synthetic import synthetic_simplification_pairs
from .corpus.vocab import SymbolVocab, TokenVocab
from .maf import (
    MAFActionDecoder,
    MAFConfig,
    decode_action_tokens,
    f1_sequence,
    train_decoder,
)
from .agent.checkpoint import load_checkpoint, save_checkpoint
from .agent.model import flat_action_index
from .metrics import aggregate, format_table, rouge_l, rouge_n, score_instance
from .planner import (
    PlannerConfig,
    load_planner,
    predict_plan,
    save_planner,
    save_text_encoder,
    train_planner,
    train_synthetic_simplification,
)
from .worldsim import SchemaError, is_interaction

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ----------------------------------------------------------------- utilities


def data_root():
    return Path(os.environ.get("EDHKIT_DATA_ROOT", "."))


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _relative_key(path, out_dir):
    try:
        return str(Path(path).resolve().relative_to(Path(out_dir).resolve()))
    except ValueError:
        return Path(path).name


def _write_manifest(out_dir, command, config, inputs=None):
    # Keys are relative to the output directory so reruns into different
    # locations stay byte-comparable.
    manifest = {
        "command": command,
        "config": config,
        "input_hashes": {
            _relative_key(p, out_dir): _sha256_file(p) for p in sorted(inputs or [])
        },
    }
    with open(Path(out_dir) / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)


def _load_config_file(path, overrides):
    cfg = {}
    if path:
        with open(path) as f:
            cfg = json.load(f)
    # Flag overrides win (last-wins), recorded via the returned dict.
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def _load_vocabs(instances_dir):
    path = Path(instances_dir) / "vocab.json"
    if not path.exists():
        raise DataError(f"missing vocab file {path}")
    with open(path) as f:
        doc = json.load(f)
    return (
        TokenVocab.from_dict(doc["tokens"]),
        SymbolVocab.from_dict(doc["actions"]),
        SymbolVocab.from_dict(doc["objects"]),
    )


def _load_instances(instances_dir, split=None):
    inst_dir = Path(instances_dir) / "instances"
    if not inst_dir.is_dir():
        raise DataError(f"no instances directory under {instances_dir}")
    out = []
    for path in sorted(inst_dir.glob("*.json")):
        inst = load_instance(path)
        if split is None or inst.split == split:
            out.append(inst)
    if not out:
        raise DataError(f"no instances for split {split!r} in {instances_dir}")
    return out


# ---------------------------------------------------------------- generate


def cmd_generate(args):
    tasks = args.tasks.split(",") if args.tasks else None
    pairs = task_scenario_pairs()
    if tasks:
        for t in tasks:
            if t not in TASKS:
                raise UsageError(f"invalid task name {t!r}")
        pairs = [(t, s) for t, s in pairs if t in tasks]
        if not pairs:
            raise UsageError("no (task, scenario) pairs left after filtering")
    out = Path(args.out)
    (out / "sessions").mkdir(parents=True, exist_ok=True)
    written = []
    sessions = []
    for i in range(args.sessions):
        seed = args.seed_base + i
        task_name, scen_name = pairs[i % len(pairs)]
        sess = generate_session(
            seed, get_scenario(scen_name), get_task(task_name), nav_skew=args.nav_skew
        )
        sessions.append(sess)
        path = out / "sessions" / f"{sess.session_id}.json"
        save_session(sess, path)
        written.append(path)
    split_of = {
        s.session_id: ("train" if s.seed % 2 == 0 else "valid_seen") for s in sessions
    }
    with open(out / "splits.json", "w") as f:
        json.dump(split_of, f, indent=2, sort_keys=True)
    _write_manifest(
        out,
        "generate",
        {
            "sessions": args.sessions,
            "seed_base": args.seed_base,
            "nav_skew": args.nav_skew,
            "tasks": tasks,
            "split_rule": "even seed -> train, odd seed -> valid_seen",
        },
        inputs=written,
    )
    print(f"wrote {len(written)} sessions, navigation share "
          f"{navigation_share(sessions):.3f}")
    return EXIT_OK


# ---------------------------------------------------------------- build-edh


def cmd_build_edh(args):
    corpus = Path(args.corpus)
    session_paths = sorted((corpus / "sessions").glob("*.json")) if (corpus / "sessions").is_dir() else []
    if not session_paths:
        raise UsageError(f"no sessions found under {corpus}")
    with open(corpus / "splits.json") as f:
        split_of = json.load(f)
    sessions = [load_session(p) for p in session_paths]
    token_vocab, action_vocab, object_vocab = build_vocab(sessions)
    out = Path(args.out)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    n = 0
    per_task = {}
    for sess in sessions:
        stats = per_task.setdefault(
            sess.task["name"], {"sessions": 0, "actions": [], "interactive": []}
        )
        stats["sessions"] += 1
        world = sess.follower_world_events()
        stats["actions"].append(len(world))
        stats["interactive"].append(sum(1 for e in world if is_interaction(e.action)))
        for inst in build_edh_instances(sess):
            inst.split = split_of.get(sess.session_id, "train")
            save_instance(inst, out / "instances" / f"{inst.instance_id.replace('#', '_')}.json")
            n += 1
    with open(out / "vocab.json", "w") as f:
        json.dump(
            {
                "tokens": token_vocab.to_dict(),
                "actions": action_vocab.to_dict(),
                "objects": object_vocab.to_dict(),
            },
            f,
        )
    stats_doc = {}
    lines = [f"{'task':28}{'sessions':>9}{'actions':>18}{'interactive':>18}"]
    for task in sorted(per_task):
        s = per_task[task]
        a = np.asarray(s["actions"], dtype=np.float64)
        i = np.asarray(s["interactive"], dtype=np.float64)
        stats_doc[task] = {
            "sessions": s["sessions"],
            "avg_actions": float(a.mean()),
            "std_actions": float(a.std()),
            "avg_interactive": float(i.mean()),
            "std_interactive": float(i.std()),
        }
        lines.append(
            f"{task:28}{s['sessions']:>9}"
            f"{a.mean():>10.2f} ± {a.std():<5.2f}"
            f"{i.mean():>10.2f} ± {i.std():<5.2f}"
        )
    with open(out / "stats.json", "w") as f:
        json.dump(stats_doc, f, indent=2, sort_keys=True)
    with open(out / "stats.txt", "w") as f:
        f.write("\n".join(lines) + "\n")
    _write_manifest(out, "build-edh", {"corpus": str(corpus)}, inputs=session_paths)
    print("\n".join(lines))
    print(f"wrote {n} instances")
    return EXIT_OK


# -------------------------------------------------------------------- train


def parse_ablation(spec):
    flags = {f for f in (spec or "").split(",") if f}
    unknown = flags - {"h", "s", "ca", "lang"}
    if unknown:
        raise UsageError(f"unknown ablation flags: {sorted(unknown)}")
    return flags


def _agent_configs(cfg, ablation, n_tokens, n_actions, n_objects):
    model = ModelConfig(
        n_tokens=n_tokens,
        n_actions=n_actions,
        n_objects=n_objects,
        d_model=cfg.get("d_model", 64),
        text_layers=cfg.get("text_layers", 2),
        mm_encoder_layers=cfg.get("mm_encoder_layers", 2),
        attention_heads=cfg.get("attention_heads", 4),
        dropout=cfg.get("dropout", 0.0),
        max_dialog_tokens=cfg.get("max_dialog_tokens", 48),
        max_steps=cfg.get("max_steps", 96),
        channels=cfg.get("channels", 16),
        use_cross_attn="ca" in ablation,
        lang_only="lang" in ablation,
        init_mode="synthetic_pretrained" if "s" in ablation else "random",
    )
    train = TrainConfig(
        epochs=cfg.get("epochs", 120),
        batch_size=cfg.get("batch_size", 2),
        lr=cfg.get("lr", 1e-3),
        weight_decay=cfg.get("weight_decay", 0.0),
        include_history="h" in ablation,
        seed=cfg.get("seed", 0),
    )
    return model, train


def cmd_train(args):
    cfg = _load_config_file(args.config, {"seed": args.seed})
    tv, av, ov = _load_vocabs(args.instances)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.kind == "agent":
        ablation = parse_ablation(args.ablation)
        instances = _load_instances(args.instances, split=args.split)
        model_cfg, train_cfg = _agent_configs(cfg, ablation, len(tv), len(av), len(ov))
        model, curve = train_agent(
            instances, tv, av, ov, model_cfg, train_cfg,
            pretrained_encoder=args.pretrained_encoder,
        )
        save_agent(out, model, tv, av, ov, extra={"loss_curve": curve, "ablation": sorted(ablation)})
    elif args.kind == "planner":
        instances = _load_instances(args.instances, split=args.split)
        pcfg = PlannerConfig(n_tokens=len(tv), **{
            k: cfg[k] for k in (
                "d_model", "encoder_layers", "decoder_layers", "attention_heads",
                "max_src_len", "max_tgt_len", "dropout", "lr", "warmup_steps",
                "weight_decay", "epochs", "batch_size", "seed",
            ) if k in cfg
        })
        pairs = [(inst.dialog_history, extract_plan(inst)) for inst in instances]
        model, curve = train_planner(pairs, pcfg, tv)
        save_planner(out, model, tv)
    elif args.kind == "synthetic":
        pcfg = PlannerConfig(
            n_tokens=len(tv),
            d_model=cfg.get("d_model", 64),
            attention_heads=cfg.get("attention_heads", 4),
            epochs=cfg.get("epochs", 60),
            lr=cfg.get("lr", 1e-3),
            warmup_steps=cfg.get("warmup_steps", 20),
            seed=cfg.get("seed", 0),
        )
        pairs = synthetic_simplification_pairs(
            cfg.get("n_pairs", 40), seed=cfg.get("seed", 0)
        )
        model, curve = train_synthetic_simplification(pairs, pcfg, tv)
        save_text_encoder(out, model, tv)
    elif args.kind == "maf":
        instances = _load_instances(args.instances, split=args.split)
        mcfg = MAFConfig(
            n_tokens=len(tv),
            n_flat_actions=len(av) * len(ov) + 1,
            d_model=cfg.get("d_model", 64),
            d_context=cfg.get("d_context", 32),
            n_heads=cfg.get("attention_heads", 4),
            max_src_len=cfg.get("max_src_len", 48),
            max_tgt_len=cfg.get("max_tgt_len", 48),
        )
        torch.manual_seed(cfg.get("seed", 0))
        model = MAFActionDecoder(mcfg)
        examples = [_maf_example(inst, tv, av, ov, mcfg) for inst in instances]
        curve = train_decoder(
            model, examples, epochs=cfg.get("epochs", 150),
            lr=cfg.get("lr", 1e-3), seed=cfg.get("seed", 0),
        )
        save_checkpoint(
            out, "maf", mcfg,
            {"tokens": tv.sha256(), "actions": av.sha256(), "objects": ov.sha256()},
            model.state_dict(), extra={"loss_curve": curve},
        )
    else:
        raise UsageError(f"unknown train kind {args.kind!r}")
    print(f"saved checkpoint {out}")
    return EXIT_OK


def _maf_example(inst, tv, av, ov, mcfg):
    from .corpus.vocab import encode_dialog

    dialog = torch.tensor(
        encode_dialog(inst.dialog_history, tv, mcfg.max_src_len), dtype=torch.long
    )
    act_ctx = torch.tensor(
        [
            flat_action_index(av.encode(s["action"]), ov.encode(s["object_type"]), len(ov))
            for s in inst.action_history
        ],
        dtype=torch.long,
    )
    obs = (
        torch.from_numpy(np.stack(inst.image_history).astype(np.float32))
        if inst.image_history
        else torch.zeros(0, mcfg.channels, mcfg.obs_size, mcfg.obs_size)
    )
    target_names = [s["action"] for s in inst.future_actions][: mcfg.max_tgt_len - 2]
    return dialog, act_ctx, obs, target_names


# --------------------------------------------------------------------- eval


def cmd_eval(args):
    tv, av, ov = _load_vocabs(args.instances)
    instances = _load_instances(args.instances, split=args.split)
    torch.manual_seed(args.seed or 0)
    if args.kind == "agent":
        model = load_agent(args.checkpoint, tv, av, ov)
        scores = []
        for inst in instances:
            traj = rollout(model, inst, tv, av, ov, max_steps=args.max_steps)
            scores.append(
                score_instance(inst.instance_id, traj.actions, inst.reference_actions)
            )
        report = aggregate(scores, split=args.split or "all")
    elif args.kind == "planner":
        model = load_planner(args.checkpoint, tv)
        r1s, r2s, rls = [], [], []
        for inst in instances:
            pred = plan_to_text(predict_plan(model, inst.dialog_history, tv))
            ref = plan_to_text(extract_plan(inst))
            r1s.append(rouge_n(pred, ref, 1)[2])
            r2s.append(rouge_n(pred, ref, 2)[2])
            rls.append(rouge_l(pred, ref)[2])
        report = aggregate([], split=args.split or "all")
        report.instance_count = len(instances)
        report.rouge1 = sum(r1s) / len(r1s)
        report.rouge2 = sum(r2s) / len(r2s)
        report.rougeL = sum(rls) / len(rls)
    elif args.kind == "maf":
        payload = load_checkpoint(
            args.checkpoint, expected_kind="maf",
            expected_vocab_hashes={"tokens": tv.sha256()},
        )
        mcfg = MAFConfig(**payload["config"])
        model = MAFActionDecoder(mcfg)
        model.load_state_dict(payload["state_dict"])
        model.eval()
        f1s = []
        for inst in instances:
            dialog, act_ctx, obs, target = _maf_example(inst, tv, av, ov, mcfg)
            x_in = model.fuse_inputs(dialog, act_ctx, obs)
            pred = decode_action_tokens(model.greedy_decode(x_in))
            f1s.append(f1_sequence(pred, target))
        report = aggregate([], split=args.split or "all")
        report.instance_count = len(instances)
        report.f1 = sum(f1s) / len(f1s)
    else:
        raise UsageError(f"unknown eval kind {args.kind!r}")
    doc = report.to_dict()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
    print(format_table(report))
    return EXIT_OK


# ------------------------------------------------------------ rollout-trace


def cmd_rollout_trace(args):
    tv, av, ov = _load_vocabs(args.instances)
    instances = _load_instances(args.instances)
    matches = [i for i in instances if i.instance_id == args.instance_id]
    if not matches:
        raise DataError(f"instance {args.instance_id!r} not found")
    inst = matches[0]
    model = load_agent(args.checkpoint, tv, av, ov)
    traj = rollout(model, inst, tv, av, ov, max_steps=args.max_steps)
    matched = 0
    print(f"instance {inst.instance_id}  reference {inst.reference_actions}")
    for t, ((action, obj), outcome) in enumerate(zip(traj.actions, traj.outcomes)):
        if (
            matched < len(inst.reference_actions)
            and is_interaction(action)
            and (action, obj) == tuple(inst.reference_actions[matched])
        ):
            matched += 1
        print(
            f"  t={t:<3} action={action:<12} object={str(obj):<10} "
            f"outcome={outcome:<20} gc_matched={matched}/{len(inst.reference_actions)}"
        )
    score = score_instance(inst.instance_id, traj.actions, inst.reference_actions)
    print(
        f"stop_reason={traj.stop_reason}  success={score.success}  "
        f"gc={score.gc:.3f}  tlw_sr={score.tlw_success:.3f}  tlw_gc={score.tlw_gc:.3f}"
    )
    return EXIT_OK


def cmd_report(args):
    with open(args.report) as f:
        doc = json.load(f)
    for key in sorted(doc):
        print(f"{key:16}{doc[key]}")
    return EXIT_OK


# --------------------------------------------------------------------- main


def build_parser():
    p = argparse.ArgumentParser(prog="edhkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate synthetic gameplay sessions")
    g.add_argument("--out", required=True)
    g.add_argument("--sessions", type=int, default=20)
    g.add_argument("--seed-base", type=int, default=0)
    g.add_argument("--nav-skew", type=float, default=0.8)
    g.add_argument("--tasks", help="comma-separated task names")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("build-edh", help="slice sessions into EDH instances")
    b.add_argument("--corpus", required=True)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_build_edh)

    t = sub.add_parser("train", help="train a model")
    t.add_argument("--kind", required=True, choices=["agent", "maf", "planner", "synthetic"])
    t.add_argument("--instances", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--config")
    t.add_argument("--seed", type=int)
    t.add_argument("--split", default=None)
    t.add_argument("--ablation", default="", help="comma list from h,s,ca,lang")
    t.add_argument("--pretrained-encoder")
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    e.add_argument("--kind", required=True, choices=["agent", "planner", "maf"])
    e.add_argument("--checkpoint", required=True)
    e.add_argument("--instances", required=True)
    e.add_argument("--split", default=None)
    e.add_argument("--max-steps", type=int, default=48)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    r = sub.add_parser("rollout-trace", help="human-readable closed-loop trace")
    r.add_argument("--checkpoint", required=True)
    r.add_argument("--instances", required=True)
    r.add_argument("--instance-id", required=True)
    r.add_argument("--max-steps", type=int, default=48)
    r.set_defaults(func=cmd_rollout_trace)

    rep = sub.add_parser("report", help="print a stored metrics report")
    rep.add_argument("--report", required=True)
    rep.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemaError, DataError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
