"""Planner training: dialog->plan pairs and the synthetic-simplification
text-pair task whose encoder the agent can reuse."""

import random

import torch

from ..agent.checkpoint import save_checkpoint
from ..corpus.edh import parse_plan, plan_to_text
from ..corpus.vocab import BOS, EOS, PAD, encode_dialog, tokenize
from .model import ConfigError, PlannerConfig, PlannerModel, sequence_loss


class EmptyCorpus(Exception):
    pass


def _warmup_linear(config, total_steps):
    warmup = max(1, config.warmup_steps)

    def factor(step):
        if step < warmup:
            return (step + 1) / warmup
        if total_steps <= warmup:
            return 1.0
        rest = (step - warmup) / max(1, total_steps - warmup)
        return max(0.05, 1.0 - rest)

    return factor


def _encode_target(tokens, token_vocab, max_tgt_len):
    ids = token_vocab.encode(tokens)
    if len(ids) + 2 > max_tgt_len + 2:
        raise ConfigError(
            f"target of {len(ids)} tokens exceeds max_tgt_len {max_tgt_len}"
        )
    return [BOS] + ids + [EOS]


def _fit(model, examples, config):
    """Teacher-forced training over (src_ids, tgt_ids) tensor pairs."""
    torch.manual_seed(config.seed)
    opt = torch.optim.AdamW(
        model.parameters(), lr=config.lr, weight_decay=config.weight_decay
    )
    steps_per_epoch = (len(examples) + config.batch_size - 1) // config.batch_size
    total = steps_per_epoch * config.epochs
    sched = torch.optim.lr_scheduler.LambdaLR(opt, _warmup_linear(config, total))
    rng = random.Random(config.seed)
    curve = []
    model.train()
    for _ in range(config.epochs):
        order = list(range(len(examples)))
        rng.shuffle(order)
        epoch_loss = 0.0
        pending = 0
        opt.zero_grad()
        for pos, idx in enumerate(order):
            src, tgt = examples[idx]
            logits = model(src, tgt[:-1])
            loss = sequence_loss(logits, tgt[1:])
            (loss / config.batch_size).backward()
            epoch_loss += float(loss.item())
            pending += 1
            if pending == config.batch_size or pos == len(order) - 1:
                opt.step()
                sched.step()
                opt.zero_grad()
                pending = 0
        curve.append(epoch_loss / len(examples))
    model.eval()
    return curve


def train_planner(pairs, config: PlannerConfig, token_vocab):
    """pairs: [(dialog_history, Plan), ...]. Returns (model, loss curve)."""
    if not pairs:
        raise EmptyCorpus("no (dialog, plan) pairs")
    examples = []
    for dialog, plan in pairs:
        src = torch.tensor(
            encode_dialog(dialog, token_vocab, config.max_src_len), dtype=torch.long
        )
        tgt = torch.tensor(
            _encode_target(plan_to_text(plan), token_vocab, config.max_tgt_len),
            dtype=torch.long,
        )
        examples.append((src, tgt))
    torch.manual_seed(config.seed)
    model = PlannerModel(config)
    curve = _fit(model, examples, config)
    return model, curve


def predict_plan(model, dialog_history, token_vocab):
    """Greedy decode until EOS or the length cap, then lenient parse."""
    src = torch.tensor(
        encode_dialog(dialog_history, token_vocab, model.config.max_src_len),
        dtype=torch.long,
    )
    ids = model.greedy_decode(src)
    return parse_plan(token_vocab.decode(ids))


def train_synthetic_simplification(text_pairs, config: PlannerConfig, token_vocab):
    """Train on (verbose instruction, simplified directive) pairs.

    Returns (model, curve); the encoder half can be exported for agent init.
    """
    if not text_pairs:
        raise EmptyCorpus("no text pairs")
    examples = []
    for verbose, simple in text_pairs:
        src_ids = token_vocab.encode(tokenize(verbose))[: config.max_src_len]
        src_ids += [PAD] * (config.max_src_len - len(src_ids))
        tgt = _encode_target(tokenize(simple), token_vocab, config.max_tgt_len)
        examples.append(
            (
                torch.tensor(src_ids, dtype=torch.long),
                torch.tensor(tgt, dtype=torch.long),
            )
        )
    torch.manual_seed(config.seed)
    model = PlannerModel(config)
    curve = _fit(model, examples, config)
    return model, curve


def save_text_encoder(path, model, token_vocab):
    """Export just the encoder weights for agent init_mode=synthetic_pretrained."""
    save_checkpoint(
        path,
        "text_encoder",
        model.config,
        {"tokens": token_vocab.sha256()},
        model.encoder.state_dict(),
    )


def save_planner(path, model, token_vocab):
    save_checkpoint(
        path, "planner", model.config, {"tokens": token_vocab.sha256()},
        model.state_dict(),
    )


def load_planner(path, token_vocab):
    from ..agent.checkpoint import load_checkpoint

    payload = load_checkpoint(
        path, expected_kind="planner",
        expected_vocab_hashes={"tokens": token_vocab.sha256()},
    )
    config = PlannerConfig(**payload["config"])
    model = PlannerModel(config)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
