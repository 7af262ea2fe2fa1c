"""Self-describing checkpoint container shared by agent, planner and MAF."""

from dataclasses import asdict

import torch

CHECKPOINT_SCHEMA_VERSION = 1


class CheckpointError(Exception):
    pass


def save_checkpoint(path, kind, config, vocab_hashes, state_dict, extra=None):
    payload = {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "kind": kind,
        "config": asdict(config) if hasattr(config, "__dataclass_fields__") else dict(config),
        "vocab_hashes": dict(vocab_hashes),
        "state_dict": state_dict,
        "extra": extra or {},
    }
    torch.save(payload, path)


def load_checkpoint(path, expected_kind=None, expected_vocab_hashes=None):
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise CheckpointError("unsupported checkpoint schema_version")
    if expected_kind is not None and payload.get("kind") != expected_kind:
        raise CheckpointError(
            f"checkpoint kind {payload.get('kind')!r} != expected {expected_kind!r}"
        )
    if expected_vocab_hashes:
        stored = payload.get("vocab_hashes", {})
        for name, digest in expected_vocab_hashes.items():
            if stored.get(name) != digest:
                raise CheckpointError(f"vocab hash mismatch for {name!r}")
    return payload
