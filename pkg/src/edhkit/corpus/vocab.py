"""Token / action / object vocabularies with reserved specials."""

import hashlib
import re
from collections import Counter

from ..worldsim import ACTION_ORDER

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ["<pad>", "<bos>", "<eos>", "<unk>"]

COMMANDER_TOKEN = "<commander>"
FOLLOWER_TOKEN = "<follower>"

_WORD_RE = re.compile(r"[a-z0-9_<>]+")


def tokenize(text):
    return _WORD_RE.findall(text.lower())


class TokenVocab:
    def __init__(self, tokens):
        """`tokens` excludes the specials; ordering is preserved as given."""
        self.tokens = SPECIALS + list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}

    def __len__(self):
        return len(self.tokens)

    def encode(self, tokens):
        return [self.index.get(t, UNK) for t in tokens]

    def decode(self, ids):
        return [self.tokens[i] for i in ids if i not in (PAD, BOS, EOS)]

    def sha256(self):
        return hashlib.sha256("\n".join(self.tokens).encode()).hexdigest()

    def to_dict(self):
        return {"tokens": self.tokens[len(SPECIALS) :]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["tokens"])


class SymbolVocab:
    """Flat symbol list (actions or object types) with a NONE entry at 0."""

    NONE = 0

    def __init__(self, symbols, none_symbol="<none>"):
        self.symbols = [none_symbol] + list(symbols)
        self.index = {s: i for i, s in enumerate(self.symbols)}

    def __len__(self):
        return len(self.symbols)

    def encode(self, symbol):
        if symbol is None:
            return self.NONE
        return self.index[symbol]

    def decode(self, idx):
        return self.symbols[idx]

    def sha256(self):
        return hashlib.sha256("\n".join(self.symbols).encode()).hexdigest()

    def to_dict(self):
        return {"symbols": self.symbols[1:]}

    @classmethod
    def from_dict(cls, d):
        return cls(d["symbols"])


def build_vocab(sessions):
    """Deterministic vocabularies from a session corpus.

    Token ordering is frequency-then-lexicographic; specials sit at fixed
    indices 0-3. Action and object vocabularies come from the simulator's
    action order and the scenarios' type registries.
    """
    if not sessions:
        raise ValueError("empty corpus")
    counts = Counter()
    object_types = []
    for sess in sessions:
        for e in sess.events:
            if e.utterance:
                counts.update(tokenize(e.utterance))
        for t in sess.scenario.get("object_types", []):
            if t not in object_types:
                object_types.append(t)
        for o in sess.scenario["objects"]:
            if o["type"] not in object_types:
                object_types.append(o["type"])
    # Plan symbols, speaker markers and the synthetic-simplification template
    # words must always be encodable.
    from .synthetic import template_tokens

    extra = (
        [COMMANDER_TOKEN, FOLLOWER_TOKEN]
        + ACTION_ORDER
        + sorted(object_types)
        + template_tokens()
    )
    for tok in extra:
        counts.setdefault(tok, 0)
    ordered = sorted(counts, key=lambda t: (-counts[t], t))
    token_vocab = TokenVocab(ordered)
    action_vocab = SymbolVocab(ACTION_ORDER)
    object_vocab = SymbolVocab(sorted(object_types))
    return token_vocab, action_vocab, object_vocab


def encode_dialog(dialog_history, token_vocab, max_len):
    """Speaker-tagged, PAD-right token id sequence of fixed length."""
    toks = []
    for actor, utt in dialog_history:
        toks.append(COMMANDER_TOKEN if actor == "Commander" else FOLLOWER_TOKEN)
        toks.extend(tokenize(utt))
    ids = token_vocab.encode(toks)[:max_len]
    ids = ids + [PAD] * (max_len - len(ids))
    return ids
