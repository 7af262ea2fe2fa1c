from .f1 import f1_sequence
from .fusion import MCA2Attention, MCA2Params, align_context, gif_fuse, mca2_infuse
from .model import (
    ACTION_TOKENS,
    BOS,
    EOS,
    PAD,
    MAFActionDecoder,
    MAFConfig,
    decode_action_tokens,
    encode_action_tokens,
    train_decoder,
)
