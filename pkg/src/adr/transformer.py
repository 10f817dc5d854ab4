"""Self-attention encoder-decoder built from scaled dot-product attention.

Each head projects the model-dim sequence to a smaller query/key/value
space, scores every query against every key scaled by 1/sqrt(d_z), and
mixes values by the softmaxed scores. Heads run in parallel and their
outputs are concatenated and projected back. Layers wrap self-attention
(causally masked in the decoder), encoder-decoder attention (decoder
only) and a one-hidden-layer feed-forward block in residual connections,
each followed by layer normalization unless disabled.

Positional information is sinusoidal and, by default, concatenated to the
token embeddings and projected back to model_dim; additive and disabled
modes are available for comparison. Without positional encodings and
masking the encoder is permutation equivariant, which the tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import MASKED, Tensor
from .errors import DataError, EmptySentenceError
from .rng import SplitMix64
from .vocab import BOS, EOS

LAYER_NORM_EPS = 1e-5
POSITIONAL_KINDS = ("concat", "add", "none")


@dataclass
class HeadParams:
    """Query/key/value projections of one attention head, model_dim -> d_z each."""

    W_q: Tensor
    W_k: Tensor
    W_v: Tensor
    d_z: int


@dataclass
class MultiHeadParams:
    heads: list[HeadParams]
    W_o: Tensor


@dataclass
class LayerNormParams:
    gamma: Tensor
    beta: Tensor


@dataclass
class FeedForwardParams:
    W1: Tensor
    b1: Tensor
    W2: Tensor
    b2: Tensor


@dataclass
class EncoderLayerParams:
    self_attn: MultiHeadParams
    norm1: LayerNormParams
    ff: FeedForwardParams
    norm2: LayerNormParams


@dataclass
class DecoderLayerParams:
    self_attn: MultiHeadParams
    norm1: LayerNormParams
    cross_attn: MultiHeadParams
    norm2: LayerNormParams
    ff: FeedForwardParams
    norm3: LayerNormParams


@dataclass(frozen=True)
class TransformerConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    num_layers: int = 2
    model_dim: int = 64
    num_heads: int = 4
    ff_dim: int = 128
    positional_kind: str = "concat"
    use_layer_norm: bool = True

    def __post_init__(self):
        if self.model_dim % self.num_heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} not divisible by "
                f"num_heads {self.num_heads}"
            )
        if self.positional_kind not in POSITIONAL_KINDS:
            raise ValueError(f"unknown positional kind {self.positional_kind!r}")

    @property
    def head_dim(self) -> int:
        return self.model_dim // self.num_heads


@dataclass
class TransformerModel:
    config: TransformerConfig
    src_embed: Tensor
    tgt_embed: Tensor
    pos_proj_src: Tensor | None
    pos_proj_tgt: Tensor | None
    enc_layers: list[EncoderLayerParams]
    dec_layers: list[DecoderLayerParams]
    out_W: Tensor
    out_b: Tensor


# --- construction -----------------------------------------------------------


def _new_multi_head(config: TransformerConfig, rng: SplitMix64) -> MultiHeadParams:
    d, d_z = config.model_dim, config.head_dim
    heads = [
        HeadParams(
            W_q=ad.glorot((d, d_z), rng),
            W_k=ad.glorot((d, d_z), rng),
            W_v=ad.glorot((d, d_z), rng),
            d_z=d_z,
        )
        for _ in range(config.num_heads)
    ]
    return MultiHeadParams(heads=heads, W_o=ad.glorot((d, d), rng))


def _new_layer_norm(dim: int) -> LayerNormParams:
    return LayerNormParams(gamma=ad.parameter(np.ones(dim)), beta=ad.zeros((dim,)))


def _new_feed_forward(config: TransformerConfig, rng: SplitMix64) -> FeedForwardParams:
    return FeedForwardParams(
        W1=ad.glorot((config.model_dim, config.ff_dim), rng),
        b1=ad.zeros((config.ff_dim,)),
        W2=ad.glorot((config.ff_dim, config.model_dim), rng),
        b2=ad.zeros((config.model_dim,)),
    )


def build_transformer(config: TransformerConfig, rng: SplitMix64) -> TransformerModel:
    d = config.model_dim
    concat_pos = config.positional_kind == "concat"
    enc_layers = [
        EncoderLayerParams(
            self_attn=_new_multi_head(config, rng),
            norm1=_new_layer_norm(d),
            ff=_new_feed_forward(config, rng),
            norm2=_new_layer_norm(d),
        )
        for _ in range(config.num_layers)
    ]
    dec_layers = [
        DecoderLayerParams(
            self_attn=_new_multi_head(config, rng),
            norm1=_new_layer_norm(d),
            cross_attn=_new_multi_head(config, rng),
            norm2=_new_layer_norm(d),
            ff=_new_feed_forward(config, rng),
            norm3=_new_layer_norm(d),
        )
        for _ in range(config.num_layers)
    ]
    return TransformerModel(
        config=config,
        src_embed=ad.glorot((config.src_vocab_size, d), rng),
        tgt_embed=ad.glorot((config.tgt_vocab_size, d), rng),
        pos_proj_src=ad.glorot((2 * d, d), rng) if concat_pos else None,
        pos_proj_tgt=ad.glorot((2 * d, d), rng) if concat_pos else None,
        enc_layers=enc_layers,
        dec_layers=dec_layers,
        out_W=ad.glorot((d, config.tgt_vocab_size), rng),
        out_b=ad.zeros((config.tgt_vocab_size,)),
    )


def _multi_head_names(prefix: str, mh: MultiHeadParams) -> dict[str, Tensor]:
    params: dict[str, Tensor] = {}
    for h, head in enumerate(mh.heads):
        params[f"{prefix}.{h}.W_q"] = head.W_q
        params[f"{prefix}.{h}.W_k"] = head.W_k
        params[f"{prefix}.{h}.W_v"] = head.W_v
    params[f"{prefix}.W_o"] = mh.W_o
    return params


def parameters(model: TransformerModel) -> dict[str, Tensor]:
    """Flat name-to-tensor view in a stable order, for the optimizer and checkpoints."""
    params: dict[str, Tensor] = {
        "src_embed": model.src_embed,
        "tgt_embed": model.tgt_embed,
    }
    if model.pos_proj_src is not None:
        params["pos.src.W"] = model.pos_proj_src
        params["pos.tgt.W"] = model.pos_proj_tgt
    for l, layer in enumerate(model.enc_layers):
        params.update(_multi_head_names(f"enc.{l}.self", layer.self_attn))
        for name, norm in (("norm1", layer.norm1), ("norm2", layer.norm2)):
            params[f"enc.{l}.{name}.gamma"] = norm.gamma
            params[f"enc.{l}.{name}.beta"] = norm.beta
        params[f"enc.{l}.ff.W1"] = layer.ff.W1
        params[f"enc.{l}.ff.b1"] = layer.ff.b1
        params[f"enc.{l}.ff.W2"] = layer.ff.W2
        params[f"enc.{l}.ff.b2"] = layer.ff.b2
    for l, layer in enumerate(model.dec_layers):
        params.update(_multi_head_names(f"dec.{l}.self", layer.self_attn))
        params.update(_multi_head_names(f"dec.{l}.cross", layer.cross_attn))
        for name, norm in (
            ("norm1", layer.norm1),
            ("norm2", layer.norm2),
            ("norm3", layer.norm3),
        ):
            params[f"dec.{l}.{name}.gamma"] = norm.gamma
            params[f"dec.{l}.{name}.beta"] = norm.beta
        params[f"dec.{l}.ff.W1"] = layer.ff.W1
        params[f"dec.{l}.ff.b1"] = layer.ff.b1
        params[f"dec.{l}.ff.W2"] = layer.ff.W2
        params[f"dec.{l}.ff.b2"] = layer.ff.b2
    params["out.W"] = model.out_W
    params["out.b"] = model.out_b
    return params


# --- attention primitives ---------------------------------------------------


def positional_encoding(length: int, dim: int) -> np.ndarray:
    """Sinusoidal position table: sin/cos pairs at geometric wavelengths.

    Position 0 is the alternating [0, 1, 0, 1, ...] pattern.
    """
    if dim % 2 != 0:
        raise ValueError(f"positional encoding dim must be even, got {dim}")
    pos = np.arange(length, dtype=np.float64)[:, None]
    rates = np.exp(-math.log(10000.0) * np.arange(0, dim, 2, dtype=np.float64) / dim)
    table = np.zeros((length, dim))
    table[:, 0::2] = np.sin(pos * rates)
    table[:, 1::2] = np.cos(pos * rates)
    return table


def causal_mask(length: int) -> np.ndarray:
    """Additive mask: MASKED above the diagonal, 0 elsewhere."""
    return np.triu(np.full((length, length), MASKED), k=1)


def scaled_dot_scores(
    queries: Tensor, keys: Tensor, d_z: int, causal: bool = False
) -> Tensor:
    """Compatibility scores q_i . k_j / sqrt(d_z), optionally causally masked."""
    scores = ad.scale(queries @ ad.transpose(keys), 1.0 / math.sqrt(d_z))
    if causal:
        scores = scores + Tensor(causal_mask(scores.shape[0]))
    return scores


def attend(
    head: HeadParams, query_seq: Tensor, key_seq: Tensor, causal: bool = False
) -> tuple[Tensor, Tensor]:
    """One head's mixed values and the attention rows that produced them."""
    q = query_seq @ head.W_q
    k = key_seq @ head.W_k
    v = key_seq @ head.W_v
    alpha = ad.softmax(scaled_dot_scores(q, k, head.d_z, causal=causal), axis=-1)
    return alpha @ v, alpha


def self_attend(head: HeadParams, sequence: Tensor, causal: bool = False) -> Tensor:
    z, _ = attend(head, sequence, sequence, causal=causal)
    return z


def multi_head(
    mh: MultiHeadParams, query_seq: Tensor, key_seq: Tensor, causal: bool = False
) -> tuple[Tensor, list[Tensor]]:
    """Concatenated per-head outputs through the output projection."""
    outputs, alphas = [], []
    for head in mh.heads:
        z, alpha = attend(head, query_seq, key_seq, causal=causal)
        outputs.append(z)
        alphas.append(alpha)
    return ad.concat(outputs, axis=1) @ mh.W_o, alphas


def layer_norm(params: LayerNormParams, x: Tensor) -> Tensor:
    mu = ad.mean(x, axis=1, keepdims=True)
    centered = x - mu
    var = ad.mean(centered * centered, axis=1, keepdims=True)
    return (centered / ad.sqrt(var + LAYER_NORM_EPS)) * params.gamma + params.beta


def feed_forward(params: FeedForwardParams, x: Tensor) -> Tensor:
    return ad.relu(x @ params.W1 + params.b1) @ params.W2 + params.b2


# --- stacks -----------------------------------------------------------------


def _apply_positions(
    embedded: Tensor, kind: str, projection: Tensor | None
) -> Tensor:
    if kind == "none":
        return embedded
    table = Tensor(positional_encoding(embedded.shape[0], embedded.shape[1]))
    if kind == "add":
        return embedded + table
    return ad.concat([embedded, table], axis=1) @ projection


def _sublayer(x: Tensor, sub_out: Tensor, norm: LayerNormParams, use_norm: bool) -> Tensor:
    y = x + sub_out
    return layer_norm(norm, y) if use_norm else y


def embed_source(model: TransformerModel, src_ids: Sequence[int]) -> Tensor:
    if len(src_ids) == 0:
        raise EmptySentenceError("cannot encode an empty sentence")
    embedded = ad.embedding_lookup(model.src_embed, list(src_ids))
    return _apply_positions(
        embedded, model.config.positional_kind, model.pos_proj_src
    )


def embed_target(model: TransformerModel, tgt_ids: Sequence[int]) -> Tensor:
    embedded = ad.embedding_lookup(model.tgt_embed, list(tgt_ids))
    return _apply_positions(
        embedded, model.config.positional_kind, model.pos_proj_tgt
    )


def encoder_stack(model: TransformerModel, src_ids: Sequence[int]) -> Tensor:
    """Source ids to contextualized states; zero layers leave embeddings as is."""
    use_norm = model.config.use_layer_norm
    x = embed_source(model, src_ids)
    for layer in model.enc_layers:
        attn_out, _ = multi_head(layer.self_attn, x, x)
        x = _sublayer(x, attn_out, layer.norm1, use_norm)
        x = _sublayer(x, feed_forward(layer.ff, x), layer.norm2, use_norm)
    return x


def decoder_stack(
    model: TransformerModel, enc_out: Tensor, tgt_input_ids: Sequence[int]
) -> tuple[Tensor, list[Tensor]]:
    """Causally masked decode of the gold-forced inputs against encoder states.

    Returns per-position vocabulary logits and the final layer's
    encoder-decoder attention rows, one matrix per head.
    """
    use_norm = model.config.use_layer_norm
    x = embed_target(model, tgt_input_ids)
    cross_alphas: list[Tensor] = []
    for layer in model.dec_layers:
        attn_out, _ = multi_head(layer.self_attn, x, x, causal=True)
        x = _sublayer(x, attn_out, layer.norm1, use_norm)
        attn_out, cross_alphas = multi_head(layer.cross_attn, x, enc_out)
        x = _sublayer(x, attn_out, layer.norm2, use_norm)
        x = _sublayer(x, feed_forward(layer.ff, x), layer.norm3, use_norm)
    return x @ model.out_W + model.out_b, cross_alphas


def _mean_cross_attention(cross_alphas: list[Tensor]) -> np.ndarray:
    if not cross_alphas:
        return np.zeros((0, 0))
    return np.mean([a.data for a in cross_alphas], axis=0)


def forward_loss(
    model: TransformerModel,
    src_ids: Sequence[int],
    tgt_ids: Sequence[int],
    reduction: str = "mean",
) -> Tensor:
    """Teacher-forced negative log-likelihood of the pair, EOS included."""
    if len(src_ids) != len(tgt_ids):
        raise DataError(
            f"source/target token counts differ: {len(src_ids)} vs {len(tgt_ids)}"
        )
    enc_out = encoder_stack(model, src_ids)
    logits, _ = decoder_stack(model, enc_out, [BOS, *tgt_ids])
    return ad.nll_loss(logits, [*tgt_ids, EOS], reduction=reduction)


def forward_attention(
    model: TransformerModel, src_ids: Sequence[int], tgt_ids: Sequence[int]
):
    """Head-averaged final-layer cross-attention under teacher forcing."""
    from .rnn_seq2seq import AttentionMatrix

    enc_out = encoder_stack(model, src_ids)
    _, cross = decoder_stack(model, enc_out, [BOS, *tgt_ids])
    return AttentionMatrix(_mean_cross_attention(cross))


def greedy_decode(
    model: TransformerModel, src_ids: Sequence[int], max_len: int | None = None
):
    """Argmax decoding until EOS or the length cap 2*T_x + 5.

    The prefix is re-decoded each step; the attention row recorded for a
    step is the head-averaged final-layer cross-attention at that position.
    """
    from .rnn_seq2seq import AttentionMatrix

    if max_len is None:
        max_len = 2 * len(src_ids) + 5
    enc_out = encoder_stack(model, src_ids)
    out: list[int] = []
    attn_rows: list[np.ndarray] = []
    for _ in range(max_len):
        logits, cross = decoder_stack(model, enc_out, [BOS, *out])
        attn_rows.append(_mean_cross_attention(cross)[-1])
        token = int(np.argmax(logits.data[-1]))
        if token == EOS:
            break
        out.append(token)
    return out, AttentionMatrix(np.asarray(attn_rows))
