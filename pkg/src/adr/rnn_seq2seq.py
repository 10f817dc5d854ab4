"""Bidirectional recurrent encoder with an attentive recurrent decoder.

The encoder runs a forward and a backward RNN over the source and
concatenates their states per position. At every decoder step an attention
row over those states is computed from the previous decoder state, the
resulting context vector joins the input of the state update, and an
affine readout maps the new state (plus context, by default) to target
vocabulary logits.

Cells come in GRU and LSTM flavors with one weight matrix per gate.
Attention scores come in a bilinear dot flavor and an additive
single-hidden-layer flavor. Sequences are rows: a state is a (1, hidden)
matrix and a sentence of length T passes through as T such rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import DataError, EmptySentenceError
from .rng import SplitMix64
from .vocab import BOS, EOS

GATES = {"gru": ("z", "r", "n"), "lstm": ("i", "f", "o", "g")}


@dataclass
class RnnCellParams:
    """Per-gate weights of one recurrent cell.

    For each gate name g the dict holds ``W_g`` (input_dim, hidden_dim),
    ``U_g`` (hidden_dim, hidden_dim) and ``b_g`` (hidden_dim,).
    """

    cell_kind: str
    input_dim: int
    hidden_dim: int
    weights: dict[str, Tensor] = field(repr=False)


@dataclass
class AttentionParams:
    score_kind: str
    W_d: Tensor
    W_e: Tensor
    v_a: Tensor | None = None


@dataclass(frozen=True)
class EncoderStates:
    """Concatenated bidirectional states, one (2*hidden)-sized row per token."""

    states: Tensor
    backward_finals: tuple[Tensor, ...]

    def __len__(self) -> int:
        return self.states.shape[0]


@dataclass(frozen=True)
class AttentionMatrix:
    """Row i holds the attention weights used when emitting output i."""

    weights: np.ndarray

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape


@dataclass(frozen=True)
class Seq2SeqConfig:
    src_vocab_size: int
    tgt_vocab_size: int
    cell_kind: str = "gru"
    score_kind: str = "dot"
    num_layers: int = 1
    embed_dim: int = 64
    hidden_dim: int = 64
    attn_dim: int = 64
    include_context_in_logits: bool = True

    def __post_init__(self):
        if self.cell_kind not in GATES:
            raise ValueError(f"unknown cell kind {self.cell_kind!r}")
        if self.score_kind not in ("dot", "add"):
            raise ValueError(f"unknown attention kind {self.score_kind!r}")


@dataclass
class Seq2SeqModel:
    config: Seq2SeqConfig
    src_embed: Tensor
    tgt_embed: Tensor
    enc_fwd: list[RnnCellParams]
    enc_bwd: list[RnnCellParams]
    dec_cells: list[RnnCellParams]
    init_maps: list[tuple[Tensor, Tensor]]
    attention: AttentionParams
    out_W: Tensor
    out_b: Tensor


def new_cell(cell_kind: str, input_dim: int, hidden_dim: int, rng: SplitMix64) -> RnnCellParams:
    weights: dict[str, Tensor] = {}
    for gate in GATES[cell_kind]:
        weights[f"W_{gate}"] = ad.glorot((input_dim, hidden_dim), rng)
        weights[f"U_{gate}"] = ad.glorot((hidden_dim, hidden_dim), rng)
        weights[f"b_{gate}"] = ad.zeros((hidden_dim,))
    return RnnCellParams(cell_kind, input_dim, hidden_dim, weights)


def cell_zero_state(cell: RnnCellParams) -> tuple[Tensor, ...]:
    h = Tensor(np.zeros((1, cell.hidden_dim)))
    if cell.cell_kind == "lstm":
        return (h, Tensor(np.zeros((1, cell.hidden_dim))))
    return (h,)


def cell_step(cell: RnnCellParams, x: Tensor, state: tuple[Tensor, ...]) -> tuple[Tensor, ...]:
    """One recurrence update; ``state[0]`` is always the emitted hidden row."""
    w = cell.weights
    if cell.cell_kind == "gru":
        (h,) = state
        z = ad.sigmoid(x @ w["W_z"] + h @ w["U_z"] + w["b_z"])
        r = ad.sigmoid(x @ w["W_r"] + h @ w["U_r"] + w["b_r"])
        n = ad.tanh(x @ w["W_n"] + (r * h) @ w["U_n"] + w["b_n"])
        return ((1.0 - z) * n + z * h,)
    h, c = state
    i = ad.sigmoid(x @ w["W_i"] + h @ w["U_i"] + w["b_i"])
    f = ad.sigmoid(x @ w["W_f"] + h @ w["U_f"] + w["b_f"])
    o = ad.sigmoid(x @ w["W_o"] + h @ w["U_o"] + w["b_o"])
    g = ad.tanh(x @ w["W_g"] + h @ w["U_g"] + w["b_g"])
    c_new = f * c + i * g
    return (o * ad.tanh(c_new), c_new)


def build_seq2seq(config: Seq2SeqConfig, rng: SplitMix64) -> Seq2SeqModel:
    """Fresh model with Glorot-uniform weights and zero biases."""
    c = config
    enc_fwd, enc_bwd, dec_cells, init_maps = [], [], [], []
    for layer in range(c.num_layers):
        enc_in = c.embed_dim if layer == 0 else 2 * c.hidden_dim
        enc_fwd.append(new_cell(c.cell_kind, enc_in, c.hidden_dim, rng))
        enc_bwd.append(new_cell(c.cell_kind, enc_in, c.hidden_dim, rng))
        dec_in = c.embed_dim + 2 * c.hidden_dim if layer == 0 else c.hidden_dim
        dec_cells.append(new_cell(c.cell_kind, dec_in, c.hidden_dim, rng))
        init_maps.append((ad.glorot((c.hidden_dim, c.hidden_dim), rng),
                          ad.zeros((c.hidden_dim,))))
    attention = AttentionParams(
        score_kind=c.score_kind,
        W_d=ad.glorot((c.hidden_dim, c.attn_dim), rng),
        W_e=ad.glorot((2 * c.hidden_dim, c.attn_dim), rng),
        v_a=ad.glorot((c.attn_dim, 1), rng) if c.score_kind == "add" else None,
    )
    out_in = c.hidden_dim + (2 * c.hidden_dim if c.include_context_in_logits else 0)
    return Seq2SeqModel(
        config=c,
        src_embed=ad.glorot((c.src_vocab_size, c.embed_dim), rng),
        tgt_embed=ad.glorot((c.tgt_vocab_size, c.embed_dim), rng),
        enc_fwd=enc_fwd,
        enc_bwd=enc_bwd,
        dec_cells=dec_cells,
        init_maps=init_maps,
        attention=attention,
        out_W=ad.glorot((out_in, c.tgt_vocab_size), rng),
        out_b=ad.zeros((c.tgt_vocab_size,)),
    )


def parameters(model: Seq2SeqModel) -> dict[str, Tensor]:
    """Flat name-to-tensor view in a stable order, for the optimizer and checkpoints."""
    params: dict[str, Tensor] = {
        "src_embed": model.src_embed,
        "tgt_embed": model.tgt_embed,
    }
    for layer in range(model.config.num_layers):
        for prefix, cell in (
            (f"enc.{layer}.fwd", model.enc_fwd[layer]),
            (f"enc.{layer}.bwd", model.enc_bwd[layer]),
            (f"dec.{layer}", model.dec_cells[layer]),
        ):
            for key, tensor in cell.weights.items():
                params[f"{prefix}.{key}"] = tensor
        params[f"init.{layer}.W"] = model.init_maps[layer][0]
        params[f"init.{layer}.b"] = model.init_maps[layer][1]
    params["attn.W_d"] = model.attention.W_d
    params["attn.W_e"] = model.attention.W_e
    if model.attention.v_a is not None:
        params["attn.v_a"] = model.attention.v_a
    params["out.W"] = model.out_W
    params["out.b"] = model.out_b
    return params


# --- encoder ----------------------------------------------------------------


def encode(model: Seq2SeqModel, src_ids: Sequence[int]) -> EncoderStates:
    """Run both directions over the source and concatenate states per position."""
    if len(src_ids) == 0:
        raise EmptySentenceError("cannot encode an empty sentence")
    rows: list[Tensor] = [
        ad.embedding_lookup(model.src_embed, [i]) for i in src_ids
    ]
    backward_finals: list[Tensor] = []
    for layer in range(model.config.num_layers):
        fwd_cell, bwd_cell = model.enc_fwd[layer], model.enc_bwd[layer]
        state = cell_zero_state(fwd_cell)
        fwd: list[Tensor] = []
        for x in rows:
            state = cell_step(fwd_cell, x, state)
            fwd.append(state[0])
        state = cell_zero_state(bwd_cell)
        bwd: list[Tensor] = []
        for x in reversed(rows):
            state = cell_step(bwd_cell, x, state)
            bwd.append(state[0])
        bwd.reverse()
        backward_finals.append(bwd[0])
        rows = [ad.concat([f, b], axis=1) for f, b in zip(fwd, bwd)]
    return EncoderStates(
        states=ad.concat(rows, axis=0), backward_finals=tuple(backward_finals)
    )


def init_decoder_state(
    model: Seq2SeqModel, enc: EncoderStates
) -> tuple[tuple[Tensor, ...], ...]:
    """Per-layer start state mapped from that layer's final backward encoder state."""
    layers = []
    for layer, (W, b) in enumerate(model.init_maps):
        h0 = ad.tanh(enc.backward_finals[layer] @ W + b)
        if model.config.cell_kind == "lstm":
            layers.append((h0, Tensor(np.zeros((1, model.config.hidden_dim)))))
        else:
            layers.append((h0,))
    return tuple(layers)


# --- attention --------------------------------------------------------------


def attention_scores(
    att: AttentionParams, decoder_state: Tensor, encoder_states: EncoderStates
) -> Tensor:
    """One normalized attention row (1, T_x) for the given decoder state."""
    proj_d = decoder_state @ att.W_d
    proj_e = encoder_states.states @ att.W_e
    if att.score_kind == "dot":
        scores = proj_d @ ad.transpose(proj_e)
    else:
        hidden = ad.tanh(proj_d + proj_e)
        scores = ad.reshape(hidden @ att.v_a, (1, len(encoder_states)))
    return ad.softmax(scores, axis=-1)


def context_vector(alpha_row: Tensor, encoder_states: EncoderStates) -> Tensor:
    return alpha_row @ encoder_states.states


# --- decoder ----------------------------------------------------------------


def decode_step(
    model: Seq2SeqModel,
    prev_token: int,
    state: tuple[tuple[Tensor, ...], ...],
    context: Tensor,
) -> tuple[Tensor, tuple[tuple[Tensor, ...], ...]]:
    """Advance the decoder one position and produce vocabulary logits."""
    x = ad.concat(
        [ad.embedding_lookup(model.tgt_embed, [prev_token]), context], axis=1
    )
    new_state = []
    for cell, layer_state in zip(model.dec_cells, state):
        layer_new = cell_step(cell, x, layer_state)
        new_state.append(layer_new)
        x = layer_new[0]
    if model.config.include_context_in_logits:
        x = ad.concat([x, context], axis=1)
    logits = x @ model.out_W + model.out_b
    return logits, tuple(new_state)


def _teacher_forced_rows(
    model: Seq2SeqModel, src_ids: Sequence[int], tgt_ids: Sequence[int]
) -> tuple[list[Tensor], list[Tensor], list[int]]:
    """Logit rows and attention rows for gold-forced decoding of one pair."""
    enc = encode(model, src_ids)
    state = init_decoder_state(model, enc)
    inputs = [BOS, *tgt_ids]
    targets = [*tgt_ids, EOS]
    logit_rows: list[Tensor] = []
    attn_rows: list[Tensor] = []
    for prev in inputs:
        alpha = attention_scores(model.attention, state[-1][0], enc)
        context = context_vector(alpha, enc)
        logits, state = decode_step(model, prev, state, context)
        logit_rows.append(logits)
        attn_rows.append(alpha)
    return logit_rows, attn_rows, targets


def forward_loss(
    model: Seq2SeqModel,
    src_ids: Sequence[int],
    tgt_ids: Sequence[int],
    reduction: str = "mean",
) -> Tensor:
    """Teacher-forced negative log-likelihood of the pair, EOS included.

    ``mean`` normalizes by the number of predicted positions, so a uniform
    output layer scores log(vocab) regardless of sentence length.
    """
    if len(src_ids) != len(tgt_ids):
        raise DataError(
            f"source/target token counts differ: {len(src_ids)} vs {len(tgt_ids)}"
        )
    logit_rows, _, targets = _teacher_forced_rows(model, src_ids, tgt_ids)
    return ad.nll_loss(ad.concat(logit_rows, axis=0), targets, reduction=reduction)


def forward_attention(
    model: Seq2SeqModel, src_ids: Sequence[int], tgt_ids: Sequence[int]
) -> AttentionMatrix:
    """Attention rows under teacher forcing, one per predicted position."""
    _, attn_rows, _ = _teacher_forced_rows(model, src_ids, tgt_ids)
    return AttentionMatrix(np.concatenate([a.data for a in attn_rows], axis=0))


def greedy_decode(
    model: Seq2SeqModel, src_ids: Sequence[int], max_len: int | None = None
) -> tuple[list[int], AttentionMatrix]:
    """Argmax decoding until EOS or the length cap 2*T_x + 5.

    Returns emitted ids (EOS excluded) and one attention row per step taken,
    including the step that produced EOS. Argmax ties go to the lowest id.
    """
    if max_len is None:
        max_len = 2 * len(src_ids) + 5
    enc = encode(model, src_ids)
    state = init_decoder_state(model, enc)
    prev = BOS
    out: list[int] = []
    attn_rows: list[np.ndarray] = []
    for _ in range(max_len):
        alpha = attention_scores(model.attention, state[-1][0], enc)
        context = context_vector(alpha, enc)
        logits, state = decode_step(model, prev, state, context)
        attn_rows.append(alpha.data[0])
        token = int(np.argmax(logits.data[0]))
        if token == EOS:
            break
        out.append(token)
        prev = token
    return out, AttentionMatrix(np.asarray(attn_rows))
