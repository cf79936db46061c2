"""Toy split vision model: encoder on the client, everything after the
latent on the server, three task heads sharing one backbone pass.

The architecture is deliberately small but structurally faithful: a
unified preprocessing step feeds a strided conv encoder that ends in a
C-channel latent at 1/2^n resolution; the latent is hard-rounded (that
is what travels over the wire); a conv decoder restores features for a
shared conv backbone; classification, detection, and segmentation heads
each consume the single backbone output.  Weights are seeded from a
documented PRNG stream so any two builds from the same config are
bit-identical.

Config schema and the init scheme live in docs/MODEL.md.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .codec.entropy_model import EntropyModel
from .codec.quantizer import hard_round
from .errors import ConfigError, DimensionError, ModelMismatchError, TaskError
from .prng import Prng
from .tensor import (
    Tensor,
    as_tensor,
    conv2d,
    global_avg_pool,
    linear,
    relu,
)

TASK_CLASSIFY = "classify"
TASK_DETECT = "detect"
TASK_SEGMENT = "segment"
TASKS = (TASK_CLASSIFY, TASK_DETECT, TASK_SEGMENT)

DEFAULT_CONFIG = {
    "seed": 2024,
    "input_hw": [64, 64],
    "encoder_channels": [8, 12, 16],
    "decoder_channels": [16, 16],
    "backbone_channels": [16, 16],
    "num_classes": 10,
    "seg_classes": 21,
    "detect_top_k": 3,
    "entropy_model_id": 1,
}


@dataclass(frozen=True)
class ConvLayer:
    weights: Tensor
    bias: Tensor
    stride: int
    padding: int
    act: bool


@dataclass(frozen=True)
class SplitResult:
    """One split inference: the quantized latent that crossed the wire,
    per-task predictions, and stage execution counters."""

    latent: Tensor
    predictions: dict
    counters: dict


def _init_conv(g: Prng, in_ch: int, out_ch: int, k: int, stride: int,
               padding: int, act: bool, bias_spread: float = 0.0) -> ConvLayer:
    fan_in = in_ch * k * k
    bound = fan_in ** -0.5
    w = g.uniform(out_ch * in_ch * k * k, -bound, bound).reshape(
        out_ch, in_ch, k, k)
    if bias_spread:
        b = g.uniform(out_ch, -bias_spread, bias_spread)
    else:
        b = np.zeros(out_ch)
    for arr in (w, b):
        arr.flags.writeable = False
    return ConvLayer(w, b, stride, padding, act)


def _run_stack(x: Tensor, layers) -> Tensor:
    for ly in layers:
        x = conv2d(x, ly.weights, ly.bias, stride=ly.stride,
                   padding=ly.padding)
        if ly.act:
            x = relu(x)
    return x


def _conv_macs(layers, hw):
    total = 0
    h, w = hw
    for ly in layers:
        k_out, _, kh, kw = ly.weights.shape
        h = (h + 2 * ly.padding - kh) // ly.stride + 1
        w = (w + 2 * ly.padding - kw) // ly.stride + 1
        total += k_out * ly.weights.shape[1] * kh * kw * h * w
    return total, (h, w)


class SplitModel:
    """Immutable weights + pure forward passes for both sides of the split."""

    def __init__(self, config: dict | None = None,
                 entropy_model: EntropyModel | None = None):
        cfg = dict(DEFAULT_CONFIG)
        cfg.update(config or {})
        unknown = set(cfg) - set(DEFAULT_CONFIG)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self.config = cfg
        self.input_hw = tuple(int(v) for v in cfg["input_hw"])
        if len(self.input_hw) != 2 or min(self.input_hw) < 8:
            raise ConfigError(f"bad input_hw: {cfg['input_hw']}")
        enc = [int(c) for c in cfg["encoder_channels"]]
        dec = [int(c) for c in cfg["decoder_channels"]]
        bb = [int(c) for c in cfg["backbone_channels"]]
        if not enc or not dec or not bb:
            raise ConfigError("every stage list needs at least one layer")
        self.latent_channels = enc[-1]
        g = Prng(int(cfg["seed"]))

        chans = [3] + enc
        self.encoder = tuple(
            _init_conv(g.substream(100 + i), chans[i], chans[i + 1], 3, 2, 1,
                       act=(i + 1 < len(enc)))
            for i in range(len(enc)))
        chans = [self.latent_channels] + dec
        self.decoder = tuple(
            _init_conv(g.substream(200 + i), chans[i], chans[i + 1], 3, 1, 1,
                       act=True)
            for i in range(len(dec)))
        chans = [dec[-1]] + bb
        self.backbone = tuple(
            _init_conv(g.substream(300 + i), chans[i], chans[i + 1], 3, 1, 1,
                       act=True)
            for i in range(len(bb)))

        feat_ch = bb[-1]
        self.num_classes = int(cfg["num_classes"])
        self.seg_classes = int(cfg["seg_classes"])
        self.detect_top_k = int(cfg["detect_top_k"])
        gh = g.substream(400)
        bound = feat_ch ** -0.5
        w = gh.uniform(self.num_classes * feat_ch, -bound, bound).reshape(
            self.num_classes, feat_ch)
        b = gh.uniform(self.num_classes, -0.5, 0.5)
        for arr in (w, b):
            arr.flags.writeable = False
        self.head_classify = (w, b)
        self.head_detect = _init_conv(g.substream(500), feat_ch, 5, 1, 1, 0,
                                      act=False, bias_spread=0.5)
        self.head_segment = _init_conv(g.substream(600), feat_ch,
                                       self.seg_classes, 1, 1, 0,
                                       act=False, bias_spread=0.5)

        if entropy_model is None:
            entropy_model = EntropyModel(
                np.zeros(self.latent_channels),
                np.zeros(self.latent_channels),
                model_id=int(cfg["entropy_model_id"]))
        if entropy_model.channels != self.latent_channels:
            raise ModelMismatchError(
                f"entropy model has {entropy_model.channels} channels, "
                f"encoder produces {self.latent_channels}")
        self.entropy_model = entropy_model

        # shape-compatibility dry run: latent and head geometry must chain
        self.latent_hw = self._latent_hw(self.input_hw)
        self.downsample = 2 ** len(enc)

    def _latent_hw(self, hw):
        h, w = hw
        for _ in self.encoder:
            h = (h + 2 - 3) // 2 + 1
            w = (w + 2 - 3) // 2 + 1
        if h < 1 or w < 1:
            raise ConfigError(f"input {hw} collapses below 1x1 in the encoder")
        return (h, w)

    def preprocess(self, image: Tensor) -> Tensor:
        """Unified pipeline shared by all tasks: scale to [0, 1]."""
        x = as_tensor(image)
        want = (3,) + self.input_hw
        if x.shape != want:
            raise DimensionError(f"image shape {x.shape}, model wants {want}")
        return x / 255.0

    def encode(self, image: Tensor) -> Tensor:
        """Client half: preprocess then strided convs to the raw latent."""
        return _run_stack(self.preprocess(image), self.encoder)

    def tail(self, z: Tensor, tasks) -> tuple:
        """Server half: decoder, one backbone pass, requested heads.

        Returns (predictions, counters); the decoder and backbone run
        once no matter how many tasks are requested.
        """
        tasks = self._check_tasks(tasks)
        z = as_tensor(z)
        want = (self.latent_channels,) + self.latent_hw
        if z.shape != want:
            raise DimensionError(f"latent shape {z.shape}, model wants {want}")
        counters = {"encoder": 0, "decoder": 1, "backbone": 1}
        recon = _run_stack(z, self.decoder)
        feats = _run_stack(recon, self.backbone)
        preds = {}
        for task in TASKS:
            if task not in tasks:
                continue
            counters[f"head_{task}"] = 1
            if task == TASK_CLASSIFY:
                w, b = self.head_classify
                preds[task] = linear(global_avg_pool(feats), w, b)
            elif task == TASK_DETECT:
                preds[task] = self._detect(feats)
            else:
                preds[task] = self._segment(feats)
        return preds, counters

    def _check_tasks(self, tasks):
        tasks = set(tasks)
        bad = tasks - set(TASKS)
        if bad or not tasks:
            raise TaskError(
                f"unknown or empty task set {sorted(bad) or '{}'}; "
                f"valid tasks: {TASKS}")
        return tasks

    def _detect(self, feats: Tensor):
        ly = self.head_detect
        raw = conv2d(feats, ly.weights, ly.bias)
        _, gh, gw = raw.shape
        h_img, w_img = self.input_hw
        sy, sx = h_img / gh, w_img / gw
        jj, ii = np.meshgrid(np.arange(gw), np.arange(gh))
        cx = (jj + 0.5 + np.tanh(raw[0])) * sx
        cy = (ii + 0.5 + np.tanh(raw[1])) * sy
        bw = np.exp(np.clip(raw[2], -4.0, 4.0)) * sx
        bh = np.exp(np.clip(raw[3], -4.0, 4.0)) * sy
        score = expit(raw[4]).ravel()
        x1 = np.clip(cx - bw / 2, 0, w_img).ravel()
        y1 = np.clip(cy - bh / 2, 0, h_img).ravel()
        x2 = np.clip(cx + bw / 2, 0, w_img).ravel()
        y2 = np.clip(cy + bh / 2, 0, h_img).ravel()
        # stable top-k: score descending, row-major index breaks ties
        order = np.lexsort((np.arange(score.size), -score))
        picks = order[:self.detect_top_k]
        return [((float(x1[i]), float(y1[i]), float(x2[i]), float(y2[i])),
                 float(score[i])) for i in picks]

    def _segment(self, feats: Tensor):
        ly = self.head_segment
        logits = conv2d(feats, ly.weights, ly.bias)
        classes = logits.argmax(axis=0)
        f = self.downsample
        up = np.repeat(np.repeat(classes, f, axis=0), f, axis=1)
        h, w = self.input_hw
        return np.ascontiguousarray(up[:h, :w])

    def stage_macs(self) -> dict:
        """Analytic multiply-accumulate counts per stage at input_hw."""
        enc, hw = _conv_macs(self.encoder, self.input_hw)
        dec, hw2 = _conv_macs(self.decoder, hw)
        bb, hw3 = _conv_macs(self.backbone, hw2)
        cls = self.num_classes * self.head_classify[0].shape[1]
        det, _ = _conv_macs([self.head_detect], hw3)
        seg, _ = _conv_macs([self.head_segment], hw3)
        return {"encoder": enc, "decoder": dec, "backbone": bb,
                "head_classify": cls, "head_detect": det, "head_segment": seg}


def forward_split(model: SplitModel, image: Tensor, tasks) -> SplitResult:
    """Full split pass: encode once, quantize, run the tail once."""
    tasks = model._check_tasks(tasks)
    latent = model.encode(image)
    z = hard_round(latent)
    preds, counters = model.tail(z, tasks)
    counters["encoder"] = 1
    return SplitResult(latent=z, predictions=preds, counters=counters)


def load_model(path, entropy_model: EntropyModel | None = None) -> SplitModel:
    """Build a model from a JSON definition file (docs/MODEL.md)."""
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"model definition is not valid JSON: {e}")
    return SplitModel(cfg, entropy_model=entropy_model)
