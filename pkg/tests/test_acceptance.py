"""End-to-end acceptance suite.

One test per headline capability, each self-contained and budgeted:
run with -v to get a single pass/fail line per capability.
"""

import math
import socket
import time

import numpy as np
import pytest

from splitcomp.bench import (
    KIND_LC,
    KIND_OURS,
    KIND_SC,
    Message,
    encoder_fraction,
    enumerate_configs,
    evaluate,
    plan,
)
from splitcomp.codec import (
    EntropyModel,
    decode_latent,
    encode_latent,
    nll_and_grads,
)
from splitcomp.codec.quantizer import hard_round
from splitcomp.cost import (
    ChannelProfile,
    DeviceProfile,
    PowerTrace,
    load_device_profile,
    simpson_energy,
)
from splitcomp.losses import (
    DistillationPair,
    KdConfig,
    PolyLrSchedule,
    kd_loss,
    poly_lr,
    pretrain_loss,
)
from splitcomp.model import TASKS, SplitModel
from splitcomp.net import RateShaper, SplitServer, client_infer, echo_latent
from splitcomp.net import wire
from splitcomp.prng import Prng
from splitcomp.tensor import log_softmax

import dataclasses
import pathlib

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def _budget(t0, limit):
    assert time.perf_counter() - t0 < limit


def test_01_encoder_size_fraction_extremes():
    t0 = time.perf_counter()
    lc = [c for c in enumerate_configs() if c.kind == KIND_LC]
    assert len(lc) == 24
    fracs = [encoder_fraction(c, mb) for c in lc for mb in (0.543, 0.935)]
    assert abs(min(fracs) - 0.268) <= 0.005
    assert abs(max(fracs) - 2.29) <= 0.005
    _budget(t0, 1.0)


def test_02_configuration_matrix_fidelity():
    t0 = time.perf_counter()
    configs = enumerate_configs()
    by_kind = {}
    for c in configs:
        by_kind.setdefault(c.kind, []).append(c)
    assert len(by_kind[KIND_LC]) == 24
    assert len(by_kind[KIND_SC]) == 6
    assert len(by_kind[KIND_OURS]) == 10
    assert [c.beta for c in by_kind[KIND_SC][:5]] == [0.32, 0.64, 1.28,
                                                      2.56, 5.12]
    assert [c.beta for c in by_kind[KIND_OURS]] == [0.32, 1.28, 5.12, 10.24,
                                                    20.48] * 2
    assert by_kind[KIND_LC][0].members == (1, 5, 8)
    _budget(t0, 1.0)


def test_03_codec_lossless_10000_roundtrips_with_rate_bound():
    t0 = time.perf_counter()
    rng = Prng(31337)
    for trial in range(10_000):
        c = int(rng.integers(1, 1, 16)[0])
        if trial % 50 == 0:
            h = int(rng.integers(1, 1, 32)[0])
            w = int(rng.integers(1, 1, 32)[0])
        else:
            h = int(rng.integers(1, 1, 12)[0])
            w = int(rng.integers(1, 1, 12)[0])
        model = EntropyModel(rng.uniform(c, -3.0, 3.0),
                             rng.uniform(c, -1.0, 2.0))
        z = rng.integers(c * h * w, -30, 30).reshape(c, h, w)
        if trial % 10 == 0 and z.size:
            z.flat[int(rng.integers(1, 0, z.size - 1)[0])] = 5000
        stream = encode_latent(z, model)
        back = decode_latent(stream, model)
        assert np.array_equal(back, z), trial
        est_bits = model.rate_bits(z)
        assert 8 * len(stream.payload) <= est_bits + 64 + 0.02 * est_bits, \
            trial
    _budget(t0, 60.0)


def test_04_analytic_gradients_match_central_differences():
    t0 = time.perf_counter()
    rng = Prng(404)
    c = 6
    model = EntropyModel(rng.uniform(c, -2.0, 2.0),
                         rng.uniform(c, -0.5, 1.5))
    pairs = DistillationPair([rng.uniform(10, -1.0, 1.0)],
                             [rng.uniform(10, -1.0, 1.0)])
    y = rng.uniform(c * 9, -6.0, 6.0).reshape(c, 3, 3)
    beta = 0.7
    _, grad = pretrain_loss(pairs, y, model, beta)
    eps = 1e-5
    for _ in range(100):
        idx = tuple(int(rng.integers(1, 0, s - 1)[0]) for s in y.shape)
        up, down = y.copy(), y.copy()
        up[idx] += eps
        down[idx] -= eps
        fd = (pretrain_loss(pairs, up, model, beta)[0]
              - pretrain_loss(pairs, down, model, beta)[0]) / (2 * eps)
        assert abs(grad[idx] - fd) <= 1e-4 * max(1.0, abs(fd)), idx

    symbols = rng.integers(c * 200, -10, 10).reshape(c, 200)
    mu = rng.uniform(c, -2.0, 2.0)
    logs = rng.uniform(c, -0.5, 1.5)
    _, g_mu, g_logs = nll_and_grads(symbols, mu, logs)
    for k in range(100):
        ch = k % c
        for vec, grad_vec in ((mu, g_mu), (logs, g_logs)):
            up, down = vec.copy(), vec.copy()
            up[ch] += eps
            down[ch] -= eps
            if vec is mu:
                a = nll_and_grads(symbols, up, logs)[0]
                b = nll_and_grads(symbols, down, logs)[0]
            else:
                a = nll_and_grads(symbols, mu, up)[0]
                b = nll_and_grads(symbols, mu, down)[0]
            fd = (a - b) / (2 * eps)
            assert abs(grad_vec[ch] - fd) <= 1e-4 * max(1.0, abs(fd)), (k, ch)
    _budget(t0, 30.0)


def test_05_energy_integration_exactness():
    t0 = time.perf_counter()
    times = np.linspace(0.0, 2.0, 9)
    flat = PowerTrace(times, np.full(9, 5.0))
    assert simpson_energy(flat) == 10.0

    times = np.linspace(0.0, 1.0, 3)
    quad = PowerTrace(times, times ** 2)
    assert simpson_energy(quad) == pytest.approx(1.0 / 3.0, rel=1e-12)

    times = np.linspace(0.0, 1.0, 5)
    cubic = PowerTrace(times, times ** 3)
    assert simpson_energy(cubic) == pytest.approx(0.25, rel=1e-12)
    _budget(t0, 1.0)


def test_06_plan_shape_invariants():
    t0 = time.perf_counter()
    expect = {KIND_LC: (0, 0), KIND_SC: (3, 3), KIND_OURS: (1, 1)}
    for config in enumerate_configs():
        p = plan(config)
        msgs, encs = expect[config.kind]
        assert p.uplink_message_count == msgs, config.id
        assert p.local_encoder_runs == encs, config.id
        if config.kind == KIND_OURS:
            assert len(p.server_inferences) == 1
            names = [s.name for s in p.server_inferences[0].stages]
            assert names.count("decoder_backbone") == 1
            assert names == ["decoder_backbone", "head_classify",
                             "head_detect", "head_segment"]
    _budget(t0, 1.0)


def _rand_profiles(rng):
    mobile = DeviceProfile(
        name="m", throughput={"cpu": float(rng.uniform(1, 2.0, 40.0)[0]),
                              "gpu": float(rng.uniform(1, 20.0, 200.0)[0])},
        idle_power_w=float(rng.uniform(1, 0.5, 10.0)[0]),
        power_coef=float(rng.uniform(1, 0.01, 0.5)[0]),
        overhead_s=float(rng.uniform(1, 0.0, 0.05)[0]))
    server = DeviceProfile(
        name="s", throughput={"cpu": float(rng.uniform(1, 10.0, 100.0)[0]),
                              "gpu": float(rng.uniform(1, 50.0, 500.0)[0])},
        idle_power_w=float(rng.uniform(1, 1.0, 20.0)[0]),
        power_coef=float(rng.uniform(1, 0.01, 0.2)[0]),
        overhead_s=float(rng.uniform(1, 0.0, 0.02)[0]))
    return mobile, server


def _equal_payloads(base, nbytes):
    msgs = tuple(Message(m.name, nbytes) for m in base.messages)
    return dataclasses.replace(base, messages=msgs)


def test_07_multitask_latency_ordering_and_saving_direction():
    t0 = time.perf_counter()
    rng = Prng(777)
    sc_base = plan(next(c for c in enumerate_configs()
                        if c.kind == KIND_SC))
    ours_base = plan(next(c for c in enumerate_configs()
                          if c.kind == KIND_OURS))
    fast, slow = ChannelProfile(1e5), ChannelProfile(37_500.0)
    qualifying = 0
    for trial in range(100):
        mobile, server = _rand_profiles(rng)
        nbytes = int(rng.uniform(1, 1_000, 100_000)[0])
        sc_p = _equal_payloads(sc_base, nbytes)
        ours_p = _equal_payloads(ours_base, nbytes)
        sc_f = evaluate(sc_p, mobile, server, fast)
        ours_f = evaluate(ours_p, mobile, server, fast)
        assert ours_f.latency_s < sc_f.latency_s, trial
        if sc_f.latency_tx_s > 0.5 * sc_f.latency_s:
            sc_s = evaluate(sc_p, mobile, server, slow)
            ours_s = evaluate(ours_p, mobile, server, slow)
            saving_fast = 1.0 - ours_f.latency_s / sc_f.latency_s
            saving_slow = 1.0 - ours_s.latency_s / sc_s.latency_s
            assert saving_slow >= saving_fast - 1e-12, trial
            qualifying += 1
    assert qualifying >= 10
    _budget(t0, 5.0)


def test_08_channel_isolation_and_exact_uplink_scaling():
    t0 = time.perf_counter()
    mobile = load_device_profile(FIXTURES / "jetson_nano.json")
    server = load_device_profile(FIXTURES / "laptop.json")
    fast, slow = ChannelProfile(1e5), ChannelProfile(37_500.0)
    for config in enumerate_configs():
        p = plan(config)
        a = evaluate(p, mobile, server, fast)
        b = evaluate(p, mobile, server, slow)
        if config.kind == KIND_LC:
            assert a == b, config.id
        else:
            assert math.isclose(b.latency_tx_s, a.latency_tx_s * (8 / 3),
                                rel_tol=1e-12), config.id
    _budget(t0, 5.0)


def test_09_loopback_inference_with_shaped_uplink():
    t0 = time.perf_counter()
    wide = EntropyModel(np.zeros(16), np.full(16, np.log(58.0)), model_id=1)
    model = SplitModel({"input_hw": [224, 216]}, entropy_model=wide)
    rng = Prng(2024)
    symbols = rng.integers(16 * 28 * 27, -100, 100).reshape(16, 28, 27)
    symbols = symbols.astype(np.float64)
    payload = len(encode_latent(symbols, wide).to_bytes())
    assert 11_900 <= payload <= 13_100, payload

    with SplitServer(model) as server:
        shaper = RateShaper(100_000.0)
        preds, timing = client_infer(server.address, None, set(TASKS),
                                     model, shaper=shaper, symbols=symbols)
        assert abs(timing.tx_s - 1.0) <= 0.10, timing.tx_s

        echoed = echo_latent(server.address, symbols, wide)
        np.testing.assert_array_equal(echoed, symbols.astype(np.int64))

        local_preds, _ = model.tail(symbols, set(TASKS))
        oracle = wire.parse_predictions(
            wire.serialize_predictions(local_preds), 0x07)
        assert preds["classify"] == oracle["classify"]
        assert preds["detect"] == oracle["detect"]
        np.testing.assert_array_equal(preds["segment"], oracle["segment"])
    _budget(t0, 30.0)


def test_10_training_loss_reductions():
    t0 = time.perf_counter()
    rng = Prng(10)
    student = rng.uniform(12, -3.0, 3.0)
    teacher = rng.uniform(12, -3.0, 3.0)
    label = 4
    ce = -log_softmax(student)[label]
    full = kd_loss(student, teacher, label, KdConfig(alpha=1.0, tau=2.5))
    assert abs(full - ce) <= 1e-12

    same = kd_loss(student, student, label, KdConfig(alpha=0.0, tau=3.0))
    assert same == pytest.approx(0.0, abs=1e-12)

    pairs = DistillationPair([rng.uniform(6, -1.0, 1.0) for _ in range(3)],
                             [rng.uniform(6, -1.0, 1.0) for _ in range(3)])
    sse = sum(float(np.sum((t - s) ** 2))
              for t, s in zip(pairs.teacher, pairs.student))
    model = EntropyModel(np.zeros(4), np.zeros(4))
    y = rng.uniform(4 * 4, -2.0, 2.0).reshape(4, 2, 2)
    loss, _ = pretrain_loss(pairs, y, model, beta=0.0)
    assert loss == pytest.approx(sse, rel=1e-12)

    sched = PolyLrSchedule(eta0=0.02, n_iter=7000)
    assert poly_lr(sched, 0) == 0.02
    assert poly_lr(sched, 7000) == 0.0
    _budget(t0, 1.0)


def _mutate(data: bytes, rng: Prng, mode: int) -> bytes:
    raw = bytearray(data)
    if mode == 0:
        raw[int(rng.integers(1, 0, 3)[0])] ^= 0xFF
    elif mode == 1:
        raw[4] = int(rng.integers(1, 3, 255)[0])
    elif mode == 2:
        raw[6:10] = int(wire.MAX_PAYLOAD + 1
                        + rng.integers(1, 0, 1000)[0]).to_bytes(4, "big")
    elif mode == 3:
        raw[10 + int(rng.integers(1, 0, 6)[0])] ^= 0xFF
    else:
        raw[5] = 0
    return bytes(raw)


def test_11_server_survives_10k_fuzzed_frames():
    t0 = time.perf_counter()
    model = SplitModel({"input_hw": [32, 32]})
    rng = Prng(1234)
    image = rng.uniform(3 * 32 * 32, 0.0, 255.0).reshape(3, 32, 32)
    symbols = hard_round(model.encode(image))
    stream = encode_latent(np.asarray(symbols), model.entropy_model)
    base = wire.pack_frame(wire.Frame(wire.MSG_REQUEST, 0x07,
                                      stream.to_bytes()))
    with SplitServer(model) as server:
        rejected = 0
        for i in range(10_000):
            mutated = _mutate(base, rng, i % 5)
            with socket.create_connection(server.address,
                                          timeout=10.0) as sock:
                sock.sendall(mutated)
                sock.shutdown(socket.SHUT_WR)
                with sock.makefile("rb") as fh:
                    saw_error, saw_response = False, False
                    while True:
                        try:
                            frame = wire.read_frame(fh)
                        except Exception:
                            break
                        if frame.msg_type == wire.MSG_ERROR:
                            saw_error = True
                        else:
                            saw_response = True
            assert not saw_response, i
            if saw_error:
                rejected += 1
        assert rejected == 10_000
        assert server.running
        preds, _ = client_infer(server.address, image, {"classify"}, model)
        assert "classify" in preds
    _budget(t0, 60.0)
