"""Command-line entry point.

Subcommands: encode, decode, fit, bench, serve, client, version.
Exit codes: 0 success, 1 runtime failure (diagnostic on stderr), 2 bad
arguments (usage text, from argparse).  All runs are deterministic
given --seed.
"""

from __future__ import annotations

import argparse
import json
import signal
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import enumerate_configs, evaluate, plan, report
from .codec import (
    Bitstream,
    decode_latent,
    encode_latent,
    fit_entropy_model,
    load_entropy_model,
    save_entropy_model,
)
from .cost import ChannelProfile, load_device_profile, parse_rate
from .errors import ConfigError, SplitcompError
from .model import TASKS, SplitModel, load_model
from .net import RateShaper, client_infer, serve
from .prng import Prng


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitcomp",
        description="Split-computing toolkit: latent codec, cost model, "
                    "scenario benchmark, and a client/server runtime.")
    parser.add_argument("--version", action="version",
                        version=f"splitcomp {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("encode", help="compress a latent symbol file",
                       description="Range-code an int64 .npy symbol tensor "
                                   "(channels, height, width) into a "
                                   "bitstream file.")
    p.add_argument("--input", required=True, help="symbol tensor (.npy)")
    p.add_argument("--model", required=True,
                   help="entropy model JSON (see fit)")
    p.add_argument("--output", required=True, help="bitstream file to write")

    p = sub.add_parser("decode", help="decompress a bitstream file",
                       description="Decode a bitstream file back into the "
                                   "int64 .npy symbol tensor; a decode of "
                                   "an encode output is byte-exact.")
    p.add_argument("--input", required=True, help="bitstream file")
    p.add_argument("--model", required=True, help="entropy model JSON")
    p.add_argument("--output", required=True, help="symbol tensor to write")

    p = sub.add_parser("fit", help="fit an entropy model to latents",
                       description="Fit the per-channel logistic prior to a "
                                   ".npy array of latent samples with the "
                                   "channel axis first.")
    p.add_argument("--input", required=True, help="latent samples (.npy)")
    p.add_argument("--output", required=True,
                   help="entropy model JSON to write")
    p.add_argument("--steps", type=int, default=200,
                   help="gradient steps (default 200)")
    p.add_argument("--lr", type=float, default=0.1,
                   help="initial step size (default 0.1)")
    p.add_argument("--model-id", type=int, default=0,
                   help="id embedded in bitstreams (default 0)")

    p = sub.add_parser("bench", help="run the 40-scenario benchmark",
                       description="Evaluate every scenario against device "
                                   "profiles and a channel rate, writing "
                                   "the metrics CSV.")
    p.add_argument("--profiles", required=True,
                   help="directory of device profile JSON files")
    p.add_argument("--mobile", default="jetson_nano",
                   help="mobile profile name (default jetson_nano)")
    p.add_argument("--server", default="laptop",
                   help="server profile name (default laptop)")
    p.add_argument("--channel", default="100kbps",
                   help="uplink rate, e.g. 100kbps or 37.5kbps "
                        "(default 100kbps)")
    p.add_argument("--channel-overhead-bytes", type=int, default=0,
                   help="per-message overhead bytes (default 0)")
    p.add_argument("--local-mode", choices=["cpu", "gpu"], default="cpu",
                   help="mobile execution mode (default cpu)")
    p.add_argument("--server-mode", choices=["cpu", "gpu"], default="gpu",
                   help="server execution mode (default gpu)")
    p.add_argument("--sample-hz", type=float, default=1000.0,
                   help="power trace sampling rate (default 1000)")
    p.add_argument("--warmup", type=int, default=0,
                   help="drop this many leading energy-trace segments "
                        "(default 0)")
    p.add_argument("--out", required=True, help="metrics CSV to write")

    p = sub.add_parser("serve", help="run the split-inference server",
                       description="Serve decoder+backbone+heads over TCP "
                                   "until interrupted.")
    p.add_argument("--host", default="127.0.0.1",
                   help="bind address (default 127.0.0.1)")
    p.add_argument("--port", type=int, default=0,
                   help="bind port, 0 picks a free one (default 0)")
    p.add_argument("--model", default=None,
                   help="model definition JSON (default: built-in)")
    p.add_argument("--seed", type=int, default=0,
                   help="weight seed when no model file is given "
                        "(default 0)")
    p.add_argument("--ready-file", default=None,
                   help="write 'host port' here once listening")

    p = sub.add_parser("client", help="run one split inference",
                       description="Encode an image, send it through the "
                                   "shaped uplink, and print the response "
                                   "summary as JSON.")
    p.add_argument("--host", default="127.0.0.1",
                   help="server address (default 127.0.0.1)")
    p.add_argument("--port", type=int, required=True, help="server port")
    p.add_argument("--image", default=None,
                   help="image .npy (3, H, W); default: synthesized "
                        "from --seed")
    p.add_argument("--tasks", default="classify,detect,segment",
                   help="comma-separated task list (default all three)")
    p.add_argument("--model", default=None,
                   help="model definition JSON (default: built-in)")
    p.add_argument("--seed", type=int, default=0,
                   help="weight/image seed (default 0)")
    p.add_argument("--rate", default=None,
                   help="shape the uplink at this rate, e.g. 37.5kbps "
                        "(default: unshaped)")
    p.add_argument("--include-downlink", action="store_true",
                   help="also shape the response payload")
    p.add_argument("--timeout", type=float, default=60.0,
                   help="response timeout in seconds (default 60)")

    sub.add_parser("version", help="print the package version",
                   description="Print the package version.")
    return parser


def _load_symbols(path) -> np.ndarray:
    z = np.load(path)
    if z.ndim != 3:
        raise ConfigError(f"{path}: symbol tensor must be 3-D, "
                          f"got {z.ndim}-D")
    return z


def _cmd_encode(args) -> int:
    model = load_entropy_model(args.model)
    stream = encode_latent(_load_symbols(args.input), model)
    Path(args.output).write_bytes(stream.to_bytes())
    print(f"wrote {stream.total_bytes} bytes to {args.output}")
    return 0


def _cmd_decode(args) -> int:
    model = load_entropy_model(args.model)
    stream = Bitstream.from_bytes(Path(args.input).read_bytes())
    symbols = decode_latent(stream, model).astype(np.int64)
    np.save(args.output, symbols)
    print(f"wrote symbols {symbols.shape} to {args.output}")
    return 0


def _cmd_fit(args) -> int:
    latents = np.load(args.input)
    model = fit_entropy_model([latents], steps=args.steps, lr=args.lr,
                              model_id=args.model_id)
    save_entropy_model(model, args.output)
    print(f"fit {model.channels}-channel model to {args.output}")
    return 0


def _cmd_bench(args) -> int:
    profiles = Path(args.profiles)
    mobile = load_device_profile(profiles / f"{args.mobile}.json")
    server = load_device_profile(profiles / f"{args.server}.json")
    channel = ChannelProfile(rate_bps=parse_rate(args.channel),
                             overhead_bytes=args.channel_overhead_bytes)
    records = [evaluate(plan(config), mobile, server, channel,
                        mode_local=args.local_mode,
                        mode_server=args.server_mode,
                        sample_hz=args.sample_hz, warmup=args.warmup)
               for config in enumerate_configs()]
    report(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _build_model(args) -> SplitModel:
    if args.model:
        return load_model(args.model)
    return SplitModel({"seed": args.seed})


def _cmd_serve(args) -> int:
    model = _build_model(args)
    server = serve(model, host=args.host, port=args.port)
    host, port = server.address
    if args.ready_file:
        Path(args.ready_file).write_text(f"{host} {port}\n")
    print(f"serving on {host}:{port}", flush=True)
    try:
        signal.sigwait({signal.SIGINT, signal.SIGTERM})
    finally:
        server.stop()
    return 0


def _cmd_client(args) -> int:
    model = _build_model(args)
    tasks = [t for t in args.tasks.split(",") if t]
    if args.image:
        image = np.load(args.image)
    else:
        hw = model.input_hw
        image = Prng(args.seed).uniform(3 * hw[0] * hw[1], 0.0, 255.0
                                        ).reshape(3, hw[0], hw[1])
    shaper = RateShaper(parse_rate(args.rate)) if args.rate else None
    preds, timing = client_infer(
        (args.host, args.port), image, tasks, model, shaper=shaper,
        timeout=args.timeout, include_downlink=args.include_downlink)
    out = {"timing": {"encode_s": timing.encode_s, "tx_s": timing.tx_s,
                      "roundtrip_s": timing.roundtrip_s}}
    for task in TASKS:
        if task not in preds:
            continue
        if task == "classify":
            cls, score = preds[task]
            out[task] = {"class": cls, "score": round(score, 6)}
        elif task == "detect":
            out[task] = [{"box": [round(v, 2) for v in box],
                          "score": round(score, 4)}
                         for box, score in preds[task]]
        else:
            seg = preds[task]
            values, counts = np.unique(seg, return_counts=True)
            out[task] = {"shape": list(seg.shape),
                         "class_pixels": {int(v): int(c) for v, c
                                          in zip(values, counts)}}
    print(json.dumps(out, indent=2))
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "fit": _cmd_fit,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
    "client": _cmd_client,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None or args.command == "version":
        if args.command is None:
            parser.print_usage()
            return 2
        print(f"splitcomp {__version__}")
        return 0
    try:
        return _COMMANDS[args.command](args)
    except (SplitcompError, OSError) as e:
        print(f"splitcomp {args.command}: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
