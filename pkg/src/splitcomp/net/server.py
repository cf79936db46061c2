"""Split-inference server: decodes uplinked latents and runs the
decoder, backbone, and requested heads.

Robustness contract: any malformed frame is answered with an error
frame and the connection stays usable; the handler rescans the byte
stream for the next frame magic after losing alignment, and no request
can terminate the server.
"""

from __future__ import annotations

import socketserver
import threading

import numpy as np

from ..codec import decode_latent
from ..codec.bitstream import Bitstream
from ..errors import SplitcompError
from . import wire


class _Handler(socketserver.StreamRequestHandler):
    def setup(self):
        super().setup()
        self._pending = b""

    def _fill(self, n: int) -> bool:
        while len(self._pending) < n:
            chunk = self.rfile.read(n - len(self._pending))
            if not chunk:
                return False
            self._pending += chunk
        return True

    def _take(self, n: int) -> bytes:
        out, self._pending = self._pending[:n], self._pending[n:]
        return out

    def _send(self, frame: wire.Frame) -> None:
        self.wfile.write(wire.pack_frame(frame))
        self.wfile.flush()

    def _send_error(self, code: int, message: str) -> None:
        self.server.count_error()
        self._send(wire.Frame(wire.MSG_ERROR, 0, wire.pack_error(code,
                                                                 message)))

    def _resync(self) -> bool:
        """Drop bytes until the next frame magic; False on EOF."""
        self._take(1)
        while True:
            idx = self._pending.find(wire.MAGIC)
            if idx >= 0:
                self._take(idx)
                return True
            # keep a possible partial magic at the buffer tail
            self._take(max(0, len(self._pending) - 3))
            chunk = self.rfile.read(1)
            if not chunk:
                return False
            self._pending += chunk

    def handle(self):
        while True:
            if not self._fill(wire.HEADER.size):
                return
            magic, msg_type, mask, length = wire.HEADER.unpack(
                self._pending[:wire.HEADER.size])
            if magic != wire.MAGIC:
                self._send_error(wire.ERR_BAD_MAGIC,
                                 f"bad frame magic {magic!r}")
                if not self._resync():
                    return
                continue
            if length > wire.MAX_PAYLOAD:
                self._send_error(wire.ERR_BAD_LENGTH,
                                 f"frame length {length} exceeds limit")
                if not self._resync():
                    return
                continue
            self._take(wire.HEADER.size)
            if not self._fill(length):
                return
            payload = self._take(length)
            if msg_type != wire.MSG_REQUEST:
                self._send_error(wire.ERR_BAD_TYPE,
                                 f"cannot serve message type {msg_type}")
                continue
            self._serve_request(mask, payload)

    def _serve_request(self, mask: int, payload: bytes) -> None:
        try:
            try:
                stream = Bitstream.from_bytes(payload)
            except SplitcompError as e:
                self._send_error(wire.ERR_BAD_PAYLOAD, str(e))
                return
            registry = self.server.entropy_models
            if stream.model_id not in registry:
                self._send_error(wire.ERR_BAD_MODEL,
                                 f"unknown entropy model {stream.model_id}")
                return
            try:
                symbols = decode_latent(stream, registry[stream.model_id])
            except SplitcompError as e:
                self._send_error(wire.ERR_BAD_PAYLOAD, str(e))
                return
            if mask & wire.ECHO_BIT:
                self.server.count_ok()
                self._send(wire.Frame(wire.MSG_RESPONSE, wire.ECHO_BIT,
                                      wire.serialize_symbols(symbols)))
                return
            tasks = wire.tasks_for_mask(mask)
            if not tasks:
                self._send_error(wire.ERR_BAD_TASKS,
                                 f"mask 0x{mask:02x} names no tasks")
                return
            try:
                preds, _ = self.server.model.tail(
                    np.asarray(symbols, dtype=np.float64), tasks)
            except SplitcompError as e:
                self._send_error(wire.ERR_BAD_PAYLOAD, str(e))
                return
            self.server.count_ok()
            self._send(wire.Frame(wire.MSG_RESPONSE, mask & wire.TASK_MASK_ALL,
                                  wire.serialize_predictions(preds)))
        except Exception as e:  # robustness: a request never kills the server
            try:
                self._send_error(wire.ERR_INTERNAL, f"internal error: {e}")
            except OSError:
                pass


class _Server(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class SplitServer:
    """Owns the listening socket and its serving thread.

    The model and entropy tables are immutable shared state; request
    handling mutates nothing but the per-connection buffers and the two
    counters below.
    """

    def __init__(self, model, entropy_models: dict | None = None,
                 host: str = "127.0.0.1", port: int = 0):
        if entropy_models is None:
            em = model.entropy_model
            entropy_models = {em.model_id: em}
        self.model = model
        self.entropy_models = dict(entropy_models)
        self._host, self._port = host, port
        self._server = None
        self._thread = None
        self._lock = threading.Lock()
        self.ok_count = 0
        self.error_count = 0

    def count_ok(self):
        with self._lock:
            self.ok_count += 1

    def count_error(self):
        with self._lock:
            self.error_count += 1

    @property
    def address(self):
        if self._server is None:
            raise RuntimeError("server is not running")
        return self._server.server_address

    @property
    def running(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def start(self):
        self._server = _Server((self._host, self._port), _Handler)
        self._server.model = self.model
        self._server.entropy_models = self.entropy_models
        self._server.count_ok = self.count_ok
        self._server.count_error = self.count_error
        self._thread = threading.Thread(target=self._server.serve_forever,
                                        name="splitcomp-server", daemon=True)
        self._thread.start()
        return self.address

    def stop(self):
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._thread.join(timeout=5.0)
            self._server = None

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()
        return False


def serve(model, entropy_models: dict | None = None, host: str = "127.0.0.1",
          port: int = 0) -> SplitServer:
    """Start a server and return its running handle."""
    server = SplitServer(model, entropy_models, host=host, port=port)
    server.start()
    return server
