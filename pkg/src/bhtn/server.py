"""Reference solver service: the remote wire protocol backed by local annealing.

POST /solve with ``{"qubo": <model>, "num_reads": int, "seed": int}`` returns
``{"samples": [{"bits": [...], "energy": float, "count": int}]}`` where the
samples are the distinct best-of-read states, energies recomputed from the
bits, sorted by (energy, assignment value). Malformed payloads get HTTP 400;
when more than ``max_concurrent`` solves are in flight the server answers 503.

The annealing schedule (sweeps, beta range) is server-side configuration;
the defaults equal :class:`bhtn.solvers.SolverConfig` defaults, which is what
makes loopback runs match local ones bit for bit.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np

from ._kernel import anneal
from .hubo import eval_qubo
from .serialize import ParseError, qubo_from_obj
from .solvers import SolverConfig, beta_schedule

__all__ = ["SolverService", "make_server"]

log = logging.getLogger(__name__)


class SolverService:
    """Protocol logic, separated from HTTP plumbing for direct testing."""

    def __init__(self, sweeps: int = 1000, beta_range: tuple[float, float] = (0.1, 10.0),
                 max_concurrent: int = 32, max_reads: int = 100_000):
        self.sweeps = sweeps
        self.beta_range = beta_range
        self.max_reads = max_reads
        self._slots = threading.BoundedSemaphore(max_concurrent)

    def handle(self, body: bytes) -> tuple[int, dict]:
        """Returns (http status, response object)."""
        try:
            payload = json.loads(body)
        except (ValueError, UnicodeDecodeError):
            return 400, {"error": "body is not valid JSON"}
        if not isinstance(payload, dict) or "qubo" not in payload:
            return 400, {"error": "payload must be an object with a 'qubo' field"}
        try:
            model = qubo_from_obj(payload["qubo"])
            num_reads = int(payload.get("num_reads", 100))
            seed = int(payload.get("seed", 0))
        except (ParseError, TypeError, ValueError) as e:
            return 400, {"error": str(e)}
        if not 1 <= num_reads <= self.max_reads:
            return 400, {"error": f"num_reads must be in [1, {self.max_reads}]"}
        if not self._slots.acquire(blocking=False):
            return 503, {"error": "solver overloaded, retry later"}
        try:
            cfg = SolverConfig(
                backend="sa", num_reads=num_reads, sweeps=self.sweeps,
                beta_range=self.beta_range, seed=seed,
            )
            h, W = model.dense()
            states, _ = anneal(h, W, beta_schedule(cfg), num_reads, seed)
        finally:
            self._slots.release()
        # histogram of distinct states; energies recomputed from the bits
        counts: dict[bytes, int] = {}
        for r in range(states.shape[0]):
            key = states[r].tobytes()
            counts[key] = counts.get(key, 0) + 1
        samples = []
        for key, count in counts.items():
            bits = list(np.frombuffer(key, dtype=np.uint8))
            energy = eval_qubo(model, np.frombuffer(key, dtype=np.uint8))
            value = 0
            for i, b in enumerate(bits):
                value |= int(b) << i
            samples.append((energy, value, [int(b) for b in bits], count))
        samples.sort(key=lambda s: (s[0], s[1]))
        return 200, {
            "samples": [
                {"bits": bits, "energy": energy, "count": count}
                for energy, _, bits, count in samples
            ]
        }


class _Handler(BaseHTTPRequestHandler):
    service: SolverService  # set by make_server

    def do_POST(self):
        if self.path != "/solve":
            self._reply(404, {"error": "unknown path; POST /solve"})
            return
        try:
            length = int(self.headers.get("Content-Length", "0"))
        except ValueError:
            self._reply(400, {"error": "bad Content-Length"})
            return
        body = self.rfile.read(length)
        status, obj = self.service.handle(body)
        self._reply(status, obj)

    def _reply(self, status: int, obj: dict):
        data = json.dumps(obj).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):
        log.debug("%s - %s", self.address_string(), fmt % args)


def make_server(host: str = "127.0.0.1", port: int = 0,
                service: SolverService | None = None) -> ThreadingHTTPServer:
    """Build (but do not start) the HTTP server; port 0 picks a free port."""
    service = service or SolverService()
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)
