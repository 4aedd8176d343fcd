"""Scripted threading HTTP server for exercising the client modules.

Each test enqueues a script of canned steps; the handler replays them in
order and records every request body it saw. A step can delay its reply to
provoke client timeouts.
"""

import json
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


class _Step:
    def __init__(self, status=200, body=None, sleep=0.0, raw=None):
        self.status = status
        self.body = body
        self.sleep = sleep
        self.raw = raw


class _Handler(BaseHTTPRequestHandler):
    def do_POST(self):
        length = int(self.headers.get("Content-Length", 0))
        payload = json.loads(self.rfile.read(length) or b"{}")
        with self.server.lock:
            self.server.requests.append((self.path, payload))
            step = (self.server.script.pop(0) if self.server.script
                    else _Step(status=500, body={"error": "script empty"}))
        if step.sleep:
            time.sleep(step.sleep)
        if step.raw is not None:
            data = step.raw
        else:
            body = step.body(payload) if callable(step.body) else (step.body or {})
            data = json.dumps(body).encode("utf-8")
        self.send_response(step.status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


class StubServer:
    """Context manager exposing base_url, a script list, and seen requests."""

    def __enter__(self):
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self.server.daemon_threads = True
        self.server.script = []
        self.server.requests = []
        self.server.lock = threading.Lock()
        self.thread = threading.Thread(
            target=lambda: self.server.serve_forever(poll_interval=0.02),
            daemon=True)
        self.thread.start()
        host, port = self.server.server_address
        self.base_url = f"http://{host}:{port}"
        return self

    def __exit__(self, *exc):
        self.server.shutdown()
        self.server.server_close()
        return False

    def enqueue(self, status=200, body=None, sleep=0.0, raw=None):
        with self.server.lock:
            self.server.script.append(_Step(status=status, body=body,
                                            sleep=sleep, raw=raw))

    @property
    def requests(self):
        with self.server.lock:
            return list(self.server.requests)
