"""Threaded local HTTP server standing in for every upstream service in tests."""
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlsplit


class Route:
    def __init__(self, body=b"", status=200, headers=None, content_type="application/json"):
        self.body = body.encode("utf-8") if isinstance(body, str) else body
        self.status = status
        self.headers = {"Content-Type": content_type, **(headers or {})}

    def __call__(self, request):
        return self.status, self.headers, self.body


def json_route(obj, status=200, headers=None):
    return Route(json.dumps(obj), status, headers)


class StubServer:
    """``routes`` maps ``"METHOD /path?query"`` or ``"/path?query"`` (any method) to a callable.

    The callable receives a dict with method, path, query, headers and body and
    returns ``(status, headers, body)``. Requests are recorded in ``requests``.
    """

    def __init__(self, routes=None):
        self.routes = dict(routes or {})
        self.requests = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def _handle(self):
                length = int(self.headers.get("Content-Length") or 0)
                body = self.rfile.read(length) if length else b""
                parts = urlsplit(self.path)
                request = {"method": self.command, "path": parts.path, "query": parts.query,
                           "target": self.path, "headers": dict(self.headers), "body": body}
                with server._lock:
                    server.requests.append(request)
                route = (server.routes.get(f"{self.command} {self.path}") or server.routes.get(self.path)
                         or server.routes.get(f"{self.command} {parts.path}") or server.routes.get(parts.path))
                if route is None:
                    status, headers, payload = 404, {"Content-Type": "text/plain"}, b"no route"
                else:
                    status, headers, payload = route(request)
                self.send_response(status)
                for k, v in headers.items():
                    self.send_header(k, v)
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            do_GET = do_POST = do_HEAD = _handle

            def log_message(self, *args):
                pass

        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self.httpd.daemon_threads = True
        self.url = f"http://127.0.0.1:{self.httpd.server_address[1]}"
        self._thread = None

    def start(self):
        self._thread = threading.Thread(target=self.httpd.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True)
        self._thread.start()
        return self

    def stop(self):
        self.httpd.shutdown()
        self.httpd.server_close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()

    def hits(self, path_prefix=""):
        return [r for r in self.requests if r["path"].startswith(path_prefix)]
