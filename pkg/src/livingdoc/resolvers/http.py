"""HTTP client with per-host politeness delay, retries and an offline switch.

The transport is pluggable so tests can count or forbid network calls.
"""
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple
from urllib.parse import urlsplit

import requests

from .. import __version__
from ..errors import FetchFailed, NetworkDisabled

log = logging.getLogger(__name__)

USER_AGENT = f"livingdoc/{__version__} python-requests/{requests.__version__}"


@dataclass
class HttpResponse:
    status: int
    body: bytes
    headers: Dict[str, str] = field(default_factory=dict)
    url: str = ""

    @property
    def text(self) -> str:
        return self.body.decode("utf-8", errors="replace")

    def header(self, name: str) -> Optional[str]:
        return self.headers.get(name.lower())


class TransportError(Exception):
    """Connection failure or timeout; retried like a 5xx."""


class RequestsTransport:
    def __init__(self, timeout=30):
        self.timeout = timeout
        self._local = threading.local()

    def _session(self):
        if not hasattr(self._local, "session"):
            self._local.session = requests.Session()
        return self._local.session

    def __call__(self, method, url, headers, data):
        try:
            resp = self._session().request(method, url, headers=headers, data=data, timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        return HttpResponse(resp.status_code, resp.content, {k.lower(): v for k, v in resp.headers.items()}, resp.url)


class HttpClient:
    """Thread-safe; one instance is shared by all resolver and data-fetch workers."""

    def __init__(
        self,
        transport: Callable = None,
        *,
        politeness: float = 0.2,
        retries: int = 3,
        backoff: float = 0.5,
        offline: bool = False,
        rewrites: Sequence[Tuple[str, str]] = (),
        sleep=time.sleep,
        user_agent: str = USER_AGENT,
    ):
        self.transport = transport or RequestsTransport()
        self.politeness = politeness
        self.retries = retries
        self.backoff = backoff
        self.offline = offline
        self.rewrites = list(rewrites)
        self.sleep = sleep
        self.user_agent = user_agent
        self.calls = []
        self._lock = threading.Lock()
        self._host_locks: Dict[str, threading.Lock] = {}
        self._last_request: Dict[str, float] = {}

    def _rewrite(self, url):
        for prefix, replacement in self.rewrites:
            if url.startswith(prefix):
                return replacement + url[len(prefix):]
        return url

    def _host_lock(self, host):
        with self._lock:
            return self._host_locks.setdefault(host, threading.Lock())

    def _polite(self, host):
        last = self._last_request.get(host)
        if last is not None and self.politeness > 0:
            wait = last + self.politeness - time.monotonic()
            if wait > 0:
                self.sleep(wait)
        self._last_request[host] = time.monotonic()

    def request(self, method, url, *, headers=None, data=None, ok=(200,)) -> HttpResponse:
        """Return the response when its status is in ``ok``; otherwise raise FetchFailed.

        5xx and transport errors are retried with exponential backoff; 4xx is terminal.
        """
        if self.offline:
            raise NetworkDisabled(f"network disabled: {method} {url}")
        target = self._rewrite(url)
        host = urlsplit(target).netloc
        all_headers = {"User-Agent": self.user_agent, **(headers or {})}
        last_error = None
        for attempt in range(self.retries):
            if attempt:
                self.sleep(self.backoff * 2 ** (attempt - 1))
            with self._host_lock(host):
                self._polite(host)
                with self._lock:
                    self.calls.append((method, target))
                try:
                    resp = self.transport(method, target, all_headers, data)
                except TransportError as exc:
                    log.warning("%s %s failed (attempt %d): %s", method, target, attempt + 1, exc)
                    last_error = FetchFailed(f"{method} {url}: {exc}", url=url)
                    continue
            if resp.status in ok:
                return resp
            if 500 <= resp.status < 600:
                log.warning("%s %s -> %d (attempt %d)", method, target, resp.status, attempt + 1)
                last_error = FetchFailed(f"{method} {url}: HTTP {resp.status}", status=resp.status, url=url)
                continue
            raise FetchFailed(f"{method} {url}: HTTP {resp.status}", status=resp.status, url=url)
        raise last_error

    def get(self, url, **kwargs) -> HttpResponse:
        return self.request("GET", url, **kwargs)

    def post(self, url, **kwargs) -> HttpResponse:
        return self.request("POST", url, **kwargs)
