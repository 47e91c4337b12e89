"""Post collection: keyword-filtered, windowed, deduplicated.

Fixture mode reads a local JSONL dump and is fully deterministic; live mode
talks to Reddit's OAuth2 listing endpoints through a small transport
interface so tests can script responses. Both modes apply the same three
filters: time window, lexicon keyword match, nonempty text.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

from .corpus import AnnotatedPost, Corpus, CorpusError
from .lexicon import Lexicon

TOKEN_URL = "https://www.reddit.com/api/v1/access_token"
LISTING_URL = "https://oauth.reddit.com/r/{subreddit}/new"
USER_AGENT = "sabia-corpus-builder/0.1"

BACKOFF_BASE_SECONDS = 2.0
MAX_RETRIES = 5
PAGE_SIZE = 100


class IngestError(RuntimeError):
    pass


@dataclass(frozen=True)
class IngestConfig:
    subreddits: tuple[str, ...] = ("opiates", "chronicpain", "OpiatesRecovery", "addiction")
    window_start: int = 1672617600  # 2023-01-02 UTC
    window_end: int = 1712188800  # 2024-04-04 UTC
    credentials: tuple[str, str] | None = None
    rate_limit: int = 60  # requests per minute
    source: str = "fixture"  # "fixture" or "live"
    fixture_path: str | None = None

    def __post_init__(self):
        if self.window_start >= self.window_end:
            raise IngestError("window_start must be before window_end")
        if not self.subreddits:
            raise IngestError("subreddits must be nonempty")
        if self.source not in ("fixture", "live"):
            raise IngestError(f"unknown source: {self.source!r}")
        if self.rate_limit <= 0:
            raise IngestError("rate_limit must be positive")


class Transport(Protocol):
    """Minimal HTTP surface the live collector needs."""

    def post(self, url: str, data: dict, auth: tuple[str, str], headers: dict) -> tuple[int, dict]:
        ...

    def get(self, url: str, params: dict, headers: dict) -> tuple[int, dict]:
        ...


class RequestsTransport:
    """Default transport backed by the requests library."""

    def post(self, url, data, auth, headers):
        import requests

        resp = requests.post(url, data=data, auth=auth, headers=headers, timeout=30)
        return resp.status_code, _safe_json(resp)

    def get(self, url, params, headers):
        import requests

        resp = requests.get(url, params=params, headers=headers, timeout=30)
        return resp.status_code, _safe_json(resp)


def _safe_json(resp):
    try:
        return resp.json()
    except ValueError:
        return {}


def _record_text(record: dict) -> str:
    """Post body with the title prepended when present."""
    title = str(record.get("title") or "").strip()
    body = str(record.get("text") or record.get("selftext") or "")
    return f"{title} {body}".strip() if title else body.strip()


def _passes_filters(post: AnnotatedPost, config: IngestConfig, lexicon: Lexicon) -> bool:
    if not config.window_start <= post.created_utc <= config.window_end:
        return False
    return bool(lexicon.match_keywords(post.text))


def collect(
    config: IngestConfig,
    lexicon: Lexicon,
    transport: Transport | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Corpus:
    """Collect unlabeled posts passing the window/keyword/nonempty filters.

    Duplicate ids keep the first occurrence; output order is retrieval order.
    """
    if config.source == "fixture":
        records = _read_fixture(config)
    else:
        records = _fetch_live(config, transport or RequestsTransport(), sleep)

    posts = []
    seen: set[str] = set()
    for record, where in records:
        text = _record_text(record)
        if not text:
            continue
        record_id = str(record.get("id") or "")
        if not record_id:
            raise IngestError(f"{where}: record has no id")
        if record_id in seen:
            continue
        post = AnnotatedPost(
            id=record_id,
            subreddit=str(record.get("subreddit") or ""),
            created_utc=int(record.get("created_utc") or 0),
            text=text,
            label=None,
        )
        if _passes_filters(post, config, lexicon):
            posts.append(post)
            seen.add(record_id)
    return Corpus(tuple(posts))


def _read_fixture(config: IngestConfig):
    if not config.fixture_path:
        raise IngestError("fixture mode needs fixture_path")
    path = Path(config.fixture_path)
    if not path.exists():
        raise IngestError(f"fixture file not found: {path}")
    out = []
    with path.open(encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise IngestError(f"{path}:{lineno}: invalid JSON ({e.msg})") from None
            out.append((record, f"{path}:{lineno}"))
    return out


class _RateLimiter:
    """Spaces requests at least 60/rate_limit seconds apart."""

    def __init__(self, per_minute: int, sleep, clock=time.monotonic):
        self.interval = 60.0 / per_minute
        self.sleep = sleep
        self.clock = clock
        self.last = None

    def wait(self):
        now = self.clock()
        if self.last is not None:
            remaining = self.interval - (now - self.last)
            if remaining > 0:
                self.sleep(remaining)
                now = self.clock()
        self.last = now


def _request_with_backoff(do_request, limiter, sleep, what: str) -> dict:
    """Run a request, retrying HTTP 429 with exponential backoff.

    Backoff starts at BACKOFF_BASE_SECONDS and doubles; after MAX_RETRIES the
    collection fails (partial results are discarded by the caller).
    """
    status = None
    for attempt in range(MAX_RETRIES + 1):
        limiter.wait()
        status, payload = do_request()
        if status == 429:
            if attempt < MAX_RETRIES:
                sleep(BACKOFF_BASE_SECONDS * (2**attempt))
            continue
        if status != 200:
            raise IngestError(f"{what} failed with HTTP {status}")
        return payload
    raise IngestError(f"{what}: retries exhausted, last HTTP status {status}")


def _fetch_live(config: IngestConfig, transport: Transport, sleep):
    if not config.credentials:
        raise IngestError("live mode needs credentials")
    client_id, client_secret = config.credentials
    limiter = _RateLimiter(config.rate_limit, sleep)

    status, payload = transport.post(
        TOKEN_URL,
        data={"grant_type": "client_credentials"},
        auth=(client_id, client_secret),
        headers={"User-Agent": USER_AGENT},
    )
    if status != 200 or "access_token" not in payload:
        raise IngestError(f"authentication failed with HTTP {status}")
    headers = {
        "Authorization": f"bearer {payload['access_token']}",
        "User-Agent": USER_AGENT,
    }

    records = []
    for subreddit in config.subreddits:
        after = None
        while True:
            params = {"limit": PAGE_SIZE}
            if after:
                params["after"] = after
            url = LISTING_URL.format(subreddit=subreddit)
            page = _request_with_backoff(
                lambda: transport.get(url, params=params, headers=headers),
                limiter,
                sleep,
                f"listing r/{subreddit}",
            )
            children = page.get("data", {}).get("children", [])
            if not children:
                break
            for child in children:
                d = child.get("data", {})
                records.append(
                    (
                        {
                            "id": d.get("name") or d.get("id"),
                            "subreddit": subreddit,
                            "created_utc": int(d.get("created_utc") or 0),
                            "title": d.get("title"),
                            "text": d.get("selftext"),
                        },
                        f"r/{subreddit}",
                    )
                )
            after = page.get("data", {}).get("after")
            if not after:
                break
    return records
