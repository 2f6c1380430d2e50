"""Acquire C/C++ sources: local directory walks, remote code search, snapshots.

Remote results are written to a content-addressed snapshot directory so that
every later stage can be replayed offline.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, NamedTuple

import requests

from accmine.errors import AuthError, NetworkError, NotADirectory, RateLimited

log = logging.getLogger(__name__)

TOKEN_ENV = "ACCMINE_API_TOKEN"
DEFAULT_EXTENSIONS = frozenset({"c", "h", "cc", "cpp", "cxx", "hpp", "hh", "hxx"})
_UTF8_FFFD = "�".encode()


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str
    origin: str = "local"  # "local" or "remote"
    repository: str = ""
    replacements: int = 0

    @property
    def key(self) -> tuple[str, str]:
        return (self.repository, self.path)

    @property
    def location(self) -> str:
        return f"{self.repository}/{self.path}" if self.repository else self.path


@dataclass(frozen=True)
class SearchQuery:
    phrases: tuple[str, ...]
    languages: tuple[str, ...] = ("c", "c++")

    def __post_init__(self):
        if not self.phrases:
            raise ValueError("a search query needs at least one phrase")


def default_queries() -> SearchQuery:
    return SearchQuery(phrases=("#pragma acc loop", "#pragma acc parallel loop"), languages=("c", "c++"))


def decode_lossy(data: bytes) -> tuple[str, int]:
    """Decode UTF-8, replacing invalid sequences; return (text, replacement count)."""
    text = data.decode("utf-8", errors="replace")
    return text, text.count("�") - data.count(_UTF8_FFFD)


# -- local ------------------------------------------------------------------


class IngestResult(NamedTuple):
    files: list[SourceFile]
    skipped: list[str]


def _norm_ext(ext: str) -> str:
    return ext.lower().lstrip(".")


def ingest_directory(root: str | os.PathLike, extensions: Iterable[str] = DEFAULT_EXTENSIONS) -> IngestResult:
    """Walk ``root`` and read every file whose extension is in ``extensions``.

    Files come back sorted by their root-relative POSIX path. Symlinked
    directories are followed once; a directory whose real path was already
    visited is not entered again, which breaks cycles. Unreadable files are
    logged and listed in ``skipped``.
    """
    root = Path(root)
    if not root.is_dir():
        raise NotADirectory(f"{root} is not a directory")
    exts = {_norm_ext(e) for e in extensions}
    seen_dirs = set()
    candidates = []
    for dirpath, dirnames, filenames in os.walk(root, followlinks=True):
        real = os.path.realpath(dirpath)
        if real in seen_dirs:
            dirnames[:] = []
            continue
        seen_dirs.add(real)
        dirnames.sort()
        for name in filenames:
            if _norm_ext(os.path.splitext(name)[1]) in exts:
                full = Path(dirpath) / name
                candidates.append((full.relative_to(root).as_posix(), full))
    candidates.sort()

    files, skipped = [], []
    for rel, full in candidates:
        try:
            data = full.read_bytes()
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", rel, exc)
            skipped.append(rel)
            continue
        text, repl = decode_lossy(data)
        files.append(SourceFile(path=rel, text=text, origin="local", replacements=repl))
    if skipped:
        log.warning("skipped %d unreadable file(s)", len(skipped))
    return IngestResult(files, skipped)


# -- remote -----------------------------------------------------------------


@dataclass
class RemoteSettings:
    endpoint: str = "https://api.github.com/search/code"
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    page_size: int = 100
    max_retries: int = 5
    backoff_start: float = 2.0
    timeout: float = 30.0
    extra_headers: dict = field(default_factory=lambda: {"Accept": "application/vnd.github+json"})


_LANG_QUALIFIER = {"c": "language:C", "c++": "language:C++"}


class _Client:
    def __init__(self, token: str, settings: RemoteSettings, session=None, sleep: Callable[[float], None] = time.sleep):
        self.settings = settings
        self.session = session or requests.Session()
        self.sleep = sleep
        self.headers = dict(settings.extra_headers)
        value = f"{settings.auth_scheme} {token}" if settings.auth_scheme else token
        self.headers[settings.auth_header] = value

    def get_json(self, url: str, params: dict | None = None) -> dict:
        ctx = {"url": url, "params": params or {}}
        delay = self.settings.backoff_start
        for attempt in range(self.settings.max_retries + 1):
            try:
                resp = self.session.get(url, params=params, headers=self.headers, timeout=self.settings.timeout)
            except requests.RequestException as exc:
                raise NetworkError(f"transport failure: {exc}", ctx) from exc
            if _is_rate_limited(resp):
                if attempt == self.settings.max_retries:
                    raise RateLimited(f"rate limited after {attempt} retries", ctx)
                wait = _retry_after(resp, delay)
                log.info("rate limited on %s, sleeping %.1fs", url, wait)
                self.sleep(wait)
                delay *= 2
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {resp.status_code})", ctx)
            if resp.status_code >= 400:
                raise NetworkError(f"HTTP {resp.status_code}", ctx)
            try:
                return resp.json()
            except ValueError as exc:
                raise NetworkError("response is not JSON", ctx) from exc
        raise RateLimited("rate limited", ctx)  # unreachable with max_retries >= 0


def _is_rate_limited(resp) -> bool:
    if resp.status_code == 429:
        return True
    return resp.status_code == 403 and resp.headers.get("X-RateLimit-Remaining") == "0"


def _retry_after(resp, default: float) -> float:
    value = resp.headers.get("Retry-After")
    try:
        return max(float(value), 0.0) if value is not None else default
    except ValueError:
        return default


def _file_text(client: _Client, item: dict) -> tuple[str, int]:
    if "content" in item:
        payload = item
    else:
        payload = client.get_json(item["url"])
    content = payload.get("content", "")
    if payload.get("encoding", "base64") == "base64":
        raw = base64.b64decode(content)
    else:
        raw = content.encode()
    return decode_lossy(raw)


def search_remote(
    query: SearchQuery,
    token: str,
    page_limit: int,
    settings: RemoteSettings | None = None,
    session=None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[SourceFile]:
    """Run every (phrase, language) query against the code-search endpoint.

    Requests are issued one at a time. Results are deduplicated by
    (repository, path), and a file is kept only when its text contains one
    of the query phrases.
    """
    if not token:
        raise AuthError("empty API token", {"env": TOKEN_ENV})
    if page_limit < 1:
        raise ValueError("page_limit must be >= 1")
    settings = settings or RemoteSettings()
    client = _Client(token, settings, session=session, sleep=sleep)

    found: dict[tuple[str, str], SourceFile] = {}
    for phrase in query.phrases:
        for lang in query.languages:
            q = f'"{phrase}" {_LANG_QUALIFIER.get(lang, "language:" + lang)}'
            for page in range(1, page_limit + 1):
                data = client.get_json(settings.endpoint, {"q": q, "per_page": settings.page_size, "page": page})
                items = data.get("items", [])
                for item in items:
                    repo = item.get("repository", {}).get("full_name", "")
                    key = (repo, item["path"])
                    if key in found:
                        continue
                    text, repl = _file_text(client, item)
                    if not any(p in text for p in query.phrases):
                        continue
                    found[key] = SourceFile(path=item["path"], text=text, origin="remote", repository=repo, replacements=repl)
                if len(items) < settings.page_size:
                    break
    return list(found.values())


def token_from_env(config_token: str = "") -> str:
    return os.environ.get(TOKEN_ENV) or config_token


# -- snapshot store ---------------------------------------------------------


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_snapshot(files: Iterable[SourceFile], directory: str | os.PathLike, now: datetime | None = None) -> Path:
    """Store files under ``objects/<sha256>`` and write ``manifest.json``."""
    directory = Path(directory)
    objects = directory / "objects"
    objects.mkdir(parents=True, exist_ok=True)
    stamp = (now or datetime.now(timezone.utc)).isoformat()
    entries = []
    for f in files:
        digest = content_hash(f.text)
        target = objects / digest
        if not target.exists():
            target.write_bytes(f.text.encode("utf-8"))
        entries.append(
            {"repository": f.repository, "path": f.path, "retrieved": stamp, "sha256": digest, "origin": f.origin}
        )
    entries.sort(key=lambda e: (e["repository"], e["path"]))
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps({"files": entries}, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return manifest


def load_snapshot(directory: str | os.PathLike) -> list[SourceFile]:
    directory = Path(directory)
    manifest = json.loads((directory / "manifest.json").read_text(encoding="utf-8"))
    files = []
    for e in manifest["files"]:
        text = (directory / "objects" / e["sha256"]).read_bytes().decode("utf-8")
        files.append(SourceFile(path=e["path"], text=text, origin=e.get("origin", "remote"), repository=e["repository"]))
    return files


def is_snapshot(directory: str | os.PathLike) -> bool:
    return (Path(directory) / "manifest.json").is_file() and (Path(directory) / "objects").is_dir()
