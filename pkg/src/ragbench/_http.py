"""Shared HTTP plumbing: JSON POST with retry/backoff, bearer auth from env.

Retry policy (used by both the embeddings and chat clients): retry on
HTTP 429 and 5xx with exponential backoff, base 500 ms, factor 2.
"""

from __future__ import annotations

import os
import time

import requests

from .errors import ProtocolError, RateLimitedExhausted, RequestTimeout

API_KEY_ENV = "RAGBENCH_API_KEY"
_BACKOFF_BASE_S = 0.5

# test hook; replaced in unit tests to avoid real sleeps
_sleep = time.sleep


def _headers() -> dict:
    headers = {"Content-Type": "application/json"}
    token = os.environ.get(API_KEY_ENV, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    return headers


def post_json_with_retries(url: str, payload: dict, *, timeout_ms: int,
                           max_retries: int) -> dict:
    """POST payload as JSON; return the decoded JSON response body."""
    last_status = None
    for attempt in range(max_retries + 1):
        try:
            resp = requests.post(url, json=payload, headers=_headers(),
                                 timeout=timeout_ms / 1000.0)
        except requests.Timeout as exc:
            raise RequestTimeout(f"request to {url} timed out") from exc
        except requests.RequestException as exc:
            raise ProtocolError(f"request to {url} failed: {exc}") from exc
        if resp.status_code == 200:
            try:
                return resp.json()
            except ValueError as exc:
                raise ProtocolError(f"non-JSON response from {url}") from exc
        if resp.status_code == 429 or resp.status_code >= 500:
            last_status = resp.status_code
            if attempt < max_retries:
                _sleep(_BACKOFF_BASE_S * (2 ** attempt))
                continue
            break
        raise ProtocolError(f"HTTP {resp.status_code} from {url}")
    if last_status == 429:
        raise RateLimitedExhausted(f"rate limited after {max_retries} retries: {url}")
    raise ProtocolError(f"HTTP {last_status} from {url} after {max_retries} retries")
