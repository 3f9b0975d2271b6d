"""Shared plumbing for one-shot HTTP providers.

Extraction, alignment and embedding can each be backed by a remote
service; all of them speak a single JSON POST per call. Tests inject a
fake session object with the same ``post`` signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import requests

from .errors import ProviderUnavailable

DEFAULT_TIMEOUT = 30.0


@dataclass(frozen=True)
class RemoteService:
    """Marker for a provider living behind an HTTP endpoint."""

    endpoint: str


def post_json(endpoint: str, payload: dict[str, Any], session: Any | None = None) -> Any:
    """POST a JSON payload and decode the JSON response.

    Maps transport failures and non-2xx statuses to ProviderUnavailable
    so callers see one error type for "the service is broken".
    """
    sess = session if session is not None else requests
    try:
        response = sess.post(endpoint, json=payload, timeout=DEFAULT_TIMEOUT)
    except Exception as exc:  # connection refused, DNS, timeout, ...
        raise ProviderUnavailable(f"POST {endpoint} failed: {exc}") from exc
    status = getattr(response, "status_code", 200)
    if not 200 <= status < 300:
        raise ProviderUnavailable(f"POST {endpoint} returned status {status}")
    try:
        return response.json()
    except Exception as exc:
        raise ProviderUnavailable(f"POST {endpoint} returned non-JSON body") from exc
