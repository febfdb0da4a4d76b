"""Chat-completion client contract and the HTTP implementation.

A client is anything with ``complete(messages) -> str`` where messages is
an ordered list of ``{"role": ..., "content": ...}`` dicts.
"""

from __future__ import annotations

import os
from typing import Protocol, Sequence

#: Name of the environment variable holding the endpoint credential.
API_KEY_ENV = "TVCP_LLM_API_KEY"


class ChatClient(Protocol):
    def complete(self, messages: Sequence[dict[str, str]]) -> str: ...


class HttpChatClient:
    """Minimal client for OpenAI-compatible ``/chat/completions`` endpoints."""

    def __init__(
        self,
        base_url: str,
        model: str,
        temperature: float = 0.0,
        timeout: float = 60.0,
        api_key: str | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")

    def complete(self, messages: Sequence[dict[str, str]]) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        response = httpx.post(
            f"{self.base_url}/chat/completions",
            json={
                "model": self.model,
                "messages": list(messages),
                "temperature": self.temperature,
            },
            headers=headers,
            timeout=self.timeout,
        )
        response.raise_for_status()
        return response.json()["choices"][0]["message"]["content"]
