"""
HTTP clients for remote model endpoints.

Requests go through httpx with exponential-backoff retries (tenacity). Each
client owns one bound on requests in flight, shared by every worker thread
and event loop that uses it, and a request-rate throttle (asyncio-throttle).
Batch helpers send their requests concurrently inside one event loop; the
synchronous wrappers can be called from worker threads.
"""
import asyncio
import json
import re
import threading
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import httpx
from asyncio_throttle import Throttler
from tenacity import (
    AsyncRetrying,
    RetryError,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.domain.exceptions import AssessorError, TransportError
from src.shared.logging import get_logger

logger = get_logger(__name__)

RETRY_STATUS_CODES = {408, 429, 500, 502, 503, 504}
PROMPT_DIR = Path(__file__).parent / "prompts"
SLOT_POLL_S = 0.005
_JSON_OBJECT = re.compile(r"\{.*\}", re.DOTALL)

Message = Dict[str, str]


class _RetryableStatus(Exception):
    def __init__(self, status: int):
        self.status = status
        super().__init__(f"retryable status {status}")


def load_prompt(name: str) -> str:
    """Versioned prompt template, e.g. ``quality_assessment.v1``."""
    return (PROMPT_DIR / f"{name}.txt").read_text(encoding="utf-8")


def parse_json_object(reply: str) -> Dict[str, Any]:
    """First JSON object embedded in a model reply."""
    match = _JSON_OBJECT.search(reply or "")
    if not match:
        raise AssessorError("reply holds no JSON object", raw_reply=reply)
    try:
        value = json.loads(match.group(0))
    except json.JSONDecodeError as exc:
        raise AssessorError(f"reply is not valid JSON: {exc.msg}", raw_reply=reply) from exc
    if not isinstance(value, dict):
        raise AssessorError("reply JSON is not an object", raw_reply=reply)
    return value


class JsonHttpClient:
    """POSTs JSON payloads with retries, an in-flight bound and a rate throttle."""

    def __init__(
        self,
        endpoint: str,
        token: Optional[str] = None,
        timeout_s: float = 30.0,
        max_retries: int = 3,
        max_in_flight: int = 4,
        requests_per_second: int = 20,
        backoff_base: float = 0.5,
        transport: Optional[httpx.AsyncBaseTransport] = None,
    ):
        if not endpoint:
            raise TransportError("no endpoint configured")
        self.endpoint = endpoint
        self.token = token
        self.timeout_s = timeout_s
        self.max_retries = max_retries
        self.max_in_flight = max_in_flight
        self.requests_per_second = requests_per_second
        self.backoff_base = backoff_base
        self.transport = transport
        self._slots = threading.BoundedSemaphore(max_in_flight)
        # start times only, no loop state: one throttler serves every loop
        self._throttler = Throttler(rate_limit=requests_per_second, period=1.0)

    def _headers(self) -> Dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    def _session(self) -> httpx.AsyncClient:
        return httpx.AsyncClient(timeout=self.timeout_s, transport=self.transport)

    async def _acquire_slot(self) -> None:
        # polling keeps cancellation from leaking a slot
        while not self._slots.acquire(blocking=False):
            await asyncio.sleep(SLOT_POLL_S)

    async def _post_once(self, client: httpx.AsyncClient, payload: Dict[str, Any]) -> Dict[str, Any]:
        async with self._throttler:
            await self._acquire_slot()
            try:
                response = await client.post(self.endpoint, json=payload, headers=self._headers())
            finally:
                self._slots.release()
        if response.status_code in RETRY_STATUS_CODES:
            raise _RetryableStatus(response.status_code)
        if response.status_code >= 400:
            raise TransportError(f"request to {self.endpoint} failed", status=response.status_code)
        try:
            body = response.json()
        except ValueError as exc:
            raise AssessorError("response body is not JSON", raw_reply=response.text) from exc
        if not isinstance(body, dict):
            raise AssessorError("response body is not a JSON object", raw_reply=response.text)
        return body

    async def _post(self, client: httpx.AsyncClient, payload: Dict[str, Any]) -> Dict[str, Any]:
        retrying = AsyncRetrying(
            stop=stop_after_attempt(self.max_retries),
            wait=wait_exponential(multiplier=self.backoff_base, max=8.0),
            retry=retry_if_exception_type((_RetryableStatus, httpx.TransportError)),
            before_sleep=lambda state: logger.warning(
                "Retrying remote request",
                endpoint=self.endpoint,
                attempt=state.attempt_number,
                error=str(state.outcome.exception()) if state.outcome else None,
            ),
        )
        try:
            async for attempt in retrying:
                with attempt:
                    return await self._post_once(client, payload)
        except RetryError as exc:
            last = exc.last_attempt.exception()
            status = getattr(last, "status", None)
            raise TransportError(
                f"request to {self.endpoint} failed after {self.max_retries} attempts: {last}",
                status=status,
            ) from last
        raise TransportError(f"request to {self.endpoint} produced no response")

    async def post_many_async(self, payloads: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        async with self._session() as client:
            return list(await asyncio.gather(*(self._post(client, p) for p in payloads)))

    def post_many(self, payloads: Sequence[Dict[str, Any]]) -> List[Dict[str, Any]]:
        if not payloads:
            return []
        return asyncio.run(self.post_many_async(payloads))

    def post(self, payload: Dict[str, Any]) -> Dict[str, Any]:
        return self.post_many([payload])[0]


class ChatCompletionClient(JsonHttpClient):
    """Chat-completion wire format: messages in, one text reply out."""

    def __init__(self, endpoint: str, model: str = "gpt-4o-mini", **kwargs: Any):
        super().__init__(endpoint, **kwargs)
        self.model = model

    def _payload(self, messages: Sequence[Message]) -> Dict[str, Any]:
        return {"model": self.model, "messages": list(messages), "temperature": 0}

    @staticmethod
    def _content(body: Dict[str, Any]) -> str:
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise AssessorError("reply has no choices[0].message.content", raw_reply=json.dumps(body)) from None
        return str(content or "")

    async def complete_many_async(self, conversations: Sequence[Sequence[Message]]) -> List[str]:
        bodies = await self.post_many_async([self._payload(m) for m in conversations])
        return [self._content(body) for body in bodies]

    def complete_many(self, conversations: Sequence[Sequence[Message]]) -> List[str]:
        if not conversations:
            return []
        return asyncio.run(self.complete_many_async(conversations))

    def complete(self, messages: Sequence[Message]) -> str:
        return self.complete_many([messages])[0]

    async def _complete_json(self, client: httpx.AsyncClient, messages: Sequence[Message]) -> Dict[str, Any]:
        last: Optional[AssessorError] = None
        for _ in range(self.max_retries):
            reply = self._content(await self._post(client, self._payload(messages)))
            try:
                return parse_json_object(reply)
            except AssessorError as exc:
                last = exc
                logger.warning("Unparseable remote reply", endpoint=self.endpoint, error=str(exc))
        assert last is not None
        raise AssessorError(
            f"no parseable reply after {self.max_retries} attempts: {last}", raw_reply=last.raw_reply
        )

    async def complete_json_many_async(
        self, conversations: Sequence[Sequence[Message]]
    ) -> List[Dict[str, Any]]:
        async with self._session() as client:
            return list(await asyncio.gather(*(self._complete_json(client, m) for m in conversations)))

    def complete_json_many(self, conversations: Sequence[Sequence[Message]]) -> List[Dict[str, Any]]:
        """JSON replies for several conversations, each asked up to ``max_retries`` times."""
        if not conversations:
            return []
        return asyncio.run(self.complete_json_many_async(conversations))

    def complete_json(self, messages: Sequence[Message]) -> Dict[str, Any]:
        """Ask until the reply parses as a JSON object, up to ``max_retries`` times."""
        return self.complete_json_many([messages])[0]


def user_message(prompt: str) -> List[Message]:
    return [{"role": "user", "content": prompt}]
