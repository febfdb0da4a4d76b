"""Few-shot chain-of-thought evaluation harness for chat endpoints."""

from tvcp.llm.client import API_KEY_ENV, ChatClient, HttpChatClient
from tvcp.llm.parse import ParsedPrediction, parse_response
from tvcp.llm.prompts import (
    CLASS_WORDS,
    FEW_SHOT_EXAMPLES,
    QUERY_TEMPLATE,
    SYSTEM_PROMPT,
    FewShotExample,
    build_prompt,
    prompt_hash,
)
from tvcp.llm.runner import LlmEvalResult, LlmRunStats, run_llm_eval

__all__ = [
    "API_KEY_ENV",
    "CLASS_WORDS",
    "ChatClient",
    "FEW_SHOT_EXAMPLES",
    "FewShotExample",
    "HttpChatClient",
    "LlmEvalResult",
    "LlmRunStats",
    "ParsedPrediction",
    "QUERY_TEMPLATE",
    "SYSTEM_PROMPT",
    "build_prompt",
    "parse_response",
    "prompt_hash",
    "run_llm_eval",
]
