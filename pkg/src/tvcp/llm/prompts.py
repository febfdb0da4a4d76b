"""Chain-of-thought prompt assembly for chat-completion endpoints.

The message list is fixed: one system instruction, three worked examples
(one per change class) as user/assistant exchanges, then the query pair.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from tvcp.dataset import Sample
from tvcp.errors import ContractError
from tvcp.schema import TvcpLabel

#: Response vocabulary expected from the endpoint.
CLASS_WORDS = {
    TvcpLabel.DEC: "Decreased",
    TvcpLabel.UNC: "Neutral",
    TvcpLabel.INC: "Increased",
}

SYSTEM_PROMPT = (
    "You are a language model specializing in temporal commonsense reasoning. "
    "Each prompt contains Sentence A and Sentence B. You should determine whether "
    "Sentence B changes the expected temporal validity duration of Sentence A, "
    "i.e., the duration for which the information in Sentence A is expected to be "
    "relevant to a reader.\n\n"
    "To achieve this, in your responses, first, estimate for how long the average "
    "reader may expect Sentence A to be relevant on its own. Then, consider if the "
    "information introduced in Sentence B increases or decreases this duration. "
    "Surround this explanation in triple backticks (```).\n\n"
    "After your explanation, respond with one of the three possible classes "
    "corresponding to your explanation: Decreased, Neutral, or Increased."
)

#: Optional addendum describing the duration scale; off by default so the
#: endpoint is not told the class design.
SCALE_HINT = (
    "\n\nWhen estimating durations, think in terms of a coarse scale ranging "
    "from under a minute up to more than a month."
)

QUERY_TEMPLATE = "Sentence A: {target}\nSentence B: {followup}"


@dataclass(frozen=True)
class FewShotExample:
    target: str
    followup: str
    label: TvcpLabel
    explanation: str

    def user_text(self) -> str:
        return QUERY_TEMPLATE.format(target=self.target, followup=self.followup)

    def assistant_text(self) -> str:
        return f"```{self.explanation}```\n{CLASS_WORDS[self.label]}"


FEW_SHOT_EXAMPLES: tuple[FewShotExample, ...] = (
    FewShotExample(
        target="I'm ready to go to the beach",
        followup=(
            "I forgot all the beach towels are still in the dryer, but I'll be "
            "ready to go as soon as the dryer's done running."
        ),
        label=TvcpLabel.INC,
        explanation=(
            "Going to the beach may take a few minutes to an hour, depending on "
            "the distance. However, if the author first needs to wait on the dryer "
            "to finish in order to retrieve their beach towels, this may take an "
            "additional 30-60 minutes."
        ),
    ),
    FewShotExample(
        target="taking bad thoughts out of my mind thru grinding my assignments",
        followup=(
            "I just have to get through a short math homework assignment and "
            "memorize a few spelling words so it shouldn't take long."
        ),
        label=TvcpLabel.DEC,
        explanation=(
            "Grinding through assignments may take several hours, depending on the "
            "number of assignments to complete. In Sentence B, the author states "
            "they only have a few short assignments remaining, so they may only "
            "take an hour or less to finish them."
        ),
    ),
    FewShotExample(
        target="Slide to my dm guys, come on",
        followup="Instagram DMs are such a fun way to communicate.",
        label=TvcpLabel.UNC,
        explanation=(
            "The author encourages people to direct message them, which may be "
            "relevant for several minutes to a few hours. Sentence B does not "
            "change the duration for which Sentence A is expected to be relevant."
        ),
    ),
)


def build_prompt(sample: Sample, scale_hint: bool = False) -> list[dict[str, str]]:
    """Message list for one sample: system + 3 exchanges + query (8 messages)."""
    if not sample.target_text.strip() or not sample.followup_text.strip():
        raise ContractError(f"{sample.sample_id}: statement texts must be non-empty")
    system = SYSTEM_PROMPT + (SCALE_HINT if scale_hint else "")
    messages = [{"role": "system", "content": system}]
    for example in FEW_SHOT_EXAMPLES:
        messages.append({"role": "user", "content": example.user_text()})
        messages.append({"role": "assistant", "content": example.assistant_text()})
    messages.append(
        {
            "role": "user",
            "content": QUERY_TEMPLATE.format(
                target=sample.target_text, followup=sample.followup_text
            ),
        }
    )
    return messages


def prompt_hash(messages: list[dict[str, str]]) -> str:
    """Stable digest of a message list, used as the cache key."""
    canonical = json.dumps(messages, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
