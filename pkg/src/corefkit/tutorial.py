"""Tutorial scripts: ordered training steps ending in a screening gate.

A script is a JSON document of steps; each step carries its own tokens,
pre-identified mentions, a gold clustering and feedback texts keyed by
error pattern. Non-screening steps return per-link feedback (missing and
wrong coreference links against gold); the final step is the quality
control example scored with B3.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorefkitError
from .model import Clustering

DEFAULT_SCREENING_THRESHOLD = 0.90


@dataclass
class TutorialStep:
    step_id: str
    prompt: str
    tokens: list[str]
    mentions: list[dict]  # {"mention_id": str, "span": [start, end]}
    gold_clusters: list[list[str]]
    feedback: dict[str, str] = field(default_factory=dict)
    is_screening: bool = False
    threshold: float = DEFAULT_SCREENING_THRESHOLD

    def mention_ids(self) -> set[str]:
        return {m["mention_id"] for m in self.mentions}

    def gold_clustering(self) -> Clustering:
        return Clustering(passage_id=self.step_id, annotator_id="gold",
                          clusters=[set(c) for c in self.gold_clusters])

    def public_dict(self) -> dict:
        """Step as served to clients: no gold, no feedback texts."""
        return {
            "step_id": self.step_id,
            "prompt": self.prompt,
            "tokens": self.tokens,
            "mentions": self.mentions,
            "is_screening": self.is_screening,
        }

    def to_json_dict(self) -> dict:
        return {
            "step_id": self.step_id,
            "prompt": self.prompt,
            "tokens": self.tokens,
            "mentions": self.mentions,
            "gold_clusters": self.gold_clusters,
            "feedback": self.feedback,
            "is_screening": self.is_screening,
            "threshold": self.threshold,
        }


@dataclass
class TutorialScript:
    steps: list[TutorialStep]

    def validate(self) -> None:
        if not self.steps:
            raise CorefkitError("tutorial script has no steps")
        screening = [s for s in self.steps if s.is_screening]
        if len(screening) != 1 or not self.steps[-1].is_screening:
            raise CorefkitError(
                "tutorial script needs exactly one screening step, last")
        for step in self.steps:
            ids = step.mention_ids()
            step.gold_clustering().validate_partition(ids)
            for m in step.mentions:
                start, end = m["span"]
                if not (0 <= start <= end < len(step.tokens)):
                    raise CorefkitError(
                        f"step {step.step_id}: span {m['span']} out of range")

    def to_json(self) -> str:
        return json.dumps({"steps": [s.to_json_dict() for s in self.steps]},
                          ensure_ascii=False, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "TutorialScript":
        obj = json.loads(text)
        steps = [TutorialStep(
            step_id=s["step_id"],
            prompt=s.get("prompt", ""),
            tokens=s["tokens"],
            mentions=s["mentions"],
            gold_clusters=s["gold_clusters"],
            feedback=s.get("feedback", {}),
            is_screening=s.get("is_screening", False),
            threshold=s.get("threshold", DEFAULT_SCREENING_THRESHOLD),
        ) for s in obj["steps"]]
        script = cls(steps=steps)
        script.validate()
        return script

    @classmethod
    def load(cls, path) -> "TutorialScript":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")


@dataclass
class StepFeedback:
    correct: bool
    missing_links: list[tuple[str, str]]
    wrong_links: list[tuple[str, str]]
    messages: list[str]

    def to_json_dict(self) -> dict:
        return {
            "correct": self.correct,
            "missing_links": [list(p) for p in self.missing_links],
            "wrong_links": [list(p) for p in self.wrong_links],
            "messages": self.messages,
        }


def _links(clusters: list[set[str]]) -> set[tuple[str, str]]:
    pairs = set()
    for c in clusters:
        members = sorted(c)
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                pairs.add((a, b))
    return pairs


def step_feedback(step: TutorialStep, submitted: Clustering) -> StepFeedback:
    """Compare a submission's coreference links against the step's gold."""
    submitted.validate_partition(step.mention_ids())
    gold_pairs = _links([set(c) for c in step.gold_clusters])
    got_pairs = _links(submitted.clusters)
    missing = sorted(gold_pairs - got_pairs)
    wrong = sorted(got_pairs - gold_pairs)
    messages = []
    if not missing and not wrong:
        if step.feedback.get("correct"):
            messages.append(step.feedback["correct"])
    else:
        if missing and step.feedback.get("missing_link"):
            messages.append(step.feedback["missing_link"])
        if wrong and step.feedback.get("wrong_link"):
            messages.append(step.feedback["wrong_link"])
    return StepFeedback(correct=not missing and not wrong,
                        missing_links=missing, wrong_links=wrong,
                        messages=messages)


def _step_mentions(step_id: str, spans: list[tuple[int, int]]) -> list[dict]:
    return [{"mention_id": f"{step_id}:{s}-{e}", "span": [s, e]}
            for s, e in spans]


def _mid(step_id: str, s: int, e: int) -> str:
    return f"{step_id}:{s}-{e}"


def example_script() -> TutorialScript:
    """A ready-to-serve script teaching the minimal guidelines.

    Four training steps (personal pronouns and singletons, possessives and
    non-coreferent lookalikes, nested spans and non-person entities, places)
    and a final screening passage.
    """
    steps = []

    t1 = ("John does n't like Fred , but he still invited him to "
          "the party .").split()
    s1 = "step1"
    steps.append(TutorialStep(
        step_id=s1,
        prompt=("Group mentions of the same person into one entity. "
                "A mention nobody else refers to stays on its own."),
        tokens=t1,
        mentions=_step_mentions(s1, [(0, 0), (4, 4), (7, 7), (10, 10),
                                         (12, 13)]),
        gold_clusters=[[_mid(s1, 0, 0), _mid(s1, 7, 7)],
                       [_mid(s1, 4, 4), _mid(s1, 10, 10)],
                       [_mid(s1, 12, 13)]],
        feedback={
            "correct": "Nice - the pronouns point at the right people.",
            "missing_link": "Look again: a pronoun refers to someone "
                            "mentioned earlier.",
            "wrong_link": "Careful: John and Fred are different people, so "
                          "their pronouns belong to different entities.",
        },
    ))

    t2 = ("This dog likes to play catch . It 's better than other dogs "
          "at this game . Its owner is really proud .").split()
    s2 = "step2"
    steps.append(TutorialStep(
        step_id=s2,
        prompt=("Possessive pronouns refer to an entity too. Similar words "
                "are not automatically the same entity."),
        tokens=t2,
        mentions=_step_mentions(s2, [(0, 1), (5, 5), (7, 7), (11, 12),
                                         (14, 15), (17, 17), (17, 18)]),
        gold_clusters=[[_mid(s2, 0, 1), _mid(s2, 7, 7), _mid(s2, 17, 17)],
                       [_mid(s2, 5, 5), _mid(s2, 14, 15)],
                       [_mid(s2, 11, 12)],
                       [_mid(s2, 17, 18)]],
        feedback={
            "correct": "Exactly - 'It' and 'Its' are this dog.",
            "missing_link": "A possessive pronoun ('Its') also refers to "
                            "the dog.",
            "wrong_link": "'other dogs' are different animals from this dog.",
        },
    ))

    t3 = ("Director Mackenzie spent last two years working on a film . "
          "During this time he often had to make compromises but "
          "the movie exceeded expectations .").split()
    s3 = "step3"
    steps.append(TutorialStep(
        step_id=s3,
        prompt=("Mentions can be nested inside other mentions; annotate "
                "both. Times and things are entities too."),
        tokens=t3,
        mentions=_step_mentions(s3, [(0, 1), (1, 1), (3, 5), (8, 9),
                                         (12, 13), (14, 14), (19, 19),
                                         (21, 22)]),
        gold_clusters=[[_mid(s3, 0, 1), _mid(s3, 14, 14)],
                       [_mid(s3, 1, 1)],
                       [_mid(s3, 3, 5), _mid(s3, 12, 13)],
                       [_mid(s3, 8, 9), _mid(s3, 21, 22)],
                       [_mid(s3, 19, 19)]],
        feedback={
            "correct": "Right - the nested name and the full title are "
                       "separate mentions.",
            "missing_link": "'this time' points back at a time span "
                            "mentioned before.",
            "wrong_link": "Check the things: only one of them is the film.",
        },
    ))

    t4 = ("The office was n't exactly small either . I 'm sure that fifty "
          "people could easily fit there .").split()
    s4 = "step4"
    steps.append(TutorialStep(
        step_id=s4,
        prompt="Places can be referred to by words like 'there'.",
        tokens=t4,
        mentions=_step_mentions(s4, [(0, 1), (8, 8), (12, 13), (17, 17)]),
        gold_clusters=[[_mid(s4, 0, 1), _mid(s4, 17, 17)],
                       [_mid(s4, 8, 8)],
                       [_mid(s4, 12, 13)]],
        feedback={
            "correct": "Yes - 'there' is the office.",
            "missing_link": "Where could fifty people fit? Link 'there' to "
                            "that place.",
            "wrong_link": "'there' names a place, not a person.",
        },
    ))

    t5 = ("Anna met her brother at the station . He had missed his train , "
          "so she waited with him until the next one arrived . The station "
          "was almost empty .").split()
    s5 = "screening"
    steps.append(TutorialStep(
        step_id=s5,
        prompt="Final check: annotate this short passage on your own.",
        tokens=t5,
        mentions=_step_mentions(s5, [(0, 0), (2, 2), (2, 3), (5, 6),
                                         (8, 8), (11, 11), (11, 12), (15, 15),
                                         (18, 18), (20, 22), (25, 26)]),
        gold_clusters=[
            [_mid(s5, 0, 0), _mid(s5, 2, 2), _mid(s5, 15, 15)],
            [_mid(s5, 2, 3), _mid(s5, 8, 8), _mid(s5, 11, 11),
             _mid(s5, 18, 18)],
            [_mid(s5, 5, 6), _mid(s5, 25, 26)],
            [_mid(s5, 11, 12)],
            [_mid(s5, 20, 22)],
        ],
        is_screening=True,
    ))

    script = TutorialScript(steps=steps)
    script.validate()
    return script
