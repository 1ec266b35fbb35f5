"""Millionaire-style quiz state machine.

Pure functions over an immutable GameState: walking into a corner
highlights the answer shown there, a confirm locks it in, a correct
answer climbs the prize ladder, a wrong one ends the game. Answers are
shuffled onto corners per question with a seeded permutation unless
shuffling is disabled.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from typing import IO

from .localization import CornerSelection

ANSWER_COUNT = 4

IDENTITY_MAPPING = (0, 1, 2, 3)


class Phase(str, Enum):
    IDLE = "idle"
    QUESTION_SHOWN = "question_shown"
    ANSWER_HIGHLIGHTED = "answer_highlighted"
    FEEDBACK = "feedback"
    WON = "won"
    GAME_OVER = "game_over"


class IllegalTransition(Exception):
    """Event not legal in the current phase."""


class QuestionBankError(ValueError):
    """Question bank file failed validation."""


@dataclass(frozen=True)
class Question:
    id: str
    text: str
    answers: tuple[str, str, str, str]
    correct_index: int

    def __post_init__(self):
        if len(self.answers) != ANSWER_COUNT:
            raise QuestionBankError(
                f"question {self.id!r}: expected {ANSWER_COUNT} answers, got {len(self.answers)}"
            )
        if any(not a for a in self.answers):
            raise QuestionBankError(f"question {self.id!r}: answers must be non-empty")
        if not 0 <= self.correct_index < ANSWER_COUNT:
            raise QuestionBankError(
                f"question {self.id!r}: correct_index must be 0-3, got {self.correct_index}"
            )
        if not self.text:
            raise QuestionBankError(f"question {self.id!r}: text must be non-empty")


@dataclass(frozen=True)
class QuestionBank:
    questions: tuple[Question, ...]
    ladder: tuple[str, ...]

    def __post_init__(self):
        if not self.questions:
            raise QuestionBankError("question bank must contain at least one question")
        if len(self.ladder) != len(self.questions):
            raise QuestionBankError(
                f"ladder has {len(self.ladder)} rungs for {len(self.questions)} questions"
            )

    def __len__(self) -> int:
        return len(self.questions)


def default_question_bank() -> QuestionBank:
    """The bank shipped with the package, used when no path is configured."""
    ref = resources.files(__package__).joinpath("data/questions.json")
    with ref.open("r", encoding="utf-8") as f:
        return load_question_bank(f)


def load_question_bank(source: str | IO[str] | dict) -> QuestionBank:
    """Load and validate a question bank from a path, stream, or dict."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, str):
        with open(source, "r", encoding="utf-8") as f:
            doc = json.load(f)
    else:
        doc = json.load(source)
    if not isinstance(doc, dict) or "questions" not in doc:
        raise QuestionBankError("expected an object with a 'questions' array")
    raw_questions = doc["questions"]
    if not isinstance(raw_questions, list) or not raw_questions:
        raise QuestionBankError("'questions' must be a non-empty array")
    questions = []
    for i, raw in enumerate(raw_questions):
        if not isinstance(raw, dict):
            raise QuestionBankError(f"questions[{i}]: expected an object")
        try:
            answers = raw["answers"]
            if not isinstance(answers, list):
                raise QuestionBankError(f"questions[{i}]: 'answers' must be an array")
            if len(answers) != ANSWER_COUNT:
                raise QuestionBankError(
                    f"questions[{i}]: expected {ANSWER_COUNT} answers, got {len(answers)}"
                )
            questions.append(
                Question(
                    id=str(raw.get("id", f"q{i + 1}")),
                    text=str(raw["text"]),
                    answers=tuple(str(a) for a in answers),
                    correct_index=raw["correct_index"],
                )
            )
        except KeyError as e:
            raise QuestionBankError(f"questions[{i}]: missing field {e.args[0]!r}") from e
        except TypeError as e:
            raise QuestionBankError(f"questions[{i}]: {e}") from e
    ladder = doc.get("ladder")
    if ladder is None:
        ladder = [str(i + 1) for i in range(len(questions))]
    if not isinstance(ladder, list):
        raise QuestionBankError("'ladder' must be an array of prize labels")
    return QuestionBank(questions=tuple(questions), ladder=tuple(str(r) for r in ladder))


@dataclass(frozen=True)
class GameState:
    phase: Phase = Phase.IDLE
    question_index: int = 0
    highlighted: int | None = None  # only set in ANSWER_HIGHLIGHTED
    answers_mapping: tuple[int, int, int, int] = IDENTITY_MAPPING  # corner -> answer slot
    score_level: int = 0
    feedback_correct: bool | None = None  # only set in FEEDBACK
    confirmed_corner: int | None = None  # corner judged in the last FEEDBACK

    def current_question(self, bank: QuestionBank) -> Question:
        return bank.questions[self.question_index]

    def correct_corner(self, bank: QuestionBank) -> int:
        """The corner whose mapped answer slot is the correct one."""
        return self.answers_mapping.index(self.current_question(bank).correct_index)


IDLE_STATE = GameState()


def _draw_mapping(rng: random.Random, shuffle_answers: bool) -> tuple[int, int, int, int]:
    if not shuffle_answers:
        return IDENTITY_MAPPING
    mapping = rng.sample(range(ANSWER_COUNT), ANSWER_COUNT)
    return tuple(mapping)  # type: ignore[return-value]


def start_game(
    bank: QuestionBank, rng: random.Random, shuffle_answers: bool = True
) -> GameState:
    """Begin a fresh game at question 0 with a freshly drawn corner mapping."""
    return GameState(
        phase=Phase.QUESTION_SHOWN,
        question_index=0,
        highlighted=None,
        answers_mapping=_draw_mapping(rng, shuffle_answers),
        score_level=0,
    )


def apply_selection(state: GameState, selection: CornerSelection) -> GameState:
    """Reflect the localization selection on screen.

    Only acts in QUESTION_SHOWN and ANSWER_HIGHLIGHTED; anywhere else
    (feedback, game over, ...) walking must not change the screen, so
    the call is a no-op.
    """
    if state.phase not in (Phase.QUESTION_SHOWN, Phase.ANSWER_HIGHLIGHTED):
        return state
    corner = selection.selected
    if corner is None:
        if state.phase == Phase.QUESTION_SHOWN:
            return state
        return replace(state, phase=Phase.QUESTION_SHOWN, highlighted=None)
    if state.phase == Phase.ANSWER_HIGHLIGHTED and state.highlighted == corner:
        return state
    return replace(state, phase=Phase.ANSWER_HIGHLIGHTED, highlighted=corner)


def confirm(state: GameState, bank: QuestionBank) -> GameState:
    """Lock in the highlighted answer and judge it."""
    if state.phase != Phase.ANSWER_HIGHLIGHTED or state.highlighted is None:
        raise IllegalTransition(f"confirm is not legal in phase {state.phase.value}")
    question = state.current_question(bank)
    correct = state.answers_mapping[state.highlighted] == question.correct_index
    return replace(
        state,
        phase=Phase.FEEDBACK,
        highlighted=None,
        feedback_correct=correct,
        confirmed_corner=state.highlighted,
        score_level=state.score_level + 1 if correct else state.score_level,
    )


def advance(
    state: GameState,
    bank: QuestionBank,
    rng: random.Random,
    shuffle_answers: bool = True,
) -> GameState:
    """Leave the feedback screen: next question, victory, or game over."""
    if state.phase != Phase.FEEDBACK:
        raise IllegalTransition(f"advance is not legal in phase {state.phase.value}")
    if not state.feedback_correct:
        return replace(state, phase=Phase.GAME_OVER, feedback_correct=None)
    if state.question_index + 1 < len(bank):
        return replace(
            state,
            phase=Phase.QUESTION_SHOWN,
            question_index=state.question_index + 1,
            answers_mapping=_draw_mapping(rng, shuffle_answers),
            feedback_correct=None,
            confirmed_corner=None,
        )
    return replace(state, phase=Phase.WON, feedback_correct=None)


def reset_game(state: GameState) -> GameState:
    """Back to idle; the caller also resets the signal pipeline."""
    return IDLE_STATE
