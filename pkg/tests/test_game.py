import io
import json
import random

import pytest

from beaconquiz import game as quiz
from beaconquiz.game import (
    GameState,
    IllegalTransition,
    Phase,
    Question,
    QuestionBank,
    QuestionBankError,
    load_question_bank,
)
from beaconquiz.localization import NO_SELECTION, CornerSelection


def bank_of(n, correct_index=1):
    return QuestionBank(
        questions=tuple(
            Question(f"q{i}", f"Question {i}?", ("a", "b", "c", "d"), correct_index)
            for i in range(n)
        ),
        ladder=tuple(str((i + 1) * 100) for i in range(n)),
    )


def selection(corner):
    return CornerSelection(corner, since_ms=0)


class TestLoadQuestionBank:
    def test_single_valid_question(self):
        doc = {
            "questions": [
                {"id": "q1", "text": "t?", "answers": ["a", "b", "c", "d"], "correct_index": 2}
            ],
            "ladder": ["100"],
        }
        bank = load_question_bank(doc)
        assert len(bank) == 1
        assert bank.questions[0].correct_index == 2

    def test_three_answers_rejected(self):
        doc = {"questions": [{"text": "t?", "answers": ["a", "b", "c"], "correct_index": 0}]}
        with pytest.raises(QuestionBankError, match="expected 4 answers"):
            load_question_bank(doc)

    def test_fifteen_questions_with_ladder(self):
        doc = {
            "questions": [
                {"id": f"q{i}", "text": "t?", "answers": ["a", "b", "c", "d"], "correct_index": 0}
                for i in range(15)
            ],
            "ladder": [str(i) for i in range(15)],
        }
        bank = load_question_bank(doc)
        assert len(bank) == 15
        assert len(bank.ladder) == 15

    def test_empty_bank_rejected(self):
        with pytest.raises(QuestionBankError, match="non-empty"):
            load_question_bank({"questions": []})

    def test_bad_correct_index(self):
        doc = {"questions": [{"text": "t?", "answers": ["a", "b", "c", "d"], "correct_index": 4}]}
        with pytest.raises(QuestionBankError, match="correct_index"):
            load_question_bank(doc)

    def test_missing_field(self):
        doc = {"questions": [{"answers": ["a", "b", "c", "d"], "correct_index": 0}]}
        with pytest.raises(QuestionBankError, match="text"):
            load_question_bank(doc)

    def test_ladder_length_mismatch(self):
        doc = {
            "questions": [
                {"text": "t?", "answers": ["a", "b", "c", "d"], "correct_index": 0}
            ],
            "ladder": ["100", "200"],
        }
        with pytest.raises(QuestionBankError, match="ladder"):
            load_question_bank(doc)

    def test_load_from_stream(self):
        doc = {
            "questions": [
                {"text": "t?", "answers": ["a", "b", "c", "d"], "correct_index": 1}
            ]
        }
        bank = load_question_bank(io.StringIO(json.dumps(doc)))
        assert len(bank) == 1

    def test_default_bank_ships_fifteen(self):
        bank = quiz.default_question_bank()
        assert len(bank) == 15
        assert len(bank.ladder) == 15


class TestStartGame:
    def test_starts_at_question_zero(self):
        state = quiz.start_game(bank_of(1), random.Random(1))
        assert state.phase == Phase.QUESTION_SHOWN
        assert state.question_index == 0
        assert state.score_level == 0

    def test_same_seed_same_mapping_sequence(self):
        bank = bank_of(8)

        def mapping_sequence(seed):
            rng = random.Random(seed)
            state = quiz.start_game(bank, rng)
            maps = [state.answers_mapping]
            for _ in range(len(bank) - 1):
                state = quiz.apply_selection(state, selection(state.correct_corner(bank)))
                state = quiz.confirm(state, bank)
                state = quiz.advance(state, bank, rng)
                maps.append(state.answers_mapping)
            return maps

        assert mapping_sequence(1234) == mapping_sequence(1234)

    def test_mapping_always_a_permutation(self):
        bank = bank_of(1)
        for seed in range(1000):
            state = quiz.start_game(bank, random.Random(seed))
            assert sorted(state.answers_mapping) == [0, 1, 2, 3]

    def test_shuffle_disabled_gives_identity(self):
        state = quiz.start_game(bank_of(1), random.Random(1), shuffle_answers=False)
        assert state.answers_mapping == (0, 1, 2, 3)


class TestApplySelection:
    def test_selection_highlights_corner(self):
        state = quiz.start_game(bank_of(2), random.Random(1))
        state = quiz.apply_selection(state, selection(2))
        assert state.phase == Phase.ANSWER_HIGHLIGHTED
        assert state.highlighted == 2

    def test_lost_selection_returns_to_question(self):
        state = quiz.start_game(bank_of(2), random.Random(1))
        state = quiz.apply_selection(state, selection(2))
        state = quiz.apply_selection(state, NO_SELECTION)
        assert state.phase == Phase.QUESTION_SHOWN
        assert state.highlighted is None

    def test_same_corner_is_idempotent(self):
        state = quiz.start_game(bank_of(2), random.Random(1))
        state = quiz.apply_selection(state, selection(2))
        assert quiz.apply_selection(state, selection(2)) is state

    def test_ignored_during_feedback(self):
        state = quiz.start_game(bank_of(2), random.Random(1))
        state = quiz.apply_selection(state, selection(0))
        state = quiz.confirm(state, bank_of(2))
        after = quiz.apply_selection(state, selection(3))
        assert after is state
        assert after.phase == Phase.FEEDBACK

    def test_ignored_in_terminal_phases(self):
        for phase in (Phase.WON, Phase.GAME_OVER, Phase.IDLE):
            state = GameState(phase=phase)
            assert quiz.apply_selection(state, selection(1)) is state


class TestConfirm:
    def test_correct_answer(self):
        bank = bank_of(2)
        state = quiz.start_game(bank, random.Random(1))
        state = quiz.apply_selection(state, selection(state.correct_corner(bank)))
        state = quiz.confirm(state, bank)
        assert state.phase == Phase.FEEDBACK
        assert state.feedback_correct is True
        assert state.score_level == 1
        assert state.highlighted is None  # highlight only exists while highlighted

    def test_wrong_answer(self):
        bank = bank_of(2)
        state = quiz.start_game(bank, random.Random(1))
        wrong = next(k for k in range(4) if k != state.correct_corner(bank))
        state = quiz.confirm(quiz.apply_selection(state, selection(wrong)), bank)
        assert state.feedback_correct is False
        assert state.score_level == 0

    def test_confirm_outside_highlight_is_illegal(self):
        bank = bank_of(2)
        state = quiz.start_game(bank, random.Random(1))
        with pytest.raises(IllegalTransition):
            quiz.confirm(state, bank)


class TestAdvance:
    def test_correct_moves_to_next_question(self):
        bank = bank_of(2)
        rng = random.Random(1)
        state = quiz.start_game(bank, rng)
        state = quiz.confirm(quiz.apply_selection(state, selection(state.correct_corner(bank))), bank)
        state = quiz.advance(state, bank, rng)
        assert state.phase == Phase.QUESTION_SHOWN
        assert state.question_index == 1

    def test_correct_on_last_question_wins(self):
        bank = bank_of(1)
        rng = random.Random(1)
        state = quiz.start_game(bank, rng)
        state = quiz.confirm(quiz.apply_selection(state, selection(state.correct_corner(bank))), bank)
        state = quiz.advance(state, bank, rng)
        assert state.phase == Phase.WON

    def test_wrong_ends_game(self):
        bank = bank_of(3)
        rng = random.Random(1)
        state = quiz.start_game(bank, rng)
        wrong = next(k for k in range(4) if k != state.correct_corner(bank))
        state = quiz.confirm(quiz.apply_selection(state, selection(wrong)), bank)
        state = quiz.advance(state, bank, rng)
        assert state.phase == Phase.GAME_OVER

    def test_advance_outside_feedback_is_illegal(self):
        bank = bank_of(2)
        state = quiz.start_game(bank, random.Random(1))
        with pytest.raises(IllegalTransition):
            quiz.advance(state, bank, random.Random(1))


class TestResetGame:
    @pytest.mark.parametrize(
        "phase", [Phase.IDLE, Phase.QUESTION_SHOWN, Phase.FEEDBACK, Phase.WON, Phase.GAME_OVER]
    )
    def test_any_phase_resets_to_idle(self, phase):
        assert quiz.reset_game(GameState(phase=phase)).phase == Phase.IDLE

    def test_idempotent(self):
        once = quiz.reset_game(GameState(phase=Phase.WON))
        assert quiz.reset_game(once) == once


class TestFullGames:
    def test_winning_path(self):
        bank = bank_of(15)
        rng = random.Random(777)
        state = quiz.start_game(bank, rng)
        while state.phase not in (Phase.WON, Phase.GAME_OVER):
            state = quiz.apply_selection(state, selection(state.correct_corner(bank)))
            state = quiz.confirm(state, bank)
            state = quiz.advance(state, bank, rng)
        assert state.phase == Phase.WON
        assert state.score_level == 15

    def test_losing_path_locks_the_game(self):
        bank = bank_of(5)
        rng = random.Random(42)
        state = quiz.start_game(bank, rng)
        wrong = next(k for k in range(4) if k != state.correct_corner(bank))
        state = quiz.advance(quiz.confirm(quiz.apply_selection(state, selection(wrong)), bank), bank, rng)
        assert state.phase == Phase.GAME_OVER
        with pytest.raises(IllegalTransition):
            quiz.confirm(state, bank)
        with pytest.raises(IllegalTransition):
            quiz.advance(state, bank, rng)
        assert quiz.apply_selection(state, selection(0)) is state
        assert quiz.reset_game(state).phase == Phase.IDLE
