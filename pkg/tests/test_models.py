from fractions import Fraction as F

import pytest
from pydantic import ValidationError

from billiards.models import GeneralizedDiagonal, PhasePoint, RunConfig, canonical_word, scalar_record
from billiards.modules.geomcore import Direction, Point, Segment
from billiards.settings import configure, settings, settings_context


def test_canonical_word_ignores_rotation_and_reversal():
    assert canonical_word((2, 3, 0, 1)) == (0, 1, 2, 3)
    assert canonical_word((3, 2, 1, 0)) == (0, 1, 2, 3)
    assert canonical_word((1, 3)) == canonical_word((3, 1))


def test_diagonal_key_is_symmetric():
    forward = GeneralizedDiagonal(
        start_vertex=0,
        end_vertex_copy=(1, 3),
        link_count=2,
        direction=Direction(F(2), F(1)),
        unfolded_segment=Segment(Point(0, 0), Point(2, 1)),
        word=(1,),
    )
    backward = forward.model_copy(update={"start_vertex": 3, "end_vertex_copy": (1, 0)})
    assert forward.key() == backward.key()


def test_scalar_records():
    assert scalar_record(F(1, 2)) == {"exact": "1/2", "float": 0.5}
    assert scalar_record(3) == {"exact": "3/1", "float": 3.0}
    assert scalar_record(0.25) == {"float": 0.25}


def test_phase_point_dump():
    data = PhasePoint(q=Point(F(1, 3), 0), v=Direction(F(1), F(0))).model_dump(mode="json")
    assert data["q"]["x"]["exact"] == "1/3"
    assert data["v"]["angle"] == 0
    assert data["floor_index"] is None


def test_run_config_rejects_a_bad_tolerance():
    assert RunConfig().backend == "exact"
    with pytest.raises(ValidationError):
        RunConfig(tolerance=0)
    with pytest.raises(ValidationError):
        RunConfig(backend="decimal")


def test_settings_context_restores_the_previous_value():
    before = settings.tolerance
    with settings_context(tolerance=1e-3) as current:
        assert current.tolerance == 1e-3
        assert settings.tolerance == 1e-3
    assert settings.tolerance == before


def test_settings_reject_negative_tolerances():
    with pytest.raises(ValidationError):
        with settings_context(tolerance=-1.0):
            pass
    assert settings.tolerance > 0


def test_configure_replaces_the_session_settings():
    before = settings.tolerance
    try:
        assert configure(tolerance=1e-4).tolerance == 1e-4
        assert settings.tolerance == 1e-4
    finally:
        configure(tolerance=before)
