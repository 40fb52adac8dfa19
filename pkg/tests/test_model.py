import numpy as np
import pytest

from herdwatch import (
    AgentModel,
    ValidationError,
    fosd_compare,
    is_tp2,
    mlr_compare,
    validate_model,
)
from herdwatch.model import Belief, belief_vector

from conftest import make_fig1, make_fig2


def test_model_shape_checks():
    with pytest.raises(ValidationError):
        AgentModel(B=[[1.0]], P=[[1.0]], c=[[0.0, 1.0]], alpha=0.5)
    with pytest.raises(ValidationError):
        AgentModel(
            B=[[0.5, 0.5], [0.5, 0.5]],
            P=[[1.0, 0.0]],
            c=[[0.0, 1.0], [1.0, 0.0]],
            alpha=0.5,
        )
    with pytest.raises(ValidationError):
        AgentModel(
            B=[[0.5, 0.5], [0.5, 0.5]],
            P=np.eye(2),
            c=[[0.0], [1.0]],
            alpha=0.5,
        )


def test_model_stochastic_checks():
    with pytest.raises(ValidationError):
        AgentModel(
            B=[[0.7, 0.2], [0.3, 0.7]],
            P=np.eye(2),
            c=[[1.0, 2.0], [3.0, 0.5]],
            alpha=0.5,
        )
    with pytest.raises(ValidationError):
        AgentModel(
            B=[[0.8, 0.2], [0.3, 0.7]],
            P=[[1.0, 0.0], [-0.1, 1.1]],
            c=[[1.0, 2.0], [3.0, 0.5]],
            alpha=0.5,
        )


@pytest.mark.parametrize("alpha", [0.0, -0.2, 1.5])
def test_model_alpha_range(alpha):
    with pytest.raises(ValidationError):
        make_fig1(alpha=alpha)


def test_model_matrices_frozen():
    model = make_fig1()
    with pytest.raises(ValueError):
        model.B[0, 0] = 0.5


def test_with_alpha_and_key():
    model = make_fig1(alpha=0.8)
    other = model.with_alpha(0.3)
    assert other.alpha == 0.3
    assert model.alpha == 0.8
    assert model.key() != other.key()
    assert model.key() == make_fig1(alpha=0.8).key()


def test_belief_vector_validation():
    assert np.allclose(belief_vector([0.25, 0.75]), [0.25, 0.75])
    with pytest.raises(ValidationError):
        belief_vector([0.5, 0.6])
    with pytest.raises(ValidationError):
        belief_vector([-0.1, 1.1])
    with pytest.raises(ValidationError):
        belief_vector([0.5, 0.5], X=3)


def test_belief_wrapper():
    b = Belief(np.array([0.4, 0.6]))
    assert b.X == 2
    assert len(b) == 2
    assert b[1] == 0.6
    with pytest.raises(ValueError):
        b.pi[0] = 1.0


def test_is_tp2():
    assert is_tp2([[0.8, 0.2], [0.3, 0.7]])
    assert not is_tp2([[0.2, 0.8], [0.7, 0.3]])
    assert is_tp2(np.eye(3))


def test_mlr_worked_pair():
    # 0.7*0.7 > 0.3*0.3, so [0.3,0.7] puts relatively more mass on the
    # high state and dominates.
    assert mlr_compare([0.7, 0.3], [0.3, 0.7]) == "leq"
    assert mlr_compare([0.3, 0.7], [0.7, 0.3]) == "geq"
    assert mlr_compare([0.5, 0.5], [0.5, 0.5]) == "equal"


def test_fosd_worked_pair():
    assert fosd_compare([0.7, 0.3], [0.3, 0.7]) == "leq"
    assert fosd_compare([0.5, 0.0, 0.5], [0.0, 1.0, 0.0]) == "incomparable"


def test_mlr_implies_fosd(rng):
    hits = 0
    for _ in range(300):
        X = int(rng.integers(2, 5))
        p1 = rng.dirichlet(np.ones(X))
        p2 = rng.dirichlet(np.ones(X))
        rel = mlr_compare(p1, p2)
        if rel in ("leq", "equal"):
            hits += 1
            assert fosd_compare(p1, p2) in ("leq", "equal")
        if rel in ("geq", "equal"):
            assert fosd_compare(p1, p2) in ("geq", "equal")
    assert hits > 0


def test_mlr_incomparable_three_states():
    assert mlr_compare([0.4, 0.2, 0.4], [0.2, 0.6, 0.2]) == "incomparable"


def test_validate_model_flags_fig1():
    report = validate_model(make_fig1())
    assert report.b_is_tp2
    assert report.p_is_tp2
    assert report.a1_holds
    # cost differences [1, -2.5] decrease, so only the reversed form holds
    assert not report.c_submodular_literal
    assert report.c_submodular_reversed
    # the scan reaches e_2 where eta is degenerate, so the min is exactly 0
    assert 0.0 <= report.alpha_condition_min < 1.0


def test_validate_model_flags_fig2():
    report = validate_model(make_fig2())
    assert report.b_is_tp2
    assert report.p_is_tp2


def test_validate_model_summary_text():
    text = validate_model(make_fig1()).summary()
    assert "TP2" in text
    assert "alpha condition min" in text


def test_validate_certified_generator(rng):
    from oracles import random_certified_model

    for _ in range(25):
        model = random_certified_model(rng, Y=int(rng.integers(2, 5)))
        report = validate_model(model)
        assert report.b_is_tp2
        assert report.p_is_tp2
        assert report.c_submodular_literal
