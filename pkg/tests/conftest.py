import sys

import numpy as np
import pytest

from herdwatch import AgentModel, ObserverModel, solve


def make_fig1(alpha=0.8):
    return AgentModel(
        B=[[0.8, 0.2], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.0, 1.0]],
        c=[[1.0, 2.0], [3.0, 0.5]],
        alpha=alpha,
    )


def make_fig2(alpha=0.8):
    return AgentModel(
        B=[[0.8, 0.2], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.1, 0.9]],
        c=[[1.0, 2.0], [3.0, 0.5]],
        alpha=alpha,
    )


def make_fig3():
    model = AgentModel(
        B=[[0.8, 0.2], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.06, 0.94]],
        c=[[1.0, 2.0], [2.5, 0.5]],
        alpha=0.8,
    )
    obs = ObserverModel(f=[0.0, 3.0], d=1.25, rho=0.9)
    return model, obs


def make_skype(rho=0.9):
    model = AgentModel(
        B=[[0.7, 0.3], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.04, 0.96]],
        c=[[0.5, 1.0], [1.0, 0.5]],
        alpha=0.45,
    )
    obs = ObserverModel(f=[0.0, 2.0], d=0.8, rho=rho)
    return model, obs


def make_ipod(rho=0.9):
    model = AgentModel(
        B=[[0.7, 0.3], [0.3, 0.7]],
        P=[[1.0, 0.0], [0.11, 0.89]],
        c=[[0.5, 1.0], [1.0, 0.5]],
        alpha=0.45,
    )
    obs = ObserverModel(f=[0.0, 1.8], d=0.95, rho=rho)
    return model, obs


@pytest.fixture(scope="session")
def fig3_policy():
    model, obs = make_fig3()
    return solve(model, obs)


@pytest.fixture(scope="session")
def skype_policy():
    model, obs = make_skype()
    return solve(model, obs)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None) if mod else None
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
