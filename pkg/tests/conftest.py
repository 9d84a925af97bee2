import time

import numpy as np
import pytest

from rlwgal.basis import make_basis
from rlwgal.problems import (
    ExactSoliton,
    SolitonSpec,
    WaveMakerForcing,
    WaveMakerSpec,
    soliton_ic,
    two_soliton_ic,
    zero_profile,
)
from rlwgal.solver import RLWProblem, RLWSolver


class TimedRun:
    """A finished experiment run plus everything needed to interrogate it."""

    def __init__(self, problem, p, record, exact=None, crest_min=None):
        self.problem = problem
        self.basis = make_basis(p, problem.h)
        self.solver = RLWSolver(problem, self.basis)
        self.states = []
        t0 = time.perf_counter()
        self.report = self.solver.run(
            record, exact=exact, crest_min_height=crest_min,
            on_record=self.states.append)
        self.seconds = time.perf_counter() - t0


@pytest.fixture(scope="session")
def table2_run():
    spec = SolitonSpec(c=0.1)
    problem = RLWProblem(epsilon=1.0, mu=1.0, a=-40.0, b=60.0, N=800,
                         dt=0.1, T=20.0, ic=soliton_ic(spec))
    return TimedRun(problem, 0.01262, [0, 4, 8, 12, 16, 20],
                    exact=ExactSoliton(spec), crest_min=0.1)


@pytest.fixture(scope="session")
def table3_run():
    spec = SolitonSpec(c=0.03)
    problem = RLWProblem(epsilon=1.0, mu=1.0, a=-40.0, b=60.0, N=800,
                         dt=0.1, T=20.0, ic=soliton_ic(spec))
    return TimedRun(problem, 0.01262, [0, 4, 8, 12, 16, 20],
                    exact=ExactSoliton(spec), crest_min=0.03)


@pytest.fixture(scope="session")
def table3_extended_run():
    spec = SolitonSpec(c=0.03)
    problem = RLWProblem(epsilon=1.0, mu=1.0, a=-80.0, b=120.0, N=1600,
                         dt=0.1, T=20.0, ic=soliton_ic(spec))
    return TimedRun(problem, 0.01262, [20], exact=ExactSoliton(spec))


@pytest.fixture(scope="session")
def interact_run():
    problem = RLWProblem(epsilon=1.0, mu=1.0, a=0.0, b=120.0, N=400,
                         dt=0.1, T=30.0,
                         ic=two_soliton_ic(0.4, 0.3, 15.0, 35.0))
    return TimedRun(problem, 1.0, [0, 5, 10, 15, 20, 25, 30], crest_min=1.0)


@pytest.fixture(scope="session")
def wavemaker_run():
    spec = WaveMakerSpec(U0=2.0, tau=0.3, t0=20.0)
    problem = RLWProblem(epsilon=1.0, mu=1.0, a=0.0, b=260.0, N=650,
                         dt=0.1, T=100.0, ic=zero_profile,
                         beta1=WaveMakerForcing(spec))
    return TimedRun(problem, 1.0, [2.5, 5, 7.5, 10, 15, 20, 40, 60, 80, 100],
                    crest_min=0.5)
