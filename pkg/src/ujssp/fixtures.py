"""Built-in regression instances used by ``ujssp verify`` and the tests.

Three small hand-checkable instances plus the smallest perfect-partition
input.  Values frozen here are cross-checked by the verification
command; alter them only together with the recorded expectations.
"""

from __future__ import annotations

from .core import Instance, Job
from .instances import PppInstance, PppType


def unit_reward_trio() -> Instance:
    """n=3, unit rewards; greedy picks {1,2} (0.103), optimum {1,3} (0.113)."""
    return Instance(jobs=(
        Job(id=1, pi=0.9, cost=0.81, reward=1),
        Job(id=2, pi=0.87, cost=0.77, reward=1),
        Job(id=3, pi=0.67, cost=0.58, reward=1),
    ))


def equal_expected_reward_quartet() -> Instance:
    """n=4, pi*reward = 80 throughout; greedy 80.6 vs optimum 82.8."""
    return Instance(jobs=(
        Job(id=1, pi=0.8, cost=57, reward=100),
        Job(id=2, pi=0.4, cost=24, reward=200),
        Job(id=3, pi=0.2, cost=8, reward=400),
        Job(id=4, pi=0.1, cost=9, reward=800),
    ))


def stepwise_quartet() -> Instance:
    """n=4 walkthrough instance; optimum {1,3} with value 173.75."""
    return Instance(jobs=(
        Job(id=1, pi=0.75, cost=75, reward=250),
        Job(id=2, pi=0.5, cost=150, reward=500),
        Job(id=3, pi=0.5, cost=70, reward=350),
        Job(id=4, pi=0.6, cost=30, reward=100),
    ))


def ppp_two_twos() -> PppInstance:
    """{2, 2}: perfect partition ({2} | {2}), objective 1 - ln 2."""
    return PppInstance(integers=(2, 2), type=PppType.II, planted_split=(1,))
