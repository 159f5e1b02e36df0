"""Greedy selection and the special-case classifier."""

import numpy as np
import pytest

from conftest import rand_instance
from ujssp import greedy, oracle
from ujssp.core import Instance, Job
from ujssp.greedy import SpecialCase, classify_special_case, greedy_select


class TestGreedyExamples:
    def test_unit_trio_stops_early(self, unit_trio):
        sol = greedy_select(unit_trio)
        assert sol.selected == (1, 2)
        assert sol.objective == pytest.approx(0.103)

    def test_equal_er_quartet_misses_optimum(self, equal_er_quartet):
        sol = greedy_select(equal_er_quartet)
        assert sol.selected == (1, 2, 3)
        assert sol.objective == pytest.approx(80.6)

    def test_no_profitable_job_selects_nothing(self):
        inst = Instance(jobs=(Job(id=1, pi=0.3, cost=50, reward=100),
                              Job(id=2, pi=0.5, cost=60, reward=100)))
        sol = greedy_select(inst)
        assert sol.selected == ()
        assert sol.objective == 0


class TestClassifier:
    def test_identical_costs(self):
        jobs = tuple(Job(id=i + 1, pi=0.1 * (i + 1), cost=5, reward=50)
                     for i in range(4))
        assert classify_special_case(Instance(jobs=jobs)) is \
               SpecialCase.IDENTICAL_COSTS

    def test_identical_probabilities(self):
        jobs = tuple(Job(id=i + 1, pi=0.3, cost=5 + i, reward=50)
                     for i in range(4))
        assert classify_special_case(Instance(jobs=jobs)) is \
               SpecialCase.IDENTICAL_PROBABILITIES

    def test_unit_trio_is_general(self, unit_trio):
        assert classify_special_case(unit_trio) is SpecialCase.GENERAL


class TestOptimalityAndBounds:
    def _special_instances(self):
        rng = np.random.Generator(np.random.Philox(123))
        out = []
        for k in range(20):
            n = int(rng.integers(3, 13))
            if k % 2 == 0:
                cost = float(rng.integers(5, 60))
                jobs = tuple(Job(id=i + 1,
                                 pi=0.05 + 0.9 * float(rng.random()),
                                 cost=cost,
                                 reward=float(rng.integers(50, 500)))
                             for i in range(n))
            else:
                pi = 0.05 + 0.9 * float(rng.random())
                jobs = tuple(Job(id=i + 1, pi=pi,
                                 cost=float(rng.integers(1, 200)),
                                 reward=float(rng.integers(50, 500)))
                             for i in range(n))
            out.append(Instance(jobs=jobs))
        return out

    def test_certified_cases_match_enumeration(self):
        for inst in self._special_instances():
            assert classify_special_case(inst) is not SpecialCase.GENERAL
            g = greedy_select(inst)
            opt = oracle.brute_force(inst).optimum.objective
            assert g.objective == pytest.approx(opt, rel=1e-9, abs=1e-9)

    def test_feasible_hence_never_above_optimum(self):
        for k in range(30):
            inst = rand_instance(seed=880 + k, n=4 + k % 10)
            g = greedy_select(inst)
            opt = oracle.brute_force(inst).optimum.objective
            assert g.objective <= opt + 1e-9

    def test_rounds_strictly_improve_and_match_direct_simulation(self):
        from ujssp.core import net_profit
        for seed in (99, 100, 101):
            inst = rand_instance(seed=seed, n=12)
            sol = greedy_select(inst)
            chosen = []
            current = 0.0
            while True:
                remaining = [j.id for j in inst.jobs if j.id not in chosen]
                gains = [(net_profit(inst, chosen + [j]) - current, j)
                         for j in remaining]
                if not gains:
                    break
                best_gain = max(g for g, _ in gains)
                if best_gain <= 1e-12:
                    break
                chosen.append(min(j for g, j in gains if g == best_gain))
                new_val = net_profit(inst, chosen)
                assert new_val > current
                current = new_val
            assert set(chosen) == set(sol.selected)
            assert sol.objective == pytest.approx(current, rel=1e-12)

    def test_evaluation_counter_within_quadratic_budget(self):
        for k in range(10):
            n = 5 + k
            inst = rand_instance(seed=930 + k, n=n)
            sol = greedy_select(inst)
            assert sol.stats.subsets_evaluated <= n * (n + 1) // 2 + n
