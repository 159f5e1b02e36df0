"""Generators, reductions, transforms, and file formats."""

import json
import math

import mpmath
import pytest

from ujssp import core, greedy, instances, oracle
from ujssp.core import InputError, Instance, Job, ParseError, PrecisionError
from ujssp.greedy import SpecialCase
from ujssp.instances import (
    PppInstance,
    PppType,
    Scheme,
    from_csp,
    generate_ppp,
    generate_uniform,
    read_instance,
    read_manifest,
    read_ppp,
    reduce_ppp,
    to_csp,
    write_instance,
    write_manifest,
    write_ppp,
)


def _replay_joint_probability(scheme, seed):
    rng = instances._rng(seed)
    lo, hi = instances.SCHEME_JOINT_RANGE[scheme]
    return instances._uniform(rng, lo, hi)


class TestUniformGeneration:
    def test_weight_split_reproduces_joint_probability(self):
        for scheme in (Scheme.II, Scheme.III, Scheme.IV):
            inst = generate_uniform(40, scheme, seed=5)
            p = _replay_joint_probability(scheme, 5)
            prod = 1.0
            for j in inst.jobs:
                prod *= j.pi
            assert prod == pytest.approx(p, rel=1e-9)
            lo, hi = instances.SCHEME_JOINT_RANGE[scheme]
            assert lo <= p < hi

    def test_scheme_i_probability_range_large_n(self):
        inst = generate_uniform(10_000, Scheme.I, seed=6)
        assert all(0.01 <= j.pi < 0.99 for j in inst.jobs)
        assert all(50 <= j.reward <= 500 for j in inst.jobs)

    def test_fixed_seed_reproduces_bytes(self, tmp_path):
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        write_instance(generate_uniform(50, Scheme.II, seed=9), a)
        write_instance(generate_uniform(50, Scheme.II, seed=9), b)
        assert a.read_bytes() == b.read_bytes()

    def test_costs_stay_in_stated_interval(self):
        for scheme, seed in ((Scheme.I, 11), (Scheme.III, 12)):
            inst = generate_uniform(60, scheme, seed=seed)
            if scheme is Scheme.I:
                p = 1.0
                for j in inst.jobs:
                    p *= j.pi
            else:
                p = _replay_joint_probability(scheme, seed)
            for j in inst.jobs:
                lo = math.ceil(p * j.reward)
                hi = math.floor(j.pi * j.reward)
                if lo <= hi:
                    assert lo <= j.cost <= hi
                else:
                    assert j.cost == hi  # clamped after redraws

    def test_n_must_be_positive(self):
        with pytest.raises(InputError):
            generate_uniform(0, Scheme.I, seed=0)


class TestPppGeneration:
    def test_planted_split_products_equal(self):
        for seed in range(8):
            ppp = generate_ppp(5 + seed, PppType.II, seed=seed)
            left = right = 1
            split = set(ppp.planted_split)
            for idx, a in enumerate(ppp.integers, start=1):
                if idx in split:
                    left *= a
                else:
                    right *= a
            assert left == right
            assert all(2 <= a <= 100 for a in ppp.integers)

    def test_type_i_deterministic(self):
        a = generate_ppp(20, PppType.I, seed=31)
        b = generate_ppp(20, PppType.I, seed=31)
        assert a.integers == b.integers
        assert a.planted_split is None

    def test_inconsistent_planted_split_rejected(self):
        with pytest.raises(InputError):
            PppInstance(integers=(2, 3), type=PppType.II, planted_split=(1,))

    def test_n_below_two_rejected(self):
        with pytest.raises(InputError):
            generate_ppp(1, PppType.I, seed=0)


class TestPppReduction:
    def test_two_twos_values(self):
        ppp = PppInstance(integers=(2, 2), type=PppType.I)
        inst = reduce_ppp(ppp)
        with mpmath.workprec(inst.precision_bits):
            for job in inst.jobs:
                assert abs(job.pi - mpmath.mpf(1) / 2) < mpmath.mpf(2) ** -100
                assert abs(job.reward - 2) < mpmath.mpf(2) ** -100
                assert abs(job.cost - mpmath.log(2)) < mpmath.mpf(2) ** -100
            tau = instances.ppp_threshold(ppp, inst.precision_bits)
            assert abs(tau - (1 - mpmath.log(2))) < mpmath.mpf(2) ** -100

    def test_all_z_indices_equal_sqrt_of_product(self):
        ppp = generate_ppp(9, PppType.I, seed=14)
        inst = reduce_ppp(ppp)
        with mpmath.workprec(inst.precision_bits):
            sqrt_w = mpmath.sqrt(ppp.product)
            for job in inst.jobs:
                assert abs(core.z_index(job) - sqrt_w) \
                       < sqrt_w * mpmath.mpf(2) ** -90

    def test_no_partition_threshold_unreachable_by_enumeration(self):
        ppp = PppInstance(integers=(2, 3), type=PppType.I)
        inst = reduce_ppp(ppp)
        res = oracle.brute_force(inst)
        tau = instances.ppp_threshold(ppp, inst.precision_bits)
        assert res.optimum.objective < tau

    def test_insufficient_precision_rejected(self):
        ppp = generate_ppp(12, PppType.I, seed=2)
        with pytest.raises(PrecisionError):
            reduce_ppp(ppp, precision_bits=8)


class TestCspTransform:
    def test_roundtrip(self):
        colleges = [(900.0, 0.3, 12.0), (650.0, 0.55, 30.0), (400.0, 0.8, 5.0)]
        back = to_csp(from_csp(colleges))
        for (w, a, c), (w2, a2, c2) in zip(colleges, back):
            assert w2 == pytest.approx(w, rel=1e-12)
            assert a2 == pytest.approx(a, rel=1e-12)
            assert c2 == pytest.approx(c, rel=1e-12)

    def test_z_index_equals_utility(self):
        colleges = [(900.0, 0.3, 12.0), (650.0, 0.55, 30.0)]
        inst = from_csp(colleges)
        for job, (w, _, _) in zip(inst.jobs, colleges):
            assert core.z_index(job) == pytest.approx(w, rel=1e-12)

    def test_degenerate_acceptance_probability_rejected(self):
        with pytest.raises(InputError):
            from_csp([(100.0, 0.0, 1.0)])
        with pytest.raises(InputError):
            from_csp([(100.0, 1.0, 1.0)])
        inst = Instance(jobs=(Job(id=1, pi=1.0, cost=1, reward=5),))
        with pytest.raises(InputError):
            to_csp(inst)

    def test_equal_fee_portfolio_certified_greedy_optimal(self):
        import numpy as np
        rng = np.random.Generator(np.random.Philox(55))
        for _ in range(10):
            n = int(rng.integers(3, 11))
            colleges = [(float(rng.integers(100, 1000)),
                         0.05 + 0.9 * float(rng.random()), 20.0)
                        for _ in range(n)]
            inst = from_csp(colleges)
            assert greedy.classify_special_case(inst) is \
                   SpecialCase.IDENTICAL_COSTS
            g = greedy.greedy_select(inst).objective
            opt = oracle.brute_force(inst).optimum.objective
            assert g == pytest.approx(opt, rel=1e-9, abs=1e-9)


class TestInstanceFiles:
    def test_write_read_write_identity(self, tmp_path):
        inst = generate_uniform(25, Scheme.I, seed=77)
        a = tmp_path / "a.json"
        b = tmp_path / "b.json"
        write_instance(inst, a)
        write_instance(read_instance(a), b)
        assert a.read_bytes() == b.read_bytes()

    def test_missing_field_named(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"n": 1, "jobs": [{"id": 1, "pi": 0.5, "c": 1}], '
                        '"precision": "f64"}')
        with pytest.raises(ParseError, match="'r'"):
            read_instance(path)

    def test_malformed_json_reported(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ParseError, match="invalid JSON"):
            read_instance(path)

    def test_high_precision_roundtrip_at_200_bits(self, tmp_path):
        with mpmath.workprec(200):
            jobs = tuple(Job(id=i + 1, pi=1 / mpmath.mpf(3 + i),
                             cost=mpmath.log(3 + i),
                             reward=mpmath.sqrt(7 + i))
                         for i in range(4))
        inst = Instance(jobs=jobs, precision_bits=200)
        path = tmp_path / "hp.json"
        write_instance(inst, path)
        again = read_instance(path)
        assert again.precision_bits == 200
        for a, b in zip(inst.jobs, again.jobs):
            assert a.pi == b.pi
            assert a.cost == b.cost
            assert a.reward == b.reward

    def test_high_precision_requires_decimal_strings(self, tmp_path):
        path = tmp_path / "hp.json"
        path.write_text('{"n": 1, "jobs": [{"id": 1, "pi": 0.5, "c": "1", '
                        '"r": "2"}], "precision": {"bits": 100}}')
        with pytest.raises(ParseError, match="decimal strings"):
            read_instance(path)

    def test_ppp_file_roundtrip(self, tmp_path):
        ppp = generate_ppp(8, PppType.II, seed=3)
        path = tmp_path / "ppp.json"
        write_ppp(ppp, path)
        again = read_ppp(path)
        assert again == ppp

    def test_manifest_roundtrip(self, tmp_path):
        rows = [{"seed": 3, "n": 10, "scheme": "ii", "path": "x.json"},
                {"seed": 4, "n": 12, "scheme": "ppp-I", "path": "y.json"}]
        path = tmp_path / "manifest.csv"
        write_manifest(rows, path)
        assert read_manifest(path) == rows

    def test_manifest_header_enforced(self, tmp_path):
        path = tmp_path / "manifest.csv"
        path.write_text("wrong,header\n1,2\n")
        with pytest.raises(ParseError):
            read_manifest(path)
