"""Model construction, family validation, generation, and file round-trips.

Claims checked here:
    - validate_family matches the degree and (d-1)*tanh|beta| <= gamma rules
      and is monotone in gamma
    - members of a gamma < 1 family keep every coupling below the critical one
    - critical_coupling matches arctanh(1/(d-1)) and decreases in d
    - random_instance is deterministic, respects the degree cap, and lands
      in the intended family by construction
    - serialization is canonical and byte-stable; the parser rejects
      malformed files with messages naming the offender
"""

import math

import numpy as np
import pytest

from isingmax import (
    FamilyParams,
    IsingModel,
    ModelFormatError,
    WeightVector,
    critical_coupling,
    parse_model,
    random_instance,
    random_weights,
    serialize_model,
    validate_family,
)
from isingmax.model import canonical_edge, induced_submodel


def path_model(n, beta=0.3, h=0.0):
    return IsingModel(
        n=n,
        beta={(i, i + 1): beta for i in range(n - 1)},
        h=np.full(n, float(h)),
    )


class TestIsingModel:
    def test_adjacency_is_symmetric_and_sorted(self):
        m = IsingModel(n=4, beta={(0, 2): 0.1, (1, 2): -0.2, (0, 3): 0.3}, h=np.zeros(4))
        assert m.adjacency == ((2, 3), (2,), (0, 1), (0,))

    def test_self_loop_rejected(self):
        with pytest.raises(ModelFormatError, match="self-loop at vertex 1"):
            IsingModel(n=2, beta={(1, 1): 0.5}, h=np.zeros(2))

    def test_non_canonical_edge_key_rejected(self):
        with pytest.raises(ModelFormatError, match="canonical"):
            IsingModel(n=2, beta={(1, 0): 0.5}, h=np.zeros(2))

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(ModelFormatError, match="unknown vertex"):
            IsingModel(n=2, beta={(0, 5): 0.5}, h=np.zeros(2))

    def test_empty_model_rejected(self):
        with pytest.raises(ModelFormatError):
            IsingModel(n=0, beta={}, h=np.zeros(0))

    def test_model_is_immutable(self):
        m = path_model(3)
        with pytest.raises(ValueError):
            m.h[0] = 1.0

    def test_induced_submodel_keeps_parameters(self):
        m = IsingModel(n=4, beta={(0, 1): 0.1, (1, 2): 0.2, (2, 3): 0.3}, h=np.arange(4.0))
        sub, ids = induced_submodel(m, [1, 2, 3])
        assert ids == (1, 2, 3)
        assert sub.beta == {(0, 1): 0.2, (1, 2): 0.3}
        assert np.array_equal(sub.h, np.array([1.0, 2.0, 3.0]))


class TestValidateFamily:
    def test_single_vertex_vacuous(self):
        m = IsingModel(n=1, beta={}, h=np.zeros(1))
        assert validate_family(m, FamilyParams(3, 0.9))

    def test_one_edge_boundary_case(self):
        # (3-1) * tanh(0.4) = 0.7598979... <= 0.76; confirm the inequality
        # at high precision so the double-precision check is trusted
        import mpmath

        with mpmath.workdps(50):
            assert 2 * mpmath.tanh(mpmath.mpf(4) / 10) < mpmath.mpf(76) / 100
        assert 2 * math.tanh(0.4) == pytest.approx(0.75989792, abs=1e-8)
        m = IsingModel(n=2, beta={(0, 1): 0.4}, h=np.zeros(2))
        assert validate_family(m, FamilyParams(3, 0.76))
        assert not validate_family(m, FamilyParams(3, 0.75))

    def test_star_degree_violation(self):
        star = IsingModel(n=5, beta={(0, i): 0.1 for i in range(1, 5)}, h=np.zeros(5))
        check = validate_family(star, FamilyParams(3, 0.9))
        assert not check
        assert check.vertex == 0
        assert "degree 4" in check.reason

    def test_violating_edge_is_named(self):
        m = IsingModel(n=3, beta={(0, 1): 0.1, (1, 2): 5.0}, h=np.zeros(3))
        check = validate_family(m, FamilyParams(3, 0.76))
        assert not check
        assert check.edge == (1, 2)

    def test_monotone_in_gamma(self):
        for seed in range(10):
            m = random_instance(10, 3, (-0.6, 0.6), (-1, 1), seed)
            gammas = [0.3, 0.5, 0.76, 1.0, 1.5]
            results = [bool(validate_family(m, FamilyParams(3, g))) for g in gammas]
            # once true, stays true for larger gamma
            assert results == sorted(results)

    def test_subcritical_couplings_when_gamma_below_one(self):
        bc = critical_coupling(3)
        for seed in range(10):
            m = random_instance(12, 3, (-0.4, 0.4), (-0.5, 0.5), seed)
            if validate_family(m, FamilyParams(3, 0.76)):
                assert all(abs(b) < bc for b in m.beta.values())


class TestCriticalCoupling:
    def test_closed_forms(self):
        assert critical_coupling(3) == pytest.approx(math.atanh(0.5), abs=1e-15)
        assert critical_coupling(3) == pytest.approx(0.549306, abs=1e-6)
        assert critical_coupling(4) == pytest.approx(0.346574, abs=1e-6)

    def test_strictly_decreasing(self):
        values = [critical_coupling(d) for d in range(3, 30)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_domain_error(self):
        with pytest.raises(ValueError):
            critical_coupling(2)


class TestRandomInstance:
    def test_single_vertex(self):
        m = random_instance(1, 3, (-0.4, 0.4), (-0.5, 0.5), seed=7)
        assert m.n == 1 and not m.beta

    def test_deterministic(self):
        a = random_instance(14, 3, (-0.4, 0.4), (-0.5, 0.5), seed=123)
        b = random_instance(14, 3, (-0.4, 0.4), (-0.5, 0.5), seed=123)
        assert a == b
        c = random_instance(14, 3, (-0.4, 0.4), (-0.5, 0.5), seed=124)
        assert a != c

    def test_degree_cap_and_family_by_construction(self):
        for seed in range(25):
            m = random_instance(14, 3, (-0.4, 0.4), (-0.5, 0.5), seed)
            assert m.max_degree() <= 3
            assert validate_family(m, FamilyParams(3, 0.76))

    def test_bad_range_rejected(self):
        with pytest.raises(ModelFormatError):
            random_instance(5, 3, (1.0, -1.0), (0, 0), seed=0)

    def test_weights_deterministic_and_in_range(self):
        w1 = random_weights(20, (-1, 1), seed=5)
        w2 = random_weights(20, (-1, 1), seed=5)
        assert w1 == w2
        assert w1.is_one_bounded()


class TestSerialization:
    def test_round_trip_equality(self):
        m = random_instance(9, 3, (-0.4, 0.4), (-0.5, 0.5), seed=11)
        w = random_weights(9, (-1, 1), seed=12)
        m2, w2 = parse_model(serialize_model(m, w))
        assert m2 == m
        assert w2 == w

    def test_byte_stable(self):
        m = random_instance(9, 3, (-0.4, 0.4), (-0.5, 0.5), seed=11)
        w = random_weights(9, (-1, 1), seed=12)
        text = serialize_model(m, w)
        m2, w2 = parse_model(text)
        assert serialize_model(m2, w2) == text

    def test_missing_a_defaults_to_zero(self):
        text = '{"vertices": [{"id": 0, "h": 0.5}], "edges": []}'
        model, weights = parse_model(text)
        assert model.n == 1
        assert weights.a[0] == 0.0

    @pytest.mark.parametrize(
        "text, fragment",
        [
            ('{"vertices": [{"id": 0, "h": 0}, {"id": 0, "h": 0}], "edges": []}',
             "duplicate vertex id 0"),
            ('{"vertices": [{"id": 0, "h": 0}, {"id": 1, "h": 0}], '
             '"edges": [{"u": 0, "v": 1, "beta": 1}, {"u": 1, "v": 0, "beta": 2}]}',
             "duplicate edge"),
            ('{"vertices": [{"id": 0, "h": 0}], "edges": [{"u": 0, "v": 0, "beta": 1}]}',
             "self-loop at vertex 0"),
            ('{"vertices": [], "edges": []}', "at least one vertex"),
            ('{"vertices": [{"id": 0, "h": 0}, {"id": 5, "h": 0}], "edges": []}',
             "ids must be dense"),
            ('{"vertices": [{"id": 0, "h": NaN}], "edges": []}', "non-finite"),
            ('{"vertices": [{"id": 0, "h": 0}], "edges": [{"u": 0, "v": 3, "beta": 1}]}',
             "unknown vertex"),
        ],
    )
    def test_rejections_name_the_offender(self, text, fragment):
        with pytest.raises(ModelFormatError, match=fragment):
            parse_model(text)


def test_canonical_edge():
    assert canonical_edge(3, 1) == (1, 3)
    assert canonical_edge(1, 3) == (1, 3)


def test_weight_vector_one_bounded_flag():
    assert WeightVector(np.array([1.0, -1.0, 0.5])).is_one_bounded()
    assert not WeightVector(np.array([1.0001])).is_one_bounded()
