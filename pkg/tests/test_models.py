"""Every expected record shipped with a built-in model is re-derived here by
the certification/simulation pipeline; no stored number is trusted untagged."""

import numpy as np
import pytest

from dissipctl.errors import DimensionCapError, InputFormatError, PreconditionError
from dissipctl.lindblad import evolve, generator, dissipation_functional, maximally_mixed
from dissipctl.linalg import commutator, is_projection
from dissipctl.models import (
    REGISTRY,
    build,
    cluster_chain,
    complementary_witnesses,
    three_level_example,
    toric_patch,
    two_level_example,
    two_qubit_aggregation_example,
)
from dissipctl.scalability import (
    check_corollary_commuting,
    check_corollary_d_free,
    check_incremental_ds,
    check_incremental_es,
    check_scalability_condition,
)
from dissipctl.stability import (
    check_condition_ds,
    check_condition_es,
    check_dissipation_square,
    frustration_free_check,
    ground_space,
)


def test_every_expected_entry_is_tagged():
    for name in REGISTRY:
        named = build(name)
        assert named.expected, name
        for key, record in named.expected.items():
            assert set(record) == {"value", "tag"}, (name, key)
            assert record["tag"] in ("exact", "derived", "trivial"), (name, key)


class TestTwoLevel:
    def test_expected_record(self):
        m = two_level_example()
        v = m.candidates["V"]
        assert check_condition_es(v, m.model) == pytest.approx(
            m.expected["c_es"]["value"], abs=1e-6)
        assert check_condition_ds(v, m.model) == pytest.approx(
            m.expected["c_ds"]["value"], abs=1e-6)
        assert np.linalg.norm(
            commutator(v, m.model.hamiltonian)) == m.expected["commutes_with_hamiltonian"]["value"] - 1

        traj = evolve(m.model, np.diag([1.0, 0.0]).astype(complex), 25.0)
        eq = np.array(m.expected["equilibrium"]["value"], dtype=complex)
        assert np.linalg.norm(traj.final_state() - eq) < 1e-8
        assert traj.purities()[-1] == pytest.approx(
            m.expected["equilibrium_purity"]["value"], abs=1e-8)

    def test_general_family_member(self):
        m = two_level_example(l00=0.3 + 0.1j, l10=1.5)
        v = m.candidates["V"]
        assert m.expected["c_es"]["value"] == pytest.approx(2.25)
        assert check_condition_es(v, m.model) == pytest.approx(
            m.expected["c_es"]["value"], abs=1e-6)
        assert check_condition_ds(v, m.model) == pytest.approx(
            m.expected["decay_rate"]["value"], abs=1e-6)

    def test_rejects_vanishing_l10(self):
        with pytest.raises(PreconditionError):
            two_level_example(l10=0.0)


class TestThreeLevel:
    def test_expected_record(self):
        m = three_level_example()
        v = m.candidates["V"]
        g = generator(v, m.model)
        d = dissipation_functional(v, m.model)
        assert np.allclose(np.diag(g).real, m.expected["generator_diag"]["value"], atol=1e-12)
        assert np.allclose(np.diag(d).real, m.expected["dissipation_diag"]["value"], atol=1e-12)
        assert check_condition_es(v, m.model) is m.expected["c_es"]["value"]
        assert check_condition_ds(v, m.model) == pytest.approx(
            m.expected["c_ds"]["value"], abs=1e-6)
        assert check_dissipation_square(v, m.model) == pytest.approx(
            m.expected["dissipation_square_c"]["value"], abs=1e-6)


class TestTwoQubit:
    def test_expected_record(self):
        m = two_qubit_aggregation_example()
        total = sum(m.aggregate.terms)
        assert np.allclose(np.diag(total).real, m.expected["sum_diag"]["value"], atol=0)
        assert ground_space(total).energy == pytest.approx(m.expected["d"]["value"], abs=1e-12)
        assert frustration_free_check(m.aggregate.terms) is m.expected["frustration_free"]["value"]

        new = m.extras["new_couplings"]
        holds_free, _ = check_corollary_d_free(m.aggregate, 1, new, 1.0)
        assert holds_free is m.expected["corollary_d_free_c1"]["value"]
        holds_inc, _ = check_incremental_es(m.aggregate, 1, new, 1.0)
        assert holds_inc is m.expected["incremental_es_c1"]["value"]
        holds_ds, _ = check_incremental_ds(m.aggregate, 1, new, 1.0)
        assert holds_ds is m.expected["incremental_ds_holds"]["value"]


class TestClusterChain:
    def test_expected_record(self):
        m = cluster_chain(4)
        terms = m.aggregate.terms
        for a in range(len(terms)):
            for b in range(a + 1, len(terms)):
                assert np.linalg.norm(commutator(terms[a], terms[b])) < 1e-12
        for w, u in zip(terms, m.extras["unitaries"]):
            assert is_projection(w)
            assert np.linalg.norm(w @ u @ w) < 1e-12  # W U W = 0
        report = check_corollary_commuting(m.aggregate, m.extras["unitaries"])
        assert report.overall is m.expected["commuting_certified"]["value"]
        for c in report.constants:
            assert c == pytest.approx(m.expected["per_term_c"]["value"], abs=1e-6)
        gs = ground_space(sum(terms))
        assert gs.dimension == m.expected["ground_space_dim"]["value"]

    def test_size_validation(self):
        with pytest.raises(PreconditionError):
            cluster_chain(2)
        with pytest.raises(DimensionCapError):
            cluster_chain(30)

    def test_five_qubit_chain(self):
        m = cluster_chain(5)
        assert m.aggregate.n_terms == 3
        assert ground_space(sum(m.aggregate.terms)).dimension == 2**5 // 2**3


class TestToricPatch:
    def test_base_expected_record(self):
        m = toric_patch()
        v2 = m.aggregate.terms[1]
        for u in m.extras["candidate_unitaries"]:
            assert np.linalg.norm(commutator(u, v2)) < 1e-12
        gs = ground_space(sum(m.aggregate.terms[:2]))
        assert gs.dimension == m.expected["ground_space_dim_v1_v2"]["value"]
        report = check_corollary_commuting(m.aggregate, m.extras["unitaries"])
        assert report.overall is m.expected["commuting_certified"]["value"]

    def test_extended_expected_record(self):
        m = toric_patch(extended=True)
        z1 = m.extras["unitaries"][0]
        v3 = m.aggregate.terms[2]
        defect = float(np.linalg.norm(commutator(z1, v3)))
        assert (defect > 1.0) is m.expected["z1_v3_commutator_nonzero"]["value"]
        ok, margin = check_scalability_condition(m.aggregate, 2, 0)
        assert ok is m.expected["scalability_v3_via_z1_channel"]["value"]
        assert margin >= -1e-9
        report = check_corollary_commuting(m.aggregate, m.extras["unitaries"])
        assert report.overall is m.expected["commuting_certified"]["value"]


class TestRemarkCounterexample:
    def test_expected_record(self):
        m = complementary_witnesses()
        total = sum(m.aggregate.terms)
        assert ground_space(total).energy == pytest.approx(m.expected["d"]["value"])
        assert frustration_free_check(m.aggregate.terms) is m.expected["frustration_free"]["value"]
        traj = evolve(m.model, maximally_mixed(2), 3.0, n_samples=11,
                      observables={"W": total})
        constant = bool(np.allclose(traj.observables["W"], 1.0, atol=1e-12))
        assert constant is m.expected["w_expectation_constant"]["value"]


class TestBuildParser:
    def test_plain_name(self):
        assert build("three_level").name == "three_level"

    def test_integer_argument(self):
        m = build("cluster_chain(5)")
        assert m.model.structure.n_sites == 5

    def test_keyword_flag(self):
        m = build("toric_patch(extended)")
        assert m.model.structure.n_sites == 9

    def test_unknown_name(self):
        with pytest.raises(InputFormatError):
            build("no_such_model")

    def test_bad_argument(self):
        with pytest.raises(InputFormatError):
            build("cluster_chain(maybe)")
