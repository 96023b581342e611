import json

import numpy as np
import pytest

from dissipctl.errors import InputFormatError
from dissipctl.lindblad import evolve, maximally_mixed
from dissipctl.models import cluster_chain, two_level_example
from dissipctl.serialize import (
    aggregate_from_json,
    aggregate_to_json,
    dumps_report,
    format_float,
    matrix_from_json,
    matrix_to_json,
    model_from_json,
    model_to_json,
    trajectory_to_csv,
    write_text_atomic,
)


class TestMatrixJson:
    def test_round_trip_complex(self):
        a = np.array([[1 + 2j, 0], [-0.5j, 3.25]], dtype=complex)
        assert np.array_equal(matrix_from_json(matrix_to_json(a)), a)

    def test_entries_are_re_im_pairs(self):
        out = matrix_to_json(np.array([[1j]]))
        assert out == [[[0.0, 1.0]]]

    def test_plain_numbers_accepted(self):
        assert np.array_equal(matrix_from_json([[1, 0], [0, 1]]), np.eye(2))

    def test_ragged_rejected_with_field(self):
        with pytest.raises(InputFormatError) as err:
            matrix_from_json([[1, 0], [0]], field="V")
        assert "V" in str(err.value)

    def test_bad_entry_rejected(self):
        with pytest.raises(InputFormatError):
            matrix_from_json([[["a", 0]]])


class TestModelJson:
    def test_round_trip(self):
        m = two_level_example()
        obj = model_to_json(m.model)
        back = model_from_json(obj)
        assert back.structure.dims == m.model.structure.dims
        assert np.array_equal(back.hamiltonian, m.model.hamiltonian)
        assert all(np.array_equal(a, b)
                   for a, b in zip(back.couplings, m.model.couplings))

    def test_missing_hamiltonian_names_field(self):
        with pytest.raises(InputFormatError) as err:
            model_from_json({"dims": [2], "L": []})
        assert "H" in str(err.value)

    def test_bad_dims(self):
        with pytest.raises(InputFormatError) as err:
            model_from_json({"dims": [0], "H": [[0]]})
        assert "dims" in str(err.value)


class TestAggregateJson:
    def test_round_trip_with_names(self):
        m = cluster_chain(4)
        obj = aggregate_to_json(m.aggregate)
        back = aggregate_from_json(obj)
        assert back.structure.dims == m.aggregate.structure.dims
        assert back.term_names == m.aggregate.term_names
        for a, b in zip(back.terms, m.aggregate.terms):
            assert np.allclose(a, b, atol=0)

    def test_pauli_shorthand(self):
        obj = {
            "dims": [2, 2, 2],
            "terms": [{"pauli": "Z1 X2 Z3", "coeff": 0.5, "offset": 0.5}],
            "couplings": [],
            "assignment": [[]],
        }
        spec = aggregate_from_json(obj)
        w = spec.terms[0]
        assert np.allclose(w @ w, w, atol=1e-12)  # (S+1)/2 is a projection
        assert np.trace(w).real == pytest.approx(4.0)

    def test_bad_pauli_site(self):
        obj = {"dims": [2], "terms": [{"pauli": "Z5"}]}
        with pytest.raises(InputFormatError):
            aggregate_from_json(obj)


class TestTrajectoryCsv:
    def test_header_and_shape(self):
        m = two_level_example()
        traj = evolve(m.model, maximally_mixed(2), 1.0, n_samples=5,
                      observables={"V": m.candidates["V"]})
        csv = trajectory_to_csv(traj)
        lines = csv.strip().splitlines()
        assert lines[0] == "t,V,trace,purity"
        assert len(lines) == 6
        assert all(len(line.split(",")) == 4 for line in lines[1:])

    def test_fifteen_significant_digits(self):
        assert format_float(np.pi) == "3.14159265358979"
        assert format_float(1e-20) == "1e-20"
        assert "e" in format_float(2.5e-13)


class TestReportDump:
    def test_floats_rounded_and_sorted(self):
        text = dumps_report({"b": 0.1234567890123456789, "a": [1.0, {"x": 2e-30}]})
        assert text == dumps_report(json.loads(text))
        assert json.loads(text)["b"] == float("0.123456789012346")

    def test_atomic_write(self, tmp_path):
        target = tmp_path / "out.json"
        write_text_atomic(str(target), "payload")
        assert target.read_text() == "payload"
        leftovers = [p for p in tmp_path.iterdir() if p.name.startswith(".dissipctl-")]
        assert not leftovers
