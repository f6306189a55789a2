import json
from unittest import TestCase

import numpy as np
from numpy.testing import assert_allclose

from qhmr.errors import CptpError, ModelFormatError
from qhmr.generators import appendix_model, grover_model, interface_model
from qhmr.model_io import (certificate_from_dict, certificate_to_dict, decode_matrix,
                           decode_superop, encode_matrix, encode_superop, load_certificate,
                           load_model, model_from_dict, model_to_dict, save_certificate,
                           save_model)
from qhmr.reduction import reduce
from qhmr.tests.common import random_channel, work_dir_test


class MatrixCodecTC(TestCase):
    def test_layout(self):
        data = encode_matrix(np.array([[1.0, 2j], [0.5 - 1j, 0.0]]))
        self.assertEqual(data[0][1], [0.0, 2.0])
        self.assertEqual(data[1][0], [0.5, -1.0])

    def test_bad_layout(self):
        self.assertRaises(ModelFormatError, decode_matrix, [[1.0, 2.0]])
        self.assertRaises(ModelFormatError, decode_matrix, [[[1.0, 0.0]], [[1.0]]])
        self.assertRaises(ModelFormatError, decode_matrix, "abc")


class SuperopCodecTC(TestCase):
    def test_kraus_and_transfer(self):
        S = random_channel(3, seed=2)
        data = encode_superop(S)
        self.assertIn("kraus", data)
        data["transfer"] = encode_matrix(S.transfer)
        assert_allclose(decode_superop(data).transfer, S.transfer, atol=1e-12)

    def test_disagreement(self):
        data = encode_superop(random_channel(2, seed=1))
        data["transfer"] = encode_matrix(np.eye(4))
        self.assertRaises(ModelFormatError, decode_superop, data)

    def test_missing_map(self):
        self.assertRaises(ModelFormatError, decode_superop, {"in_dim": 2, "out_dim": 2})
        self.assertRaises(ModelFormatError, decode_superop, [])

    def test_malformed_kraus(self):
        for kraus in (3, "abc", [3], [[1.0, 2.0]], None):
            with self.subTest(kraus=kraus):
                self.assertRaises(ModelFormatError, decode_superop,
                                  {"in_dim": 2, "out_dim": 2, "kraus": kraus})
        self.assertRaises(ModelFormatError, decode_superop,
                          {"in_dim": "2", "out_dim": 2, "transfer": encode_matrix(np.eye(4))})

    def test_declared_dims(self):
        data = encode_superop(random_channel(2, seed=1))
        data["out_dim"] = 3
        self.assertRaises(ModelFormatError, decode_superop, data)


class ModelFileTC(TestCase):
    @work_dir_test
    def test_save_load(self, work_dir):
        m = interface_model()
        path = save_model(m, work_dir.join("interface.json"))
        loaded = load_model(path)
        self.assertEqual(loaded.dim, m.dim)
        self.assertEqual(loaded.label, "interface")
        self.assertEqual(loaded.metadata["generator"], "interface")
        assert_allclose(loaded.map.transfer, m.map.transfer, atol=1e-12)
        for a, b in zip(loaded.output_ops, m.output_ops):
            assert_allclose(a, b)
        for a, b in zip(loaded.initial_states, m.initial_states):
            assert_allclose(a, b)

    def test_schema_version(self):
        data = model_to_dict(appendix_model())
        data["schema_version"] = "0"
        self.assertRaises(ModelFormatError, model_from_dict, data)

    def test_missing_keys(self):
        data = model_to_dict(appendix_model())
        del data["initial_states"]
        self.assertRaises(ModelFormatError, model_from_dict, data)

    def test_wrong_dimension(self):
        data = model_to_dict(appendix_model())
        data["dim"] = 3
        self.assertRaises(ModelFormatError, model_from_dict, data)

    def test_not_a_density(self):
        data = model_to_dict(appendix_model())
        data["initial_states"][0] = encode_matrix(np.diag([1.0, 1.0, 0.0, 0.0]))
        self.assertRaises(ModelFormatError, model_from_dict, data)

    def test_not_trace_preserving(self):
        data = model_to_dict(appendix_model())
        data["map"] = {"in_dim": 4, "out_dim": 4,
                       "kraus": [encode_matrix(0.5 * np.eye(4))]}
        self.assertRaises(CptpError, model_from_dict, data)

    @work_dir_test
    def test_invalid_json(self, work_dir):
        path = work_dir.join("broken.json")
        with open(path, "w") as f:
            f.write("{not json")
        self.assertRaises(ModelFormatError, load_model, path)
        self.assertRaises(ModelFormatError, load_model, work_dir.join("missing.json"))


class CertificateFileTC(TestCase):
    @work_dir_test
    def test_save_load(self, work_dir):
        m = grover_model(8, 1)
        cert = reduce(m)
        path = save_certificate(cert, work_dir.join("grover.certificate.json"))
        loaded = load_certificate(path)
        self.assertEqual(loaded.dims, cert.dims)
        self.assertEqual([s.kind for s in loaded.steps], [s.kind for s in cert.steps])
        self.assertEqual(loaded.linear_lower_bound, cert.linear_lower_bound)
        self.assertEqual(loaded.reduced.block_dims, cert.reduced.block_dims)
        self.assertIsNotNone(loaded.steps[0].restriction)
        assert_allclose(loaded.R_star.transfer, cert.R_star.transfer, atol=1e-12)
        assert_allclose(loaded.J_star.transfer, cert.J_star.transfer, atol=1e-12)

    @work_dir_test
    def test_deterministic(self, work_dir):
        first = save_certificate(reduce(appendix_model()), work_dir.join("a.json"))
        second = save_certificate(reduce(appendix_model()), work_dir.join("b.json"))
        with open(first, "rb") as a, open(second, "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_json_friendly(self):
        data = certificate_to_dict(reduce(appendix_model()))
        text = json.dumps(data)
        self.assertEqual(certificate_from_dict(json.loads(text)).dims, data["dims"])

    def test_malformed_step(self):
        data = certificate_to_dict(reduce(appendix_model()))
        del data["steps"][0]["R"]
        self.assertRaises(ModelFormatError, certificate_from_dict, data)
        data = certificate_to_dict(reduce(appendix_model()))
        data["steps"][0]["kind"] = "sideways"
        self.assertRaises(ModelFormatError, certificate_from_dict, data)
