import numpy as np
import pandas as pd
import pytest

from app.data.encoding import encode_binary, flatten, multiplicity_encode, powered_log_likelihood
from app.data.loader import (
    add_interactions,
    back_transform,
    feature_matrix,
    fingerprint,
    load_and_scale,
    load_dataset,
    read_table,
    scale_columns,
    signed_labels,
)
from app.data.models import BinaryDataset, BinomialDataset, EncodedData
from app.data.synthetic import (
    IRRELEVANT_COLUMNS,
    binomial_testbed,
    shrinkage_surrogate,
    sparse_predictive_split,
)
from app.exceptions import IngestionError
from app.sampling.rng import RngStream


class TestScaling:
    def test_unit_norm_columns(self):
        X, scales = scale_columns(np.array([[3.0], [4.0]]), ["x"])
        np.testing.assert_allclose(X[:, 0], [0.6, 0.8])
        np.testing.assert_allclose(scales, [5.0])

    def test_zero_column(self):
        with pytest.raises(IngestionError, match="b"):
            scale_columns(np.array([[1.0, 0.0], [2.0, 0.0]]), ["a", "b"])

    def test_back_transform_preserves_predictor(self):
        table = pd.DataFrame({"y": [1, 0, 1], "u": [1.0, 2.0, 5.0], "v": [0.3, -0.1, 0.2]})
        dataset = load_and_scale(table)
        beta = np.array([0.2, 1.5, -3.0])
        raw = back_transform(beta, dataset.column_scales)
        raw_X = np.column_stack([np.ones(3), table[["u", "v"]].to_numpy()])
        np.testing.assert_allclose(raw_X @ raw, dataset.X @ beta)


class TestLoading:
    def test_binary_table(self):
        table = pd.DataFrame({"y": [0, 1, 1], "age": [30.0, 40.0, 50.0]})
        dataset = load_and_scale(table)
        assert isinstance(dataset, BinaryDataset)
        assert dataset.names == ["intercept", "age"]
        np.testing.assert_array_equal(dataset.y, [-1.0, 1.0, 1.0])
        assert dataset.column_scales[0] == 1.0

    def test_binomial_table(self):
        table = pd.DataFrame({"y": [2, 0], "n": [5, 3], "dose": [1.0, 2.0]})
        dataset = load_and_scale(table, binomial=True, intercept=False)
        assert isinstance(dataset, BinomialDataset)
        assert dataset.total_trials == 8
        assert fingerprint(dataset)["trials"] == 8

    def test_interactions(self):
        X, names = add_interactions(np.array([[1.0, 2.0, 3.0]]), ["a", "b", "c"])
        assert names == ["a", "b", "c", "a*b", "a*c", "b*c"]
        np.testing.assert_allclose(X[0], [1.0, 2.0, 3.0, 2.0, 3.0, 6.0])

    def test_feature_matrix_rebuilds_interactions(self):
        train = pd.DataFrame({"y": [0, 1, 1, 0], "a": [1.0, 2.0, 3.0, 4.0], "b": [0.5, -1.0, 2.0, 1.0]})
        dataset = load_and_scale(train, interactions=True)
        X = feature_matrix(train.drop(columns="y"), dataset.names, dataset.column_scales)
        np.testing.assert_allclose(X, dataset.X)

    def test_missing_feature(self):
        with pytest.raises(IngestionError):
            feature_matrix(pd.DataFrame({"a": [1.0]}), ["intercept", "b"], np.ones(2))

    @pytest.mark.parametrize(
        "table, kwargs",
        [
            (pd.DataFrame({"y": [0, 2], "x": [1.0, 2.0]}), {}),
            (pd.DataFrame({"y": [0, 1], "x": ["a", "b"]}), {}),
            (pd.DataFrame({"y": [0, 1], "x": [1.0, None]}), {}),
            (pd.DataFrame({"x": [1.0, 2.0]}), {}),
            (pd.DataFrame({"y": [3, 1], "n": [2, 2], "x": [1.0, 2.0]}), {"binomial": True}),
            (pd.DataFrame({"y": [1, 1], "n": [0, 2], "x": [1.0, 2.0]}), {"binomial": True}),
        ],
    )
    def test_bad_tables(self, table, kwargs):
        with pytest.raises(IngestionError):
            load_and_scale(table, **kwargs)

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestionError):
            read_table(tmp_path / "absent.csv")

    def test_csv_round_trip(self, binary_csv):
        dataset = load_dataset(binary_csv)
        assert dataset.n == 60 and dataset.p == 4

    def test_labels(self):
        np.testing.assert_array_equal(signed_labels(np.array([0.0, 1.0])), [-1.0, 1.0])
        np.testing.assert_array_equal(signed_labels(np.array([-1.0, 1.0])), [-1.0, 1.0])
        with pytest.raises(IngestionError):
            signed_labels(np.array([0.0, 0.5]))


class TestEncodings:
    def dataset(self):
        X = np.array([[1.0, 0.5], [1.0, -2.0], [1.0, 1.0]])
        return BinomialDataset(X, [2, 0, 3], [3, 2, 3], intercept=True)

    def test_flatten(self):
        data = flatten(self.dataset())
        assert data.n == 8
        np.testing.assert_allclose(data.yX[:3, 1], [0.5, 0.5, -0.5])
        np.testing.assert_allclose(data.kappa_vec, 1.0)

    def test_multiplicity_drops_empty_rows(self):
        data = multiplicity_encode(self.dataset(), kappa=2.0)
        # subject 2 has no successes and subject 3 no failures
        assert data.n == 4
        np.testing.assert_allclose(data.kappa_vec, [4.0, 2.0, 4.0, 6.0])
        np.testing.assert_allclose(data.yX[1], [-1.0, -0.5])
        assert data.base_kappa == 2.0

    def test_likelihoods_match(self):
        gen = np.random.default_rng(0)
        for _ in range(100):
            m, p = gen.integers(1, 8), gen.integers(1, 4)
            trials = gen.integers(1, 6, size=m)
            dataset = BinomialDataset(gen.normal(size=(m, p)), gen.binomial(trials, 0.4), trials)
            beta = gen.normal(size=p)
            kappa = gen.uniform(0.5, 10.0)
            assert powered_log_likelihood(multiplicity_encode(dataset, kappa), beta) == pytest.approx(
                powered_log_likelihood(flatten(dataset, kappa), beta), rel=1e-12, abs=1e-12
            )

    def test_with_kappa_rescales(self):
        data = EncodedData(np.eye(2), np.array([1.0, 3.0]))
        np.testing.assert_allclose(data.with_kappa(5.0).kappa_vec, [5.0, 15.0])
        np.testing.assert_allclose(data.with_kappa(5.0).with_kappa(1.0).kappa_vec, [1.0, 3.0])

    def test_binary_encoding(self):
        dataset = BinaryDataset(np.array([[1.0, 2.0], [1.0, -1.0]]), [1, -1])
        np.testing.assert_allclose(encode_binary(dataset).yX, [[1.0, 2.0], [-1.0, 1.0]])

    def test_bad_encoded_rows(self):
        with pytest.raises(IngestionError):
            EncodedData(np.ones(3), np.ones(3))
        with pytest.raises(IngestionError):
            EncodedData(np.ones((2, 1)), np.array([1.0, 0.0]))


class TestSynthetic:
    def test_testbed(self):
        dataset, beta = binomial_testbed(RngStream(1))
        assert dataset.m == 100 and dataset.p == 10
        np.testing.assert_array_equal(dataset.trials, 20)
        np.testing.assert_allclose(beta[:5], [1.0, 2.0, -3.0, 2.0, -4.0])

    def test_same_stream_same_data(self):
        first, _ = binomial_testbed(RngStream(3))
        second, _ = binomial_testbed(RngStream(3))
        np.testing.assert_array_equal(first.successes, second.successes)

    def test_sparse_split(self):
        split = sparse_predictive_split(RngStream(2), p=100)
        assert split.train.p == 100 and split.train.m == 20
        assert split.test_X.shape == (100, 100)
        np.testing.assert_array_equal(split.test_trials, 100)
        assert np.all((split.test_p > 0) & (split.test_p < 1))

    def test_surrogate_irrelevant_columns_are_symmetric(self):
        dataset, _ = shrinkage_surrogate(RngStream(4))
        data = encode_binary(dataset)
        beta = np.linspace(-0.5, 0.5, dataset.p)
        for column in IRRELEVANT_COLUMNS:
            flipped = beta.copy()
            flipped[column] = -flipped[column]
            assert powered_log_likelihood(data, flipped) == pytest.approx(powered_log_likelihood(data, beta))
