import numpy as np
import pytest

from netgames import make_network, spectral_measures
from netgames.network import (AsymmetricNetworkError, Network, NetworkValidationError, infinity_norm,
                              min_eigenvalue, spectral_norm)


@pytest.mark.parametrize("kind", ["complete", "undirected_ring", "bipartite_complete", "asymmetric_star"])
def test_generators_are_valid(kind):
    net = make_network(kind, 6)
    W = net.weights
    assert W.shape == (6, 6)
    assert np.all(np.diag(W) == 0)
    assert np.all(W >= 0)


def test_directed_regular_has_constant_in_degree():
    for pattern in ("hub", "circulant"):
        W = make_network("directed_regular", 7, degree=3, pattern=pattern).weights
        np.testing.assert_array_equal(W.sum(axis=1), 3.0)


def test_hub_network_norms_against_svd():
    net = make_network("directed_regular", 4, degree=2)
    assert spectral_norm(net) == pytest.approx(2.28825, abs=1e-5)
    assert infinity_norm(net) == 2.0


def test_trend_setter_structure():
    W = make_network("trend_setter").weights
    np.testing.assert_array_equal(W[1:, 0], 1.0)
    assert W[0, 1] == pytest.approx(0.1)
    assert spectral_measures(W).is_symmetric is False


def test_complete_min_eigenvalue_closed_form():
    for n in (2, 5, 9):
        assert min_eigenvalue(make_network("complete", n)) == pytest.approx(-1.0)
        assert spectral_norm(make_network("complete", n)) == pytest.approx(n - 1)


def test_bipartite_spectrum():
    net = make_network("bipartite_complete", sizes=(2, 3))
    assert spectral_norm(net) == pytest.approx(np.sqrt(6))
    assert min_eigenvalue(net) == pytest.approx(-np.sqrt(6))


def test_min_eigenvalue_rejects_asymmetric():
    with pytest.raises(AsymmetricNetworkError):
        min_eigenvalue(make_network("asymmetric_star", 4))
    assert spectral_measures(make_network("asymmetric_star", 4)).min_eigenvalue is None


def test_empty_network_has_zero_norms():
    sm = spectral_measures(Network(np.zeros((3, 3))))
    assert sm.spectral_norm == 0.0 and sm.infinity_norm == 0.0 and sm.min_eigenvalue == 0.0


@pytest.mark.parametrize("matrix, fragment", [
    ([[0, -1], [1, 0]], "negative entry at (0, 1)"),
    ([[1, 0], [0, 0]], "nonzero diagonal at (0, 0)"),
    ([[0, np.nan], [0, 0]], "non-finite"),
    ([[0, 1, 2]], "square"),
])
def test_validation_messages(matrix, fragment):
    with pytest.raises(NetworkValidationError, match=fragment.replace("(", r"\(").replace(")", r"\)")):
        Network(matrix)


def test_unknown_kind_and_bad_size():
    with pytest.raises(NetworkValidationError):
        make_network("complet", 3)
    with pytest.raises(NetworkValidationError):
        make_network("complete", 0)


def test_weights_are_read_only_and_with_weight_copies():
    net = make_network("complete", 3)
    with pytest.raises(ValueError):
        net.weights[0, 1] = 5
    other = net.with_weight(0, 1, 0.25)
    assert other.weights[0, 1] == 0.25 and net.weights[0, 1] == 1.0
    assert net != other and net == make_network("complete", 3)


def test_kron_maps_profiles_to_aggregates(rng):
    net = Network(rng.uniform(size=(3, 3)) * (1 - np.eye(3)))
    x = rng.normal(size=(3, 2))
    np.testing.assert_allclose(net.kron(2) @ x.ravel(), (net.weights @ x).ravel())
