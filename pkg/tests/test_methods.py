import pytest
from omegaconf import OmegaConf

from model.methods import METHODS, display_name, run_method
from utils.metrics import adjusted_rand_index


def test_registry_holds_the_eight_methods():
    assert sorted(METHODS) == sorted(
        [
            "gower_pam",
            "hl_pam",
            "mixed_kmeans",
            "k_prototypes",
            "modha_spangler",
            "famd_kmeans",
            "mixed_rkm",
            "kamila",
        ]
    )
    assert display_name("famd_kmeans") == "FAMD/K-Means"
    assert display_name("unlisted") == "unlisted"


@pytest.mark.parametrize("name", sorted(METHODS))
def test_every_method_recovers_separated_clusters(blobs, name):
    outcome = run_method(name, blobs, 3, starts=3, seed=0)
    assert not outcome.is_degenerate
    assert outcome.restarts >= 1
    assert adjusted_rand_index(blobs.truth, outcome.partition) > 0.8


def test_settings_from_configuration(blobs):
    settings = OmegaConf.create({"pam_init": "build", "modha_spangler_grid": [1.0, 2.0]})
    assert run_method("gower_pam", blobs, 3, 2, 0, settings).restarts == 1
    outcome = run_method("modha_spangler", blobs, 3, 2, 0, settings)
    assert outcome.details["gamma"] in (1.0, 2.0)


def test_unknown_method(blobs):
    with pytest.raises(KeyError):
        run_method("kmodes", blobs, 3, 1, 0)
