"""The eight benchmarked clustering pipelines behind one calling convention."""

from dataclasses import dataclass, field
from typing import Callable

from data.mixed_dataset import MixedDataset, Partition
from model.dissimilarity import (
    ahmad_dey_matrix,
    ahmad_dey_model,
    gower_matrix,
    hl_scaled_matrix,
)
from model.factor import famd_kmeans, mixed_rkm
from model.kamila import kamila_fit
from model.medoids import fast_kmedoids, pam
from model.prototypes import k_prototypes, modha_spangler


@dataclass(frozen=True)
class MethodOutcome:
    """Partition of one method run and how much work it took."""

    partition: Partition
    iterations: int
    restarts: int
    details: dict = field(default_factory=dict)

    @property
    def is_degenerate(self) -> bool:
        return self.partition.is_degenerate


def _setting(settings, key, default):
    if settings is None:
        return default
    value = settings.get(key, default)
    return default if value is None else value


def _run_gower_pam(data, num_clusters, starts, seed, settings):
    init = _setting(settings, "pam_init", "random")
    state = pam(gower_matrix(data), num_clusters, init=init, starts=starts, seed=seed)
    return MethodOutcome(state.partition, state.iterations, state.restarts, {"cost": state.cost})


def _run_hl_pam(data, num_clusters, starts, seed, settings):
    init = _setting(settings, "pam_init", "random")
    state = pam(hl_scaled_matrix(data), num_clusters, init=init, starts=starts, seed=seed)
    return MethodOutcome(state.partition, state.iterations, state.restarts, {"cost": state.cost})


def _run_mixed_kmeans(data, num_clusters, starts, seed, settings):
    model = ahmad_dey_model(data, bins=_setting(settings, "ahmad_dey_bins", 4))
    state = fast_kmedoids(
        ahmad_dey_matrix(data, model),
        num_clusters,
        starts=starts,
        seed=seed,
        init=_setting(settings, "kmedoids_init", "random"),
        max_iter=_setting(settings, "max_iter", 100),
    )
    return MethodOutcome(state.partition, state.iterations, state.restarts, {"cost": state.cost})


def _run_k_prototypes(data, num_clusters, starts, seed, settings):
    fit, weight = k_prototypes(
        data,
        num_clusters,
        starts=starts,
        seed=seed,
        standardize=_setting(settings, "standardize", True),
        max_iter=_setting(settings, "max_iter", 100),
    )
    return MethodOutcome(
        fit.partition, fit.iterations, fit.restarts, {"cost": fit.cost, "gamma": weight.gamma}
    )


def _run_modha_spangler(data, num_clusters, starts, seed, settings):
    fit, weight = modha_spangler(
        data,
        num_clusters,
        starts=starts,
        weight_grid_values=_setting(settings, "modha_spangler_grid", "uniform"),
        seed=seed,
        standardize=_setting(settings, "standardize", True),
        max_iter=_setting(settings, "max_iter", 100),
    )
    return MethodOutcome(
        fit.partition, fit.iterations, fit.restarts, {"cost": fit.cost, "gamma": weight.gamma}
    )


def _run_famd_kmeans(data, num_clusters, starts, seed, settings):
    fit, projection = famd_kmeans(
        data,
        num_clusters,
        starts=starts,
        seed=seed,
        num_dims=_setting(settings, "famd_dims", None),
        max_iter=_setting(settings, "max_iter", 100),
    )
    return MethodOutcome(
        fit.partition, fit.iterations, fit.restarts, {"num_dims": projection.num_dims}
    )


def _run_mixed_rkm(data, num_clusters, starts, seed, settings):
    partition, state = mixed_rkm(
        data,
        num_clusters,
        starts=starts,
        seed=seed,
        tol=_setting(settings, "rkm_tol", 1e-8),
        max_iter=_setting(settings, "rkm_max_iter", 100),
        num_dims=_setting(settings, "famd_dims", None),
    )
    return MethodOutcome(partition, state.iterations, state.restarts, {"objective": state.objective})


def _run_kamila(data, num_clusters, starts, seed, settings):
    partition, state = kamila_fit(
        data,
        num_clusters,
        starts=starts,
        seed=seed,
        max_iter=_setting(settings, "kamila_max_iter", 25),
        smoothing=_setting(settings, "kamila_smoothing", 0.025),
        density_floor=_setting(settings, "kamila_density_floor", 1e-12),
        radius_floor=_setting(settings, "kamila_radius_floor", 1e-10),
    )
    return MethodOutcome(partition, state.iterations, state.restarts, {"objective": state.objective})


@dataclass(frozen=True)
class Method:
    name: str
    display_name: str
    run: Callable


METHODS = {
    method.name: method
    for method in (
        Method("gower_pam", "Gower/PAM", _run_gower_pam),
        Method("hl_pam", "HL/PAM", _run_hl_pam),
        Method("mixed_kmeans", "Mixed K-Means", _run_mixed_kmeans),
        Method("k_prototypes", "K-Prototypes", _run_k_prototypes),
        Method("modha_spangler", "Modha-Spangler", _run_modha_spangler),
        Method("famd_kmeans", "FAMD/K-Means", _run_famd_kmeans),
        Method("mixed_rkm", "Mixed RKM", _run_mixed_rkm),
        Method("kamila", "KAMILA", _run_kamila),
    )
}


def display_name(name: str) -> str:
    return METHODS[name].display_name if name in METHODS else name


def run_method(
    name: str, data: MixedDataset, num_clusters: int, starts: int, seed, settings=None
) -> MethodOutcome:
    """Run one registered method with the true number of clusters.

    settings is any mapping with .get (a dict or an omegaconf section).
    """
    if name not in METHODS:
        raise KeyError(f"Unknown method '{name}' (choose from {sorted(METHODS)})")
    return METHODS[name].run(data, num_clusters, starts, seed, settings)
