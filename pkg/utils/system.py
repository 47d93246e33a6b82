import logging
import os

from omegaconf import OmegaConf

THREADS_VARIABLE = "MIXBENCH_THREADS"


def setup_system(cfg):
    """Master seed of the run.

    numpy's global generator is left alone: every scenario, replicate and
    method derives its own default_rng seed from this value.
    """
    if "init" in cfg and "seed" in cfg["init"]:
        seed = cfg["init"]["seed"]
    else:
        seed = 42  # This model will answer the ultimate question about life, the universe, and everything
    logging.info(f"Master seed {seed}")
    return seed


def resolve_num_workers(cfg) -> int:
    """Worker count from the config, capped by the MIXBENCH_THREADS environment variable."""
    num_workers = cfg.compute.get("num_workers", 1) or 1
    if num_workers < 0:
        num_workers = os.cpu_count() or 1
    cap = os.environ.get(THREADS_VARIABLE)
    if cap:
        try:
            num_workers = min(num_workers, max(int(cap), 1))
        except ValueError:
            logging.warning(f"Ignoring non-integer {THREADS_VARIABLE}={cap}")
    return int(num_workers)


def save_run_config(output_dir: str, cfg):

    config_save_path = os.path.join(output_dir, "config.yaml")
    os.makedirs(os.path.dirname(config_save_path), exist_ok=True)

    with open(config_save_path, "w") as f:
        f.write(OmegaConf.to_yaml(cfg))
