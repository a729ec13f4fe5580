from contextlib import contextmanager

from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    eps_struct: float = 1e-12
    eps_clean: float = 1e-9
    tol_order: float = 1e-10
    tol_mart: float = 1e-9
    tol_bisect: float = 1e-12
    max_bisect_iter: int = 200
    discretize_cells: int = 256
    quad_nodes: int = 32
    log_level: str = "WARNING"

    class Config:
        env_file = ".env"
        env_prefix = "SHADOW_"


settings = Settings()


@contextmanager
def tolerance(value: float):
    """Temporarily override every comparison tolerance with `value`.

    Mutates the process-wide settings; only the CLI and tests use it, never a request handler.
    """
    keys = ("tol_order", "tol_mart", "tol_bisect")
    saved = {k: getattr(settings, k) for k in keys}
    try:
        for k in keys:
            setattr(settings, k, value)
        yield settings
    finally:
        for k, v in saved.items():
            setattr(settings, k, v)


def problem_scale(mass: float, reach: float) -> float:
    # potentials of a measure grow like mass * |k|; tolerances follow
    return max(1.0, abs(mass) * (1.0 + abs(reach)))
