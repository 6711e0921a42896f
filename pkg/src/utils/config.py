import os
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file if it exists
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    # dotenv not available, continue without it
    pass


class Settings(BaseSettings):
    """Process-wide knobs that are not part of a run's scenario.

    Scenario parameters (geometry, link budget, sweeps) live in
    ``utils.run_config.RunConfig``; this class only carries ambient
    settings read from the environment.
    """

    # Logging
    log_level: str = os.getenv('LOG_LEVEL', 'INFO')
    log_format: str = os.getenv('LOG_FORMAT', 'json')

    # Execution
    workers: int = int(os.getenv('RAILPOWER_WORKERS', '1'))

    # Numerical limits
    quadrature_rel_tol: float = float(os.getenv('RAILPOWER_QUADRATURE_REL_TOL', '1e-8'))
    quadrature_max_evals: int = int(os.getenv('RAILPOWER_QUADRATURE_MAX_EVALS', '1000000'))
    oracle_max_iterations: int = int(os.getenv('RAILPOWER_ORACLE_MAX_ITERATIONS', '200'))
    velocity_max_resamples: int = int(os.getenv('RAILPOWER_VELOCITY_MAX_RESAMPLES', '64'))

    model_config = SettingsConfigDict(case_sensitive=False, extra="ignore")

    def get_numerics_config(self) -> dict:
        """Get the numerical tolerances as a plain dict for run logs"""
        return {
            "quadrature_rel_tol": self.quadrature_rel_tol,
            "quadrature_max_evals": self.quadrature_max_evals,
            "oracle_max_iterations": self.oracle_max_iterations,
            "velocity_max_resamples": self.velocity_max_resamples,
        }


settings = Settings()
