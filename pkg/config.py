"""
Configuration for the pseudo-Riemannian harmonicity lab
Reads tolerances, step sizes and output settings from environment variables
"""
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


class LabConfig:
    """Numerical and output configuration from environment variables"""

    def __init__(self):
        self.tol = float(os.getenv('PGEOM_TOL', '1e-9'))
        self.fd_step = float(os.getenv('PGEOM_FD_STEP', '1e-5'))
        self.fd_hessian_step = float(os.getenv('PGEOM_FD_HESSIAN_STEP', '1e-4'))
        self.field_step = float(os.getenv('PGEOM_FIELD_STEP', '1e-3'))
        self.workers = int(os.getenv('PGEOM_WORKERS', '4'))
        self.output_dir = os.getenv('PGEOM_OUTPUT_DIR', 'reports')
        self.log_level = os.getenv('PGEOM_LOG_LEVEL', 'INFO')
        self.seed = int(os.getenv('PGEOM_SEED', '20240501'))

    def as_dict(self) -> dict:
        """Settings recorded in report provenance"""
        return {
            'tol': self.tol,
            'fd_step': self.fd_step,
            'fd_hessian_step': self.fd_hessian_step,
            'field_step': self.field_step,
            'workers': self.workers,
            'seed': self.seed,
        }


# Global configuration instance
lab_config = LabConfig()
