"""Exact universal R-matrix of affine U_q on truncated Verma modules, and its root-of-unity limits."""

__version__ = "0.1.0"

from .qfield import RatQ, CycloValue, InadmissibleOrder, PoleAtRoot, check_admissible  # noqa: E402
from .rootdata import Root, Weight, affine_cartan  # noqa: E402
from .verma import TruncatedVerma, build_verma  # noqa: E402
from .rootvec import build_root_vectors  # noqa: E402
from .rmatrix import TensorSetup, assemble_R, verify_intertwining, verify_ybe  # noqa: E402

__all__ = [
    "RatQ", "CycloValue", "InadmissibleOrder", "PoleAtRoot", "check_admissible",
    "Root", "Weight", "affine_cartan", "TruncatedVerma", "build_verma",
    "build_root_vectors", "TensorSetup", "assemble_R", "verify_intertwining", "verify_ybe",
]
