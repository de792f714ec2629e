"""JSON instance documents.

A document holds a Hamiltonian and exactly one of a frame or a state. Complex numbers
are ``[re, im]`` pairs and matrices are row-major nested arrays::

    {"hamiltonian": [[[0, 0], [0, 0]], [[0, 0], [1, 0]]],
     "frame": [[[0.7071067811865476, 0]], [[0.7071067811865476, 0]]],
     "tolerances": {"hermiticity_tol": 1e-10},
     "label": "two-level"}
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError as PydanticValidationError, model_validator

from subspace_qsl.bounds import DispersionOptions
from subspace_qsl.dynamics import DEFAULT_CROSSING_TOL
from subspace_qsl.errors import DimensionMismatch, ParseError
from subspace_qsl.operators import (
    DEFAULT_HERMITICITY_TOL,
    DEFAULT_RANK_TOL,
    Frame,
    HermitianOperator,
    StateVector,
    orthonormalize,
)

logger = logging.getLogger(__name__)

ComplexPair = tuple[float, float]


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hermiticity_tol: float = Field(DEFAULT_HERMITICITY_TOL, ge=0)
    rank_tol: float = Field(DEFAULT_RANK_TOL, gt=0)
    crossing_tol: float = Field(DEFAULT_CROSSING_TOL, gt=0)
    state_tol: float = Field(1e-12, gt=0)
    optimizer_starts: int = Field(32, ge=1)
    optimizer_tol: float = Field(1e-12, gt=0)
    optimizer_max_iterations: int = Field(10_000, ge=1)
    optimizer_seed: int = Field(0, ge=0)

    def dispersion_options(self) -> DispersionOptions:
        return DispersionOptions(
            num_starts=self.optimizer_starts,
            relative_tol=self.optimizer_tol,
            max_iterations=self.optimizer_max_iterations,
            seed=self.optimizer_seed,
        )


class InstanceDocument(BaseModel):
    """Wire form of an instance, before any linear-algebra validation."""

    model_config = ConfigDict(extra="forbid")

    hamiltonian: list[list[ComplexPair]]
    frame: list[list[ComplexPair]] | None = None
    state: list[ComplexPair] | None = None
    tolerances: Tolerances = Field(default_factory=Tolerances)
    label: str = ""

    @model_validator(mode="after")
    def check_shapes(self):
        if (self.frame is None) == (self.state is None):
            raise ValueError("exactly one of 'frame' and 'state' must be given")
        n = len(self.hamiltonian)
        if n == 0 or any(len(row) != n for row in self.hamiltonian):
            raise ValueError("'hamiltonian' must be a non-empty square matrix")
        if self.frame is not None:
            if len(self.frame) != n:
                raise ValueError(f"'frame' must have {n} rows to match the hamiltonian")
            k = len(self.frame[0])
            if k == 0 or any(len(row) != k for row in self.frame):
                raise ValueError("'frame' rows must all have the same nonzero length")
        if self.state is not None and len(self.state) != n:
            raise ValueError(f"'state' must have {n} entries to match the hamiltonian")
        return self


def _to_complex(pairs) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _to_pairs(values: np.ndarray) -> list:
    values = np.asarray(values, dtype=complex)
    return np.stack([values.real, values.imag], axis=-1).tolist()


@dataclass(frozen=True, eq=False)
class InstanceConfig:
    hamiltonian: HermitianOperator
    frame: Frame | None
    state: StateVector | None
    tolerances: Tolerances
    label: str = ""

    @property
    def subspace(self) -> Frame:
        return self.frame if self.frame is not None else self.state.as_frame()

    def to_document(self) -> dict:
        document = {
            "hamiltonian": _to_pairs(self.hamiltonian.matrix),
            "tolerances": self.tolerances.model_dump(),
            "label": self.label,
        }
        if self.frame is not None:
            document["frame"] = _to_pairs(self.frame.columns)
        else:
            document["state"] = _to_pairs(self.state.entries)
        return document


def build_instance(document: InstanceDocument) -> InstanceConfig:
    """Validate the numbers of a parsed document; raises the operators' ValidationErrors."""
    tolerances = document.tolerances
    h = HermitianOperator(_to_complex(document.hamiltonian), tolerances.hermiticity_tol)
    frame = state = None
    if document.frame is not None:
        frame = orthonormalize(_to_complex(document.frame), tolerances.rank_tol)
    else:
        state = StateVector(_to_complex(document.state), tolerances.state_tol)
    n = frame.ambient_dim if frame is not None else state.dim
    if n != h.dim:
        raise DimensionMismatch(f"Hamiltonian is {h.dim} x {h.dim} but the subspace lives in C^{n}.")
    return InstanceConfig(h, frame, state, tolerances, document.label)


def _location(loc: tuple) -> str:
    return "".join(f"[{part}]" if isinstance(part, int) else f".{part}" for part in loc).lstrip(".") or "<root>"


def parse_config(text: str, source: str = "<string>") -> InstanceConfig:
    """Parse a JSON document; ParseError carries the line or the path into the document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{source}: {e.msg}", line=e.lineno)
    try:
        document = InstanceDocument.model_validate(raw)
    except PydanticValidationError as e:
        first = e.errors()[0]
        raise ParseError(f"{source}: {first['msg']}", path=_location(first["loc"]))
    return build_instance(document)


def load_config(path) -> InstanceConfig:
    path = Path(path)
    logger.info(f"Loading instance from {path}")
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"{path}: cannot read file: {e.strerror}")
    return parse_config(text, str(path))


def dump_config(config: InstanceConfig, path):
    Path(path).write_text(json.dumps(config.to_document(), indent=2, sort_keys=True) + "\n")
