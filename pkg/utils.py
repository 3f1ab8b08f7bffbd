"""
Utility functions: JSON documents, seeded sample generators and a small thread-pool map
"""
import json
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Type, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, PositiveInt, ValidationError, model_validator

from errors import DocumentError
from hermitian_core import HermitianMatrix, Projection, ToleranceConfig, make_hermitian

T = TypeVar("T")
R = TypeVar("R")
DocumentT = TypeVar("DocumentT", bound=BaseModel)


def parallel_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Map in input order; a pool is only spun up for workers > 1."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))


# --- JSON documents ---------------------------------------------------------------


class ComplexEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    re: float
    im: float


class MatrixDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: PositiveInt
    entries: List[ComplexEntry]

    @model_validator(mode="after")
    def _entry_count(self) -> "MatrixDocument":
        if len(self.entries) != self.n * self.n:
            raise ValueError(f"expected {self.n * self.n} entries for n={self.n}, got {len(self.entries)}")
        return self

    def to_array(self) -> np.ndarray:
        flat = np.array([complex(e.re, e.im) for e in self.entries], dtype=np.complex128)
        return flat.reshape(self.n, self.n)

    @classmethod
    def from_matrix(cls, g: HermitianMatrix) -> "MatrixDocument":
        entries = [ComplexEntry(re=float(z.real), im=float(z.imag)) for z in g.data.ravel()]
        return cls(n=g.n, entries=entries)


class FamilyDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    members: List[MatrixDocument]


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error["loc"]) or "<root>"


def parse_document(text: str, model: Type[DocumentT]) -> DocumentT:
    """
    Parse and validate a JSON document.

    :raises DocumentError: with line/column for syntax errors, field path for schema errors
    """
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise DocumentError(f"field {_location(first)}: {first['msg']}") from exc


def read_document(path, model: Type[DocumentT]) -> DocumentT:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from exc
    return parse_document(text, model)


def load_matrix(path, config: Optional[ToleranceConfig] = None, strict: bool = True) -> HermitianMatrix:
    return make_hermitian(read_document(path, MatrixDocument).to_array(), config, strict=strict)


def load_family(path, config: Optional[ToleranceConfig] = None, strict: bool = True) -> List[HermitianMatrix]:
    document = read_document(path, FamilyDocument)
    return [make_hermitian(m.to_array(), config, strict=strict) for m in document.members]


def matrix_to_json(g: HermitianMatrix) -> dict:
    return MatrixDocument.from_matrix(g).model_dump()


def matrix_from_json(payload: dict, config: Optional[ToleranceConfig] = None) -> HermitianMatrix:
    return make_hermitian(MatrixDocument.model_validate(payload).to_array(), config)


def resolution_to_json(resolution) -> dict:
    return {
        "element": matrix_to_json(resolution.element),
        "bounds": {"L": resolution.bounds.lower, "U": resolution.bounds.upper},
        "breakpoints": [
            {"lambda": bp.value, "p": matrix_to_json(bp.projection), "d": matrix_to_json(bp.eigenprojection)}
            for bp in resolution.breakpoints
        ],
    }


def block_to_json(block) -> dict:
    return {"atoms": [matrix_to_json(atom) for atom in block.atoms]}


def dump_json(payload) -> str:
    # json writes floats with repr, which round-trips every double exactly
    return json.dumps(payload, indent=2, ensure_ascii=False)


# --- seeded generators ------------------------------------------------------------


def make_rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from a phase-corrected QR of a complex Gaussian."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def from_spectrum(spectrum: Sequence[float], basis: np.ndarray) -> HermitianMatrix:
    values = np.asarray(spectrum, dtype=float)
    return HermitianMatrix((basis * values) @ basis.conj().T)


def random_hermitian(
    n: int,
    rng: np.random.Generator,
    spectrum: Optional[Sequence[float]] = None,
    low: float = -1.0,
    high: float = 1.0,
) -> HermitianMatrix:
    """Random basis, spectrum uniform on [low, high] unless given."""
    if spectrum is None:
        spectrum = rng.uniform(low, high, n)
    return from_spectrum(spectrum, random_unitary(n, rng))


def random_signed_spectrum(n: int, rng: np.random.Generator, low: float = 0.1, high: float = 1.0) -> np.ndarray:
    """Magnitudes in [low, high] with random signs; keeps every eigenvalue away from 0."""
    return rng.uniform(low, high, n) * rng.choice([-1.0, 1.0], n)


def random_positive(n: int, rng: np.random.Generator, low: float = 0.05, high: float = 1.0) -> HermitianMatrix:
    return random_hermitian(n, rng, low=low, high=high)


def random_effect(n: int, rng: np.random.Generator) -> HermitianMatrix:
    return random_hermitian(n, rng, low=0.0, high=1.0)


def random_projection(n: int, rng: np.random.Generator, rank: Optional[int] = None) -> Projection:
    if rank is None:
        rank = int(rng.integers(0, n + 1))
    basis = random_unitary(n, rng)[:, :rank]
    return Projection(basis @ basis.conj().T)


def random_flag(n: int, rng: np.random.Generator) -> List[Projection]:
    """Nested projections of ranks 1..n from one orthonormal basis."""
    basis = random_unitary(n, rng)
    return [Projection(basis[:, :k] @ basis[:, :k].conj().T) for k in range(1, n + 1)]


def random_polynomial_in(g: HermitianMatrix, rng: np.random.Generator, degree: int = 2) -> HermitianMatrix:
    """Real polynomial in g; commutes with g exactly up to rounding."""
    coefficients = rng.uniform(-1.0, 1.0, degree + 1)
    power = np.eye(g.n, dtype=np.complex128)
    total = np.zeros_like(power)
    for c in coefficients:
        total = total + c * power
        power = power @ g.data
    return HermitianMatrix(total)


def random_commuting_pair(
    n: int, rng: np.random.Generator, low: float = -1.0, high: float = 1.0
) -> tuple:
    """Two matrices diagonal in one shared random basis."""
    basis = random_unitary(n, rng)
    return from_spectrum(rng.uniform(low, high, n), basis), from_spectrum(rng.uniform(low, high, n), basis)


def grid_spectrum(n: int, rng: np.random.Generator, step: float = 0.125, low: float = -1.0, high: float = 1.0) -> np.ndarray:
    """Eigenvalues on a grid, so any two differ by 0 or at least step."""
    slots = int(round((high - low) / step))
    return low + step * rng.integers(0, slots + 1, n)


def random_amplitudes(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)
