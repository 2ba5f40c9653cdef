import numpy as np
import pytest

from rcc import BlockPartition, DensityOperator, ReferenceSet, build_reference, validate_density


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityOperator:
    """Ginibre-random mixed state of the given dimension."""
    r = rank or dim
    a = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = a @ a.conj().T
    m /= np.trace(m).real
    return validate_density(0.5 * (m + m.conj().T))


def random_pure(rng: np.random.Generator, dim: int) -> DensityOperator:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return validate_density(np.outer(v, v.conj()))


def full_reference(dim: int, g: int = 2, units: int = 2) -> ReferenceSet:
    return build_reference([np.eye(dim, dtype=complex)], g, units)


def embedded_reference(d_r: int, dim: int, g: int = 2, units: int = 2) -> ReferenceSet:
    diag = np.zeros(dim)
    diag[:d_r] = 1.0
    return build_reference([np.diag(diag).astype(complex)], g, units)


def embed_state(rho: DensityOperator, dim: int) -> DensityOperator:
    out = np.zeros((dim, dim), dtype=complex)
    out[: rho.dim, : rho.dim] = rho.matrix
    return DensityOperator(out)


def random_partition(rng: np.random.Generator, indices) -> BlockPartition:
    """Random partition of the given index collection."""
    idx = list(indices)
    rng.shuffle(idx)
    blocks = []
    while idx:
        take = int(rng.integers(1, len(idx) + 1))
        blocks.append(tuple(sorted(idx[:take])))
        idx = idx[take:]
    return BlockPartition(tuple(blocks))


def coarsen(rng: np.random.Generator, partition: BlockPartition) -> BlockPartition:
    """Randomly merge blocks; the input refines the result."""
    blocks = list(partition.blocks)
    rng.shuffle(blocks)
    merged = []
    while blocks:
        take = int(rng.integers(1, min(3, len(blocks)) + 1))
        merged.append(tuple(sorted(i for b in blocks[:take] for i in b)))
        blocks = blocks[take:]
    return BlockPartition(tuple(merged))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
