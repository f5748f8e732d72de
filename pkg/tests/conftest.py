import numpy as np
import pytest

from kaon_bell.kaon import KaonParams
from kaon_bell.liouville import JumpChannel, OpenSystem


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (a + a.conj().T)


def random_density(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def random_open_system(rng: np.random.Generator, n: int = 3, channels: int = 2) -> OpenSystem:
    jumps = tuple(
        JumpChannel(
            operator=rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)),
            rate=float(rng.uniform(0.0, 1.0)),
            label=f"L{i}",
        )
        for i in range(channels)
    )
    return OpenSystem(hamiltonian=random_hermitian(rng, n), channels=jumps)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def params():
    return KaonParams()


@pytest.fixture
def ini_file(tmp_path):
    def write(text: str) -> str:
        path = tmp_path / "run.ini"
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
