import numpy as np
import pytest

from fairgm.gmdata import GroupedDataset
from fairgm.gmdisparity import LocalSolutions
from fairgm.gmmodels import model_loss


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


@pytest.fixture
def random_sym():
    def make(rng: np.random.Generator, P: int, scale: float = 1.0) -> np.ndarray:
        A = rng.normal(scale=scale, size=(P, P))
        return 0.5 * (A + A.T)

    return make


@pytest.fixture
def random_pd():
    def make(rng: np.random.Generator, P: int, shift: float = 1.0) -> np.ndarray:
        A = rng.normal(size=(P, P))
        return A @ A.T / P + shift * np.eye(P)

    return make


@pytest.fixture
def directional_fd():
    """Central difference of a scalar function along a matrix direction."""

    def fd(f, theta: np.ndarray, direction: np.ndarray, h: float = 1e-6) -> float:
        return (f(theta + h * direction) - f(theta - h * direction)) / (2.0 * h)

    return fd


@pytest.fixture
def assert_gradient(random_sym, directional_fd):
    """Compare <grad, D> with finite differences along random symmetric unit directions D."""

    def check(f, grad: np.ndarray, theta: np.ndarray, rng: np.random.Generator, n_dir: int = 3, rtol: float = 1e-4):
        for _ in range(n_dir):
            D = random_sym(rng, theta.shape[0])
            D /= np.linalg.norm(D)
            analytic = float(np.sum(grad * D))
            numeric = directional_fd(f, theta, D)
            assert abs(numeric - analytic) <= rtol * max(1.0, abs(analytic)), (numeric, analytic)

    return check


@pytest.fixture
def gaussian_ds(rng):
    """Three groups of a 4-variable Gaussian with different covariances."""
    P = 4
    blocks = []
    for k, n in enumerate((40, 60, 80)):
        A = rng.normal(size=(P, P)) * (0.3 + 0.2 * k)
        sigma = A @ A.T + np.eye(P)
        blocks.append(rng.multivariate_normal(np.zeros(P), sigma, size=n))
    groups = np.repeat([1, 2, 3], [40, 60, 80])
    return GroupedDataset(np.vstack(blocks), groups)


@pytest.fixture
def binary_ds(rng):
    """Three groups of independent binary variables with group-specific rates."""
    P = 4
    rates = [np.full(P, 0.3), np.full(P, 0.5), np.linspace(0.2, 0.8, P)]
    blocks = [(rng.random((n, P)) < r).astype(float) for n, r in zip((50, 70, 90), rates)]
    groups = np.repeat([1, 2, 3], [50, 70, 90])
    return GroupedDataset(np.vstack(blocks), groups, binary=True)


@pytest.fixture
def make_local():
    """Local solutions at given per-group graphs, with their losses computed from the groups."""

    def make(model, groups, thetas, tau: float = 0.01, lam: float = 0.01) -> LocalSolutions:
        thetas = tuple(np.asarray(th, dtype=np.float64) for th in thetas)
        losses = np.array([model_loss(model, th, g, tau) for th, g in zip(thetas, groups)])
        return LocalSolutions(model=model, thetas=thetas, losses=losses, lam=lam)

    return make
