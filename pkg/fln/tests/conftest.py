import pytest
import torch

# The sandbox exposes a single CPU; extra intra-op threads only add
# contention and nondeterminism in timing.
torch.set_num_threads(1)


@pytest.fixture(scope="session")
def tiny_model():
    """An untrained model with deterministic weights, for contract tests."""
    torch.manual_seed(0)
    from fln import SkipAutoEncoder

    return SkipAutoEncoder()
