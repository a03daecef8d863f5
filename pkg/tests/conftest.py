import pytest

from veriscribe.schema import builtin_schema
from veriscribe.synthetic import generate_profiles, sample_dataset, soften


@pytest.fixture(scope="session")
def schema():
    return builtin_schema()


@pytest.fixture(scope="session")
def soft_dataset(schema):
    """20 writers x 10 samples, consistent writers, peaked soft vectors."""
    profiles = generate_profiles(schema, 20, consistency=0.9, seed=11)
    return soften(sample_dataset(schema, profiles, 10, seed=11), 0.9)


@pytest.fixture(scope="session")
def tiny_dataset(schema):
    """5 writers x 6 samples with hard labels only."""
    profiles = generate_profiles(schema, 5, consistency=0.8, seed=5)
    return sample_dataset(schema, profiles, 6, seed=5)
