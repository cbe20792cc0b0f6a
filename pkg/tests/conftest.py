import pytest

from mzcalc import kernels

BACKENDS = kernels.available_backends()


@pytest.fixture(params=sorted(BACKENDS), scope="session")
def backend(request):
    """Each importable kernel module in turn."""
    return BACKENDS[request.param]
