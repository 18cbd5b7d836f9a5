from __future__ import annotations

import pytest

from phasesig import compute_signature_family, derive_meta_types, load_fixture


def _family(name):
    system, opts = load_fixture(name)
    mta = derive_meta_types(system, relax_exponential=opts.relax_exponential)
    return compute_signature_family(system, mta)


@pytest.fixture(scope="session")
def ex1():
    return _family("example1")


@pytest.fixture(scope="session")
def ex2():
    return _family("example2")


@pytest.fixture(scope="session")
def ex3():
    return _family("example3")
