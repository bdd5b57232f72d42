from pathlib import Path

import numpy as np
import pytest
import sympy as sp
from sympy.polys.monomials import itermonomials

from carnot_lift.algebra import SCALARS
from carnot_lift.cli import OPTIONS
from carnot_lift.fieldforms import FieldForm
from carnot_lift.fixtures import filiform_extension, heisenberg_extension, plane
from carnot_lift.forms import exterior


@pytest.fixture
def fake_fixture_cmd(monkeypatch):
    monkeypatch.setattr("sys.argv", ["carnot-lift", "fixtures", "heisenberg"])


@pytest.fixture
def isolate_env(monkeypatch):
    # delete all existing env vars that could interfere
    monkeypatch.delenv("XDG_CONFIG_HOME", raising=False)
    for opt in OPTIONS.values():
        if opt.env:
            monkeypatch.delenv(opt.env, raising=False)


@pytest.fixture
def fake_rc(tmp_path: Path, monkeypatch):
    rc = tmp_path / "test.carnotrc"
    monkeypatch.setattr(OPTIONS["rc"], "default", rc)
    return rc


@pytest.fixture(scope="session")
def R2():
    return plane()


@pytest.fixture(scope="session")
def h1_ext():
    """The plane extended by dx∧dy, i.e. the first Heisenberg group."""
    return filiform_extension(1)


@pytest.fixture(scope="session")
def f3_ext():
    return filiform_extension(2)


@pytest.fixture(scope="session")
def h2_ext():
    return heisenberg_extension(2)


@pytest.fixture(scope="session")
def random_form():
    """Seeded random forms whose coefficients are sparse integer polynomials."""

    def make(alg, degree, seed, values=SCALARS, terms=3, max_degree=2):
        rng = np.random.default_rng(seed)
        monomials = sorted(itermonomials(alg.coordinates, max_degree), key=sp.default_sort_key)
        coeffs = sp.zeros(exterior(alg).size(degree), values.dim)
        for r in range(coeffs.rows):
            for c in range(coeffs.cols):
                picks = rng.choice(len(monomials), size=min(terms, len(monomials)), replace=False)
                coeffs[r, c] = sum(int(rng.integers(-3, 4)) * monomials[i] for i in picks)
        return FieldForm(alg, degree, values, coeffs)

    return make
