"""Shared model fixtures and random-state helpers."""
from __future__ import annotations

import dataclasses

import numpy as np
import pytest

import lindcur as lc


@dataclasses.dataclass(frozen=True)
class Bundle:
    """A fully assembled model: chain operators, spectrum, bath, generator."""

    ops: lc.LatticeOperators
    eig: lc.EigenSystem
    spectrum: lc.BohrSpectrum
    kernel: object
    gplus: lc.HalfFourierTable
    generator: lc.LindbladGenerator
    engine: lc.JDEngine


def make_bundle(n_sites, coupling, *, hopping=1.0, potential=None, kernel=None):
    if potential is None:
        potential = np.zeros(n_sites)
    if kernel is None:
        kernel = lc.Exponential(gamma=0.1, kappa=5.0, omega=0.0)
    chain = lc.ChainSpec(
        n_sites, hopping, np.asarray(potential, float), np.asarray(coupling, float)
    )
    ops = lc.build_chain(chain)
    eig = lc.hermitian_eigensystem(ops.h)
    spectrum = lc.bohr_frequencies(eig, lc.default_freq_tol(eig))
    gplus = lc.gplus_table(kernel, spectrum)
    generator = lc.build_generator(lc.decompose(ops.v, eig, spectrum), gplus, eig)
    engine = lc.build_engine(ops, eig, spectrum, gplus)
    return Bundle(ops, eig, spectrum, kernel, gplus, generator, engine)


def random_density(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = x @ x.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng, n):
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (x + x.conj().T) / 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(1789)


@pytest.fixture(scope="session")
def ref4():
    """Four sites, alternating unit coupling.

    The coupling connects eigenlevels strictly pairwise, which leaves a
    two-dimensional stationary family (steady_state refuses this model).
    """
    return make_bundle(4, [1.0, -1.0, 1.0, -1.0])


@pytest.fixture(scope="session")
def asym4():
    """Four sites with incommensurate couplings; unique stationary state."""
    return make_bundle(4, [0.7, -1.1, 0.4, 0.9])


@pytest.fixture(scope="session")
def two_level():
    """Two sites, hopping 5 (level gap 10), slow bath with kappa = 1."""
    return make_bundle(
        2,
        [1.0, -1.0],
        hopping=5.0,
        kernel=lc.Exponential(gamma=0.1, kappa=1.0, omega=0.0),
    )
