import math

import numpy as np
import pytest

from lyapspec.enumeration import leaf_table
from lyapspec.measures import (
    BernoulliMeasure,
    MarkovMeasure,
    bowen_check,
    entropy,
    lyapunov_vector,
    variational_crosscheck,
)
from lyapspec.pressure import pressure
from lyapspec.words import OneStepCocycle


def scalar_pair():
    return OneStepCocycle([[[2.0]], [[0.5]]])


def diag_pair():
    return OneStepCocycle([np.diag([4.0, 1.0]), np.diag([1.0, 4.0])])


def test_entropy_bernoulli():
    assert entropy(BernoulliMeasure([0.3, 0.7])) == pytest.approx(0.6108643020548935, abs=1e-12)
    assert entropy(BernoulliMeasure([0.5, 0.5])) == pytest.approx(math.log(2.0), abs=1e-12)
    assert entropy(BernoulliMeasure([1.0, 0.0])) == 0.0


def test_entropy_markov():
    assert entropy(MarkovMeasure(np.eye(2))) == 0.0
    assert entropy(MarkovMeasure(np.full((3, 3), 1 / 3))) == pytest.approx(math.log(3.0))
    p = np.array([0.2, 0.8])
    rows = MarkovMeasure(np.vstack([p, p]))
    assert entropy(rows) == pytest.approx(entropy(BernoulliMeasure(p)), abs=1e-12)


def test_markov_stationary_vector():
    mu = MarkovMeasure([[0.9, 0.1], [0.5, 0.5]])
    assert np.allclose(mu.initial, [5 / 6, 1 / 6], atol=1e-12)


def test_cylinder_weights_sum_to_one():
    C = diag_pair()
    _, words0 = leaf_table(C, 6, with_words=True)
    for mu in (
        BernoulliMeasure([0.3, 0.7]),
        BernoulliMeasure([1.0, 0.0]),
        MarkovMeasure([[0.9, 0.1], [0.5, 0.5]]),
    ):
        w = np.exp(mu.log_cylinder(words0))
        assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_lyapunov_uniform_scalar_is_zero():
    chi = lyapunov_vector(scalar_pair(), BernoulliMeasure([0.5, 0.5]), 9)
    assert chi.shape == (1,)
    assert chi[0] == pytest.approx(0.0, abs=1e-12)


def test_lyapunov_binomial_expectation():
    # top exponent of the diagonal pair under the uniform measure:
    # (log 4 / n) E[max(j, n-j)] with j ~ Binomial(n, 1/2)
    n = 10
    e_max = sum(math.comb(n, j) * max(j, n - j) for j in range(n + 1)) / 2**n
    assert e_max / n == pytest.approx(0.623047, abs=1e-6)
    chi = lyapunov_vector(diag_pair(), BernoulliMeasure([0.5, 0.5]), n)
    assert chi[0] == pytest.approx(math.log(4.0) * e_max / n, abs=1e-10)
    assert chi[1] == pytest.approx(math.log(4.0) * (1 - e_max / n), abs=1e-10)


def test_lyapunov_sorted_and_det_sum():
    rng = np.random.default_rng(31)
    C = OneStepCocycle(rng.uniform(-2.0, 2.0, (3, 3, 3)) + 4.0 * np.eye(3))
    mu = BernoulliMeasure([0.2, 0.5, 0.3])
    chi = lyapunov_vector(C, mu, 5)
    assert np.all(np.diff(chi) <= 1e-12)
    log_dets = np.log(np.abs(np.linalg.det(C.generators)))
    assert chi.sum() == pytest.approx(float(mu.probs @ log_dets), abs=1e-10)


def test_lyapunov_dirac_measure():
    C = diag_pair()
    chi = lyapunov_vector(C, BernoulliMeasure([1.0, 0.0]), 7)
    assert np.allclose(chi, [math.log(4.0), 0.0], atol=1e-12)


def random_measure(rng, k):
    if rng.random() < 0.5:
        return BernoulliMeasure(rng.dirichlet(np.ones(k)))
    return MarkovMeasure(rng.dirichlet(np.ones(k), size=k))


def test_bowen_inequality_random():
    rng = np.random.default_rng(77)
    cocycles = [
        scalar_pair(),
        diag_pair(),
        OneStepCocycle(rng.uniform(-2.0, 2.0, (3, 2, 2)) + 3.0 * np.eye(2)),
    ]
    for _ in range(200):
        C = cocycles[rng.integers(len(cocycles))]
        mu = random_measure(rng, C.k)
        q = rng.uniform(-2.0, 2.0, C.d)
        n = int(rng.integers(1, 9))
        lhs, rhs = bowen_check(C, mu, q, n)
        assert lhs <= rhs + 1e-10


def test_bowen_equality_uniform_at_zero():
    for C in (diag_pair(), scalar_pair()):
        mu = BernoulliMeasure(np.full(C.k, 1.0 / C.k))
        for n in (1, 4, 7):
            lhs, rhs = bowen_check(C, mu, np.zeros(C.d), n)
            assert abs(lhs - rhs) <= 1e-12
            assert rhs == pytest.approx(math.log(C.k), abs=1e-13)


def test_crosscheck_scalar_witness():
    res = variational_crosscheck(scalar_pair(), [1.0], 12, "bernoulli")
    assert res.pressure == pytest.approx(math.log(2.5), abs=1e-12)
    assert abs(res.best - res.pressure) <= 0.01
    assert abs(res.witness.probs[0] - 0.8) <= 0.02
    assert res.gap >= -1e-8
    assert res.converged


def test_crosscheck_gap_nonnegative_both_families():
    rng = np.random.default_rng(3)
    C = diag_pair()
    for family in ("bernoulli", "markov"):
        for _ in range(3):
            q = rng.uniform(-1.5, 1.5, 2)
            res = variational_crosscheck(C, q, 6, family)
            assert res.gap >= -1e-8
            assert res.best <= res.pressure + 1e-8


def test_crosscheck_markov_at_least_bernoulli():
    q = [1.0, 0.0]
    rb = variational_crosscheck(diag_pair(), q, 8, "bernoulli")
    rm = variational_crosscheck(diag_pair(), q, 8, "markov")
    assert rm.best >= rb.best - 1e-6


def test_measure_validation():
    with pytest.raises(ValueError):
        BernoulliMeasure([0.5, 0.6])
    with pytest.raises(ValueError):
        BernoulliMeasure([-0.1, 1.1])
    with pytest.raises(ValueError):
        MarkovMeasure([[0.5, 0.5], [0.7, 0.4]])
    with pytest.raises(ValueError):
        lyapunov_vector(diag_pair(), BernoulliMeasure([0.2, 0.3, 0.5]), 4)
    with pytest.raises(ValueError):
        variational_crosscheck(diag_pair(), [1.0, 0.0], 4, "gibbs")
