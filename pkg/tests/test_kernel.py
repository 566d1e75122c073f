import math

import mpmath
import numpy as np
import pytest
from scipy.special import kv

from ssspline.errors import DomainError
from ssspline.kernel import bessel_k, eval_h, eval_h_fourier
from ssspline.theory import KernelParams


def test_eval_h_examples():
    p = KernelParams(2, 2, 1.0)
    # m = 2 so the sign is +; at r = 0 the log vanishes
    assert eval_h(0.0, p) == 0.0
    assert eval_h(3.0, p) == pytest.approx(4.0 * math.log(2.0))
    q = KernelParams(2, 4, 1.0)  # m = 3, sign -
    assert eval_h(3.0, q) == pytest.approx(-16.0 * math.log(2.0))


def test_eval_h_rejects_negative():
    with pytest.raises(DomainError):
        eval_h(-1.0, KernelParams(2, 2, 1.0))


def test_bessel_reference_values():
    assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-14)
    assert bessel_k(1, 1.0) == pytest.approx(0.6019072301972346, rel=1e-14)


@pytest.mark.parametrize("nu", range(7))
def test_bessel_against_scipy(nu):
    t = np.geomspace(0.05, 200, 157)
    np.testing.assert_allclose(bessel_k(nu, t), kv(nu, t), rtol=1e-12)


@pytest.mark.parametrize("nu, t", [(0, 2.5), (3, 7.0), (5, 31.0), (2, 0.3)])
def test_bessel_against_mpmath(nu, t):
    assert bessel_k(nu, t) == pytest.approx(float(mpmath.besselk(nu, t)), rel=1e-13)


def test_bessel_domain():
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(-1, 1.0)


def test_bessel_lower_bound_for_positive_orders():
    t = np.linspace(0.1, 100, 400)
    floor = np.sqrt(np.pi / (2 * t)) * np.exp(-t)
    for nu in range(1, 7):
        assert np.all(bessel_k(nu, t) >= floor)


def test_bessel_lower_bound_fails_for_order_zero():
    # K_0 < K_(1/2), and K_(1/2) is exactly the bound
    t = np.linspace(0.1, 100, 400)
    assert np.all(bessel_k(0, t) < np.sqrt(np.pi / (2 * t)) * np.exp(-t))


@pytest.mark.parametrize("n, lam", [(2, 2), (2, 4), (4, 2)])
def test_fourier_transform_positive_and_decaying(n, lam):
    p = KernelParams(n, lam, 0.7)
    xi = np.geomspace(0.01, 50, 200)
    vals = eval_h_fourier(xi, p)
    assert np.all(vals > 0)
    assert np.all(np.diff(vals) < 0)


def test_fourier_transform_rejects_origin():
    with pytest.raises(DomainError):
        eval_h_fourier(0.0, KernelParams(2, 2, 1.0))


def test_kernel_is_radial():
    rng = np.random.default_rng(3)
    p = KernelParams(4, 2, 0.5)
    x = rng.normal(size=4)
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    assert eval_h(np.sum(x ** 2), p) == pytest.approx(eval_h(np.sum((q @ x) ** 2), p), rel=1e-12)
