import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cplx
from sumzeros.measures import (
    ComplexGaussian,
    LogParetoRadial,
    MeasureError,
    Mixture,
    PointMass,
    SingularRadial,
    UniformCircle,
    UniformDisk,
    has_log_moment,
    log_potential_closed,
    log_potential_mc,
    measure_from_dict,
    measure_to_dict,
    sample,
    substream,
)

CLOSED = [
    UniformDisk(0.5 - 0.2j, 1.3),
    UniformCircle(-0.3j, 0.8),
    PointMass(0.4 + 0.4j),
    Mixture(((0.3, UniformDisk(1 + 0j, 0.5)), (0.7, UniformCircle(0j, 1.0)))),
]
ALL = CLOSED + [ComplexGaussian(0.2 + 0j, 1.5), LogParetoRadial(), SingularRadial(1j)]


def test_disk_potential_matches_quadrature(frozen):
    d = UniformDisk(0j, 1.0)
    for rec in frozen["disk_potential"]:
        z = complex(*rec["z"])
        assert log_potential_closed(d, z) == pytest.approx(rec["value"], abs=1e-10)


def test_listed_closed_forms():
    d = UniformDisk(0j, 1.0)
    assert log_potential_closed(d, 0) == -0.5
    assert log_potential_closed(d, 2) == pytest.approx(math.log(2), abs=1e-15)
    a = 0.3 + 2j
    assert log_potential_closed(PointMass(a), 1 - 1j) == pytest.approx(math.log(abs(1 - 1j - a)))
    assert log_potential_closed(PointMass(a), a) == -math.inf
    assert log_potential_closed(ComplexGaussian(), 1.0) is None
    assert log_potential_closed(LogParetoRadial(), 1.0) is None
    assert log_potential_closed(Mixture(((0.5, PointMass(0j)), (0.5, ComplexGaussian()))), 1) is None


def test_log_moment_flags(frozen):
    assert has_log_moment(UniformDisk(3 + 0j, 2.0))
    assert has_log_moment(SingularRadial())
    assert has_log_moment(ComplexGaussian())
    assert not has_log_moment(LogParetoRadial())
    assert not has_log_moment(Mixture(((0.9, UniformDisk()), (0.1, LogParetoRadial()))))
    # symbolic oracle: the truncated log moment grows like log(u) without bound
    lp = frozen["log_pareto"]
    assert lp["truncated_log_moment"] == "log(u)"
    assert lp["log_moment_limit"] == "oo"


def test_divergence_numerically():
    # truncated E log+|X| over |X| < e^u equals log u; doubling u adds log 2
    r = sp.symbols("r", positive=True)
    dens = 1 / (r * sp.log(r) ** 2)
    parts = [float(sp.integrate(sp.log(r) * dens, (r, sp.E, sp.exp(u)))) for u in (10, 100, 1000)]
    assert parts[1] - parts[0] == pytest.approx(math.log(10))
    assert parts[2] - parts[1] == pytest.approx(math.log(10))


def test_log_pareto_median(frozen):
    x = LogParetoRadial().sample_ext(substream(1), 100_000)
    med = math.exp(float(np.median(x.log_abs())))
    target = math.exp(frozen["log_pareto"]["median_log_radius"])
    assert med == pytest.approx(target, rel=0.05)
    assert target == pytest.approx(math.e ** 2)


def test_log_pareto_tail_extends_beyond_double_range():
    x = LogParetoRadial().sample_ext(substream(2), 20_000)
    la = x.log_abs()
    assert la.min() >= 1.0
    # P(log r > 710) = 1/710, so about 28 of 20000 draws overflow doubles
    assert np.sum(la > 710) > 5
    assert np.all(np.isinf(x.to_complex()[la > 710].real) | np.isinf(x.to_complex()[la > 710].imag))


def test_mc_listed_examples():
    est = log_potential_mc(PointMass(1 + 0j), 3, 7, substream(0))
    assert est.mean == pytest.approx(math.log(2)) and est.stderr == 0
    for z, target in ((2, math.log(2)), (0, -0.5)):
        est = log_potential_mc(UniformDisk(), z, 100_000, substream(5, int(z)))
        assert abs(est.mean - target) <= 3 * est.stderr


def test_mc_refusals():
    with pytest.raises(MeasureError):
        log_potential_mc(LogParetoRadial(), 0, 100, substream(0))
    with pytest.raises(MeasureError):
        log_potential_mc(PointMass(1j), 1j, 100, substream(0))


@pytest.mark.parametrize("m", CLOSED, ids=lambda m: m.kind)
def test_sampler_potential_consistency(m):
    rng = np.random.default_rng(99)
    atoms = [a for a, _ in m.atoms]
    probes = []
    while len(probes) < 20:
        z = 3 * math.sqrt(rng.random()) * complex(math.cos(t := 2 * math.pi * rng.random()), math.sin(t))
        if all(abs(z - a) > 0.1 for a in atoms):
            probes.append(z)
    hits = 0
    for i, z in enumerate(probes):
        est = log_potential_mc(m, z, 100_000, substream(17, i))
        hits += abs(est.mean - log_potential_closed(m, z)) <= 4 * est.stderr + 1e-12
    assert hits >= 19


@pytest.mark.parametrize("m", ALL, ids=lambda m: m.kind)
def test_seed_determinism(m):
    a = m.sample_ext(substream(4, 2), 500)
    b = m.sample_ext(substream(4, 2), 500)
    assert np.array_equal(a.mant, b.mant) and np.array_equal(a.exp, b.exp)
    assert np.array_equal(sample(m, substream(4, 2), 500), m.sample(substream(4, 2), 500),
                          equal_nan=True)


@given(st.floats(0.01, 3.0), st.floats(0, 2 * math.pi))
@settings(max_examples=40)
def test_rotation_invariance_closed(r, t):
    for m in (UniformDisk(), UniformCircle(0j, 1.3)):
        assert log_potential_closed(m, r * complex(math.cos(t), math.sin(t))) == \
            pytest.approx(log_potential_closed(m, r), abs=1e-13)


def test_rotation_invariance_mc():
    m = SingularRadial()
    for k, t in enumerate((0.7, 2.0, 4.1)):
        a = log_potential_mc(m, 1.5 * complex(math.cos(t), math.sin(t)), 50_000, substream(8, k))
        b = log_potential_mc(m, 1.5, 50_000, substream(9, k))
        assert abs(a.mean - b.mean) <= 4 * math.hypot(a.stderr, b.stderr)


def test_singular_radial_radius_uniform():
    r = np.abs(SingularRadial().sample(substream(3), 50_000))
    assert np.mean(r < 0.5) == pytest.approx(0.5, abs=0.01)
    assert r.max() < 1


def test_gaussian_scale():
    z = ComplexGaussian(1 + 1j, 2.0).sample(substream(6), 100_000)
    assert np.mean(z) == pytest.approx(1 + 1j, abs=0.03)
    assert np.mean(np.abs(z - (1 + 1j)) ** 2) == pytest.approx(4.0, rel=0.02)


def test_mixture_validation():
    with pytest.raises(MeasureError):
        Mixture(((0.5, UniformDisk()), (0.4, PointMass(0j))))
    with pytest.raises((MeasureError, ValueError)):
        UniformDisk(0j, -1.0)


@pytest.mark.parametrize("m", ALL, ids=lambda m: m.kind)
def test_dict_round_trip(m):
    assert measure_from_dict(measure_to_dict(m)) == m


def test_dict_errors_name_the_key():
    with pytest.raises(MeasureError, match=r"terms\[0\]\.measure\.kind"):
        measure_from_dict({"kind": "cauchy"}, "terms[0].measure")
    with pytest.raises(MeasureError, match="unexpected keys"):
        measure_from_dict({"kind": "uniform-disk", "radius": 1, "colour": 2})
    d = measure_from_dict({"kind": "uniform-disk", "center": [2.0, 0.0], "radius": 1.0})
    assert d == UniformDisk(2 + 0j, 1.0)


def test_substreams_independent():
    a = substream(1, 0).random(4)
    b = substream(1, 1).random(4)
    assert not np.allclose(a, b)
