import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothpen import ConfigError, PenaltyConfig, SolveSettings
from smoothpen.config import (Config, LabSettings, ProblemSpec, load_config, parse_config,
                              serialize_config)
from smoothpen.transforms import identity, linear, power, rational_barrier, sqrt_double

FULL = """
# comment
[problem]
dimension = 2
lower = -2, -2
upper = 2, 2
objective = quadratic(Q=1, 0, 0, 1; a=1, 0; b=0.5)
equality = affine(a=1, -1; b=0)
inequality = affine(a=0, 1; b=-1)
inequality = quadratic(Q=1, 0, 0, 1; b=-3)

[penalty]
lambda = 0.75
alpha = 1
w = -0.5, 0.25, 0
phi = rational_barrier
beta = linear(2)
half_factor = true

[solver]
multistart = 8
seed = 3
eps_max = 50

[lab]
family = distance
exponent = 0.6666666666666666
bracket = 0, 2
tol = 0.01
group = square

[output]
json = out.json
csv = out.csv
"""


def test_parse_full():
    cfg = parse_config(FULL)
    assert cfg.penalty == PenaltyConfig(0.75, (-0.5, 0.25, 0.0), 1.0, rational_barrier(),
                                        linear(2.0), True)
    assert cfg.solver.multistart == 8 and cfg.solver.eps_max == 50.0
    assert cfg.lab.family == "distance" and cfg.lab.bracket == (0.0, 2.0)
    assert cfg.output.json == "out.json"
    p = cfg.problem.build()
    assert (p.n, p.m, p.l) == (2, 1, 2)
    x = np.array([0.5, -1.0])
    assert p.f(x) == pytest.approx(0.25 + 1.0 + 0.5 + 0.5)
    np.testing.assert_allclose(p.grad_f(x), [2.0, -2.0])
    np.testing.assert_allclose(p.constraints(x), [1.5, -2.0, -1.75])


def test_round_trip_full():
    cfg = parse_config(FULL)
    assert parse_config(serialize_config(cfg)) == cfg


def test_round_trip_benchmark():
    cfg = Config(problem=ProblemSpec.parse_benchmark("piecewise(c=3, half_width=5)"))
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert again.problem.resolve()[1].name.startswith("piecewise")


TRANSFORMS = st.sampled_from([identity(), linear(2.0), rational_barrier(), power(1.5),
                              sqrt_double()])
NUM = st.floats(0, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(lam=NUM, alpha=st.floats(0, 3), w=st.lists(st.floats(-10, 10), max_size=3),
       phi=TRANSFORMS, beta=TRANSFORMS, half=st.booleans(), seed=st.integers(0, 2**31),
       ms=st.integers(1, 200), eps_max=st.one_of(st.none(), st.floats(1e-3, 1e6)),
       tol=st.floats(1e-9, 1.0), lo=st.floats(0, 10), width=st.floats(1e-3, 10))
def test_round_trip_property(lam, alpha, w, phi, beta, half, seed, ms, eps_max, tol, lo, width):
    cfg = Config(
        problem=ProblemSpec.parse_benchmark("sphere(n=3)"),
        penalty=PenaltyConfig(lam, tuple(w), alpha, phi, beta, half),
        solver=SolveSettings(multistart=ms, seed=seed, eps_max=eps_max),
        lab=LabSettings(bracket=(lo, lo + width), tol=tol),
    )
    assert parse_config(serialize_config(cfg)) == cfg


@pytest.mark.parametrize("text, key", [
    ("[penalty]\nlambda = abc\n", "lambda"),
    ("[penalty]\nlambda = -1\n", "lambda"),
    ("[penalty]\nphi = nosuch\n", "phi"),
    ("[penalty]\nbogus = 1\n", "bogus"),
    ("[nosection]\n", "nosection"),
    ("lambda = 1\n", "lambda"),
    ("[penalty]\nlambda = 1\nlambda = 2\n", "lambda"),
    ("[solver]\nmultistart = 0\n", "multistart"),
    ("[solver]\nseed = 1.5\n", "seed"),
    ("[lab]\nbracket = 1\n", "bracket"),
    ("[lab]\nfamily = other\n", "family"),
    ("[problem]\nobjective = affine(a=1)\n", "dimension"),
    ("[problem]\nbenchmark = sphere\ndimension = 2\n", "dimension"),
    ("[problem]\ndimension = 2\nobjective = cubic(a=1)\n", "objective"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.key == key


def test_bad_expression_size_names_key():
    cfg = parse_config("[problem]\ndimension = 2\nobjective = affine(a=1)\n")
    with pytest.raises(ConfigError) as err:
        cfg.problem.build()
    assert err.value.key == "objective"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as err:
        load_config(tmp_path / "missing.cfg")
    assert err.value.key == "config"


def test_benchmark_cli_form():
    a = ProblemSpec.parse_benchmark("sphere=n=4")
    b = ProblemSpec.parse_benchmark("sphere(n=4)")
    assert a == b and a.params == {"n": 4}
