import numpy as np
import pytest

from psplit.mps import MpsError, from_mps_text, read_mps, to_mps_text, write_mps
from psplit.problems import gen_example1, gen_kmeans, gen_relu_min, random_clusters, random_relu_net
from psplit.reformulate import build
from psplit.solver import compile_mip, solve_relaxation


def builds():
    ex = gen_example1([1.0, -1.0, 0.5, 0.0])
    km = gen_kmeans(random_clusters(0, 3, 2, 2))
    relu = gen_relu_min(random_relu_net(0, [2, 3, 1]))
    yield build(ex.model, "psplit", ex.partitions(2), ex.bound_rule)
    yield build(ex.model, "psplit-nonext", ex.partitions(4), ex.bound_rule)
    yield build(km.model, "bigm", None, km.bound_rule)
    yield build(relu.model, "hull")


@pytest.mark.parametrize("f", list(builds()), ids=lambda f: f.formulation)
def test_round_trip_is_bit_exact(f, tmp_path):
    back = read_mps(write_mps(f, tmp_path / "m.mps"))
    a, b = compile_mip(f), compile_mip(back)
    for field in ("c", "A_ub", "b_ub", "A_eq", "b_eq", "lb", "ub", "Q", "L", "r", "binaries"):
        assert np.array_equal(getattr(a, field), getattr(b, field)), field
    assert a.const == b.const
    assert [v.name for v in back.variables] == [v.name for v in f.variables]


def test_sections_present():
    f = next(builds())
    text = to_mps_text(f, "demo")
    assert text.startswith("NAME demo\nROWS\n N obj\n")
    assert "'INTORG'" in text and "'INTEND'" in text
    assert text.count("QCMATRIX") == len(f.convex_rows)
    assert text.rstrip().endswith("ENDATA")


def test_objective_constant_survives():
    f = next(builds())
    f.objective_constant = 2.5
    back = from_mps_text(to_mps_text(f))
    assert back.objective_constant == 2.5
    assert solve_relaxation(back).objective == pytest.approx(solve_relaxation(f).objective, abs=1e-9)


@pytest.mark.parametrize("text", [
    "ROWS\n N obj\n L r\nCOLUMNS\n x r 1 y 2\n",
    "ROWS\n Z r\n",
    "ROWS\n N obj\nCOLUMNS\n x s 1\n",
    "ROWS\n N obj\n L r\nCOLUMNS\n x r 1\nQCMATRIX r\n x y 1\n",
    "ROWS\n N obj\nRANGES\n",
    "ROWS\n N obj\n L r\nCOLUMNS\n x r abc\n",
])
def test_malformed_input(text):
    with pytest.raises(MpsError):
        from_mps_text(text)
