import random

import pytest

from helpers import rand_barcode, rand_grid_module
from persmod.decomposition import decompose, rank_table
from persmod.modules import (
    Barcode,
    GridModule,
    GridMorphism,
    Interval,
    NaturalityError,
    alternating_grid,
    barcode_from_csv,
    barcode_to_csv,
    chi,
    cokernel,
    direct_sum,
    discretize,
    image,
    kernel,
    synthesize,
)
from persmod.scalars import INF, NEG_INF, Matrix, ext


def test_interval_canonical_forms():
    assert Interval.make(1, 1, False, True).is_empty
    assert Interval.make(2, 1).is_empty
    assert Interval.make(1, 1) == Interval.closed(1, 1)
    assert not Interval.make(NEG_INF, 0, True, True).lo_closed
    assert Interval.empty() == Interval.make(3, 3, False, False)


def test_interval_membership():
    iv = Interval.make(0, 1, False, True)
    assert 0 not in iv and ext("1/2") in iv and 1 in iv
    assert 5 in Interval.real_line()


def test_alternating_grid():
    assert alternating_grid([]) == (ext(0),)
    assert alternating_grid([1, 0]) == tuple(ext(x) for x in ("-1", "0", "1/2", "1", "2"))


def test_chi_examples():
    grid = alternating_grid([1])
    assert chi(Interval.empty(), grid).dims == (0, 0, 0)
    whole = chi(Interval.real_line(), grid)
    assert whole.dims == (1, 1, 1)
    assert all(t == Matrix.identity(1, 2) for t in whole.transitions)
    m = chi(Interval.closed(1, 2), grid)
    assert m.dims == (0, 1, 1)
    assert m.transitions[1] == Matrix.identity(1, 2)


def test_synthesize_examples():
    assert synthesize(Barcode()).is_zero()
    m = synthesize(Barcode([(0, Interval.closed(0, 1))]))
    assert m.grid == alternating_grid([0, 1])
    assert m.dims == (0, 1, 1, 1, 0)
    two = synthesize(Barcode([(0, Interval.closed_open(0, INF), 2)]))
    assert two.dims == (0, 2, 2)
    assert two.transitions[1] == Matrix.identity(2, 2)


def test_discretize_examples():
    iv = Interval.closed(0, 1)
    fine = chi(iv, alternating_grid([0, ext("1/4"), ext("1/2"), 1]))
    coarse = discretize(fine, critical_values=[0, 1])
    assert coarse.dims == chi(iv, alternating_grid([0, 1])).dims
    assert coarse.grid == alternating_grid([0, 1])
    same = chi(iv, alternating_grid([0, 1]))
    assert discretize(same, critical_values=[0, 1]).transitions == same.transitions


def test_direct_sum():
    rng = random.Random(3)
    for _ in range(30):
        a, b = rand_barcode(rng, 3), rand_barcode(rng, 3)
        x, y = synthesize(a), synthesize(b)
        s = direct_sum(x, y)
        assert decompose(s) == a + b
        zero = GridModule.zero(x.grid)
        assert (rank_table(direct_sum(x, zero)) == rank_table(x)).all()


def test_morphism_naturality_checked():
    grid = alternating_grid([0])
    src = chi(Interval.closed_open(0, INF), grid)
    tgt = chi(Interval.closed(0, 0), grid)
    # restriction of the ray onto the point is natural, the reverse inclusion is not
    GridMorphism(src, tgt, [Matrix.zeros(0, 0, 2), Matrix.identity(1, 2), Matrix.zeros(0, 1, 2)])
    with pytest.raises(NaturalityError):
        GridMorphism(tgt, src, [Matrix.zeros(0, 0, 2), Matrix.identity(1, 2), Matrix.zeros(1, 0, 2)])


def test_kernel_image_cokernel_examples():
    rng = random.Random(5)
    for _ in range(40):
        p = rng.choice((2, 3))
        m = rand_grid_module(rng, p)
        ident = GridMorphism.identity(m)
        assert kernel(ident).is_zero() and cokernel(ident).is_zero()
        assert (rank_table(image(ident)) == rank_table(m)).all()
        zero = GridMorphism.zero(m, m)
        assert (rank_table(kernel(zero)) == rank_table(m)).all()
        assert image(zero).is_zero()
        assert (rank_table(cokernel(zero)) == rank_table(m)).all()


def random_morphism(rng: random.Random, a: list, b: list, grid, p: int) -> GridMorphism:
    """Random natural map between sums of interval modules, built summand pair by summand pair."""
    grid = tuple(grid)
    alive_a = [[k for k, iv in enumerate(a) if x in iv] for x in grid]
    alive_b = [[k for k, iv in enumerate(b) if x in iv] for x in grid]
    scal = {}
    for k, iv in enumerate(a):
        for l, jv in enumerate(b):
            single = [Matrix([[1 if x in iv and x in jv else 0]] if x in iv and x in jv else [],
                             p, shape=(int(x in jv), int(x in iv))) for x in grid]
            try:
                GridMorphism(chi(iv, grid, p), chi(jv, grid, p), single)
            except NaturalityError:
                continue
            scal[(k, l)] = rng.randrange(p)
    comps = []
    for i in range(len(grid)):
        rows = [[scal.get((k, l), 0) for k in alive_a[i]] for l in alive_b[i]]
        comps.append(Matrix(rows, p, shape=(len(alive_b[i]), len(alive_a[i]))))
    return GridMorphism(synthesize(Barcode((0, iv) for iv in a), 0, p, grid),
                        synthesize(Barcode((0, iv) for iv in b), 0, p, grid), comps)


def test_rank_nullity_on_random_morphisms():
    rng = random.Random(11)
    nonzero = 0
    for _ in range(80):
        p = rng.choice((2, 3))
        a = rand_barcode(rng, 4, allow_infinite=False).intervals(0)
        b = rand_barcode(rng, 4, allow_infinite=False).intervals(0)
        ends = {e for iv in a + b for e in (iv.lo, iv.hi)}
        mor = random_morphism(rng, a, b, alternating_grid(ends), p)
        ker, im, cok = kernel(mor), image(mor), cokernel(mor)
        for i in range(mor.source.size):
            assert ker.dims[i] + im.dims[i] == mor.source.dims[i]
            assert cok.dims[i] == mor.target.dims[i] - im.dims[i]
        nonzero += not im.is_zero()
    assert nonzero > 10


def test_csv_round_trip():
    b = Barcode([(0, Interval.make(0, INF, True, False)), (1, Interval.make(ext("1/2"), 2, False, True), 3)])
    text = barcode_to_csv(b)
    assert text.splitlines()[0] == "degree,lo,hi,lo_closed,hi_closed,multiplicity"
    assert "1,1/2,2,false,true,3" in text
    assert barcode_from_csv(text) == b


def test_csv_rejects_garbage():
    with pytest.raises(ValueError):
        barcode_from_csv("degree,lo,hi,lo_closed,hi_closed,multiplicity\n0,x,1,true,true,1\n")
    with pytest.raises(ValueError):
        barcode_from_csv("nope\n")


def test_grid_module_validation():
    with pytest.raises(ValueError):
        GridModule((0, 1), (0, 0), [Matrix.zeros(0, 0, 2)])
    with pytest.raises(ValueError):
        GridModule((0,), (1,), [], 4)
