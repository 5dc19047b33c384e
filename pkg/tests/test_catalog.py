import pytest

from fairshares import catalog
from fairshares.generators import GeneratorSpec, generate_instance, parse_generator
from fairshares.shares import share_value


def test_catalog_names_present():
    for name in (
        "example-ns",
        "rho21",
        "rho22",
        "rho31",
        "rho42",
        "ps-guarantee",
        "ps-implied",
        "ps-cex",
        "rhomms-cex",
        "ptas-cex",
        "milp-witness",
    ):
        assert name in catalog.names()


def test_catalog_expected_values_recompute():
    # regression lock: every stored value must match a fresh computation
    for name in catalog.names():
        entry = catalog.get(name)
        for spec, expected, _source in entry.expected:
            got = share_value(spec, entry.valuation, entry.n)
            assert got == expected, (name, spec.describe(), got, expected)


def test_catalog_unknown_name():
    with pytest.raises(KeyError):
        catalog.get("missing")


def test_generators_deterministic():
    spec = GeneratorSpec("uniform", seed=9, m=7, n=3, max_value=11)
    a = generate_instance(spec)
    b = generate_instance(spec)
    assert a == b
    c = generate_instance(GeneratorSpec("uniform", seed=10, m=7, n=3, max_value=11))
    assert c != a


def test_generator_families():
    corr = generate_instance(GeneratorSpec("correlated", seed=3, m=6, n=2, noise=2))
    assert corr.n == 2 and corr.m == 6
    worst = generate_instance(GeneratorSpec("worstcase", k=1))
    assert worst.n == 5 and worst.m == 15
    cat = generate_instance(GeneratorSpec("catalog", name="rho21"))
    assert cat.m == 5


def test_parse_generator():
    spec = parse_generator("uniform:m=9,n=4,maxv=15", seed=5)
    assert spec.m == 9 and spec.n == 4 and spec.max_value == 15 and spec.seed == 5
    assert parse_generator("worstcase:k=2").k == 2
    assert parse_generator("catalog:rho22").name == "rho22"
    with pytest.raises(ValueError):
        generate_instance(parse_generator("bogus:m=3"))
