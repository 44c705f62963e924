import pytest

from clipshape import families
from clipshape.constellation import entropy, peak_power


@pytest.mark.parametrize("name,kind,h", [("ud", "ud", None), ("mb", "mb", 4.3), ("MB5.2", "mb", 5.2),
                                         ("ppc", "ppc", 4.3), ("ppc60", "ppc60", 4.3), ("ppc605.2", "ppc60", 5.2)])
def test_parse(name, kind, h):
    assert families.parse(name) == (kind, h)


def test_parse_uses_default_entropy_override():
    assert families.parse("mb", 5.2) == ("mb", 5.2)
    assert families.parse("mb4.3", 5.2) == ("mb", 4.3)


@pytest.mark.parametrize("bad", ["qam", "mb-1", "", "ud4"])
def test_parse_rejects(bad):
    with pytest.raises(ValueError):
        families.parse(bad)


def test_build_entropies(family):
    assert entropy(family("ud")) == pytest.approx(6.0)
    assert entropy(family("mb4.3")) == pytest.approx(4.3, abs=1e-9)
    assert entropy(family("ppc4.3")) == pytest.approx(4.3, abs=1e-4)
    assert len(families.support("ppc60")) == 60
    assert peak_power(families.support("ppc60")) == pytest.approx(98.0)


def test_labels():
    assert families.label("ud") == "ud"
    assert families.label("mb") == "mb4.3"
    assert families.label("ppc", 5.2) == "ppc5.2"
