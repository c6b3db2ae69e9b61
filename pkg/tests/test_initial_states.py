import math

import numpy as np
import pytest

from errors import ValidationError
from initial_states import (
    StateComponent,
    components_to_tensor,
    describe_components,
    format_initial_spec,
    normalize_components,
    parse_initial_spec,
    split_by_parity,
)
from model import parity_of


def test_single_component_defaults_to_unit_amplitude():
    (component,) = parse_initial_spec("+,0")
    assert component == StateComponent(1, 0, 1.0)


def test_parity_aliases():
    assert [c.parity for c in parse_initial_spec("p,1;m,2;+1,3;-1,4")] == [1, -1, 1, -1]


def test_repeated_components_are_summed():
    (component,) = parse_initial_spec("+,2:0.5,0;+,2:0.25,0.5")
    assert component.amplitude == complex(0.75, 0.5)


@pytest.mark.parametrize("text", ["", "x,0", "+", "+,a", "+,-1", "+,0:1", "+,0:0,0", "+,0:a,b"])
def test_malformed_input_is_rejected(text):
    with pytest.raises(ValidationError) as info:
        parse_initial_spec(text)
    assert info.value.field == "initial"


def test_format_is_exact():
    components = parse_initial_spec("+,0:0.70710678118654757,0;-,3:0.1,-0.3")
    text = format_initial_spec(components)
    assert parse_initial_spec(text) == components
    assert format_initial_spec(parse_initial_spec("+,0")) == "+,0:1,0"


def test_normalize_drops_zero_terms():
    components = normalize_components([StateComponent(1, 0, 3.0), StateComponent(-1, 1, 4.0), StateComponent(1, 5, 0.0)])
    assert len(components) == 2
    assert components[0].amplitude == pytest.approx(0.6)
    assert sum(c.weight for c in components) == pytest.approx(1.0)


def test_split_by_parity_weights():
    split = split_by_parity(parse_initial_spec("+,0:1,0;-,0:1,0;-,2:1,0"), 16)
    assert split[1][0] == pytest.approx(1 / 3)
    assert split[-1][0] == pytest.approx(2 / 3)
    minus = split[-1][1]
    assert minus.parity == -1
    assert abs(minus.amps[0]) == pytest.approx(1 / math.sqrt(2))


def test_split_single_parity():
    split = split_by_parity(parse_initial_spec("-,3"), 16)
    assert list(split) == [-1]


def test_level_beyond_truncation():
    with pytest.raises(ValidationError, match="n_max"):
        split_by_parity(parse_initial_spec("+,20"), 16)


def test_tensor_embedding_respects_parity():
    components = parse_initial_spec("+,1:1,0;-,1:0,1")
    state = components_to_tensor(components, 16)
    nonzero = np.flatnonzero(np.abs(state.amps) > 0)
    labels = [("g" if idx % 2 == 0 else "e", idx // 2) for idx in nonzero]
    assert sorted(parity_of(q, n) for q, n in labels) == [-1, 1]
    assert np.linalg.norm(state.amps) == pytest.approx(1.0)


def test_describe_components():
    stats = describe_components(parse_initial_spec("+,0:1,0;-,4:1,0;-,1:0,2"))
    assert stats["count"] == 3
    assert stats["by_parity"] == {"+": 1, "-": 2}
    assert stats["weight_by_parity"]["-"] == pytest.approx(5.0)
    assert stats["max_level"] == 4
    assert stats["cross_chain"] is True
