import numpy as np
import pytest

from app.schemas.config import LocalSearchConfig
from app.services.heuristics_service import farthest_insertion, local_search_2opt
from app.services.tsplib_service import load_tsplib, parse_tsplib, scale_to_unit_square
from app.utils.errors import DegenerateInstanceError, TsplibParseError, UnsupportedFormatError
from app.utils.tsplib_optima import get_known_optimum

BERLIN52_OPTIMAL = [
    1, 49, 32, 45, 19, 41, 8, 9, 10, 43, 33, 51, 11, 52, 14, 13, 47, 26, 27, 28, 12, 25, 4, 6, 15, 5,
    24, 48, 38, 37, 40, 39, 36, 35, 34, 44, 46, 16, 29, 50, 20, 23, 30, 2, 7, 42, 21, 17, 3, 18, 31, 22,
]

HEADER = "NAME : tiny\nTYPE : TSP\nDIMENSION : 4\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n"
BODY = "1 0 0\n2 3 0\n3 3 4\n4 0 4\nEOF\n"


class TestParse:
    def test_eil51(self, fixtures_dir):
        parsed = load_tsplib(fixtures_dir / "eil51.tsp")
        assert parsed.name == "eil51"
        assert parsed.dimension == 51
        assert parsed.optimum == 426
        assert parsed.coords[0].tolist() == [37.0, 52.0]

    def test_berlin52_known_optimal_tour(self, fixtures_dir):
        parsed = load_tsplib(fixtures_dir / "berlin52.tsp")
        assert parsed.optimum == 7542
        order = [city - 1 for city in BERLIN52_OPTIMAL]
        assert parsed.cost(order) == 7542
        assert parsed.gap(order) == 0.0

    def test_name_falls_back_to_file_stem(self, fixtures_dir):
        parsed = load_tsplib(fixtures_dir / "square10.tsp")
        assert parsed.name == "square10"
        assert parsed.optimum is None
        assert parsed.gap(list(range(10))) is None
        assert parsed.cost(list(range(10))) == 100

    def test_rounded_costs(self):
        parsed = parse_tsplib(HEADER + BODY)
        assert parsed.cost([0, 1, 2, 3]) == 14
        assert parsed.cost([0, 2, 1, 3]) == 18

    def test_scaled_instance_keeps_aspect_ratio(self):
        parsed = parse_tsplib(HEADER + BODY)
        np.testing.assert_allclose(parsed.instance.coords, [[0, 0], [0.75, 0], [0.75, 1.0], [0, 1.0]])

    def test_header_without_spaces_and_trailing_section(self):
        text = "NAME:tiny\nTYPE:TSP\nDIMENSION:4\nEDGE_WEIGHT_TYPE:EUC_2D\nNODE_COORD_SECTION\n" + BODY.replace("EOF\n", "")
        assert parse_tsplib(text).dimension == 4

    def test_unknown_keywords_ignored(self):
        parsed = parse_tsplib("CAPACITY : 10\n" + HEADER + BODY)
        assert parsed.dimension == 4


class TestErrors:
    def test_unsupported_edge_type(self):
        with pytest.raises(UnsupportedFormatError):
            parse_tsplib(HEADER.replace("EUC_2D", "GEO") + BODY)

    def test_missing_edge_type(self):
        with pytest.raises(UnsupportedFormatError):
            parse_tsplib(HEADER.replace("EDGE_WEIGHT_TYPE : EUC_2D\n", "") + BODY)

    def test_unsupported_problem_type(self):
        with pytest.raises(UnsupportedFormatError):
            parse_tsplib(HEADER.replace("TYPE : TSP", "TYPE : ATSP") + BODY)

    def test_unsupported_section(self):
        with pytest.raises(UnsupportedFormatError):
            parse_tsplib(HEADER.replace("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION") + BODY)

    def test_dimension_mismatch(self):
        with pytest.raises(TsplibParseError):
            parse_tsplib(HEADER.replace("DIMENSION : 4", "DIMENSION : 5") + BODY)

    def test_malformed_coordinate_line(self):
        with pytest.raises(TsplibParseError) as info:
            parse_tsplib(HEADER + "1 0 0\n2 3\n3 3 4\n4 0 4\n")
        assert info.value.line_number == 7

    def test_non_numeric_coordinate(self):
        with pytest.raises(TsplibParseError):
            parse_tsplib(HEADER + "1 0 0\n2 3 x\n3 3 4\n4 0 4\n")

    def test_missing_coordinates(self):
        with pytest.raises(TsplibParseError):
            parse_tsplib(HEADER)

    def test_degenerate(self):
        with pytest.raises(DegenerateInstanceError):
            scale_to_unit_square(np.ones((4, 2)))


def test_known_optima_lookup():
    assert get_known_optimum("eil51") == 426
    assert get_known_optimum("berlin52") == 7542
    assert get_known_optimum("unknown") is None


def test_farthest_plus_best_improvement_on_eil51(fixtures_dir):
    parsed = load_tsplib(fixtures_dir / "eil51.tsp")
    start = farthest_insertion(parsed.instance)
    best, _, _ = local_search_2opt(parsed.instance, start, LocalSearchConfig(max_steps=2000))
    assert parsed.cost(best.order) <= 1.10 * 426
