"""
Tests for kernels/formats.py.

Parse errors must name the file and the offending line.
"""
import pytest

from kernels import formats
from kernels.errors import FormatError
from kernels.toolkit.a2sat import Cnf2
from kernels.toolkit.exactfield import FMatrix
from kernels.toolkit.graphcut import Digraph
from kernels.toolkit.matroid import RepresentedMatroid


class TestGraph:
    def test_star_fixture(self, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "dpc_star.graph"))
        assert G.directed
        assert G.vertices == ("0", "1", "2", "3")
        assert G.out_neighbors("0") == ("1", "2", "3")

    def test_undirected_header(self, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "c5.graph"))
        assert not G.directed
        assert len(G.edges()) == 5

    def test_bad_arc_names_line(self, fixtures_dir):
        path = str(fixtures_dir / "bad_arc.graph")
        with pytest.raises(FormatError) as info:
            formats.read_graph(path)
        assert info.value.line == 3
        assert str(info.value).startswith(f"{path}:3:")

    def test_bad_header(self):
        with pytest.raises(FormatError) as info:
            formats.parse_graph("tree 3 2\n", "g.graph")
        assert info.value.line == 1

    def test_arc_count_mismatch(self):
        with pytest.raises(FormatError, match="expected 2 arc lines"):
            formats.parse_graph("digraph 3 2\n0 1\n")

    def test_non_integer_id(self):
        with pytest.raises(FormatError) as info:
            formats.parse_graph("digraph 2 1\n\n0 x\n", "g.graph")
        assert info.value.line == 3

    def test_comments_skipped(self):
        G = formats.parse_graph("# header next\ndigraph 2 1  # one arc\n0 1\n")
        assert G.out_neighbors("0") == ("1",)

    def test_write_renumbers(self):
        D = Digraph.from_arcs(["a", "b"], [("a", "b")])
        assert formats.write_graph(D) == "digraph 2 1\n0 1\n"

    def test_write_undirected(self):
        G = Digraph.undirected(["x", "y", "z"], [("x", "y"), ("y", "z")])
        assert formats.write_graph(G).splitlines()[0] == "graph 3 2"

    def test_id_map(self):
        assert formats.write_id_map({"a": 0, "b": 1}) == "a 0\nb 1\n"


class TestSetsAndPairs:
    def test_vertex_set_deduplicates(self):
        assert formats.parse_vertex_set("0 2\n2 1\n") == ["0", "2", "1"]

    def test_vertex_set_checks_graph(self, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "mwc_path.graph"))
        with pytest.raises(FormatError, match="not in the graph") as info:
            formats.parse_vertex_set("0\n9\n", "t.terminals", G)
        assert info.value.line == 2

    def test_pairs_fixture(self, fixtures_dir):
        G = formats.read_graph(str(fixtures_dir / "dpc_star.graph"))
        assert formats.read_pairs(str(fixtures_dir / "dpc_star.pairs"), G) == [("1", "2"), ("2", "3")]

    def test_pairs_reject_words(self):
        with pytest.raises(FormatError):
            formats.parse_pairs("1 two\n")

    def test_write_pairs_with_map(self):
        assert formats.write_pairs([("a", "b")], {"a": 4, "b": 7}) == "4 7\n"

    def test_write_vertex_set(self):
        assert formats.write_vertex_set(["3", "1"]) == "3 1\n"


class TestMatroid:
    def matroid(self) -> RepresentedMatroid:
        matrix = FMatrix.from_rows([[1, 0, 1], [0, 1, 1]], 7, cols=3)
        return RepresentedMatroid(matrix=matrix, ground=("a", "b", "c"))

    def test_write_layout(self):
        text = formats.write_matroid(self.matroid())
        assert text.splitlines() == ["matroid 2 3 7", "a", "b", "c", "1 0 1", "0 1 1"]

    def test_parse_written(self):
        M = formats.parse_matroid(formats.write_matroid(self.matroid()))
        assert M.ground == ("a", "b", "c")
        assert M.prime == 7

    def test_element_out_of_field(self):
        with pytest.raises(FormatError, match="outside") as info:
            formats.parse_matroid("matroid 1 2 7\na\nb\n3 9\n", "m.matroid")
        assert info.value.line == 4

    def test_row_width(self):
        with pytest.raises(FormatError, match="2 entries"):
            formats.parse_matroid("matroid 1 2 7\na\nb\n3\n")

    def test_line_count(self):
        with pytest.raises(FormatError, match="expected 2 labels"):
            formats.parse_matroid("matroid 1 2 7\na\n")

    def test_compressed_pairs(self):
        text = formats.write_compressed_pairs(1, ["s_1", "s_2"], [("a", "b")])
        assert text == "dpc 1 2\ns_1 s_2\na b\n"
        assert formats.parse_compressed_pairs(text) == (1, ["s_1", "s_2"], [("a", "b")])

    def test_compressed_source_count(self):
        with pytest.raises(FormatError) as info:
            formats.parse_compressed_pairs("dpc 1 3\ns_1 s_2\n", "c.pairs")
        assert info.value.line == 2


class TestCnf2:
    def test_fixture(self, fixtures_dir):
        F = formats.read_cnf2(str(fixtures_dir / "contradiction.cnf2"))
        assert F.variables == ("1", "2")
        assert len(F.clauses) == 4
        assert str(F.clauses[1][0]) == "~1"

    @pytest.mark.parametrize("text,line", [
        ("p cnf 2 1\n1 0\n", 1),
        ("p cnf2 2 1\n1 2\n", 2),
        ("p cnf2 2 1\n1 -2 1 0\n", 2),
        ("p cnf2 2 1\n3 0\n", 2),
        ("p cnf2 2 1\n0\n", 2),
    ])
    def test_errors_name_line(self, text, line):
        with pytest.raises(FormatError) as info:
            formats.parse_cnf2(text, "f.cnf2")
        assert info.value.line == line
        assert str(info.value).startswith(f"f.cnf2:{line}:")

    def test_write_renumbers(self):
        F = Cnf2.build(["x", "y"], [[("x", True), ("y", False)], [("y", True)]])
        text, ids = formats.write_cnf2(F)
        assert ids == {"x": 1, "y": 2}
        assert text == "p cnf2 2 2\n1 -2 0\n2 0\n"
