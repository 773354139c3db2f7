import io
import json

from app.cli import main
from app.data.io import parse_edge_list


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBound:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "bound", "3", "3")
        assert code == 0
        assert "e(3,3) = 6" in out
        assert "t = 0" in out
        assert "|J| = 2" in out
        assert "unique = true" in out

    def test_json(self, capsys):
        code, out, _ = run(capsys, "bound", "4", "4", "--format", "json")
        payload = json.loads(out)
        assert code == 0
        assert payload["e"] == 10
        assert payload["profile"] == {"t": 1, "J": 1, "r": []}
        assert payload["unique"] is False

    def test_bad_params(self, capsys):
        code, _, err = run(capsys, "bound", "1", "3")
        assert code == 2
        assert "d >= 2" in err

    def test_usage_error(self, capsys):
        code, _, _ = run(capsys, "bound", "three", "3")
        assert code == 2


class TestConstruct:
    def test_to_file(self, capsys, tmp_path):
        target = tmp_path / "g.txt"
        code, out, _ = run(capsys, "construct", "3", "3", "--out", str(target))
        assert code == 0
        g = parse_edge_list(target.read_text())
        assert (g.n, g.edge_count) == (6, 6)
        assert "|E| = 6" in out

    def test_matching_graph_on_stdout(self, capsys):
        code, out, _ = run(capsys, "construct", "2", "4")
        assert code == 0
        g = parse_edge_list(out)
        assert g.edge_count == 3
        assert g.degrees() == [1] * 6

    def test_alternate_note(self, capsys, tmp_path):
        code, out, _ = run(capsys, "construct", "4", "2", "--out", str(tmp_path / "g.txt"))
        assert code == 0
        assert "unique = false" in out
        assert "alternate = 0-1 0-2 1-2" in out

    def test_unique_note(self, capsys, tmp_path):
        _, out, _ = run(capsys, "construct", "3", "3", "--out", str(tmp_path / "g.txt"))
        assert "unique = true" in out
        assert "alternate" not in out

    def test_dot(self, capsys):
        code, out, _ = run(capsys, "construct", "4", "2", "--format", "dot")
        assert code == 0
        assert out.startswith("graph G {")
        assert "0 -- 3;" in out

    def test_unwritable_output(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, _ = run(capsys, "construct", "3", "3", "--out", str(blocker / "g.txt"))
        assert code == 3


class TestAnalyze:
    def test_path(self, capsys, write_graph):
        code, out, _ = run(capsys, "analyze", write_graph("3\n0 1\n1 2\n"))
        assert code == 0
        assert "ν = 1" in out
        assert "Star = {0, 2}" in out

    def test_odd_cycle_json(self, capsys, write_graph):
        code, out, _ = run(capsys, "analyze", write_graph("5\n0 1\n1 2\n2 3\n3 4\n4 0\n"), "--format", "json")
        payload = json.loads(out)
        assert payload["nu"] == 2
        assert payload["components"] == [{"vertices": [0, 1, 2, 3, 4], "factor_critical": True, "nu": 2}]

    def test_single_edge(self, capsys, write_graph):
        _, out, _ = run(capsys, "analyze", write_graph("2\n0 1\n"))
        assert "Star = {}" in out

    def test_stdin(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO("3\n0 1\n"))
        code, out, _ = run(capsys, "analyze", "-")
        assert code == 0
        assert "unsaturated = {2}" in out

    def test_parse_error(self, capsys, write_graph):
        code, _, err = run(capsys, "analyze", write_graph("3\n0 0\n"))
        assert code == 2
        assert "line 2" in err

    def test_invalid_utf8(self, capsys, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_bytes(b"3\n0 1\n\xff\xfe 2\n")
        code, _, err = run(capsys, "analyze", str(path))
        assert code == 2
        assert "line 3" in err

    def test_invalid_utf8_on_stdin(self, capsys, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.TextIOWrapper(io.BytesIO(b"2\n0 \xff1\n")))
        code, _, err = run(capsys, "analyze", "-")
        assert code == 2
        assert "stdin is not valid UTF-8" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "analyze", str(tmp_path / "none.txt"))
        assert code == 3


class TestTransform:
    def test_fixpoint(self, capsys, write_graph, tmp_path):
        steps = tmp_path / "steps.jsonl"
        path = write_graph("6\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n")
        code, out, _ = run(capsys, "transform", path, "3", "3", "--steps", str(steps))
        assert code == 0
        assert "steps = 0" in out
        assert steps.read_text() == ""

    def test_step_log(self, capsys, write_graph, tmp_path):
        steps = tmp_path / "steps.jsonl"
        final = tmp_path / "final.txt"
        path = write_graph("4\n0 1\n1 2\n2 3\n3 0\n")
        code, out, _ = run(
            capsys, "transform", path, "3", "3", "--steps", str(steps), "--out", str(final), "--format", "json"
        )
        assert code == 0
        records = [json.loads(line) for line in steps.read_text().splitlines()]
        assert records == [
            {
                "k": 0,
                "chosen_v": 0,
                "removed_edges": [[0, 1], [0, 3]],
                "added_edges": [[0, 4], [0, 5]],
                "nu": 2,
                "edge_count": 4,
            }
        ]
        assert json.loads(out)["decomposition"]["t"] == 2
        assert parse_edge_list(final.read_text()).edge_count == 4

    def test_non_member(self, capsys, write_graph):
        code, _, err = run(capsys, "transform", write_graph("3\n0 1\n1 2\n0 2\n"), "3", "3")
        assert code == 4
        assert "not maximal" in err


class TestVerify:
    def test_exact(self, capsys):
        code, out, _ = run(capsys, "verify", "3", "3", "--nmax", "6", "--format", "json")
        payload = json.loads(out)
        assert code == 0
        assert payload["regime"] == "exact"
        assert payload["formula"] == payload["search"] == 6

    def test_variants(self, capsys):
        code, out, _ = run(capsys, "verify", "4", "2", "--nmax", "4")
        assert code == 0
        assert "variants = 2" in out

    def test_nmax_cap(self, capsys):
        code, _, _ = run(capsys, "verify", "3", "3", "--nmax", "12")
        assert code == 2


class TestRandom:
    def test_byte_identical_runs(self, capsys):
        _, first, _ = run(capsys, "random", "3", "3", "20", "--seed", "5")
        _, second, _ = run(capsys, "random", "3", "3", "20", "--seed", "5")
        assert first == second
        assert parse_edge_list(first).n == 20

    def test_membership_report(self, capsys):
        code, _, err = run(capsys, "random", "4", "3", "30", "--seed", "1")
        assert code == 0
        assert "member of F(4,3)" in err

    def test_too_few_vertices(self, capsys):
        code, _, _ = run(capsys, "random", "3", "4", "5")
        assert code == 2


class TestTable:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "table", "--d-max", "4", "--m-max", "3")
        lines = out.strip().splitlines()
        assert code == 0
        assert lines[0] == "d,m,e,trivial,trivial_gap,t,J,unique,e_ss"
        assert len(lines) == 1 + 3 * 2

    def test_verbose_logs_to_stderr(self, capsys):
        code, out, err = run(capsys, "--verbose", "table", "--d-max", "3", "--m-max", "2", "--format", "json")
        assert code == 0
        assert json.loads(out)[0]["e"] == 1
        assert "Built bound table with 2 rows" in err
