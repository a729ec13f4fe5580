import json

import pytest
from click.testing import CliRunner

from shadowmeasure.cli import cli, parse_grid, run
from shadowmeasure.errors import InvalidGrid
from shadowmeasure.measure import restrict
from shadowmeasure.potential import potential_distance
from shadowmeasure.schemas import MeasureSchema

from conftest import THIRD


def write_measure(path, atoms=(), segments=()):
    path.write_text(json.dumps({
        "atoms": [{"x": x, "w": w} for x, w in atoms],
        "segments": [{"a": a, "b": b, "w": w} for a, b, w in segments],
    }))
    return str(path)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def files(tmp_path):
    return {
        "slice": write_measure(tmp_path / "slice.json", segments=[(-1.0, -0.5, 0.5), (0.5, 0.6, 0.1)]),
        "uniform": write_measure(tmp_path / "uniform.json", segments=[(-2.0, 2.0, 1.0)]),
        "two": write_measure(tmp_path / "two.json", atoms=[(-1.0, 0.5), (1.0, 0.5)]),
        "three": write_measure(tmp_path / "three.json", atoms=[(-2.0, THIRD), (0.0, THIRD), (2.0, THIRD)]),
        "pair": write_measure(tmp_path / "pair.json", atoms=[(-1.0, THIRD), (1.0, THIRD)]),
    }


class TestShadowCommands:
    def test_shadow(self, runner, files, nu_uniform):
        result = runner.invoke(cli, ["shadow", files["slice"], files["uniform"]])
        assert result.exit_code == 0, result.output
        eta = MeasureSchema.model_validate(json.loads(result.stdout)).to_measure()
        assert [(s.a, s.b) for s in eta.segments][0] == pytest.approx((-1.75, 0.25), abs=1e-8)
        expected = restrict(nu_uniform, -1.75, 0.25).segments + restrict(nu_uniform, 0.35, 0.75).segments
        assert eta.mass == pytest.approx(sum(s.w for s in expected))

    def test_shadow_is_deterministic(self, runner, files):
        first = runner.invoke(cli, ["shadow", files["slice"], files["uniform"]])
        second = runner.invoke(cli, ["shadow", files["slice"], files["uniform"]])
        assert first.stdout == second.stdout

    def test_emit_potentials(self, runner, files, tmp_path):
        out = tmp_path / "curves.csv"
        result = runner.invoke(cli, ["shadow", "--emit-potentials", str(out), "--grid", "-2:2:0.5",
                                     files["slice"], files["uniform"]])
        assert result.exit_code == 0, result.output
        rows = out.read_text().splitlines()
        assert len(rows) == 18
        assert {r.split(",")[2] for r in rows} == {"diff", "hull"}

    def test_countershadow_quantile(self, runner, files):
        result = runner.invoke(cli, ["countershadow", "--method", "quantile", files["pair"], files["three"]])
        assert result.exit_code == 0, result.output
        atoms = json.loads(result.stdout)["atoms"]
        assert [a["x"] for a in atoms] == [-2.0, 2.0]
        assert [a["w"] for a in atoms] == pytest.approx([THIRD, THIRD], abs=1e-12)

    def test_not_extended(self, runner, files):
        result = runner.invoke(cli, ["shadow", files["uniform"], files["pair"]])
        assert result.exit_code == 1
        assert "NotExtendedOrder" in result.stderr

    def test_round_trip(self, runner, files, tmp_path):
        result = runner.invoke(cli, ["shadow", files["slice"], files["uniform"]])
        again = tmp_path / "eta.json"
        again.write_text(result.stdout)
        first = MeasureSchema.model_validate(json.loads(result.stdout)).to_measure()
        second = runner.invoke(cli, ["order", "--relation", "setwise", str(again), str(again)])
        assert second.exit_code == 0
        assert potential_distance(first, MeasureSchema.model_validate_json(again.read_text()).to_measure()) == 0.0


class TestOrderCommand:
    def test_reflexive(self, runner, files):
        result = runner.invoke(cli, ["order", "--relation", "cx", files["two"], files["two"]])
        assert result.exit_code == 0
        assert json.loads(result.stdout)["holds"] is True

    def test_false(self, runner, files):
        result = runner.invoke(cli, ["order", "--relation", "cx", files["three"], files["two"]])
        assert result.exit_code == 1
        report = json.loads(result.stdout)
        assert report["holds"] is False
        assert report["witness"] is not None

    def test_extended(self, runner, files):
        result = runner.invoke(cli, ["order", "--relation", "e", files["slice"], files["uniform"]])
        assert result.exit_code == 0

    def test_tolerance_flag(self, runner, files):
        result = runner.invoke(cli, ["--tol", "1e-8", "order", files["two"], files["three"]])
        assert result.exit_code == 0

    def test_run_returns_code(self, files):
        assert run(["order", files["three"], files["two"]]) == 1
        assert run(["order", files["two"], files["three"]]) == 0


class TestInputErrors:
    def test_malformed_json(self, runner, tmp_path, files):
        bad = tmp_path / "bad.json"
        bad.write_text('{"atoms": [\n  {"x": 1, "w": }\n]}')
        result = runner.invoke(cli, ["order", str(bad), files["two"]])
        assert result.exit_code == 2
        assert "bad.json:2:" in result.stderr

    def test_missing_file(self, runner, tmp_path, files):
        result = runner.invoke(cli, ["order", str(tmp_path / "nope.json"), files["two"]])
        assert result.exit_code == 2

    def test_schema_violation(self, runner, tmp_path, files):
        bad = tmp_path / "bad.json"
        bad.write_text('{"atoms": [{"x": 1}]}')
        result = runner.invoke(cli, ["order", str(bad), files["two"]])
        assert result.exit_code == 2

    def test_string_coordinate(self, runner, tmp_path, files):
        bad = tmp_path / "bad.json"
        bad.write_text('{"atoms": [{"x": "1.0", "w": 1.0}]}')
        result = runner.invoke(cli, ["order", str(bad), files["two"]])
        assert result.exit_code == 2

    def test_negative_weight(self, runner, tmp_path, files):
        bad = write_measure(tmp_path / "neg.json", atoms=[(0.0, -1.0)])
        result = runner.invoke(cli, ["order", bad, files["two"]])
        assert result.exit_code == 2
        assert "InvalidWeight" in result.stderr

    def test_unknown_scheme(self, runner, files):
        result = runner.invoke(cli, ["couple", "--scheme", "random", files["two"], files["three"]])
        assert result.exit_code == 2

    def test_bad_grid(self, runner, files):
        result = runner.invoke(cli, ["sample", "--grid", "2:-2:0.1", files["slice"], files["uniform"]])
        assert result.exit_code == 2

    def test_unknown_curve(self, runner, files):
        result = runner.invoke(cli, ["sample", "--grid", "-2:2:0.1", "--curves", "diff,wave",
                                     files["slice"], files["uniform"]])
        assert result.exit_code == 2
        assert "wave" in result.stderr

    @pytest.mark.parametrize("text", ["1:2", "a:b:c", "0:1:0", "0:1:-1", "0:inf:1"])
    def test_parse_grid_rejects(self, text):
        with pytest.raises(InvalidGrid):
            parse_grid(text)

    def test_parse_grid(self):
        assert parse_grid("-2:2:0.5") == pytest.approx([-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2])


class TestPotentialCommands:
    def test_put(self, runner, files):
        result = runner.invoke(cli, ["potential", "--kind", "put", files["two"]])
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload["potential"]["breakpoints"] == [-1.0, 1.0]
        assert payload["potential_class"] == {"alpha": 1.0, "beta": 0.0}

    def test_csv(self, runner, files):
        result = runner.invoke(cli, ["potential", "--kind", "u", "--csv", "--grid", "-1:1:1", files["two"]])
        assert result.exit_code == 0
        assert result.stdout.splitlines() == ["-1.0,-1.0", "0.0,-1.0", "1.0,-1.0"]

    def test_hull(self, runner, files):
        result = runner.invoke(cli, ["hull", files["slice"], files["uniform"]])
        assert result.exit_code == 0, result.output
        payload = json.loads(result.stdout)
        assert len(payload["gaps"]) == 2
        assert payload["gaps"][1] == pytest.approx([0.35, 0.75], abs=1e-8)
        assert payload["potential_class"]["alpha"] == pytest.approx(0.4)
        assert payload["contact"][0][0] is None

    def test_sample(self, runner, files):
        result = runner.invoke(cli, ["sample", "--grid", "-2:2:0.01", "--curves", "diff,hull",
                                     files["slice"], files["uniform"]])
        assert result.exit_code == 0, result.output
        rows = [line.split(",") for line in result.stdout.splitlines()]
        assert len(rows) == 2 * 401
        diff = {r[0]: float(r[1]) for r in rows if r[2] == "diff"}
        hull = {r[0]: float(r[1]) for r in rows if r[2] == "hull"}
        assert all(hull[k] <= diff[k] + 1e-10 for k in diff)


class TestCouplingCommands:
    def test_couple_verify_cost(self, runner, files, tmp_path):
        result = runner.invoke(cli, ["couple", files["two"], files["three"]])
        assert result.exit_code == 0, result.output
        path = tmp_path / "coupling.json"
        path.write_text(result.stdout)
        assert len(json.loads(result.stdout)["rows"]) == 2

        checked = runner.invoke(cli, ["verify", str(path), files["two"], files["three"]])
        assert checked.exit_code == 0
        assert json.loads(checked.stdout)["holds"] is True

        priced = runner.invoke(cli, ["cost", "--h", "square", str(path)])
        assert priced.exit_code == 0
        assert json.loads(priced.stdout)["value"] == pytest.approx(5.0 / 3.0)

    def test_verify_wrong_marginal(self, runner, files, tmp_path):
        result = runner.invoke(cli, ["couple", files["two"], files["three"]])
        path = tmp_path / "coupling.json"
        path.write_text(result.stdout)
        checked = runner.invoke(cli, ["verify", str(path), files["three"], files["three"]])
        assert checked.exit_code == 1
        assert json.loads(checked.stdout)["detail"] == "source-marginal"

    def test_sunset_with_discretization(self, runner, files):
        result = runner.invoke(cli, ["couple", "--scheme", "sunset:2", "--discretize", "8",
                                     files["slice"], files["uniform"]])
        assert result.exit_code == 1
        assert "NotConvexOrder" in result.stderr

    def test_unsupported_cost(self, runner, files, tmp_path):
        result = runner.invoke(cli, ["couple", files["two"], files["three"]])
        path = tmp_path / "coupling.json"
        path.write_text(result.stdout)
        priced = runner.invoke(cli, ["cost", "--h", "sine", str(path)])
        assert priced.exit_code == 2
