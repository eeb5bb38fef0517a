#!/usr/bin/env python3
"""
测试命令行入口
"""

import pytest
from pathlib import Path
from click.testing import CliRunner

# 导入要测试的模块
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import _parse_params, _split_values, cli
from src.errors import InputError

# 测试时不写日志文件
ENV = {"LSQDAE_LOG_FILE": "false"}


class TestHelpers:
    """测试参数解析辅助函数"""

    def test_split_values(self):
        assert _split_values(("3,5", "10")) == ["3", "5", "10"]
        assert _split_values("L, Ch") == ["L", "Ch"]
        assert _split_values([3, 5]) == ["3", "5"]

    def test_parse_params(self):
        assert _parse_params(["eta=-25", "lambda = -1"]) == {"eta": -25.0, "lambda": -1.0}
        with pytest.raises(InputError):
            _parse_params(["eta"])
        with pytest.raises(InputError):
            _parse_params(["eta=abc"])


class TestRunCommand:
    """测试 run 子命令"""

    def setup_method(self):
        self.runner = CliRunner()

    def _run(self, *args):
        return self.runner.invoke(cli, ["run", *args], env=ENV)

    def test_repmap_csv(self, tmp_path):
        result = self._run(
            "-e", "repmap-conditioning", "--N", "3", "--n", "10,20", "-b", "L", "-b", "RK",
            "-o", str(tmp_path),
        )
        assert result.exit_code == 0, result.output
        assert "[OK]" in result.output
        path = tmp_path / "repmap-conditioning_sigma_min_U_N3.csv"
        assert path.exists()
        rows = [line for line in path.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
        assert rows[0] == "n,L,RK"
        assert len(rows) == 3

    def test_output_is_deterministic(self, tmp_path):
        args = ["-e", "constraint-conditioning", "--N", "3,5", "--n", "10", "-b", "L,Ch"]
        first = self._run(*args, "-o", str(tmp_path / "a"))
        second = self._run(*args, "-o", str(tmp_path / "b"))
        assert first.exit_code == 0 and second.exit_code == 0
        for path in sorted((tmp_path / "a").iterdir()):
            assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()

    def test_markdown_with_problem_params(self, tmp_path):
        result = self._run(
            "-e", "system-conditioning", "-p", "hessenberg2", "--param", "eta=-25",
            "--param", "lambda=-1", "--N", "5", "--n", "10", "-b", "L",
            "--variant", "R", "-f", "md", "-o", str(tmp_path),
        )
        assert result.exit_code == 0, result.output
        text = (tmp_path / "system-conditioning_kappa_CA_R.md").read_text(encoding="utf-8")
        assert "<!-- param.eta=-25.0 -->" in text
        assert "| 10 | 6.23e+5 |" in text

    def test_config_file(self, tmp_path):
        exp = tmp_path / "exp.yaml"
        exp.write_text(
            "experiment: projection-test\nbasis: [chebyshev]\nN: [3]\nn: [4]\n"
            f"out: {tmp_path / 'out'}\n",
            encoding="utf-8",
        )
        result = self._run("--config", str(exp))
        assert result.exit_code == 0, result.output
        assert (tmp_path / "out" / "projection-test_max_jump_after_N3.csv").exists()

    def test_command_line_overrides_config_file(self, tmp_path):
        exp = tmp_path / "exp.yaml"
        exp.write_text("experiment: projection-test\nN: [3]\nn: [4]\nbasis: [L]\n", encoding="utf-8")
        result = self._run("--config", str(exp), "--N", "2", "-o", str(tmp_path))
        assert result.exit_code == 0, result.output
        assert (tmp_path / "projection-test_max_jump_before_N2.csv").exists()

    @pytest.mark.parametrize(
        "args",
        [
            ["-e", "repmap-conditioning", "-b", "hermite", "--N", "3", "--n", "10"],
            ["-e", "repmap-conditioning", "--N", "31", "--n", "10"],
            ["-e", "repmap-conditioning", "--N", "x", "--n", "10"],
            ["-e", "system-conditioning", "--variant", "Q", "--N", "3", "--n", "10"],
            ["-e", "solve", "-p", "van_der_pol", "--N", "3", "--n", "10"],
            ["--N", "3", "--n", "10"],
        ],
    )
    def test_config_errors_exit_2(self, args, tmp_path):
        result = self._run(*args, "-o", str(tmp_path))
        assert result.exit_code == 2
        assert "[ERROR]" in result.output

    def test_unknown_key_in_config_file(self, tmp_path):
        exp = tmp_path / "exp.yaml"
        exp.write_text("experiment: solve\nbogus: 1\n", encoding="utf-8")
        result = self._run("--config", str(exp))
        assert result.exit_code == 2


class TestSolveCommand:
    """测试 solve 子命令"""

    def test_solve(self):
        result = CliRunner().invoke(
            cli, ["solve", "-p", "hessenberg2", "-b", "Ch", "--N", "3", "--n", "10"], env=ENV
        )
        assert result.exit_code == 0, result.output
        assert "κ_C(A)" in result.output
        assert "H1_D error" in result.output

    def test_solve_bad_basis(self):
        result = CliRunner().invoke(cli, ["solve", "-b", "hermite"], env=ENV)
        assert result.exit_code == 2


class TestConfigCommand:
    """测试 config 子命令组"""

    def test_get(self):
        result = CliRunner().invoke(cli, ["config", "get", "numerics.max_N"], env=ENV)
        assert result.exit_code == 0
        assert "numerics.max_N = 30" in result.output

    def test_get_missing(self):
        result = CliRunner().invoke(cli, ["config", "get", "no.such.key"], env=ENV)
        assert "不存在" in result.output


# 如果这个文件直接运行，执行测试
if __name__ == "__main__":
    pytest.main([__file__, "-v"])
