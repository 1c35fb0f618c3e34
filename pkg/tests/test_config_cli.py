import io

import pytest

from ionpurify.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY, fmt, main, run
from ionpurify.config import ConfigError, parse_config

HARDWARE_BLOCK = """\
mode = hardware
initial_fidelity = 0.7
a_squared = 0.7
[hardware]
p_cav = 0.01
eta = 0.7
zeta = 0.9
xi = 1.0
photon_rate = 3e6
"""


def run_to_text(cfg):
    out, err = io.StringIO(), io.StringIO()
    code = run(cfg, out, err)
    return code, out.getvalue(), err.getvalue()


class TestParse:
    def test_happy_path(self):
        cfg = parse_config("mode = iterate\ninitial_fidelity = 0.7\nrounds = 3")
        assert (cfg.mode, cfg.initial_fidelity, cfg.rounds) == ("iterate", 0.7, 3)
        assert (cfg.trials, cfg.seed, cfg.tolerance, cfg.hardware.xi) == (0, 0, 1e-12, 1.0)

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# run\n\nmode = purify  # inline\ninitial_fidelity = 0.8\n")
        assert cfg.initial_fidelity == 0.8

    def test_range_error_names_key(self):
        with pytest.raises(ConfigError, match="initial_fidelity") as exc:
            parse_config("mode = purify\ninitial_fidelity = 1.3")
        assert exc.value.key == "initial_fidelity"

    def test_unknown_key_line_number(self):
        with pytest.raises(ConfigError, match="line 2") as exc:
            parse_config("mode = purify\nfidelty = 0.7")
        assert exc.value.line == 2 and exc.value.key == "fidelty"

    def test_malformed_line(self):
        with pytest.raises(ConfigError, match="malformed") as exc:
            parse_config("mode = purify\ninitial_fidelity 0.7")
        assert exc.value.line == 2

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="rounds"):
            parse_config("mode = iterate\ninitial_fidelity = 0.7")

    def test_error_messages_distinct(self):
        msgs = set()
        for text in ("mode = purify\ninitial_fidelity 0.7", "mode = purify\ninitial_fidelity = 2", "mode = purify"):
            with pytest.raises(ConfigError) as exc:
                parse_config(text)
            msgs.add(str(exc.value).split(":")[-1].split()[0])
        assert len(msgs) == 3

    def test_hardware_block(self):
        params = parse_config(HARDWARE_BLOCK).hardware_params()
        assert (params.p_cav, params.eta, params.zeta, params.xi, params.photon_rate) == (0.01, 0.7, 0.9, 1.0, 3e6)

    def test_hardware_key_outside_section(self):
        with pytest.raises(ConfigError, match="eta"):
            parse_config("mode = purify\ninitial_fidelity = 0.7\neta = 0.7")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("mode = purify\nmode = iterate")

    @pytest.mark.parametrize(
        "key, file_value, flag_value",
        [("initial_fidelity", "0.6", 0.9), ("rounds", "2", 5), ("seed", "1", 7), ("trials", "10", 20)],
    )
    def test_override_precedence(self, key, file_value, flag_value):
        text = f"mode = iterate\ninitial_fidelity = 0.7\nrounds = 3\n{key} = {file_value}".replace(
            f"{key} = 0.7\n", ""
        ).replace(f"{key} = 3\n", "")
        assert getattr(parse_config(text), key) == type(flag_value)(file_value)
        assert getattr(parse_config(text, {key: flag_value}), key) == flag_value

    def test_none_override_ignored(self):
        cfg = parse_config("mode = iterate\ninitial_fidelity = 0.7\nrounds = 3", {"rounds": None})
        assert cfg.rounds == 3

    def test_hardware_override(self):
        cfg = parse_config(HARDWARE_BLOCK, {"eta": 0.5})
        assert cfg.hardware_params().eta == 0.5


class TestRun:
    def test_fmt_round_trip(self):
        x = 0.1 + 0.2
        assert float(fmt(x)) == x
        assert fmt(None) == "" and fmt(float("nan")) == ""

    def test_iterate_rows(self):
        code, out, _ = run_to_text(parse_config("mode = iterate\ninitial_fidelity = 0.7\nrounds = 1"))
        lines = out.split("\n")
        assert code == EXIT_OK
        assert lines[0] == "round,fidelity,step_success_probability,cumulative_probability"
        assert lines[2].startswith("1,0.8448275862068966,0.018125,")
        assert "\r" not in out

    def test_hardware_table(self):
        code, out, _ = run_to_text(parse_config(HARDWARE_BLOCK))
        rows = [line.split(",") for line in out.strip().split("\n")[1:]]
        assert code == EXIT_OK
        mixed, pure = rows
        assert float(mixed[4]) == pytest.approx(71.938125, rel=1e-12) and mixed[-1] == "true"
        assert float(pure[4]) == pytest.approx(104.18625, rel=1e-12) and pure[-1] == "true"

    def test_purify_byte_identical(self):
        cfg = parse_config("mode = purify\ninitial_fidelity = 0.7\ntrials = 3000\nseed = 5")
        assert run_to_text(cfg)[1] == run_to_text(cfg)[1]

    def test_output_file(self, tmp_path):
        target = tmp_path / "out.csv"
        cfg = parse_config(f"mode = iterate\ninitial_fidelity = 0.7\nrounds = 2\noutput = {target}")
        code, out, _ = run_to_text(cfg)
        assert code == EXIT_OK and out == ""
        assert target.read_bytes().count(b"\n") == 4

    def test_concentrate(self):
        code, out, _ = run_to_text(parse_config("mode = concentrate\na_squared = 0.7\nvariant = phi"))
        rows = dict(line.split(",", 1) for line in out.strip().split("\n")[1:])
        assert float(rows["success_probability"].split(",")[0]) == pytest.approx(0.02625, abs=1e-12)


class TestMain:
    def test_usage_error(self, capsys):
        assert main(["purify", "--initial-fidelity", "1.3"]) == EXIT_USAGE
        assert "initial_fidelity" in capsys.readouterr().err

    def test_bad_subcommand(self, capsys):
        assert main(["nonsense"]) == EXIT_USAGE

    def test_config_file_and_flag(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("mode = iterate\ninitial_fidelity = 0.6\nrounds = 1\n")
        assert main(["iterate", "--config", str(path), "--initial-fidelity", "0.7"]) == EXIT_OK
        assert "1,0.8448275862068966," in capsys.readouterr().out

    def test_missing_config_file(self, tmp_path):
        assert main(["iterate", "--config", str(tmp_path / "nope.cfg")]) == EXIT_USAGE

    def test_verify_failure_exit_code(self, capsys):
        # a zero tolerance cannot absorb rounding in the dense products
        assert main(["verify", "--verify-tolerance", "0"]) == EXIT_VERIFY
        assert "verification failed" in capsys.readouterr().err

    def test_verify_passes(self, capsys):
        assert main(["verify"]) == EXIT_OK
        captured = capsys.readouterr()
        assert "verification passed" in captured.err
        assert ",false" not in captured.out
