import json

import pytest

from sparcmod.core.commands import EXIT_FATAL, EXIT_OK, EXIT_SPARC_ERROR
from sparcmod.main import build_engine, main


class TestMain:
    """Run the command line end to end."""

    def test_lists_commands(self):
        engine = build_engine()
        assert engine.registry.list_commands() == ["bounds", "compare", "se", "simulate", "sweep"]

    def test_sweep_writes_outputs(self, write_config, tmp_path, capsys):
        path = write_config()
        assert main(["sweep", "--config", str(path)]) == EXIT_OK
        out_dir = tmp_path / "out"
        assert (out_dir / "results.csv").read_text().startswith("ebn0_db,K,M,L,n,")
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert len(manifest["results"]) == 2
        assert "results_csv" in capsys.readouterr().out

    def test_simulate_with_overrides(self, write_config, tmp_path, capsys):
        out = tmp_path / "override"
        code = main(["simulate", "--config", str(write_config()), "--seed", "5", "--out", str(out)])
        assert code == EXIT_OK
        printed = capsys.readouterr().out
        assert "ebn0_db" in printed
        assert (out / "results.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["run"]["master_seed"] == 5

    def test_payload_hex_is_padded(self, write_config, tmp_path):
        # tiny code: L=8 sections of log2(4*2)=3 bits
        out = tmp_path / "hex"
        code = main(["simulate", "--config", str(write_config()), "--payload-hex", "0xABCD",
                     "--out", str(out)])
        assert code == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["payload_padding_bits"] == 8
        assert manifest["config"]["run"]["payload_hex"] == "abcd"

    def test_payload_file(self, write_config, tmp_path):
        payload = tmp_path / "payload.bin"
        payload.write_bytes(b"\x01")
        assert main(["sweep", "--config", str(write_config()), "--payload-file", str(payload)]) == EXIT_OK
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["payload_padding_bits"] == 16
        assert manifest["config"]["run"]["payload_hex"] == "01"

    def test_random_payload_has_no_padding_entry(self, write_config, tmp_path):
        assert main(["sweep", "--config", str(write_config())]) == EXIT_OK
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert "payload_padding_bits" not in manifest
        assert "payload_hex" not in manifest["config"]["run"]

    @pytest.mark.parametrize("payload", ["ffffffff", "xyz"])
    def test_bad_payload_is_library_error(self, write_config, payload):
        assert main(["sweep", "--config", str(write_config()), "--payload-hex", payload]) == EXIT_SPARC_ERROR

    def test_missing_payload_file(self, write_config, tmp_path):
        code = main(["sweep", "--config", str(write_config()),
                     "--payload-file", str(tmp_path / "absent.bin")])
        assert code == EXIT_SPARC_ERROR

    def test_payload_options_are_exclusive(self, write_config, tmp_path):
        with pytest.raises(SystemExit):
            main(["sweep", "--config", str(write_config()), "--payload-hex", "01",
                  "--payload-file", str(tmp_path / "p.bin")])

    def test_se_and_compare(self, write_config, tmp_path, capsys):
        path = str(write_config())
        assert main(["se", "--config", path, "--asymptotic"]) == EXIT_OK
        assert main(["compare", "--config", path, "--ebn0", "12"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "asymptotic SE" in out
        assert "max |AMP - SE|" in out
        assert (tmp_path / "out" / "se.csv").exists()
        assert (tmp_path / "out" / "se_compare.csv").read_text().startswith("iter,block,psi_se,")

    def test_bounds(self, capsys):
        code = main(["bounds", "--K", "8", "--M", "4096", "--delta", "0.2", "--delta-tilde", "0.2",
                     "--nu", "2.5"])
        assert code == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["bounds"]["ser_constant"] == pytest.approx(46.63, abs=0.01)

    def test_missing_config_is_library_error(self, tmp_path):
        assert main(["sweep", "--config", str(tmp_path / "nope.toml")]) == EXIT_SPARC_ERROR

    def test_invalid_bounds_arguments(self):
        assert main(["bounds", "--K", "3", "--M", "4", "--delta", "0.2", "--delta-tilde", "0.2",
                     "--nu", "2"]) == EXIT_SPARC_ERROR

    def test_unexpected_failure(self, monkeypatch, write_config):
        def boom(path):
            raise RuntimeError("disk on fire")

        monkeypatch.setattr("sparcmod.harness.config.load_config", boom)
        assert main(["sweep", "--config", str(write_config())]) == EXIT_FATAL

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            main(["frobnicate"])
