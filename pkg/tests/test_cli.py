import json
import threading

import pytest

from bhtn.cli import EXIT_OK, EXIT_PARSE, EXIT_SOLVER, EXIT_USAGE, main
from bhtn.serialize import load_tensor, tensor_from_obj, tree_from_obj
from bhtn.htn import reconstruct
from bhtn.server import make_server


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def tensor_file(tmp_path, capsys):
    path = tmp_path / "t.json"
    code, _, _ = run_cli(
        capsys, "generate", "--order", "3", "--size", "3", "--rank", "2",
        "--seed", "5", "--out-tensor", str(path),
    )
    assert code == EXIT_OK
    return str(path)


class TestGenerate:
    def test_stdout_json(self, capsys):
        code, out, _ = run_cli(capsys, "generate", "--order", "2", "--size", "2",
                               "--rank", "1", "--seed", "1")
        assert code == EXIT_OK
        t = tensor_from_obj(json.loads(out))
        assert t.shape == (2, 2)

    def test_tree_file_reconstructs(self, tmp_path, capsys):
        tpath, gpath = tmp_path / "t.json", tmp_path / "g.json"
        code, _, _ = run_cli(capsys, "generate", "--order", "3", "--size", "2",
                             "--rank", "2", "--seed", "2",
                             "--out-tensor", str(tpath), "--out-tree", str(gpath))
        assert code == EXIT_OK
        tree = tree_from_obj(json.loads(gpath.read_text()))
        assert reconstruct(tree) == load_tensor(str(tpath))

    def test_text_format(self, tmp_path, capsys):
        path = tmp_path / "t.txt"
        code, _, _ = run_cli(capsys, "generate", "--order", "2", "--size", "3",
                             "--rank", "1", "--seed", "3",
                             "--out-tensor", str(path), "--format", "text")
        assert code == EXIT_OK
        assert load_tensor(str(path)).shape == (3, 3)


class TestDecompose:
    def test_pipeline_error_zero_known_seed(self, tensor_file, tmp_path, capsys):
        # seed pinned after verifying the exact-backend pipeline reaches 0
        out = tmp_path / "tree.json"
        code, stdout, _ = run_cli(
            capsys, "decompose", tensor_file, "--rank", "2", "--seed", "5",
            "--out", str(out),
        )
        assert code == EXIT_OK
        report = json.loads(stdout)
        assert report["error_rate"] == 0.0
        tree = tree_from_obj(json.loads(out.read_text()))
        assert reconstruct(tree) == load_tensor(tensor_file)

    def test_combined_output_without_out_flag(self, tensor_file, capsys):
        code, stdout, _ = run_cli(capsys, "decompose", tensor_file, "--rank", "2",
                                  "--seed", "5")
        assert code == EXIT_OK
        blob = json.loads(stdout)
        assert set(blob) == {"report", "tree"}

    def test_malformed_input_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{ not json")
        code, _, err = run_cli(capsys, "decompose", str(bad), "--rank", "2")
        assert code == EXIT_PARSE
        assert "cannot read input" in err

    def test_missing_file_exit_2(self, tmp_path, capsys):
        code, _, _ = run_cli(capsys, "decompose", str(tmp_path / "nope.json"),
                             "--rank", "2")
        assert code == EXIT_PARSE

    def test_rank_zero_usage_error_exit_1(self, tensor_file, capsys):
        code, _, err = run_cli(capsys, "decompose", tensor_file, "--rank", "0")
        assert code == EXIT_USAGE

    def test_unknown_flag_exit_1(self, tensor_file, capsys):
        code, _, _ = run_cli(capsys, "decompose", tensor_file, "--rank", "2",
                             "--frobnicate")
        assert code == EXIT_USAGE

    def test_remote_without_endpoint_exit_1(self, tensor_file, capsys, monkeypatch):
        monkeypatch.delenv("BHTN_REMOTE_ENDPOINT", raising=False)
        code, _, err = run_cli(capsys, "decompose", tensor_file, "--rank", "2",
                               "--backend", "remote")
        assert code == EXIT_USAGE

    def test_remote_unreachable_exit_3(self, tensor_file, capsys, monkeypatch):
        import bhtn.solvers as solvers

        monkeypatch.setattr(solvers, "REMOTE_RETRIES", 0)
        code, _, _ = run_cli(capsys, "decompose", tensor_file, "--rank", "2",
                             "--backend", "remote", "--endpoint", "http://127.0.0.1:1")
        assert code == EXIT_SOLVER


class TestReconstruct:
    def test_round_trip_with_compare(self, tmp_path, capsys):
        tpath, gpath = tmp_path / "t.json", tmp_path / "g.json"
        run_cli(capsys, "generate", "--order", "3", "--size", "2", "--rank", "2",
                "--seed", "9", "--out-tensor", str(tpath), "--out-tree", str(gpath))
        out = tmp_path / "recon.json"
        code, _, err = run_cli(capsys, "reconstruct", str(gpath), "--out", str(out),
                               "--compare", str(tpath))
        assert code == EXIT_OK
        assert load_tensor(str(out)) == load_tensor(str(tpath))
        assert json.loads(err.strip().splitlines()[-1])["error_rate"] == 0.0


class TestBmfCommand:
    def test_exact_factorization_output(self, tmp_path, capsys):
        import numpy as np

        from bhtn.boolcore import BitMatrix, bool_matmul
        from bhtn.serialize import save_tensor

        rng = np.random.default_rng(0)
        a = BitMatrix((rng.random((5, 2)) < 0.5).astype(np.uint8))
        b = BitMatrix((rng.random((2, 6)) < 0.5).astype(np.uint8))
        x = bool_matmul(a, b)
        path = tmp_path / "m.json"
        save_tensor(x, str(path))
        code, out, _ = run_cli(capsys, "bmf", str(path), "--rank", "2", "--seed", "1")
        assert code == EXIT_OK
        blob = json.loads(out)
        got_a = tensor_from_obj(blob["a"])
        got_b = tensor_from_obj(blob["b"])
        assert blob["report"]["distance"] == 0
        assert bool_matmul(got_a, got_b) == x

    def test_non_matrix_input_exit_2(self, tmp_path, capsys):
        from bhtn.gen import GenSpec, generate
        from bhtn.serialize import save_tensor

        t, _ = generate(GenSpec(order=3, size=2, rank=1, seed=0))
        path = tmp_path / "t3.json"
        save_tensor(t, str(path))
        code, _, _ = run_cli(capsys, "bmf", str(path), "--rank", "2")
        assert code == EXIT_PARSE


class TestBench:
    def test_csv_to_stdout(self, capsys):
        code, out, _ = run_cli(
            capsys, "bench", "--vary", "rank", "--values", "1,2", "--order", "3",
            "--size", "2", "--trials", "1", "--noise", "clean", "--jobs", "1",
            "--seed", "3",
        )
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0].startswith("order,size,rank,noise,seed")
        assert len(lines) == 3

    def test_bad_values_exit_1(self, capsys):
        code, _, _ = run_cli(capsys, "bench", "--vary", "rank", "--values", "a,b")
        assert code == EXIT_USAGE


class TestServeLoopback:
    def test_remote_equals_local_sa(self, tmp_path, capsys):
        tpath = tmp_path / "t.json"
        run_cli(capsys, "generate", "--order", "3", "--size", "3", "--rank", "2",
                "--seed", "21", "--out-tensor", str(tpath))
        server = make_server()
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        try:
            code1, out1, _ = run_cli(capsys, "decompose", str(tpath), "--rank", "2",
                                     "--seed", "8", "--backend", "sa")
            code2, out2, _ = run_cli(capsys, "decompose", str(tpath), "--rank", "2",
                                     "--seed", "8", "--backend", "remote",
                                     "--endpoint", f"http://127.0.0.1:{port}")
        finally:
            server.shutdown()
            server.server_close()
        assert code1 == code2 == EXIT_OK
        b1, b2 = json.loads(out1), json.loads(out2)
        assert b1["tree"] == b2["tree"]
        strip = lambda rep: {k: v for k, v in rep.items()
                             if k not in ("solver_ms", "total_ms", "backend")}
        assert strip(b1["report"]) == strip(b2["report"])

    def test_endpoint_env_variable(self, tmp_path, capsys, monkeypatch):
        tpath = tmp_path / "t.json"
        run_cli(capsys, "generate", "--order", "2", "--size", "2", "--rank", "1",
                "--seed", "2", "--out-tensor", str(tpath))
        server = make_server()
        port = server.server_address[1]
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        monkeypatch.setenv("BHTN_REMOTE_ENDPOINT", f"http://127.0.0.1:{port}")
        try:
            code, out, _ = run_cli(capsys, "decompose", str(tpath), "--rank", "1",
                                   "--seed", "1", "--backend", "remote")
        finally:
            server.shutdown()
            server.server_close()
        assert code == EXIT_OK


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
