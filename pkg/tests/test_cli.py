import numpy as np
import pytest

from pssv.cli import main
from pssv.io import read_matrix, write_matrix
from pssv.metrics import nrmse
from pssv.synth import PrngStream, demo_image, gen_low_rank, gen_mask, make_instance


def summary(text):
    return dict(line.split(": ", 1) for line in text.strip().splitlines() if ": " in line)


@pytest.fixture
def rank1_csv(tmp_path):
    path = tmp_path / "o.csv"
    write_matrix(path, np.outer(np.arange(1.0, 31), np.linspace(0.5, 2, 8)))
    return path


@pytest.fixture
def corrupted_csv(tmp_path):
    path = tmp_path / "c.csv"
    write_matrix(path, make_instance(200, 20, 2, 0.05, PrngStream(1)).O)
    return path


class TestSolve:
    def test_clean_rank_one(self, rank1_csv, tmp_path, capsys):
        code = main(["solve", str(rank1_csv), "--rank", "1", "--out-A", str(tmp_path / "A.csv"),
                     "--out-E", str(tmp_path / "E.csv"), "--trace", str(tmp_path / "t.csv")])
        assert code == 0
        out = summary(capsys.readouterr().out)
        assert out["converged"] == "true" and float(out["residual"]) < 1e-7
        O = read_matrix(rank1_csv)
        assert np.linalg.norm(read_matrix(tmp_path / "E.csv")) / np.linalg.norm(O) < 1e-6
        trace = (tmp_path / "t.csv").read_text().splitlines()
        assert trace[0] == "iteration,feasibility,objective,lagrangian,mu"
        assert len(trace) == int(out["iterations"]) + 1

    def test_nuclear_equals_rank_zero(self, corrupted_csv, tmp_path, capsys):
        outs = []
        for i, flags in enumerate((["--method", "nuclear"], ["--method", "pssv", "--rank", "0"])):
            a = tmp_path / f"A{i}.csv"
            assert main(["solve", str(corrupted_csv), *flags, "--out-A", str(a)]) == 0
            outs.append(a.read_bytes())
        assert outs[0] == outs[1]

    def test_missing_rank(self, rank1_csv, capsys):
        assert main(["solve", str(rank1_csv)]) == 1
        assert "--rank" in capsys.readouterr().err

    def test_nuclear_with_rank(self, rank1_csv):
        assert main(["solve", str(rank1_csv), "--method", "nuclear", "--rank", "2"]) == 1

    def test_not_converged(self, corrupted_csv):
        assert main(["solve", str(corrupted_csv), "--rank", "2", "--max-iter", "2"]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["solve", str(tmp_path / "none.csv"), "--rank", "1"]) == 1

    def test_malformed_csv_names_line(self, tmp_path, capsys):
        (tmp_path / "m.csv").write_text("1,2\n3,4\n5\n")
        assert main(["solve", str(tmp_path / "m.csv"), "--rank", "1"]) == 1
        assert "m.csv:3" in capsys.readouterr().err

    def test_bad_flag(self, rank1_csv):
        with pytest.raises(SystemExit) as exc:
            main(["solve", str(rank1_csv), "--rho", "fast"])
        assert exc.value.code == 1

    def test_rank_out_of_range(self, rank1_csv):
        assert main(["solve", str(rank1_csv), "--rank", "9"]) == 1


class TestComplete:
    def test_full_mask(self, tmp_path):
        O = gen_low_rank(30, 20, 3, PrngStream(0))
        write_matrix(tmp_path / "o.csv", O)
        write_matrix(tmp_path / "m.csv", np.ones_like(O))
        code = main(["complete", str(tmp_path / "o.csv"), "--mask", str(tmp_path / "m.csv"),
                     "--rank", "3", "--out", str(tmp_path / "a.csv")])
        assert code == 0
        assert nrmse(O, read_matrix(tmp_path / "a.csv")) < 1e-6

    def test_half_masked_rank5(self, tmp_path, capsys):
        stream = PrngStream(11)
        A = gen_low_rank(100, 100, 5, stream)
        mask = gen_mask(100, 100, 0.5, stream)
        write_matrix(tmp_path / "o.csv", np.where(mask.array, A, np.nan))
        write_matrix(tmp_path / "ref.csv", A)
        code = main(["complete", str(tmp_path / "o.csv"), "--rank", "5",
                     "--out", str(tmp_path / "a.csv"), "--ref", str(tmp_path / "ref.csv")])
        assert code == 0
        out = summary(capsys.readouterr().out)
        assert int(out["observed"]) == 5000 and float(out["nrmse"]) < 1e-3

    def test_pgm_in_pgm_out(self, tmp_path, capsys):
        write_matrix(tmp_path / "img.pgm", demo_image(64))
        code = main(["complete", str(tmp_path / "img.pgm"), "--observe-fraction", "0.6",
                     "--seed", "2", "--rank", "10", "--out", str(tmp_path / "out.pgm"),
                     "--ref", str(tmp_path / "img.pgm")])
        assert code in (0, 2)
        out = read_matrix(tmp_path / "out.pgm")
        assert out.shape == (64, 64) and out.min() >= 0 and out.max() <= 255
        assert np.array_equal(out, np.round(out))
        assert float(summary(capsys.readouterr().out)["psnr"]) > 20

    def test_mask_mismatch(self, tmp_path):
        write_matrix(tmp_path / "o.csv", np.ones((4, 3)))
        write_matrix(tmp_path / "m.csv", np.ones((3, 3)))
        assert main(["complete", str(tmp_path / "o.csv"), "--mask", str(tmp_path / "m.csv"),
                     "--rank", "1", "--out", str(tmp_path / "a.csv")]) == 1

    def test_non_binary_mask(self, tmp_path):
        write_matrix(tmp_path / "o.csv", np.ones((2, 2)))
        write_matrix(tmp_path / "m.csv", [[1, 2], [0, 1]])
        assert main(["complete", str(tmp_path / "o.csv"), "--mask", str(tmp_path / "m.csv"),
                     "--rank", "1", "--out", str(tmp_path / "a.csv")]) == 1


class TestExperiment:
    def test_toy_fig2(self, tmp_path):
        assert main(["experiment", "toy-fig2", "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "toy_fig2_argmin.csv").read_text().splitlines()
        assert rows[0] == "matrix,measure,argmin_x,value,sigma1,sigma2"
        argmin = {tuple(r.split(",")[:2]): float(r.split(",")[2]) for r in rows[1:]}
        assert argmin[("a", "nuclear")] == 1 and argmin[("a", "pssv")] == 3
        assert len((tmp_path / "toy_fig2.csv").read_text().splitlines()) == 402

    def test_phase_diagram_clean(self, tmp_path):
        code = main(["experiment", "phase-diagram", "--trials", "1", "--corruption", "0",
                     "--fixed-dim", "200", "--sweep", "20,40", "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "phase_diagram.csv").read_text().splitlines()
        header = lines[0].split(",")
        col = header.index("success_ratio")
        assert len(lines) == 5 and all(l.split(",")[col] == "1" for l in lines[1:])

    @pytest.mark.parametrize("argv", [
        ["phase-diagram", "--trials", "3", "--fixed-dim", "200", "--sweep", "10,20",
         "--corruption", "0.05,0.1"],
        ["deficiency-map", "--trials", "2", "--fixed-dim", "150", "--sweep", "8,16",
         "--corruption", "0.1"],
        ["init-sensitivity", "--trials", "4", "--rows", "200", "--cols", "20"],
        ["lambda-sweep", "--trials", "2", "--rows", "200", "--cols", "20", "--L", "0.5,1"],
        ["convergence-trace", "--trials", "2", "--rows", "200", "--cols", "20", "--ranks", "2,3"],
    ])
    def test_threads_byte_identical(self, tmp_path, argv):
        outs = []
        for i, threads in enumerate(("1", "8", "1")):
            d = tmp_path / str(i)
            assert main(["experiment", *argv, "--seed", "5", "--threads", threads,
                         "--out", str(d)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        assert outs[0] == outs[1] == outs[2]

    @pytest.mark.parametrize("argv", [
        ["phase-diagram", "--sweep", "10,6"],
        ["phase-diagram", "--corruption", "0.6"],
        ["phase-diagram", "--methods", "pssv,robust"],
        ["lambda-sweep", "--L", "-1"],
        ["init-sensitivity", "--trials", "0"],
        ["lambda-sweep", "--trials", "0"],
        ["convergence-trace", "--trials", "0"],
    ])
    def test_invalid_specs(self, tmp_path, argv):
        assert main(["experiment", *argv, "--out", str(tmp_path)]) == 1

    def test_seed_changes_output(self, tmp_path):
        argv = ["experiment", "phase-diagram", "--trials", "2", "--fixed-dim", "150",
                "--sweep", "8", "--corruption", "0.15"]
        main([*argv, "--seed", "0", "--out", str(tmp_path / "a")])
        main([*argv, "--seed", "1", "--out", str(tmp_path / "b")])
        assert ((tmp_path / "a" / "phase_diagram.csv").read_bytes()
                != (tmp_path / "b" / "phase_diagram.csv").read_bytes())
