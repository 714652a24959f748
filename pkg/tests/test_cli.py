import csv
import io
import json

import gmpy2
import pytest

from schottky_zeta import products
from schottky_zeta.cli import RunConfig, emit_shell_table, main, run
from schottky_zeta.errors import InvalidInput
from schottky_zeta.groups import bundled
from schottky_zeta.numbers import workprec


def _run(capsys, *argv):
    status = main(list(argv))
    out = capsys.readouterr()
    return status, out.out, out.err


def _json(text):
    doc = json.loads(text)
    assert doc["schema"] == "schottky-zeta/1"
    return doc


def test_classes_stream(capsys):
    status, out, _ = _run(capsys, "classes", "--rank", "2", "--max-len", "2")
    rows = [json.loads(line) for line in out.splitlines()]
    assert status == 0 and len(rows) == 8
    assert rows[0] == {"word": [1], "length": 1}


def test_classes_count_only(capsys):
    status, out, _ = _run(capsys, "classes", "--rank", "2", "--max-len", "3", "--count-only")
    doc = _json(out)
    assert status == 0 and doc["counts"] == {"1": 4, "2": 4, "3": 8}


def test_products_json(capsys):
    status, out, _ = _run(capsys, "products", "--group", "real_a", "--max-len", "4", "--what", "f1")
    doc = _json(out)
    assert status == 0 and doc["command"] == "products"
    assert doc["max_len"] == 4 and len(doc["shells"]) == 4


def test_ratio_on_complex_group(capsys):
    status, out, err = _run(capsys, "products", "--group", "sample", "--what", "ratio", "--k", "2")
    assert status == 1
    assert _json(out)["error"]["code"] == "NotRealGroup"
    assert "NotRealGroup" in err


def test_malformed_group(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"generators": [')
    status, out, err = _run(capsys, "products", "--group", str(bad))
    assert status == 2
    assert _json(out)["error"]["code"] == "InvalidInput"
    assert "line 1" in err


def test_bad_arguments(capsys):
    assert _run(capsys, "classes")[0] == 2
    assert _run(capsys, "products", "--group", "real_a", "--max-len", "-1")[0] == 2
    assert _run(capsys, "products", "--group", "real_a", "--precision", "32")[0] == 2


def test_tate_and_telescope(capsys):
    status, out, _ = _run(capsys, "tate-check", "--z0", "5/7", "--order", "12")
    assert status == 0 and _json(out)["residual_zero"] is True
    status, out, _ = _run(capsys, "telescope", "--k", "3", "--order", "20")
    assert status == 0 and _json(out)["residual_zero"] is True
    assert _run(capsys, "tate-check", "--z0", "1")[0] == 2


def test_expand_word(capsys):
    status, out, _ = _run(capsys, "expand", "--g", "2", "--x-values=-2=3", "--degree", "3", "--word", "1")
    doc = _json(out)
    assert status == 0
    assert doc["monomials"] == [{"exp": [1, 0], "num": "1", "den": "1"}]


def test_expand_coincident(capsys):
    assert _run(capsys, "expand", "--g", "2", "--x-values=-2=1", "--word", "1")[0] == 2


def test_constants(capsys):
    status, out, _ = _run(capsys, "constants", "--g", "2", "--k", "3")
    doc = _json(out)
    assert status == 0 and doc["d_k"] == 37


def test_csv_header_only(real_a):
    v = products.f1(real_a, 0)
    assert emit_shell_table(v) == "length,shell_re,shell_im,cum_re,cum_im\n"


def _shell_mags(value):
    rows = list(csv.DictReader(io.StringIO(emit_shell_table(value))))
    return [abs(complex(float(r["shell_re"]), float(r["shell_im"]))) for r in rows]


def test_csv_rank1_rows(rank1):
    # a cyclic group has primitive classes only in length one
    mags = _shell_mags(products.f1(rank1, 6))
    assert len(mags) == 6 and mags[0] > 0 and not any(mags[1:])


@pytest.mark.parametrize("name", ["real_b", "sample"])
def test_csv_rows_decay(name):
    mags = _shell_mags(products.f1(bundled(name), 8))
    assert all(b < a for a, b in zip(mags, mags[1:]))


def test_csv_round_trip(real_b):
    v = products.f1(real_b, 6)
    rows = list(csv.DictReader(io.StringIO(emit_shell_table(v))))
    prec = v.precision
    with workprec(prec):
        last = gmpy2.mpc(gmpy2.mpfr(rows[-1]["cum_re"]), gmpy2.mpfr(rows[-1]["cum_im"]))
        target = v.log_value
        ulp = gmpy2.mpfr(2) ** (gmpy2.get_exp(target.real) - prec)
        assert abs(last.real - target.real) <= ulp
        assert abs(last.imag - target.imag) <= ulp


def test_csv_from_cli(capsys):
    status, out, _ = _run(capsys, "zeta", "--group", "real_a", "--max-len", "3", "--s", "2", "--csv")
    lines = out.splitlines()
    assert status == 0 and lines[0].startswith("length,") and len(lines) == 4


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        RunConfig("products", group="real_a", max_len=-1)
    with pytest.raises(InvalidInput):
        RunConfig("periods", group="real_a", nodes=0)


def test_determinism(capsys):
    argv = ["products", "--group", "real_b", "--max-len", "5", "--what", "fk", "--k", "3"]
    first = _run(capsys, *argv)
    second = _run(capsys, *argv)
    assert first == second


def test_verify_single_check(capsys):
    status, out, err = _run(capsys, "verify", "--suite", "telescope")
    doc = _json(out)
    assert status == 0 and doc["passed"] is True
    assert err.strip() == "[PASS] telescope: shifted Euler products telescope exactly"


def test_verify_unknown_suite(capsys):
    assert _run(capsys, "verify", "--suite", "nope")[0] == 2


def test_run_returns_text():
    status, text = run(RunConfig("telescope", options={"k": 2, "order": 10}))
    assert status == 0 and json.loads(text)["command"] == "telescope"


def test_expand_mod_p_reports_denominators(capsys):
    status, out, _ = _run(capsys, "expand", "--g", "2", "--x-values=-2=3", "--degree", "6", "--f1", "--mod-p", "3")
    doc = _json(out)
    assert status == 0 and doc["p_integral"] is False and doc["primitive"] is None
    assert any(m["residue"] is None for m in doc["monomials"])
    status, out, _ = _run(capsys, "expand", "--g", "2", "--x-values=-2=3", "--degree", "6", "--f1", "--mod-p", "5")
    doc = _json(out)
    assert doc["p_integral"] is True and doc["primitive"] is True
    assert doc["monomials"][0] == {"exp": [0, 0], "residue": 1}
