import io

from polyauto.cli import main


def run(*argv):
    buf = io.StringIO()
    code = main(list(argv), stdout=buf)
    return code, buf.getvalue()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


TAU = "(x, y - 1/2*x^2, z - x*y + 1/3*x^3)"
DERKSEN = "(x + y^2, y, z)"


def test_compose(tmp_path):
    path = write(tmp_path, "w.txt", "(x + y, y, z)\n(x, y + x^2, z)\n")
    code, text = run("compose", path)
    assert code == 0
    from polyauto import parse_endo
    want = parse_endo("(x + y, y, z)", 3).compose(
        parse_endo("(x, y + x^2, z)", 3))
    assert text == "result: %s\n" % want.canonical_str()


def test_invert(tmp_path):
    path = write(tmp_path, "e.txt", TAU)
    code, text = run("invert", path)
    assert code == 0
    assert "result: (x1," in text
    bad = write(tmp_path, "bad.txt", "(x^2, y, z)")
    code, text = run("invert", bad)
    assert code == 1


def test_classify(tmp_path):
    path = write(tmp_path, "e.txt", "(x + 1, y, z)")
    code, text = run("classify", path)
    assert code == 0
    assert "translation" in text


def test_exp_nagata(tmp_path):
    path = write(tmp_path, "exp.txt",
                 "D: x -> 0; y -> x; z -> -2*y\n--\nF = y^2 + x*z\n")
    code, text = run("exp", path)
    assert code == 0
    assert text.startswith("result: (x1,")


def test_td_test_example(tmp_path):
    path = write(tmp_path, "tau.txt", TAU)
    code, text = run("td-test", path, "--var", "1")
    assert (code, text) == (0, "td: true\n")
    inv = write(tmp_path, "taui.txt",
                "(x, y + 1/2*x^2, z + x*y + 1/6*x^3)")
    code, text = run("td-test", inv, "--var", "1")
    assert (code, text) == (0, "td: false\n")


def test_ttd_factor(tmp_path):
    path = write(tmp_path, "tau.txt", TAU)
    code, text = run("ttd-factor", path, "--var", "1")
    assert code == 0
    for key in ("lambda:", "tau:", "gamma:", "mu:", "rho:"):
        assert key in text
    inv = write(tmp_path, "taui.txt",
                "(x, y + 1/2*x^2, z + x*y + 1/6*x^3)")
    code, text = run("ttd-factor", inv, "--var", "1")
    assert code == 1
    assert text.startswith("error:")


def test_reduce_triangular_derksen_terminal(tmp_path):
    path = write(tmp_path, "d.txt", DERKSEN)
    code, text = run("reduce", path, "--family", "parabolic")
    assert code == 0
    assert "terminal: derksen" in text
    assert "verified: true" in text


def test_reduce_writes_replayable_trace(tmp_path):
    path = write(tmp_path, "t.txt", "(x, y + x^2, z + x*y)")
    trace = str(tmp_path / "trace.json")
    code, text = run("reduce", path, "--family", "triangular",
                     "--trace", trace)
    assert code == 0
    code, text = run("verify-trace", trace)
    assert (code, text) == (0, "verified: true\n")


def test_verify_trace_rejects_tampering(tmp_path):
    path = write(tmp_path, "t.txt", "(x, y + x^2, z + x*y)")
    trace = tmp_path / "trace.json"
    run("reduce", path, "--family", "triangular", "--trace", str(trace))
    body = trace.read_text()
    if '"digest"' in body:
        import json
        data = json.loads(body)
        if data["steps"]:
            data["steps"][0]["digest"] = "0" * 16
            trace.write_text(json.dumps(data))
            code, text = run("verify-trace", str(trace))
            assert code == 1
            assert "verified: false" in text


def test_reduce_3triangular_word(tmp_path):
    word = ("tri: (x, y + x^2, z + y^2)\n"
            "perm: (3 2 1)\n"
            "tri: (x, y + x^2, z + y^2)\n"
            "perm: (3 2 1)\n"
            "tri: (x, y + x^2, z + y^2)\n")
    path = write(tmp_path, "w.txt", word)
    code, text = run("reduce", path, "--family", "3triangular")
    assert code == 0
    assert "verified: true" in text


def test_reduce_exp_family(tmp_path):
    blocks = ("(x, y, z)\n--\nD: x -> 0; y -> x; z -> -2*y\n--\n"
              "F = y^2 + x*z\n--\n(x, y, z)\n")
    path = write(tmp_path, "exp.txt", blocks)
    code, text = run("reduce", path, "--family", "exp")
    assert code == 0
    assert "verified: true" in text


def test_verify_non_cotame_small():
    code, text = run("verify-non-cotame", "--N", "2", "--M", "4")
    assert code == 0
    assert "summary: pass" in text


def test_parse_error_exit_code(tmp_path):
    path = write(tmp_path, "bad.txt", "(x + , y, z)")
    code, text = run("classify", path)
    assert code == 2
    assert text.startswith("error:")
    code, _ = run("classify", str(tmp_path / "missing.txt"))
    assert code == 2


def test_usage_error_exit_code():
    code, _ = run("no-such-command")
    assert code == 2


def test_output_is_deterministic(tmp_path):
    path = write(tmp_path, "t.txt", "(x, y + x^2, z + x*y)")
    runs = {run("reduce", path, "--family", "triangular")[1]
            for _ in range(3)}
    assert len(runs) == 1
