"""End-to-end checks of the cartan command-line tool.

Usage: test_cli.py <path-to-cartan> <source-dir>
"""
import json
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

CLI = sys.argv[1] if len(sys.argv) > 1 else "cartan"
ROOT = Path(sys.argv[2] if len(sys.argv) > 2 else ".")
CORPUS = ROOT / "data" / "corpus.json"

EXP_SRC = "(3*u2^2 - u1^5*exp(u2/u1^3))/u1"


def cli(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, timeout=240)


def as_json(*args):
    r = cli("--format", "json", *args)
    return r, json.loads(r.stdout) if r.stdout.strip() else None


class ExitCodes(unittest.TestCase):
    def test_classify_exponential(self):
        r = cli("classify", "exp(-u2)")
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertIn("branch:      A", r.stdout)
        self.assertIn("ExpQ", r.stdout)

    def test_classify_unclassified(self):
        r = cli("classify", "0")
        self.assertEqual(r.returncode, 2)
        self.assertIn("Unclassified", r.stdout)

    def test_classify_branch_d(self):
        r = cli("classify", "3/2*u2^2/u1")
        self.assertEqual(r.returncode, 0)
        self.assertIn("six symmetries", r.stdout)

    def test_invariants(self):
        r = cli("invariants", "3*u1*u2^2/(1+u1^2)")
        self.assertEqual(r.returncode, 0)
        for line in ("I3 = u1/(1 + u1^2)", "I4 = 0", "I6 = 0", "J5 = i/(1 + u1^2)", "conditions: D"):
            self.assertIn(line, r.stdout)

    def test_invariants_examples(self):
        zero = cli("invariants", "0").stdout
        for name in ("I1", "I2", "I3", "I4", "I5", "I6"):
            self.assertIn(name + " = 0\n", zero)
        self.assertIn("I4 = 2/27*u2^3", cli("invariants", "u2^2").stdout)

    def test_verify_map(self):
        ok = cli("verify-map", "--src", EXP_SRC, "--tgt", "exp(-u2)", "--phi", "u", "--psi", "x")
        self.assertEqual(ok.returncode, 0)
        self.assertTrue(ok.stdout.startswith("VERIFIED"))
        bad = cli("verify-map", "--src", "exp(-u2)", "--tgt", "u2^2", "--phi", "x", "--psi", "u")
        self.assertEqual(bad.returncode, 2)
        self.assertTrue(bad.stdout.startswith("FAILED"))
        self.assertIn("residual sample", bad.stdout)
        deg = cli("verify-map", "--src", "exp(-u2)", "--tgt", "u2^2", "--phi", "x", "--psi", "x")
        self.assertEqual(deg.returncode, 1)
        self.assertIn("degenerate map", deg.stderr)

    def test_parse_error(self):
        r = cli("classify", "u2^((")
        self.assertEqual(r.returncode, 1)
        self.assertIn("position 5", r.stderr)

    def test_budget(self):
        r = cli("--max-nodes", "20", "classify", "exp(-u2)")
        self.assertEqual(r.returncode, 1)
        self.assertIn("budget exceeded", r.stderr)

    def test_leading_minus_needs_separator(self):
        self.assertNotEqual(cli("classify", "-u").returncode, 0)
        r = cli("classify", "--", "-u")
        self.assertEqual(r.returncode, 2)
        self.assertIn("input:       -u", r.stdout)

    def test_bad_option(self):
        self.assertNotEqual(cli("--format", "xml", "classify", "exp(-u2)").returncode, 0)


class JsonReports(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.schema = json.loads((ROOT / "schema" / "report.schema.json").read_text())

    def validate(self, doc):
        jsonschema.validate(doc, self.schema)

    def test_deterministic(self):
        for args in (("classify", "u2^(1/2)"), ("invariants", "exp(-u2)"), ("corpus", "--file", str(CORPUS))):
            a = cli("--format", "json", *args).stdout
            b = cli("--format", "json", *args).stdout
            self.assertEqual(a, b, args)

    def test_schema(self):
        cases = [
            ("classify", "exp(-u2)"),
            ("classify", "0"),
            ("classify", "3/2*u2^2/u1"),
            ("classify", "2*u2^2/u1"),
            ("--timing", "classify", "u2^3"),
            ("invariants", "3*u1*u2^2/(1+u1^2)"),
            ("verify-map", "--src", EXP_SRC, "--tgt", "exp(-u2)", "--phi", "u", "--psi", "x"),
            ("verify-map", "--src", "exp(-u2)", "--tgt", "u2^2", "--phi", "x", "--psi", "u"),
            ("corpus", "--file", str(CORPUS)),
        ]
        for args in cases:
            _, doc = as_json(*args)
            self.assertIsNotNone(doc, args)
            self.validate(doc)

    def test_text_and_json_agree(self):
        for ode in ("exp(-u2)", "u2^(2/3)", "2*u2^2/u1", "u2^3", "3/2*u2^2/u1", "-u"):
            text = cli("classify", "--", ode).stdout
            _, doc = as_json("classify", "--", ode)
            self.assertIn("branch:      " + doc["branch"], text)
            fam = doc["family"]
            if fam is not None:
                self.assertIn(fam["name"], text)

    def test_seventeen_digits(self):
        r = cli("--format", "json", "verify-map", "--src", "exp(-u2)", "--tgt", "u2^2", "--phi", "x", "--psi", "u")
        mag = [l for l in r.stdout.splitlines() if '"magnitude"' in l][0]
        digits = mag.split(":")[1].strip().rstrip(",").replace(".", "").lstrip("0")
        self.assertEqual(len(digits), 17, mag)

    def test_structure_constants(self):
        _, doc = as_json("classify", "exp(-u2)")
        sc = doc["structure_constants"]
        self.assertEqual(len(sc), 24)
        c312 = [e for e in sc if (e["i"], e["j"], e["k"]) == (3, 1, 2)][0]
        self.assertEqual(c312["exact"], "1/32")


class Corpus(unittest.TestCase):
    def run_corpus(self, entries):
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(entries, f)
        try:
            return cli("corpus", "--file", f.name)
        finally:
            Path(f.name).unlink()

    def test_shipped_corpus(self):
        jsonschema.validate(json.loads(CORPUS.read_text()),
                            json.loads((ROOT / "schema" / "corpus.schema.json").read_text()))
        r = cli("corpus", "--file", str(CORPUS))
        self.assertEqual(r.returncode, 0, r.stdout)
        self.assertIn("0 failed", r.stdout)

    def test_wrong_expectation(self):
        r = self.run_corpus([{"name": "wrong", "ode": "exp(-u2)", "expected_branch": "B"}])
        self.assertEqual(r.returncode, 1)
        self.assertIn("[FAIL]", r.stdout)
        self.assertIn("expected B", r.stdout)

    def test_wrong_map(self):
        r = self.run_corpus([{"name": "m", "ode": "exp(-u2)", "expected_branch": "A",
                              "maps": [{"target": "exp(-u2)", "phi": "2*x", "psi": "u"}]}])
        self.assertEqual(r.returncode, 1)

    def test_empty(self):
        r = self.run_corpus([])
        self.assertEqual(r.returncode, 0)
        self.assertIn("0 entries", r.stdout)

    def test_malformed(self):
        r = self.run_corpus({"not": "a list"})
        self.assertEqual(r.returncode, 1)
        self.assertIn("corpus:", r.stderr)


if __name__ == "__main__":
    unittest.main(argv=[sys.argv[0], "-v"])
