import itertools
import random

import pytest

from paratrap.sat import (
    CnfBuilder,
    SatError,
    Solver,
    check_model,
    parse_dimacs_output,
    solve,
    solve_brute_force,
    solve_external,
    to_dimacs,
)


def random_cnf(rng, num_vars, num_clauses, width=3):
    clauses = []
    for _ in range(num_clauses):
        size = rng.randint(1, width)
        vs = rng.sample(range(1, num_vars + 1), min(size, num_vars))
        clauses.append([v if rng.random() < 0.5 else -v for v in vs])
    return clauses


class TestSolver:
    def test_empty_problem_is_sat(self):
        assert solve([], 0) == {}

    def test_empty_clause_is_unsat(self):
        assert solve([[]], 0) is None

    def test_unit_propagation(self):
        model = solve([[1], [-1, 2], [-2, 3]], 3)
        assert model == {1: True, 2: True, 3: True}

    def test_simple_unsat(self):
        assert solve([[1, 2], [-1], [-2]], 2) is None

    def test_agrees_with_brute_force(self):
        rng = random.Random(0)
        disagreements = 0
        for trial in range(400):
            n = rng.randint(1, 9)
            clauses = random_cnf(rng, n, rng.randint(1, 4 * n))
            got = solve(clauses, n)
            want = solve_brute_force(clauses, n)
            if (got is None) != (want is None):
                disagreements += 1
            elif got is not None:
                assert check_model(clauses, got)
        assert disagreements == 0

    def test_pigeonhole_is_unsat(self):
        # 4 pigeons, 3 holes; forces real conflict analysis
        def v(p, h):
            return p * 3 + h + 1

        clauses = [[v(p, h) for h in range(3)] for p in range(4)]
        for h in range(3):
            for p1, p2 in itertools.combinations(range(4), 2):
                clauses.append([-v(p1, h), -v(p2, h)])
        assert solve(clauses, 12) is None

    def test_deterministic(self):
        rng = random.Random(1)
        clauses = random_cnf(rng, 8, 20)
        assert solve(clauses, 8) == solve(clauses, 8)

    def test_incremental_growth(self):
        s = Solver()
        s.add_clause([1, 2])
        s.add_clause([-1])
        model = s.solve()
        assert model[2] is True

    def test_check_model_rejects_wrong_assignment(self):
        clauses = [[1, 2], [-1, -2]]
        assert check_model(clauses, {1: True, 2: False})
        assert not check_model(clauses, {1: True, 2: True})


class TestBuilder:
    def assert_gate(self, builder, gate, lits, predicate):
        """Exhaustively check a Tseitin gate definition."""
        base = builder.clauses
        for bits in itertools.product([False, True], repeat=len(lits)):
            assumptions = [l if b else -l for l, b in zip(lits, bits)]
            forced = assumptions + [gate if predicate(bits) else -gate]
            assert solve(base + [[l] for l in forced], builder.num_vars), \
                f"gate wrong for {bits}"
            blocked = assumptions + [-gate if predicate(bits) else gate]
            assert solve(base + [[l] for l in blocked],
                         builder.num_vars) is None

    def test_and_gate(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(3)]
        g = b.and_gate(lits)
        self.assert_gate(b, g, lits, all)

    def test_or_gate(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(3)]
        g = b.or_gate(lits)
        self.assert_gate(b, g, lits, any)

    def test_at_least_gate(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(4)]
        g = b.at_least_gate(lits, 2)
        self.assert_gate(b, g, lits, lambda bits: sum(bits) >= 2)

    def test_at_least_bounds(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(2)]
        top = b.at_least_gate(lits, 0)
        bottom = b.at_least_gate(lits, 3)  # a negated literal, not a var
        model = b.solve()

        def holds(lit):
            return model[abs(lit)] == (lit > 0)

        assert holds(top) and not holds(bottom)

    def test_gates_over_negative_literals(self):
        b = CnfBuilder()
        x = b.new_var()
        g = b.and_gate([-x])
        assert g == -x

    def test_exactly_one(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(3)]
        b.add_exactly_one(lits)
        models = []
        while True:
            model = b.solve()
            if model is None:
                break
            models.append(tuple(model[l] for l in lits))
            b.add_clause([-l if model[l] else l for l in lits])
        assert sorted(models) == [
            (False, False, True), (False, True, False), (True, False, False)]

    def test_at_most_one_allows_none(self):
        b = CnfBuilder()
        lits = [b.new_var() for _ in range(3)]
        b.add_at_most_one(lits)
        b.add_clause([-l for l in lits])
        assert b.solve() is not None

    def test_notes_attach_to_variables(self):
        b = CnfBuilder()
        v = b.new_var(("cell", 0))
        assert b.notes[v] == ("cell", 0)


class TestDimacs:
    def test_round_trip_format(self):
        text = to_dimacs(3, [[1, -2], [3]], comments=["hello"])
        lines = text.splitlines()
        assert lines[0] == "c hello"
        assert lines[1] == "p cnf 3 2"
        assert lines[2] == "1 -2 0"

    def test_parse_sat_output(self):
        out = "c comment\ns SATISFIABLE\nv 1 -2 0\n"
        assert parse_dimacs_output(out) == {1: True, 2: False}

    def test_parse_unsat_output(self):
        assert parse_dimacs_output("s UNSATISFIABLE\n") is None

    def test_parse_requires_verdict(self):
        with pytest.raises(SatError):
            parse_dimacs_output("c nothing here\n")

    def test_external_solver_stub(self, tmp_path):
        # a fake DIMACS solver that always answers with a fixed model
        script = tmp_path / "fakesat.sh"
        script.write_text("#!/bin/sh\necho 's SATISFIABLE'\necho 'v 1 2 0'\n")
        script.chmod(0o755)
        model = solve_external([str(script)], 2, [[1], [2]])
        assert model == {1: True, 2: True}
        with pytest.raises(SatError):
            solve_external([str(script)], 2, [[-1]])

    def test_external_solver_missing(self):
        with pytest.raises(SatError):
            solve_external(["/nonexistent/solver"], 1, [[1]])
