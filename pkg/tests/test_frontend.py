import random

import pytest

from conslaw import (DiffPoly, DSLSyntaxError, NotChainConsistent, NotCKForm, UnknownSymbol,
                     UnsupportedExpression, check_candidate, lift_multiplier,
                     lower_multiplier, parse_dsl, parse_expression, scalar_to_system,
                     to_dsl, to_first_order, validate_ck)
from conslaw.frontend import SymbolTable, parse_expression_list
from helpers import PDE_DIR, jet, pde, random_poly

u, ux, uxx = jet(), jet(xs=(1,)), jet(xs=(1, 1))
ut = jet(t=1)


def src(*eqs, unknowns="u", vars_="x", ck="t", params=None):
    lines = ["system test", f"ck_var: {ck}", f"vars: {vars_}", f"unknowns: {unknowns}"]
    if params:
        lines.append(f"params: {params}")
    lines += [f"eq: {e}" for e in eqs]
    return "\n".join(lines) + "\n"


def test_kdv_source():
    sys, source = parse_dsl(src("dt(u) = -(u*dx(u) + dx(u,3))"))
    assert sys.form == "FirstOrderCK" and sys.m == 3
    assert sys.g == (u * ux + jet(xs=(1, 1, 1)),)
    assert source.name == "test" and source.unknowns == ("u",)


def test_second_order_source():
    sys, _ = parse_dsl(src("dt(u,2) = dx(u,2) - u^3"))
    assert sys.form == "ScalarCK(2)"
    assert sys.g == (-uxx + u ** 3,)


def test_harmonic_with_y_as_ck_variable():
    sys, _ = parse_dsl(src("dy(u,2) = -dx(u,2)", ck="y", vars_="x"))
    assert sys.var_names == ("y", "x")
    assert sys.form == "ScalarCK(2)" and sys.g == (uxx,)


def test_kp_in_y():
    kp = pde("kp")
    assert kp.form == "ScalarCK(2)" and kp.var_names == ("y", "t", "x")
    assert validate_ck(kp)[0] == "form ScalarCK(2)"


def test_leading_term_detected_when_not_isolated():
    sys, _ = parse_dsl(src("2*dt(u) + dx(u,3) = 0"))
    assert sys.g == (jet(xs=(1, 1, 1)) / 2,)


def test_raw_wave_rejected_with_hint():
    with pytest.raises(NotCKForm) as err:
        parse_dsl(src("dt(dx(u)) = 0"))
    assert "point transformation" in str(err.value)
    assert err.value.jets[0].xs == (1,)


def test_rhs_above_leading_order_rejected():
    with pytest.raises(NotCKForm):
        parse_dsl(src("dt(u) = dt(dx(u))"))


def test_nonlinear_leading_term_rejected():
    with pytest.raises(NotCKForm):
        parse_dsl(src("u*dt(u) = dx(u)"))


def test_equation_count_mismatch():
    with pytest.raises(NotCKForm):
        parse_dsl(src("dt(u) = dx(v)", unknowns="u, v"))


def test_syntax_errors_carry_position():
    with pytest.raises(DSLSyntaxError) as err:
        parse_dsl(src("dt(u) = u +* 2"))
    assert err.value.line == 5 and err.value.col > 1
    with pytest.raises(DSLSyntaxError):
        parse_dsl("system x\nbogus line\n")
    with pytest.raises(DSLSyntaxError):
        parse_dsl(src("dt(u) = (u"))
    with pytest.raises(DSLSyntaxError):
        parse_dsl(src("dt(u) = u $ 2"))


def test_unknown_symbol():
    with pytest.raises(UnknownSymbol) as err:
        parse_dsl(src("dt(u) = w"))
    assert err.value.line == 5


def test_unsupported_constructs():
    with pytest.raises(UnsupportedExpression):
        parse_dsl(src("dt(u) = u^(1/2)"))
    with pytest.raises(UnsupportedExpression):
        parse_dsl(src("dt(u) = u/dx(u)"))
    with pytest.raises(UnsupportedExpression):
        parse_dsl(src("dt(u) = a*u/a", params="a"))


def test_literals_and_comments():
    text = src("dt(u) = 3/4*u**2 - 0.5*dx(u)  # trailing comment") + "# final\n"
    sys, _ = parse_dsl(text)
    assert sys.g == (-(u ** 2) * 3 / 4 + ux / 2,)


def test_parameters():
    sys, _ = parse_dsl(src("dt(u) = k*dx(u,2)", params="k"))
    assert sys.params == ("k",)
    assert sys.g == (-DiffPoly.param("k") * uxx,)


def test_derivative_of_expression():
    tab = SymbolTable("t", ("x",), ("u",), ())
    assert parse_expression("dx(u^2/2)", tab) == u * ux
    assert parse_expression("dx(x*u, 2)", tab) == 2 * ux + DiffPoly.indep(1) * uxx
    assert parse_expression_list("dx(u, 2), u", tab) == [uxx, u]


@pytest.mark.parametrize("seed", range(30))
def test_print_parse_round_trip(seed):
    rng = random.Random(seed)
    tab = SymbolTable("t", ("x", "y"), ("u", "v"), ("a",))
    e = random_poly(rng, ("u", "v"), n=2, order=2, t_order=1, with_tx=True, degree=3)
    e = e * (DiffPoly.param("a") + 1) / 7
    assert parse_expression(to_dsl(e, tab.var_names), tab) == e


def test_corpus_files_parse():
    names = sorted(p.stem for p in PDE_DIR.glob("*.pde"))
    assert "kdv" in names
    for name in names:
        if name == "raw_wave":
            continue
        validate_ck(pde(name))


# -- conversion -------------------------------------------------------------

def test_first_order_conversion_is_identity():
    kdv = pde("kdv")
    fo, cmap = scalar_to_system(kdv)
    assert fo.fields == kdv.fields and fo.g == kdv.g
    assert list(lift_multiplier(u, cmap)) == [u]


def test_nonlinear_wave_conversion():
    fo, cmap = scalar_to_system(pde("nlwave"))
    u1, u2 = jet("u1"), jet("u2")
    assert fo.fields == ("u1", "u2") and fo.form == "FirstOrderCK"
    assert fo.g == (-u2, -jet("u1", 0, (1, 1)) + u1 ** 3)
    assert cmap.to_system(jet(t=1, xs=(1,))) == jet("u2", 0, (1,))
    assert cmap.to_system(jet(t=3)) == jet("u2", 2)
    assert cmap.to_scalar(cmap.to_system(ut * uxx + u)) == ut * uxx + u


def test_lift_and_lower():
    wave = pde("nlwave")
    fo, cmap = scalar_to_system(wave)
    lifted = lift_multiplier(ut, cmap)
    assert list(lifted) == [-jet("u1", 0, (1, 1)) + jet("u1") ** 3, jet("u2")]
    assert check_candidate(fo, lifted).ok
    assert lower_multiplier(lifted, cmap) == ut
    for lam in (ux, DiffPoly.indep(1) * ut + DiffPoly.indep(0) * ux):
        assert lower_multiplier(lift_multiplier(lam, cmap), cmap) == lam


def test_lower_rejects_inconsistent_components():
    fo, cmap = scalar_to_system(pde("nlwave"))
    with pytest.raises(NotChainConsistent):
        lower_multiplier([jet("u1"), jet("u2")], cmap)


@pytest.mark.parametrize("lam", [ut, ux, u + DiffPoly.indep(0) * ut + DiffPoly.indep(1) * ux,
                                 u * ut, DiffPoly.indep(1) * ut + DiffPoly.indep(0) * ux])
def test_check_agrees_across_conversion(lam):
    wave = pde("nlwave")
    fo, cmap = scalar_to_system(wave)
    assert check_candidate(wave, [lam]).ok == check_candidate(fo, lift_multiplier(lam, cmap)).ok


def test_kp_conversion_validates():
    fo, cmap = scalar_to_system(pde("kp"))
    assert fo.form == "FirstOrderCK"
    validate_ck(fo)


def test_mixed_orders_convert_fieldwise():
    fo, cmap = to_first_order(pde("elastic_wave"))
    assert fo.fields == ("u1", "u2", "v1", "v2")
    assert fo.g[0] == -jet("u2") and fo.g[2] == -jet("v2")
