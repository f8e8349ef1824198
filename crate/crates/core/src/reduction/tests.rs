use super::*;
use crate::expr::{parse_rule, Context};
use crate::structures::check_cinf_structure;

fn four_dim_structure() -> CinfStructure {
    let c = Arc::new(Chart::new("U", &["x1", "x2", "x3", "x4"], &["C1", "C2"], Arc::new(Context::new())).unwrap());
    let z1 = VectorField::parse(&c, &["0", "x2 - x3*x4", "-x3", "x4"]).unwrap();
    let z2 = VectorField::parse(&c, &["1", "0", "-x3^2", "2*x3*x4 - x2"]).unwrap();
    let x1 = VectorField::parse(&c, &["0", "x4", "1", "0"]).unwrap();
    let x2 = VectorField::parse(&c, &["0", "0", "0", "1"]).unwrap();
    let d = Distribution::unnamed(c, vec![z1, z2]).unwrap();
    check_cinf_structure(&d, vec![x1, x2], vec!["X1".into(), "X2".into()], &ZeroTester::default()).unwrap()
}

fn reduce31(t: &ZeroTester) -> ReductionState {
    let s = four_dim_structure();
    let mut st = init_reduction(&s, t).unwrap();
    let c = st.chart.clone();
    let i2 = c.parse("x1 + x4/(x2 - x3*x4)").unwrap();
    let iota2 = graph_parametrization(&c, "N1", &["x1", "x2", "x3", "x2*(C2 - x1)/(1 + x3*(C2 - x1))"]).unwrap();
    st.descend(&i2, &Sym::new("C2"), iota2, t).unwrap();
    let n1 = st.chart.clone();
    let i1 = n1.parse("(1 + x3*(C2 - x1))/(x2*x3)").unwrap();
    let iota1 = graph_parametrization(&n1, "N0", &["x1", "x2", "1/(x1 + C1*x2 - C2)"]).unwrap();
    st.descend(&i1, &Sym::new("C1"), iota1, t).unwrap();
    st
}

#[test]
fn example_reduction_end_to_end() {
    let t = ZeroTester::default();
    let st = reduce31(&t);
    let step2 = &st.steps[0];
    assert!(step2.checks.iter().all(|e| e.certainty.holds()));
    assert_eq!(step2.reduced_factor, Some(st.structure.chart().parse("-(x2 - x3*x4)^(-2)").unwrap()));
    let step1 = &st.steps[1];
    let n1 = &step1.chart;
    let expected = KForm::one_form(
        n1.clone(),
        vec![
            n1.parse("x2*x3^2/(1 + x3*(C2 - x1))").unwrap(),
            n1.parse("x3").unwrap(),
            n1.parse("x2/(1 + x3*(C2 - x1))").unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(step1.forms[0], expected);
    assert_eq!(step1.reduced_factor, Some(n1.parse("-(1 + (C2 - x1)*x3)/(x2^2*x3^2)").unwrap()));
    let report = st.final_report().unwrap();
    let u = st.structure.chart();
    assert_eq!(
        report.equations,
        vec![
            (Sym::new("x3"), u.parse("1/(x1 + C1*x2 - C2)").unwrap()),
            (Sym::new("x4"), u.parse("(C2 - x1)*(x1 + C1*x2 - C2)/C1").unwrap()),
        ]
    );
    let cert = verify_integral_manifold(&st.structure.dist, &st.dual.omegas, &st.composed, &t).unwrap();
    assert!(cert.valid());
}

#[test]
fn perturbed_manifold_is_not_tangent() {
    let t = ZeroTester::default();
    let st = reduce31(&t);
    let ctx = st.chart.ctx();
    let shift: BTreeMap<Sym, Expr> = [(Sym::new("C1"), st.chart.parse("C1 + x1").unwrap())].into();
    let comps = st.composed.comps().iter().map(|c| c.substitute(&shift, ctx).unwrap()).collect();
    let bad = SmoothMap::new(st.chart.clone(), st.composed.target.clone(), comps).unwrap();
    let err = verify_integral_manifold(&st.structure.dist, &st.dual.omegas, &bad, &t).unwrap_err();
    assert!(matches!(err, ReductionError::NotTangent { .. }));
    assert!(err.witness().is_some());
    let level_set = SmoothMap::new(st.steps[0].iota.source.clone(), st.composed.target.clone(), st.steps[0].iota.comps().to_vec()).unwrap();
    assert!(matches!(
        verify_integral_manifold(&st.structure.dist, &st.dual.omegas, &level_set, &t),
        Err(ReductionError::Dimension { expected: 2, got: 3 })
    ));
}

#[test]
fn lifting_recovers_relative_factor() {
    let t = ZeroTester::default();
    let mut st = reduce31(&t);
    let mu_tilde = st.steps[1].reduced_factor.clone().unwrap();
    let cert = st.lift_relative_factor(1, &mu_tilde, None, &t).unwrap();
    assert_eq!(cert.factor, st.structure.chart().parse("-1/(x2*x3^2*(x2 - x3*x4))").unwrap());
    assert!(cert.evidence.iter().any(|e| e.identity.contains("reduced chart")));
    let plain = st.structure.chart().parse("-(x2 - x3*x4)^(-2)").unwrap();
    assert_eq!(st.lift_relative_factor(2, &plain, None, &t).unwrap().factor, plain);
}

#[test]
fn bad_inputs_are_rejected() {
    let t = ZeroTester::default();
    let s = four_dim_structure();
    let mut st = init_reduction(&s, &t).unwrap();
    let c = st.chart.clone();
    let not_integral = c.parse("x1").unwrap();
    let err = st.verify_first_integral(&not_integral, &t).unwrap();
    assert!(!err.valid());
    assert!(matches!(st.verify_first_integral(&c.parse("C1").unwrap(), &t), Err(ReductionError::ConstantIntegral)));
    let i2 = c.parse("x1 + x4/(x2 - x3*x4)").unwrap();
    let wrong = graph_parametrization(&c, "N1", &["x1", "x2", "x3", "x2*C2"]).unwrap();
    assert!(matches!(st.descend(&i2, &Sym::new("C2"), wrong, &t), Err(ReductionError::LevelSet { witness: Some(_), .. })));
    assert!(matches!(graph_parametrization(&c, "N", &["x1", "x2", "x4", "x3"]), Err(ReductionError::NotGraph)));
    assert!(matches!(st.final_report(), Err(ReductionError::Incomplete { remaining: 2 })));
}

#[test]
fn solvable_structure_from_factors() {
    let t = ZeroTester::default();
    let s = four_dim_structure();
    let c = s.chart().clone();
    let f = [c.parse("-x3^2*(x2 - x3*x4)").unwrap(), c.parse("(x2 - x3*x4)^2/x2").unwrap()];
    let cert = build_solvable_structure(&s, &f, &t).unwrap();
    assert!(cert.valid());
    assert_eq!(cert.fields[0], VectorField::parse(&c, &["0", "-x4*x3^2*(x2 - x3*x4)", "-x3^2*(x2 - x3*x4)", "0"]).unwrap());
    assert_eq!(cert.fields[1], VectorField::parse(&c, &["0", "0", "0", "(x2 - x3*x4)^2/x2"]).unwrap());
    // [Y1,Z2] = f1 Z1 and [Y2,Y1] both lie in the span with zero Y coefficient.
    assert_eq!(cert.checks[0].entries[1].span[0], f[0]);
    let y2z1 = &cert.checks[1].entries[0].span;
    assert_eq!(y2z1[0], c.parse("-x3*(x2 - x3*x4)^2/x2^2").unwrap());
    assert_eq!(y2z1[2], c.parse("(x2 - x3*x4)/x2^2").unwrap());
    let bad = build_solvable_structure(&s, &[Expr::one(), Expr::one()], &t).unwrap();
    assert!(!bad.valid());
}

pub(crate) fn airy_context() -> Arc<Context> {
    let mut ctx = Context::new();
    for f in ["phi1", "phi2", "G", "H"] {
        ctx.declare_function(f, &["x"]).unwrap();
    }
    for r in [
        "rule D(phi1, x, 2) = (x + 1/4)*phi1",
        "rule D(phi2, x, 2) = (x + 1/4)*phi2",
        "rule D(G, x) = x*exp(x/2)/(C3*phi1 + phi2)",
        "rule D(H, x) = -exp(-x/2)*(C2 - G)*(C3*phi1 + phi2)",
    ] {
        let rule = parse_rule(r, &ctx).unwrap();
        ctx.add_rule(rule).unwrap();
    }
    Arc::new(ctx)
}

pub(crate) fn airy() -> CinfStructure {
    let c = Arc::new(Chart::new("U", &["x", "u", "u1", "u2"], &["C1", "C2", "C3"], airy_context()).unwrap());
    let a = VectorField::parse(&c, &["1", "u1", "u2", "(u1*(x*u1 - x - 1) - u2*(u1 + x) - x^2)/u1"]).unwrap();
    let x1 = VectorField::parse(&c, &["0", "1", "0", "0"]).unwrap();
    let x2 = VectorField::parse(&c, &["0", "0", "1", "(u2 + x)/u1"]).unwrap();
    let x3 = VectorField::parse(&c, &["0", "0", "0", "1"]).unwrap();
    let d = Distribution::new(c, vec![a], vec!["A".into()]).unwrap();
    check_cinf_structure(&d, vec![x1, x2, x3], vec!["X1".into(), "X2".into(), "X3".into()], &ZeroTester::default())
        .unwrap()
}

#[test]
fn airy_reduction() {
    let t = ZeroTester::default();
    let s = airy();
    let mut st = init_reduction(&s, &t).unwrap();
    assert!(st.dual.delta.is_one());
    let c = st.chart.clone();
    let i3 = c.parse("-(2*u1*D(phi2, x) - (2*u2 + u1 + 2*x)*phi2)/(2*u1*D(phi1, x) - (2*u2 + u1 + 2*x)*phi1)").unwrap();
    let p = "(C3*D(phi1, x) + D(phi2, x))/(C3*phi1 + phi2)";
    let iota3 = graph_parametrization(&c, "N2", &["x", "u", "u1", &format!("{p}*u1 - u1/2 - x")]).unwrap();
    st.descend(&i3, &Sym::new("C3"), iota3, &t).unwrap();
    assert!(st.steps[0].checks.iter().all(|e| e.certainty.holds()), "{:?}", st.steps[0].checks);
    let n2 = st.chart.clone();
    let w2 = KForm::one_form(
        n2.clone(),
        vec![n2.parse(&format!("-(u1/2 + x - {p}*u1)")).unwrap(), Expr::zero(), Expr::int(-1)],
    )
    .unwrap();
    assert_eq!(st.forms[1], w2);
    let i2 = n2.parse("G + u1*exp(x/2)/(C3*phi1 + phi2)").unwrap();
    let iota2 = graph_parametrization(&n2, "N1", &["x", "u", "exp(-x/2)*(C3*phi1 + phi2)*(C2 - G)"]).unwrap();
    st.descend(&i2, &Sym::new("C2"), iota2, &t).unwrap();
    assert_eq!(st.steps[1].reduced_factor, Some(n2.parse("-exp(x/2)/(C3*phi1 + phi2)").unwrap()));
    let n1 = st.chart.clone();
    let i1 = n1.parse("H + u").unwrap();
    let iota1 = graph_parametrization(&n1, "N0", &["x", "C1 - H"]).unwrap();
    st.descend(&i1, &Sym::new("C1"), iota1, &t).unwrap();
    let report = st.final_report().unwrap();
    assert_eq!(report.equations[0], (Sym::new("u"), c.parse("C1 - H").unwrap()));
    assert!(report.definitions.iter().any(|d| d.starts_with("D(H, x) = ")));
    assert!(report.definitions.iter().any(|d| d.starts_with("D(G, x) = ")));
    let cert = verify_integral_manifold(&s.dist, &st.dual.omegas, &st.composed, &t).unwrap();
    assert!(cert.valid());
    let mu2_tilde = st.steps[1].reduced_factor.clone().unwrap();
    let lifted = st.lift_relative_factor(2, &mu2_tilde, None, &t).unwrap();
    let mu2 = c
        .parse("-(2*u1*D(phi1, x) - (2*u2 + u1 + 2*x)*phi1)/(2*u1*exp(-x/2)*(D(phi1, x)*phi2 - phi1*D(phi2, x)))")
        .unwrap();
    assert!(t.is_zero(&(&lifted.factor - &mu2)).unwrap().holds());
}
