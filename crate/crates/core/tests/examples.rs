use msboot::analysis::{analyze, analyze_table, solve_on_axis, AnalysisOptions, Ridge};
use msboot::experiment::{curve_rows, table2_row, BuiltinKind};
use msboot::fit::{zeta2, zeta3};
use msboot::pvalue::Method;
use msboot::resample::BootstrapTable;
use msboot::statfun::{std_normal_cdf, z_value};
use msboot::{
    build_table, ExponentialMeanModel, Mode, Model, Point, ScalePlan, ScaleTuple,
    SphericalNormalModel,
};

fn spherical() -> (SphericalNormalModel, Point) {
    let m = SphericalNormalModel::new(4, 10.0).unwrap();
    let y = solve_on_axis(&m, 0.05).unwrap();
    (m, y)
}

fn exponential() -> (ExponentialMeanModel, Point) {
    let m = ExponentialMeanModel::new(10.0).unwrap();
    let y = solve_on_axis(&m, 0.05).unwrap();
    (m, y)
}

fn options(methods: &[Method], ridge: Ridge) -> AnalysisOptions {
    AnalysisOptions {
        plan: ScalePlan::default_for(10.0, 10_000).unwrap(),
        mode: Mode::Oracle,
        methods: methods.to_vec(),
        ridge,
        workers: None,
    }
}

#[test]
fn order_two_surface_matches_two_step_probability() {
    let t = (10.0f64 / 6.0).sqrt();
    let s = ScaleTuple::new(&[t, t]).unwrap();
    let z = zeta2(&[1.328, 0.144, 0.137], &s).unwrap();
    assert!((z - z_value(0.3063).unwrap()).abs() < 0.02, "{z}");
}

#[test]
fn order_three_surface_matches_every_oracle_cell() {
    let (m, y) = exponential();
    let table = build_table(
        &m,
        &y,
        &ScalePlan::default_for(10.0, 10_000).unwrap(),
        Mode::Oracle,
        None,
    )
    .unwrap();
    assert_eq!(table.cells.len(), 35);
    let g = [1.328, 0.145, 0.127, -0.018, -0.0004, -0.036];
    for cell in &table.cells {
        let z = zeta3(&g, &cell.scales).unwrap();
        assert!(
            (z - cell.z).abs() < 0.02,
            "{:?}: {z} vs {}",
            cell.scales.taus(),
            cell.z
        );
    }
}

#[test]
fn spherical_curve_values() {
    let (m, y) = spherical();
    let a = analyze(&m, &y, &options(&[Method::P1], Ridge::Zero)).unwrap();
    let fit = a.onestep.as_ref().unwrap();
    let rows = curve_rows(&a.table, fit, 20);
    let cells: Vec<f64> = rows
        .iter()
        .filter(|r| r.kind == "cell")
        .map(|r| r.z.unwrap())
        .collect();
    let want = [1.80, 2.04, 2.39, 2.77, 3.17];
    assert_eq!(cells.len(), want.len());
    for (got, want) in cells.iter().zip(want) {
        assert!((got - want).abs() < 0.01, "{got} vs {want}");
    }
    assert!((fit.fitted_at_inverse(1.0) - 2.387).abs() < 0.02);
    assert!(rows.iter().filter(|r| r.kind == "grid").count() >= 20);
}

#[test]
fn one_step_probabilities_at_unit_scale() {
    let (sm, sy) = spherical();
    let (em, ey) = exponential();
    let only = options(&[Method::P0], Ridge::Zero);
    let a = analyze(&sm, &sy, &only).unwrap();
    assert!((a.report(Method::P0).unwrap().alpha - 0.0085).abs() < 5e-5);
    let a = analyze(&em, &ey, &only).unwrap();
    assert!((a.report(Method::P0).unwrap().alpha - 0.1115).abs() < 5e-5);
}

#[test]
fn observations_inside_the_region_have_negative_z() {
    let m = ExponentialMeanModel::new(10.0).unwrap();
    let y = solve_on_axis(&m, 0.95).unwrap();
    let table = build_table(
        &m,
        &y,
        &ScalePlan::default_for(10.0, 10_000).unwrap(),
        Mode::Oracle,
        None,
    )
    .unwrap();
    assert!(table.cells.iter().all(|c| c.z < 0.0));
}

#[test]
fn corrections_improve_with_order() {
    for n in [10.0, 100.0, 1000.0] {
        let row = table2_row(
            BuiltinKind::Exponential,
            n,
            0.05,
            10_000,
            Mode::Oracle,
            None,
        )
        .unwrap();
        let err = |p: f64| (p - row.exact).abs();
        assert!(err(row.p1) < err(row.p0), "n={n}: {row:?}");
        assert!(err(row.p2) < err(row.p1), "n={n}: {row:?}");
        assert!(err(row.p3) <= err(row.p2) + 1e-2, "n={n}: {row:?}");
    }
}

#[test]
fn every_report_is_consistent_with_its_z() {
    for (m, y) in [
        (Box::new(spherical().0) as Box<dyn Model>, spherical().1),
        (Box::new(exponential().0), exponential().1),
    ] {
        let a = analyze(m.as_ref(), &y, &options(&Method::ALL, Ridge::Zero)).unwrap();
        assert_eq!(a.reports.len(), Method::ALL.len());
        for r in &a.reports {
            assert!((r.alpha - std_normal_cdf(-r.z)).abs() < 1e-12, "{r:?}");
            match r.method {
                Method::Exact => assert!(r.se_alpha.is_none()),
                Method::P1 | Method::P2 | Method::P3 => assert!(r.se_alpha.unwrap() > 0.0),
                _ => {}
            }
        }
    }
}

#[test]
fn exported_tables_refit_identically() {
    let (m, y) = exponential();
    let opts = options(&Method::ALL, Ridge::Default);
    let a = analyze(&m, &y, &opts).unwrap();
    let mut buf = Vec::new();
    a.table.write_csv(&mut buf).unwrap();
    let table = BootstrapTable::read_csv(buf.as_slice()).unwrap();
    assert_eq!(table.cells.len(), a.table.cells.len());
    let b = analyze_table(table, &m, &y, &opts).unwrap();
    assert_eq!(
        a.gamma6.as_ref().unwrap().gamma,
        b.gamma6.as_ref().unwrap().gamma
    );
    for (x, y) in a.reports.iter().zip(&b.reports) {
        assert_eq!(x.alpha, y.alpha, "{:?}", x.method);
    }
}

#[test]
fn ridge_penalty_example() {
    let (m, y) = exponential();
    let a = analyze(&m, &y, &options(&[Method::P2, Method::P3], Ridge::Default)).unwrap();
    assert!((a.report(Method::P2).unwrap().alpha - 0.0577).abs() < 0.003);
    assert!((a.report(Method::P3).unwrap().alpha - 0.0513).abs() < 0.003);
}
